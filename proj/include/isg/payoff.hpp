#pragma once

#include <span>

#include <json.hpp>

#include "isg/dynamics.hpp"
#include "isg/model.hpp"

namespace isg {

struct PayoffBreakdown {
    double running = 0.0;
    double intervention = 0.0;
    double bequest = 0.0;
    double total = 0.0;
};

/// J along one simulated path: trapezoidal running cost up to the effective
/// end, impulse costs charged up to it, and G at the effective end.
PayoffBreakdown evaluate_payoff(const ProblemSpec& spec, const PathOutcome& outcome);

struct BatchPayoff {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    PayoffBreakdown breakdown_means;

    nlohmann::json to_json() const;
};

BatchPayoff batch_payoff(std::span<const PayoffBreakdown> payoffs);
BatchPayoff batch_payoff(const ProblemSpec& spec, std::span<const PathOutcome> outcomes);

}  // namespace isg
