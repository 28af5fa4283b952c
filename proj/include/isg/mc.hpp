#pragma once

#include <cstdint>

#include <json.hpp>

#include "isg/dynamics.hpp"
#include "isg/payoff.hpp"
#include "isg/policy.hpp"
#include "isg/qvi.hpp"

namespace isg {

inline constexpr double kDefaultBiasSlack = 0.05;

struct ValueEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    double mean_impulse_count = 0.0;
    double stop_fraction = 0.0;
    double exit_fraction = 0.0;
    PayoffBreakdown breakdown_means;

    nlohmann::json to_json() const;
};

/// Mean payoff over n_paths simulated paths; path i uses seed + i.
ValueEstimate estimate_value(const ProblemSpec& spec, const ControlRule& controller,
                             const StopRule& stopper, double t0, const Point& x0,
                             std::size_t n_paths, double dt, std::uint64_t seed);

ValueEstimate estimate_value(const ProblemSpec& spec, const FeedbackPolicy& controller,
                             const FeedbackPolicy& stopper, double t0, const Point& x0,
                             std::size_t n_paths, double dt, std::uint64_t seed);

// Deviation stoppers.
StopRule never_stop();
StopRule stop_immediately();
/// Stops with probability q at each query; the draw is a hash of (seed, t, x)
/// so runs are reproducible and thread-safe.
StopRule random_stopper(double q, std::uint64_t seed);

struct RegularityReport {
    double lipschitz_x = 0.0;  ///< adjacent interior node pairs, all slices
    double holder_t = 0.0;     ///< adjacent slices strictly before T, interior nodes
    double lipschitz_x_with_boundary = 0.0;
    double holder_t_terminal = 0.0;  ///< the last pair (t_{Nt-1}, T) alone

    nlohmann::json to_json() const;
};

RegularityReport regularity_probe(const ValueField& field);

}  // namespace isg
