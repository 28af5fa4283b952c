#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "isg/dynamics.hpp"
#include "isg/qvi.hpp"

namespace isg {

enum class PolicyKind { controller, stopper };

/// Node masks over every slice of the solver grid. Off-grid queries snap to
/// the nearest slice and node.
struct FeedbackPolicy {
    PolicyKind kind = PolicyKind::stopper;
    Grid grid;
    std::vector<char> region;
    std::vector<int> impulse_index;  ///< controller only; -1 off the region
    std::vector<Point> impulses;     ///< copy of Z in canonical order
    double act_tol = 0.0;

    bool acts(double t, const Point& x) const;
    std::optional<Point> impulse_at(double t, const Point& x) const;
    std::size_t region_size() const;

    ControlRule as_controller() const;
    StopRule as_stopper() const;
};

struct PolicyPair {
    FeedbackPolicy controller;
    FeedbackPolicy stopper;
};

/// 10 fixed_point_tol (1 + |G|_inf).
double default_act_tol(const ValueField& field);

/// Controller acts where V >= MV - act_tol on interior nodes, stopper where
/// V <= G + act_tol (boundary nodes included unless stopping was disabled).
/// The terminal slice is all-stop.
/// Throws StaleFieldError for an unconverged field.
PolicyPair extract_policy(const ProblemSpec& spec, const ValueField& field, double act_tol);

/// |V(t_k, x) - RHS| for the one-step dynamic programming identity with
/// h = dt. The continuation expectation uses Gauss-Hermite quadrature.
double dpp_residual(const ProblemSpec& spec, const ValueField& field, std::size_t k,
                    std::size_t node);

struct DppSummary {
    double mean = 0.0;
    double max = 0.0;
    std::size_t count = 0;
    double step_sum = 0.0;  ///< dt + max dx
    double constant = 0.0;  ///< mean / step_sum
};

DppSummary dpp_summary(const ProblemSpec& spec, const ValueField& field);

/// t, x_1.., act[, z_1..] per node.
void write_policy_csv(std::ostream& out, const FeedbackPolicy& policy);
nlohmann::json policy_header(const PolicyPair& pair);

}  // namespace isg
