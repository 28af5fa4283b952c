#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "isg/errors.hpp"
#include "isg/grid.hpp"
#include "isg/model.hpp"

namespace isg {

struct SolverParams {
    std::optional<double> fixed_point_tol;    ///< default 1e-8 (1 + |G|_inf)
    std::optional<double> linear_solver_tol;  ///< default fixed_point_tol / 10
    std::size_t max_outer_iters = 50;
    /// Per frozen-obstacle step; projected Gauss-Seidel takes over past this.
    std::size_t max_policy_iterations = 60;
    bool stopping = true;
};

struct SolverDiagnostics {
    bool converged = true;
    double fixed_point_tol = 0.0;
    double linear_solver_tol = 0.0;
    double stop_penalty = 0.0;  ///< B in the stopping-disabled encoding, 0 otherwise
    double bequest_sup = 0.0;
    std::vector<std::size_t> outer_iterations;  ///< per slice, terminal slice 0
    std::vector<double> final_gap;              ///< per slice
    std::vector<std::vector<double>> gap_history;
    std::vector<double> residual_norm;  ///< per slice sup of the discrete QVI residual
    std::size_t gauss_seidel_fallbacks = 0;
};

enum class ActiveConstraint { pde, stop, impulse };
std::string_view to_string(ActiveConstraint c);

/// Solution of the discrete QVI. Slice k occupies [k * N, (k + 1) * N) in
/// every per-node array, N = grid.node_count().
struct ValueField {
    Grid grid;
    std::vector<double> values;
    std::vector<double> impulse_obstacle;  ///< M V
    std::vector<double> bequest;           ///< G
    std::vector<double> stop_obstacle;     ///< G, or -B off the terminal slice when stopping is off
    std::vector<int> argmin;               ///< index into Z of the minimizing impulse, -1 if none
    SolverDiagnostics diagnostics;

    std::span<const double> slice(std::size_t k) const;
    std::span<const double> mv_slice(std::size_t k) const;
    std::size_t at(std::size_t k, std::size_t node) const { return k * grid.node_count() + node; }
    double value(std::size_t k, std::size_t node) const { return values[at(k, node)]; }

    ActiveConstraint active(std::size_t k, std::size_t node, double tol) const;
};

/// Thrown by solve_qvi when some slice misses fixed_point_tol. The field is
/// complete (every slice was still solved) and flagged unconverged.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, ValueField field)
        : Error(what), field_(std::move(field)) {}
    const ValueField& field() const { return field_; }
    const std::vector<std::vector<double>>& gap_history() const {
        return field_.diagnostics.gap_history;
    }

private:
    ValueField field_;
};

struct ImpulseEval {
    std::vector<double> values;
    std::vector<int> argmin;
};

/// M phi on one slice at time t. Ties go to the lexicographically first
/// impulse. Empty Z gives +inf and argmin -1 everywhere.
ImpulseEval intervention_operator(const ProblemSpec& spec, const Grid& grid,
                                  std::span<const double> slice, double t);

ValueField solve_qvi(const ProblemSpec& spec, const Grid& grid, const SolverParams& params = {});

/// Discrete max{min[-D_t V - L_h V - f, V - G], V - M V} per node; zero on
/// boundary nodes and on the terminal slice.
std::vector<double> pde_residual(const ProblemSpec& spec, const ValueField& field);

/// Sample G over every node of every slice.
std::vector<double> sample_bequest(const ProblemSpec& spec, const Grid& grid);

/// Sup of |f| over the grid nodes.
double running_cost_sup(const ProblemSpec& spec, const Grid& grid);

}  // namespace isg
