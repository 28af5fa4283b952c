#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "isg/grid.hpp"
#include "isg/model.hpp"

namespace isg {

/// Controller feedback: impulse to apply at (t, x), or nullopt to wait.
using ControlRule = std::function<std::optional<Point>(double t, const Point& x)>;
/// Stopper feedback: true to end the game at (t, x).
using StopRule = std::function<bool(double t, const Point& x)>;

struct ImpulseEvent {
    double time = 0.0;
    Point impulse;
    double cost = 0.0;
};

/// Realized control u = [tau_j, xi_j].
struct ImpulseSchedule {
    std::vector<ImpulseEvent> events;
    std::size_t count() const { return events.size(); }
};

enum class PathEvent { none, impulse, stop, exit };

struct PathSample {
    double time = 0.0;
    Point pre;    ///< state on arrival at this mesh time
    Point state;  ///< state after this mesh time's actions
    PathEvent event = PathEvent::none;
    Point impulse;
};

struct PathOutcome {
    std::vector<PathSample> trajectory;
    ImpulseSchedule schedule;
    std::optional<double> stop_time;
    std::optional<double> exit_time;
    double start_time = 0.0;
    double effective_end = 0.0;
    Point end_state;
};

/// Euler-Maruyama path of the controlled state. At each mesh time the stopper
/// is queried first, then the controller (at most one impulse), then the
/// diffusion step runs. Exit is checked after impulses and after steps; an
/// impulse that leaves S ends the path at its boundary crossing point.
/// Empty rules never act. Throws StepError for dt >= T - t0 and DomainError
/// for x0 outside S.
PathOutcome simulate_path(const ProblemSpec& spec, double t0, const Point& x0,
                          const ControlRule& controller, const StopRule& stopper, double dt,
                          std::uint64_t seed);

/// CSV: time, x_1.., event, z_1.., running_cost_accum.
void write_path_csv(std::ostream& out, const ProblemSpec& spec, const PathOutcome& outcome);

/// Central-difference generator L phi at an interior grid node.
double generator_apply(const ProblemSpec& spec, const Grid& grid, std::span<const double> phi,
                       double t, std::size_t node);

struct MomentLadderEntry {
    double h = 0.0;
    double mean_sup_increment_sq = 0.0;  ///< E[sup_{s in [t0,t0+h]} |X_s - x0|^2]
    double ratio = 0.0;                  ///< the above divided by h
    double fitted_constant = 0.0;        ///< the above divided by h (1 + |x0|^2)
};

struct MomentReport {
    std::size_t n_paths = 0;
    double mean_sup_sq = 0.0;     ///< E[sup_{s in [t0,T]} |X_s|^2]
    double growth_constant = 0.0;  ///< mean_sup_sq / (1 + |x0|^2)
    std::vector<MomentLadderEntry> ladder;
};

/// Second-moment estimates of the uncontrolled diffusion (no exit, no
/// actions) from (t0, x0). Paths use seeds seed + i.
MomentReport moment_diagnostics(const ProblemSpec& spec, double t0, const Point& x0,
                                std::size_t n_paths, double dt, std::uint64_t seed,
                                std::span<const double> h_ladder);

}  // namespace isg
