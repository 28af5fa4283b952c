#include "isg/mc.hpp"

#include <bit>
#include <cmath>
#include <vector>

#include "isg/errors.hpp"
#include "parallel.hpp"

namespace isg {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

ValueEstimate estimate_value(const ProblemSpec& spec, const ControlRule& controller,
                             const StopRule& stopper, double t0, const Point& x0,
                             std::size_t n_paths, double dt, std::uint64_t seed) {
    if (n_paths < 2) throw ArityError("estimate_value needs at least two paths");
    std::vector<PayoffBreakdown> pay(n_paths);
    std::vector<double> impulses(n_paths), stopped(n_paths), exited(n_paths);
    detail::parallel_for(n_paths, [&](std::size_t i) {
        const PathOutcome o = simulate_path(spec, t0, x0, controller, stopper, dt, seed + i);
        pay[i] = evaluate_payoff(spec, o);
        impulses[i] = static_cast<double>(o.schedule.count());
        stopped[i] = o.stop_time ? 1.0 : 0.0;
        exited[i] = o.exit_time ? 1.0 : 0.0;
    });
    const BatchPayoff batch = batch_payoff(pay);
    const double nn = static_cast<double>(n_paths);
    ValueEstimate out;
    out.mean = batch.mean;
    out.std_error = batch.std_error;
    out.n_paths = n_paths;
    out.breakdown_means = batch.breakdown_means;
    out.mean_impulse_count = detail::pairwise_sum(impulses.data(), n_paths) / nn;
    out.stop_fraction = detail::pairwise_sum(stopped.data(), n_paths) / nn;
    out.exit_fraction = detail::pairwise_sum(exited.data(), n_paths) / nn;
    return out;
}

ValueEstimate estimate_value(const ProblemSpec& spec, const FeedbackPolicy& controller,
                             const FeedbackPolicy& stopper, double t0, const Point& x0,
                             std::size_t n_paths, double dt, std::uint64_t seed) {
    return estimate_value(spec, controller.as_controller(), stopper.as_stopper(), t0, x0, n_paths,
                          dt, seed);
}

nlohmann::json ValueEstimate::to_json() const {
    return {{"mean", mean},
            {"std_error", std_error},
            {"n_paths", n_paths},
            {"mean_impulse_count", mean_impulse_count},
            {"stop_fraction", stop_fraction},
            {"exit_fraction", exit_fraction},
            {"running_mean", breakdown_means.running},
            {"intervention_mean", breakdown_means.intervention},
            {"bequest_mean", breakdown_means.bequest}};
}

StopRule never_stop() {
    return [](double, const Point&) { return false; };
}

StopRule stop_immediately() {
    return [](double, const Point&) { return true; };
}

StopRule random_stopper(double q, std::uint64_t seed) {
    if (!(q >= 0.0 && q <= 1.0)) throw RangeError("random_stopper: probability outside [0, 1]");
    return [q, seed](double t, const Point& x) {
        std::uint64_t h = splitmix(seed ^ std::bit_cast<std::uint64_t>(t));
        for (std::size_t i = 0; i < x.size(); ++i)
            h = splitmix(h ^ std::bit_cast<std::uint64_t>(x[i]));
        const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        return u < q;
    };
}

RegularityReport regularity_probe(const ValueField& field) {
    const Grid& g = field.grid;
    const std::size_t n = g.node_count();
    RegularityReport r;
    for (std::size_t k = 0; k < g.slices(); ++k) {
        const auto v = field.slice(k);
        for (std::size_t node = 0; node < n; ++node) {
            const auto c = g.coords(node);
            for (std::size_t i = 0; i < g.dim(); ++i) {
                if (c[i] + 1 >= g.points(i)) continue;
                const std::size_t other = node + g.stride(i);
                const double slope = std::abs(v[other] - v[node]) / g.step(i);
                r.lipschitz_x_with_boundary = std::max(r.lipschitz_x_with_boundary, slope);
                if (!g.is_boundary(node) && !g.is_boundary(other))
                    r.lipschitz_x = std::max(r.lipschitz_x, slope);
            }
        }
    }
    const double root = std::sqrt(g.dt());
    for (std::size_t k = 0; k < g.time_steps(); ++k) {
        const auto a = field.slice(k);
        const auto b = field.slice(k + 1);
        for (std::size_t node = 0; node < n; ++node) {
            if (g.is_boundary(node)) continue;
            const double q = std::abs(b[node] - a[node]) / root;
            if (k + 1 == g.time_steps()) r.holder_t_terminal = std::max(r.holder_t_terminal, q);
            else r.holder_t = std::max(r.holder_t, q);
        }
    }
    return r;
}

nlohmann::json RegularityReport::to_json() const {
    return {{"lipschitz_x", lipschitz_x},
            {"holder_t", holder_t},
            {"lipschitz_x_with_boundary", lipschitz_x_with_boundary},
            {"holder_t_terminal", holder_t_terminal}};
}

}  // namespace isg
