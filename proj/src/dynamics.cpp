#include "isg/dynamics.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include <boost/random/normal_distribution.hpp>

#include "isg/errors.hpp"
#include "parallel.hpp"

namespace isg {

namespace {

std::size_t mesh_steps(double t0, double horizon, double dt) {
    const double span = horizon - t0;
    auto n = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
    return std::max<std::size_t>(n, 1);
}

void diffuse(const ProblemSpec& spec, double t, double h, Point& x, std::mt19937_64& rng,
             boost::random::normal_distribution<double>& normal) {
    const Point mu = spec.drift.vector(t, x);
    const Matrix sigma = spec.vol.matrix(t, x);
    const double sq = std::sqrt(h);
    Point dw(sigma.cols);
    for (std::size_t j = 0; j < sigma.cols; ++j) dw[j] = sq * normal(rng);
    const Point noise = sigma.apply(dw);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += mu[i] * h + noise[i];
}

const char* event_name(PathEvent e) {
    switch (e) {
    case PathEvent::none: return "none";
    case PathEvent::impulse: return "impulse";
    case PathEvent::stop: return "stop";
    case PathEvent::exit: return "exit";
    }
    return "none";
}

}  // namespace

PathOutcome simulate_path(const ProblemSpec& spec, double t0, const Point& x0,
                          const ControlRule& controller, const StopRule& stopper, double dt,
                          std::uint64_t seed) {
    const double horizon = spec.horizon();
    if (x0.size() != spec.dim()) throw DimensionError("simulate_path: x0 dimension mismatch");
    if (!(t0 >= 0.0 && t0 < horizon)) throw RangeError("simulate_path: t0 outside [0, T)");
    if (!(dt > 0.0) || dt >= horizon - t0) throw StepError("simulate_path: invalid step dt");
    if (!spec.domain.contains(x0)) throw DomainError("simulate_path: x0 outside S");

    std::mt19937_64 rng(seed);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t steps = mesh_steps(t0, horizon, dt);

    PathOutcome out;
    out.start_time = t0;
    out.trajectory.reserve(steps + 1);
    Point x = x0;
    for (std::size_t k = 0;; ++k) {
        const double t = k == steps ? horizon : t0 + dt * static_cast<double>(k);
        PathSample sample{t, x, x, PathEvent::none, Point(spec.dim())};
        if (k == steps) {
            out.trajectory.push_back(sample);
            out.effective_end = horizon;
            break;
        }
        if (stopper && stopper(t, x)) {
            sample.event = PathEvent::stop;
            out.trajectory.push_back(sample);
            out.stop_time = t;
            out.effective_end = t;
            break;
        }
        if (controller) {
            if (const auto z = controller(t, x)) {
                Point jumped = impulse_response(spec, x, *z);
                out.schedule.events.push_back({t, *z, spec.intervention_cost.scalar(t, *z)});
                sample.event = PathEvent::impulse;
                sample.impulse = *z;
                if (!spec.domain.contains(jumped)) {
                    jumped = spec.domain.boundary_crossing(x, jumped);
                    sample.state = jumped;
                    out.trajectory.push_back(sample);
                    x = jumped;
                    out.exit_time = t;
                    out.effective_end = t;
                    break;
                }
                x = jumped;
                sample.state = x;
            }
        }
        out.trajectory.push_back(sample);

        const double next = k + 1 == steps ? horizon : t0 + dt * static_cast<double>(k + 1);
        diffuse(spec, t, next - t, x, rng, normal);
        if (!spec.domain.contains(x)) {
            out.trajectory.push_back({next, x, x, PathEvent::exit, Point(spec.dim())});
            out.exit_time = next;
            out.effective_end = next;
            break;
        }
        if (k + 1 == steps) {
            out.trajectory.push_back({next, x, x, PathEvent::none, Point(spec.dim())});
            out.effective_end = horizon;
            break;
        }
    }
    out.end_state = x;
    return out;
}

void write_path_csv(std::ostream& out, const ProblemSpec& spec, const PathOutcome& outcome) {
    const std::size_t p = spec.dim();
    out.precision(17);
    out << "time";
    for (std::size_t i = 0; i < p; ++i) out << ",x" << i + 1;
    out << ",event";
    for (std::size_t i = 0; i < p; ++i) out << ",z" << i + 1;
    out << ",running_cost_accum\n";
    double accum = 0.0;
    const auto& tr = outcome.trajectory;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        if (k > 0) {
            const auto& a = tr[k - 1];
            const auto& b = tr[k];
            accum += 0.5 * (b.time - a.time) *
                     (spec.running_cost.scalar(a.time, a.state) +
                      spec.running_cost.scalar(b.time, b.pre));
        }
        const auto& s = tr[k];
        out << s.time;
        for (std::size_t i = 0; i < p; ++i) out << ',' << s.state[i];
        out << ',' << event_name(s.event);
        for (std::size_t i = 0; i < p; ++i) out << ',' << s.impulse[i];
        out << ',' << accum << '\n';
    }
}

double generator_apply(const ProblemSpec& spec, const Grid& grid, std::span<const double> phi,
                       double t, std::size_t node) {
    if (phi.size() != grid.node_count()) throw DimensionError("generator_apply: slice size");
    if (grid.is_boundary(node)) throw StencilError("generator_apply: boundary node has no central stencil");
    const std::size_t p = grid.dim();
    const Point x = grid.node(node);
    const Point mu = spec.drift.vector(t, x);
    const Matrix a = spec.vol.matrix(t, x).outer();
    const double centre = phi[node];
    double out = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        const double h = grid.step(i);
        const double up = phi[node + grid.stride(i)];
        const double dn = phi[node - grid.stride(i)];
        out += mu[i] * (up - dn) / (2.0 * h);
        out += 0.5 * a(i, i) * (up - 2.0 * centre + dn) / (h * h);
        for (std::size_t j = i + 1; j < p; ++j) {
            const std::size_t si = grid.stride(i);
            const std::size_t sj = grid.stride(j);
            const double cross = (phi[node + si + sj] - phi[node + si - sj] -
                                  phi[node - si + sj] + phi[node - si - sj]) /
                                 (4.0 * h * grid.step(j));
            out += a(i, j) * cross;
        }
    }
    return out;
}

MomentReport moment_diagnostics(const ProblemSpec& spec, double t0, const Point& x0,
                                std::size_t n_paths, double dt, std::uint64_t seed,
                                std::span<const double> h_ladder) {
    const double horizon = spec.horizon();
    if (n_paths < 100) throw ArityError("moment_diagnostics needs at least 100 paths");
    if (!(dt > 0.0) || dt >= horizon - t0) throw StepError("moment_diagnostics: invalid step dt");
    std::vector<std::size_t> ladder_steps;
    for (double h : h_ladder) {
        if (!(h > 0.0) || h > horizon - t0 + 1e-12)
            throw RangeError("moment_diagnostics: ladder entry outside (0, T - t0]");
        ladder_steps.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(h / dt))));
    }
    const std::size_t steps = mesh_steps(t0, horizon, dt);
    const std::size_t m = h_ladder.size();

    std::vector<double> sup_sq(n_paths);
    std::vector<double> inc(n_paths * m);
    detail::parallel_for(n_paths, [&](std::size_t i) {
        std::mt19937_64 rng(seed + i);
        boost::random::normal_distribution<double> normal(0.0, 1.0);
        auto sq = [](const Point& v) {
            double s = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j) s += v[j] * v[j];
            return s;
        };
        Point x = x0;
        double best = sq(x);
        std::vector<double> inc_best(m, 0.0);
        for (std::size_t k = 0; k < steps; ++k) {
            const double t = t0 + dt * static_cast<double>(k);
            const double next = k + 1 == steps ? horizon : t + dt;
            diffuse(spec, t, next - t, x, rng, normal);
            best = std::max(best, sq(x));
            const double d2 = sq(x - x0);
            for (std::size_t l = 0; l < m; ++l)
                if (k + 1 <= ladder_steps[l]) inc_best[l] = std::max(inc_best[l], d2);
        }
        sup_sq[i] = best;
        for (std::size_t l = 0; l < m; ++l) inc[l * n_paths + i] = inc_best[l];
    });

    MomentReport report;
    report.n_paths = n_paths;
    const double scale = 1.0 + x0.norm() * x0.norm();
    report.mean_sup_sq = detail::pairwise_sum(sup_sq.data(), n_paths) / static_cast<double>(n_paths);
    report.growth_constant = report.mean_sup_sq / scale;
    for (std::size_t l = 0; l < m; ++l) {
        MomentLadderEntry e;
        e.h = h_ladder[l];
        e.mean_sup_increment_sq =
            detail::pairwise_sum(inc.data() + l * n_paths, n_paths) / static_cast<double>(n_paths);
        e.ratio = e.mean_sup_increment_sq / e.h;
        e.fitted_constant = e.ratio / scale;
        report.ladder.push_back(e);
    }
    return report;
}

}  // namespace isg
