#include "isg/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "isg/errors.hpp"

namespace isg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxSubsteps = 200000;
constexpr std::size_t kMaxSweeps = 100000;

enum class Mode { stopping, impulse, infsup, supinf };

/// Axis-by-axis lattice for the oracle; kept apart from Grid's own lookups.
struct Lattice {
    std::size_t dim = 0;
    std::array<std::size_t, 2> points{};
    std::array<double, 2> lo{}, step{};
    std::size_t nodes = 0;

    explicit Lattice(const Grid& g) : dim(g.dim()) {
        nodes = 1;
        for (std::size_t i = 0; i < dim; ++i) {
            points[i] = g.points(i);
            lo[i] = g.lower(i);
            step[i] = g.step(i);
            nodes *= points[i];
        }
    }
    std::size_t stride(std::size_t axis) const { return axis == 0 ? 1 : points[0]; }

    double sample(const std::vector<double>& v, const Point& y) const {
        if (dim == 1) {
            const double s = std::clamp((y[0] - lo[0]) / step[0], 0.0, double(points[0] - 1));
            const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(s), points[0] - 2);
            const double w = s - double(i);
            return (1.0 - w) * v[i] + w * v[i + 1];
        }
        const double s0 = std::clamp((y[0] - lo[0]) / step[0], 0.0, double(points[0] - 1));
        const double s1 = std::clamp((y[1] - lo[1]) / step[1], 0.0, double(points[1] - 1));
        const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(s0), points[0] - 2);
        const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(s1), points[1] - 2);
        const double u = s0 - double(i), w = s1 - double(j);
        const std::size_t a = j * points[0] + i;
        return (1.0 - u) * (1.0 - w) * v[a] + u * (1.0 - w) * v[a + 1] +
               (1.0 - u) * w * v[a + points[0]] + u * w * v[a + points[0] + 1];
    }
};

struct Transition {
    std::size_t substeps = 1;
    double h = 0.0;
    // per node and axis: up / down probabilities
    std::vector<std::array<double, 2>> up, down;
};

Transition make_transition(const ProblemSpec& spec, const Grid& g, const Lattice& lat, double t) {
    const std::size_t n = lat.nodes;
    std::vector<Point> mu(n);
    std::vector<std::array<double, 2>> var(n);
    double rate = 0.0;
    for (std::size_t node = 0; node < n; ++node) {
        if (g.is_boundary(node)) continue;
        const Point x = g.node(node);
        mu[node] = spec.drift.vector(t, x);
        const Matrix a = spec.vol.matrix(t, x).outer();
        double r = 0.0;
        for (std::size_t i = 0; i < lat.dim; ++i) {
            for (std::size_t j = 0; j < lat.dim; ++j)
                if (i != j && std::abs(a(i, j)) > 1e-14)
                    throw LatticeError("lattice oracle supports diagonal diffusion only");
            var[node][i] = a(i, i);
            r += a(i, i) / (lat.step[i] * lat.step[i]) + std::abs(mu[node][i]) / lat.step[i];
        }
        rate = std::max(rate, r);
    }
    Transition tr;
    const double want = g.dt() * rate / 0.9;
    if (want > double(kMaxSubsteps))
        throw LatticeError("moment matching needs more than " + std::to_string(kMaxSubsteps) +
                           " substeps per slice");
    tr.substeps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(want)));
    tr.h = g.dt() / double(tr.substeps);
    tr.up.assign(n, {0.0, 0.0});
    tr.down.assign(n, {0.0, 0.0});
    for (std::size_t node = 0; node < n; ++node) {
        if (g.is_boundary(node)) continue;
        double stay = 1.0;
        for (std::size_t i = 0; i < lat.dim; ++i) {
            const double d = lat.step[i];
            const double diff = var[node][i] / (2.0 * d * d);
            double pu = tr.h * (diff + mu[node][i] / (2.0 * d));
            double pd = tr.h * (diff - mu[node][i] / (2.0 * d));
            if (pu < 0.0 || pd < 0.0) {
                pu = tr.h * (diff + std::max(mu[node][i], 0.0) / d);
                pd = tr.h * (diff + std::max(-mu[node][i], 0.0) / d);
            }
            tr.up[node][i] = pu;
            tr.down[node][i] = pd;
            stay -= pu + pd;
        }
        if (stay < -1e-12) throw LatticeError("moment-matched probabilities infeasible");
    }
    return tr;
}

/// C = f dt + E[V_next] by explicit substeps from t_{k+1} down to t_k.
std::vector<double> continuation(const ProblemSpec& spec, const Grid& g, const Lattice& lat,
                                 std::size_t k, const std::vector<double>& next) {
    const double t = g.time(k);
    const Transition tr = make_transition(spec, g, lat, t);
    std::vector<double> w = next, nw(lat.nodes);
    for (std::size_t s = 0; s < tr.substeps; ++s) {
        const double ts = g.time(k + 1) - double(s) * tr.h;
        for (std::size_t node = 0; node < lat.nodes; ++node) {
            if (g.is_boundary(node)) {
                nw[node] = spec.bequest.scalar(t, g.node(node));
                continue;
            }
            double acc = w[node];
            for (std::size_t i = 0; i < lat.dim; ++i) {
                const std::size_t st = lat.stride(i);
                acc += tr.up[node][i] * (w[node + st] - w[node]) +
                       tr.down[node][i] * (w[node - st] - w[node]);
            }
            nw[node] = acc + tr.h * spec.running_cost.scalar(ts, g.node(node));
        }
        w.swap(nw);
    }
    return w;
}

/// Best single impulse against v on the oracle's own interpolation.
void best_impulse(const ProblemSpec& spec, const Grid& g, const Lattice& lat, double t,
                  const std::vector<double>& v, std::vector<double>& out, std::vector<int>& arg) {
    out.assign(lat.nodes, kInf);
    arg.assign(lat.nodes, -1);
    for (std::size_t j = 0; j < spec.impulses.size(); ++j) {
        const Point& z = spec.impulses[j];
        const double c = spec.intervention_cost.scalar(t, z);
        for (std::size_t node = 0; node < lat.nodes; ++node) {
            const Point x = g.node(node);
            const Point y = impulse_response(spec, x, z);
            const double val =
                (spec.domain.contains_closed(y)
                     ? lat.sample(v, y)
                     : spec.bequest.scalar(t, spec.domain.boundary_crossing(x, y))) +
                c;
            if (val < out[node]) {
                out[node] = val;
                arg[node] = static_cast<int>(j);
            }
        }
    }
}

ValueField backward(const ProblemSpec& spec, const Grid& g, Mode mode) {
    if (g.dim() != spec.dim()) throw DimensionError("oracle: lattice and problem dimensions differ");
    if (g.dim() > 2) throw LatticeError("lattice oracle supports p <= 2");
    const Lattice lat(g);
    const std::size_t n = lat.nodes;
    const std::size_t nt = g.time_steps();

    ValueField field;
    field.grid = g;
    field.bequest = sample_bequest(spec, g);
    field.stop_obstacle = field.bequest;
    field.values.assign(g.slices() * n, 0.0);
    field.impulse_obstacle.assign(g.slices() * n, kInf);
    field.argmin.assign(g.slices() * n, -1);
    auto& diag = field.diagnostics;
    double gsup = 0.0;
    for (double v : field.bequest) gsup = std::max(gsup, std::abs(v));
    diag.bequest_sup = gsup;
    diag.fixed_point_tol = 1e-13 * (1.0 + gsup);
    diag.linear_solver_tol = 0.0;
    diag.outer_iterations.assign(g.slices(), 0);
    diag.final_gap.assign(g.slices(), 0.0);
    diag.gap_history.assign(g.slices(), {});
    diag.residual_norm.assign(g.slices(), 0.0);
    if (mode == Mode::impulse) {
        diag.stop_penalty = 10.0 * (running_cost_sup(spec, g) * g.horizon() + gsup);
        for (std::size_t k = 0; k < nt; ++k)
            for (std::size_t i = 0; i < n; ++i)
                if (!g.is_boundary(i)) field.stop_obstacle[k * n + i] = -diag.stop_penalty;
    }

    std::vector<double> v(field.bequest.end() - long(n), field.bequest.end());
    std::vector<double> mv;
    std::vector<int> arg;
    auto record = [&](std::size_t k) {
        best_impulse(spec, g, lat, g.time(k), v, mv, arg);
        std::copy(v.begin(), v.end(), field.values.begin() + long(k * n));
        std::copy(mv.begin(), mv.end(), field.impulse_obstacle.begin() + long(k * n));
        std::copy(arg.begin(), arg.end(), field.argmin.begin() + long(k * n));
    };
    record(nt);

    for (std::size_t k = nt; k-- > 0;) {
        const double t = g.time(k);
        const std::vector<double> c = continuation(spec, g, lat, k, v);
        const auto gk = std::span<const double>(field.bequest).subspan(k * n, n);
        std::vector<double> cur = v, next(n);
        for (std::size_t i = 0; i < n; ++i)
            if (g.is_boundary(i)) cur[i] = gk[i];
        std::size_t sweeps = 0;
        double gap = 0.0;
        do {
            best_impulse(spec, g, lat, t, cur, mv, arg);
            gap = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double val;
                if (g.is_boundary(i)) {
                    val = gk[i];
                } else {
                    switch (mode) {
                    case Mode::stopping: val = std::max(gk[i], c[i]); break;
                    case Mode::impulse: val = std::min(mv[i], c[i]); break;
                    case Mode::infsup: val = std::min(mv[i], std::max(gk[i], c[i])); break;
                    case Mode::supinf: val = std::max(gk[i], std::min(mv[i], c[i])); break;
                    }
                }
                gap = std::max(gap, std::abs(val - cur[i]));
                next[i] = val;
            }
            cur.swap(next);
            ++sweeps;
            if (spec.impulses.empty() || mode == Mode::stopping) break;
        } while (gap > diag.fixed_point_tol && sweeps < kMaxSweeps);
        if (gap > diag.fixed_point_tol && !spec.impulses.empty() && mode != Mode::stopping)
            throw LatticeError("oracle impulse fixed point did not settle at t=" + std::to_string(t));
        diag.outer_iterations[k] = sweeps;
        v.swap(cur);
        record(k);
    }
    return field;
}

}  // namespace

std::string_view to_string(GameOrder order) {
    return order == GameOrder::infsup ? "infsup" : "supinf";
}

GameOrder game_order_from(std::string_view name) {
    if (name == "infsup") return GameOrder::infsup;
    if (name == "supinf") return GameOrder::supinf;
    throw ParseError("unknown game order '" + std::string(name) + "'");
}

ValueField lattice_stopping_value(const ProblemSpec& spec, const Grid& lattice) {
    if (!spec.impulses.empty())
        throw ValidationError("lattice_stopping_value needs an empty impulse set");
    return backward(spec, lattice, Mode::stopping);
}

ValueField lattice_impulse_value(const ProblemSpec& spec, const Grid& lattice) {
    return backward(spec, lattice, Mode::impulse);
}

ValueField discrete_game_value(const ProblemSpec& spec, const Grid& lattice, GameOrder order) {
    return backward(spec, lattice, order == GameOrder::infsup ? Mode::infsup : Mode::supinf);
}

}  // namespace isg
