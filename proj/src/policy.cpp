#include "isg/policy.hpp"

#include <array>
#include <cmath>
#include <ostream>

#include "isg/errors.hpp"
#include "parallel.hpp"

namespace isg {

namespace {

// probabilists' Gauss-Hermite, 5 points
constexpr std::array<double, 5> kGhNode{-2.8569700138728056, -1.3556261799742657, 0.0,
                                        1.3556261799742657, 2.8569700138728056};
constexpr std::array<double, 5> kGhWeight{0.011257411327720691, 0.22207592200561266,
                                          0.53333333333333333, 0.22207592200561266,
                                          0.011257411327720691};

std::size_t lookup(const Grid& g, double t, const Point& x) {
    return g.nearest_slice(t) * g.node_count() + g.nearest_node(x);
}

}  // namespace

bool FeedbackPolicy::acts(double t, const Point& x) const { return region[lookup(grid, t, x)] != 0; }

std::optional<Point> FeedbackPolicy::impulse_at(double t, const Point& x) const {
    if (kind != PolicyKind::controller) return std::nullopt;
    const std::size_t i = lookup(grid, t, x);
    if (!region[i] || impulse_index[i] < 0) return std::nullopt;
    return impulses[static_cast<std::size_t>(impulse_index[i])];
}

std::size_t FeedbackPolicy::region_size() const {
    std::size_t n = 0;
    for (char c : region) n += c != 0;
    return n;
}

ControlRule FeedbackPolicy::as_controller() const {
    return [this](double t, const Point& x) { return impulse_at(t, x); };
}

StopRule FeedbackPolicy::as_stopper() const {
    return [this](double t, const Point& x) { return acts(t, x); };
}

double default_act_tol(const ValueField& field) {
    return 10.0 * field.diagnostics.fixed_point_tol * (1.0 + field.diagnostics.bequest_sup);
}

PolicyPair extract_policy(const ProblemSpec& spec, const ValueField& field, double act_tol) {
    if (!field.diagnostics.converged)
        throw StaleFieldError("extract_policy: field did not converge; re-solve before extracting");
    if (!(act_tol >= 0.0)) throw RangeError("extract_policy: act_tol must be non-negative");
    const Grid& g = field.grid;
    const std::size_t n = g.node_count();
    const std::size_t total = g.slices() * n;

    PolicyPair out;
    for (FeedbackPolicy* p : {&out.controller, &out.stopper}) {
        p->grid = g;
        p->act_tol = act_tol;
        p->region.assign(total, 0);
        p->impulses.assign(spec.impulses.begin(), spec.impulses.end());
    }
    out.controller.kind = PolicyKind::controller;
    out.stopper.kind = PolicyKind::stopper;
    out.controller.impulse_index.assign(total, -1);
    const bool stopping = field.diagnostics.stop_penalty == 0.0;

    for (std::size_t k = 0; k < g.slices(); ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t idx = k * n + i;
            if (k == g.time_steps()) {
                out.stopper.region[idx] = 1;
                continue;
            }
            const double v = field.values[idx];
            if (g.is_boundary(i)) {
                // V = G on the boundary; the mask records it unless stopping is off.
                if (stopping && v <= field.bequest[idx] + act_tol) out.stopper.region[idx] = 1;
                continue;
            }
            if (v <= field.stop_obstacle[idx] + act_tol) out.stopper.region[idx] = 1;
            if (field.argmin[idx] >= 0 && v >= field.impulse_obstacle[idx] - act_tol) {
                out.controller.region[idx] = 1;
                out.controller.impulse_index[idx] = field.argmin[idx];
            }
        }
    }
    return out;
}

double dpp_residual(const ProblemSpec& spec, const ValueField& field, std::size_t k,
                    std::size_t node) {
    const Grid& g = field.grid;
    if (k >= g.time_steps()) throw RangeError("dpp_residual: t + h exceeds the horizon");
    if (node >= g.node_count() || g.is_boundary(node))
        throw DomainError("dpp_residual: node must be interior");
    const double t = g.time(k);
    const double h = g.dt();
    const double t1 = g.time(k + 1);
    const Point x = g.node(node);
    const Point mu = spec.drift.vector(t, x);
    const Matrix sigma = spec.vol.matrix(t, x);
    const auto next = field.slice(k + 1);
    const std::size_t m = sigma.cols;

    std::size_t combos = 1;
    for (std::size_t j = 0; j < m; ++j) combos *= kGhNode.size();
    // Deviations from the values at x keep constants exact under rounding of
    // the weights.
    const double v_ref = next[node];
    const double f_ref = spec.running_cost.scalar(t1, x);
    double ev = 0.0;
    double ef = 0.0;
    for (std::size_t c = 0; c < combos; ++c) {
        Point xi(m);
        double w = 1.0;
        std::size_t code = c;
        for (std::size_t j = 0; j < m; ++j) {
            xi[j] = kGhNode[code % kGhNode.size()];
            w *= kGhWeight[code % kGhNode.size()];
            code /= kGhNode.size();
        }
        Point y = x + h * mu + std::sqrt(h) * sigma.apply(xi);
        double landed;
        if (spec.domain.contains_closed(y)) {
            landed = g.interpolate(next, y);
        } else {
            y = spec.domain.boundary_crossing(x, y);
            landed = spec.bequest.scalar(t1, y);
        }
        ev += w * (landed - v_ref);
        ef += w * (spec.running_cost.scalar(t1, y) - f_ref);
    }
    const double continuation =
        0.5 * h * (spec.running_cost.scalar(t, x) + f_ref + ef) + v_ref + ev;
    const std::size_t idx = field.at(k, node);
    const double rhs =
        std::min(field.impulse_obstacle[idx], std::max(field.stop_obstacle[idx], continuation));
    return std::abs(field.values[idx] - rhs);
}

DppSummary dpp_summary(const ProblemSpec& spec, const ValueField& field) {
    const Grid& g = field.grid;
    std::vector<std::size_t> interior;
    for (std::size_t i = 0; i < g.node_count(); ++i)
        if (!g.is_boundary(i)) interior.push_back(i);
    const std::size_t per = interior.size();
    std::vector<double> res(per * g.time_steps());
    detail::parallel_for(res.size(), [&](std::size_t j) {
        res[j] = dpp_residual(spec, field, j / per, interior[j % per]);
    });
    DppSummary out;
    out.count = res.size();
    if (out.count == 0) return out;
    out.mean = detail::pairwise_sum(res.data(), res.size()) / static_cast<double>(res.size());
    for (double r : res) out.max = std::max(out.max, r);
    double dx = 0.0;
    for (std::size_t i = 0; i < g.dim(); ++i) dx = std::max(dx, g.step(i));
    out.step_sum = g.dt() + dx;
    out.constant = out.mean / out.step_sum;
    return out;
}

void write_policy_csv(std::ostream& out, const FeedbackPolicy& policy) {
    const Grid& g = policy.grid;
    const bool ctrl = policy.kind == PolicyKind::controller;
    const std::size_t zdim = policy.impulses.empty() ? g.dim() : policy.impulses.front().size();
    out.precision(17);
    out << 't';
    for (std::size_t i = 0; i < g.dim(); ++i) out << ",x" << i + 1;
    out << ",act";
    if (ctrl)
        for (std::size_t i = 0; i < zdim; ++i) out << ",z" << i + 1;
    out << '\n';
    for (std::size_t k = 0; k < g.slices(); ++k) {
        for (std::size_t n = 0; n < g.node_count(); ++n) {
            const std::size_t idx = k * g.node_count() + n;
            out << g.time(k);
            const Point x = g.node(n);
            for (std::size_t i = 0; i < g.dim(); ++i) out << ',' << x[i];
            out << ',' << (policy.region[idx] ? 1 : 0);
            if (ctrl) {
                const int z = policy.impulse_index[idx];
                for (std::size_t i = 0; i < zdim; ++i)
                    out << ',' << (z >= 0 ? policy.impulses[static_cast<std::size_t>(z)][i] : 0.0);
            }
            out << '\n';
        }
    }
}

nlohmann::json policy_header(const PolicyPair& pair) {
    return {{"act_tol", pair.controller.act_tol},
            {"controller", {{"file", "policy_controller.csv"},
                            {"region_nodes", pair.controller.region_size()}}},
            {"stopper", {{"file", "policy_stopper.csv"},
                         {"region_nodes", pair.stopper.region_size()}}}};
}

}  // namespace isg
