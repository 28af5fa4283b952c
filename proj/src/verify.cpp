#include "isg/verify.hpp"

#include <cmath>

#include "isg/errors.hpp"
#include "isg/oracle.hpp"
#include "isg/policy.hpp"

namespace isg {

namespace {

double sup_gap(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double relative_change(double before, double after) {
    if (before == after) return 0.0;
    return std::abs(after - before) / std::max(std::abs(before), 1e-300);
}

}  // namespace

bool VerifyReport::passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return !checks.empty();
}

nlohmann::json VerifyReport::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& c : checks)
        list.push_back({{"name", c.name},
                        {"pass", c.passed},
                        {"value", c.value},
                        {"threshold", c.threshold},
                        {"detail", c.detail}});
    return {{"mode", mode}, {"pass", passed()}, {"checks", list}, {"report", extra}};
}

Grid refine(const Grid& grid, std::size_t factor) {
    DomainSpec dom;
    dom.lower = Point(grid.dim());
    dom.upper = Point(grid.dim());
    std::vector<std::size_t> nx(grid.dim());
    for (std::size_t i = 0; i < grid.dim(); ++i) {
        dom.lower[i] = grid.lower(i);
        dom.upper[i] = grid.upper(i);
        nx[i] = grid.cells(i) * factor;
    }
    dom.horizon = grid.horizon();
    return Grid(dom, grid.time_steps() * factor, nx);
}

SolverParams params_like(const ValueField& field) {
    SolverParams p;
    p.stopping = field.diagnostics.stop_penalty == 0.0;
    return p;
}

VerifyReport verify_oracle(const ProblemSpec& spec, const ValueField& field) {
    VerifyReport r;
    r.mode = "oracle";
    const Grid& g = field.grid;
    const double scale = 1.0 + field.diagnostics.bequest_sup;
    ValueField reference;
    std::string kind;
    if (spec.impulses.empty()) {
        kind = "stopping";
        reference = lattice_stopping_value(spec, g);
    } else if (field.diagnostics.stop_penalty > 0.0) {
        kind = "impulse";
        reference = lattice_impulse_value(spec, g);
    } else {
        kind = "game_infsup";
        reference = discrete_game_value(spec, g, GameOrder::infsup);
    }
    const double full = sup_gap(field.values, reference.values);
    const double initial = sup_gap(field.slice(0), reference.slice(0));
    r.extra = {{"oracle", kind}, {"sup_gap_full_field", full}, {"sup_gap_initial_slice", initial}};
    r.checks.push_back({"solver_vs_oracle_initial_slice", initial <= 1e-3 * scale, initial,
                        1e-3 * scale, "sup-norm gap of V(0, .) against the " + kind + " oracle"});

    if (kind == "game_infsup") {
        const ValueField other = discrete_game_value(spec, g, GameOrder::supinf);
        const double orders = sup_gap(reference.values, other.values);
        double worst = 0.0;
        for (std::size_t i = 0; i < other.values.size(); ++i)
            worst = std::max(worst, reference.values[i] - other.values[i]);
        r.extra["order_gap"] = orders;
        r.checks.push_back({"order_gap", orders <= 1e-6, orders, 1e-6,
                            "sup-norm gap between infsup and supinf"});
        r.checks.push_back({"order_dominance_infsup_le_supinf", worst <= 1e-12, worst, 1e-12,
                            "largest infsup - supinf"});
    }
    return r;
}

VerifyReport verify_mc(const ProblemSpec& spec, const ValueField& field, const McSettings& mc) {
    VerifyReport r;
    r.mode = "mc";
    const Grid& g = field.grid;
    const PolicyPair policies = extract_policy(spec, field, default_act_tol(field));
    const double target = g.interpolate(field.slice(g.nearest_slice(mc.t0)), mc.x0);

    const ControlRule ctrl = policies.controller.as_controller();
    const StopRule stop = policies.stopper.as_stopper();
    auto run = [&](const ControlRule& c, const StopRule& s) {
        return estimate_value(spec, c, s, mc.t0, mc.x0, mc.n_paths, mc.dt, mc.seed);
    };

    const ValueEstimate base = run(ctrl, stop);
    const double diff = std::abs(base.mean - target);
    const double bound = 3.0 * base.std_error + mc.bias_slack;
    r.checks.push_back({"closure", diff <= bound, diff, bound, "|estimate - V(t0, x0)|"});

    nlohmann::json deviations = nlohmann::json::object();
    auto upper_check = [&](const std::string& name, const StopRule& s) {
        const ValueEstimate e = run(ctrl, s);
        const double lim = target + 3.0 * e.std_error + mc.bias_slack;
        r.checks.push_back({name, e.mean <= lim, e.mean, lim,
                            "deviating stopper against the extracted controller"});
        deviations[name] = e.to_json();
    };
    upper_check("deviation_never_stop", never_stop());
    upper_check("deviation_stop_immediately", stop_immediately());
    upper_check("deviation_random_stop", random_stopper(mc.random_stop_probability, mc.seed));

    const ValueEstimate lazy = run(ControlRule{}, stop);
    const double lim = target - 3.0 * lazy.std_error - mc.bias_slack;
    r.checks.push_back({"deviation_no_impulse", lazy.mean >= lim, lazy.mean, lim,
                        "idle controller against the extracted stopper"});
    deviations["deviation_no_impulse"] = lazy.to_json();

    nlohmann::json x0 = nlohmann::json::array();
    for (std::size_t i = 0; i < mc.x0.size(); ++i) x0.push_back(mc.x0[i]);
    r.extra = {{"inputs",
                {{"t0", mc.t0},
                 {"x0", x0},
                 {"n_paths", mc.n_paths},
                 {"dt", mc.dt},
                 {"seed", mc.seed},
                 {"random_stop_probability", mc.random_stop_probability}}},
               {"value_at_start", target},
               {"bias_slack", mc.bias_slack},
               {"act_tol", policies.controller.act_tol},
               {"estimate", base.to_json()},
               {"deviations", deviations}};
    return r;
}

VerifyReport verify_dpp(const ProblemSpec& spec, const ValueField& field) {
    VerifyReport r;
    r.mode = "dpp";
    const DppSummary coarse = dpp_summary(spec, field);
    const ValueField finer_field = solve_qvi(spec, refine(field.grid, 2), params_like(field));
    const DppSummary fine = dpp_summary(spec, finer_field);
    const double ratio = coarse.mean > 0.0 ? fine.mean / coarse.mean : 0.0;
    r.checks.push_back({"refinement_ratio", ratio <= 0.7, ratio, 0.7,
                        "mean residual after halving dt and dx, over the mean before"});
    r.extra = {{"mean_residual", coarse.mean},
               {"max_residual", coarse.max},
               {"constant", coarse.constant},
               {"refined_mean_residual", fine.mean},
               {"refined_constant", fine.constant},
               {"ratio", ratio}};
    return r;
}

VerifyReport verify_regularity(const ProblemSpec& spec, const ValueField& field) {
    VerifyReport r;
    r.mode = "regularity";
    std::vector<RegularityReport> probes{regularity_probe(field)};
    for (std::size_t f : {2, 4})
        probes.push_back(regularity_probe(solve_qvi(spec, refine(field.grid, f), params_like(field))));
    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : probes) list.push_back(p.to_json());
    for (std::size_t i = 1; i < probes.size(); ++i) {
        const std::string step = std::to_string(i);
        const double lx = relative_change(probes[i - 1].lipschitz_x, probes[i].lipschitz_x);
        const double ht = relative_change(probes[i - 1].holder_t, probes[i].holder_t);
        r.checks.push_back({"lipschitz_x_change_" + step, lx <= 0.25, lx, 0.25, "relative change"});
        r.checks.push_back({"holder_t_change_" + step, ht <= 0.25, ht, 0.25, "relative change"});
    }
    r.extra = {{"probes", list}};
    return r;
}

VerifyReport verify_assumptions(const ProblemSpec& spec, std::uint64_t seed) {
    VerifyReport r;
    r.mode = "assumptions";
    const ValidationReport v = validate_assumptions(spec, 64, seed);
    for (const auto& c : v.checks)
        r.checks.push_back({c.name, c.status != CheckStatus::fail, c.value, 0.0, c.detail});
    r.extra = v.to_json();
    return r;
}

}  // namespace isg
