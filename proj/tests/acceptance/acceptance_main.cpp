// Acceptance suite: one PASS/FAIL line per criterion.
//
//   isg_acceptance                 run all criteria
//   isg_acceptance --criterion N   run one criterion; exit status reflects it

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "isg/dynamics.hpp"
#include "isg/mc.hpp"
#include "isg/oracle.hpp"
#include "isg/policy.hpp"
#include "isg/qvi.hpp"
#include "isg/spec_io.hpp"

using namespace isg;

namespace {

const std::string kSpecDir = ISG_SPEC_DIR;

ProblemSpec spec_named(const std::string& name) { return load_spec_file(kSpecDir + "/" + name); }

Grid grid_1d(const ProblemSpec& spec, std::size_t n) {
    const std::size_t nx[] = {n};
    return build_grid(spec.domain, n, nx);
}

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void note(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void note(const char* fmt, ...) {
    std::va_list args;
    va_start(args, fmt);
    std::printf("    ");
    std::vprintf(fmt, args);
    std::printf("\n");
    va_end(args);
}

double sup_gap(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// 1. G - 10 tol <= V <= MV + 10 tol on interior nodes of every solved slice.
bool criterion_1() {
    Timer timer;
    bool ok = true;
    struct Case {
        const char* file;
        bool stopping;
    };
    for (const Case& c : {Case{"pure_stopping.json", true}, Case{"impulse_control.json", false},
                          Case{"canonical_game.json", true}}) {
        const ProblemSpec spec = spec_named(c.file);
        SolverParams params;
        params.stopping = c.stopping;
        const ValueField f = solve_qvi(spec, grid_1d(spec, 200), params);
        const Grid& g = f.grid;
        const double tol = 10.0 * f.diagnostics.fixed_point_tol;
        double low = std::numeric_limits<double>::infinity();
        double high = -low;
        std::size_t bad = 0, checked = 0, first_bad_slice = g.slices();
        for (std::size_t k = 0; k < g.time_steps(); ++k) {
            for (std::size_t i = 0; i < g.node_count(); ++i) {
                if (g.is_boundary(i)) continue;
                const std::size_t idx = f.at(k, i);
                const double below = f.values[idx] - f.stop_obstacle[idx];
                const double above = f.values[idx] - f.impulse_obstacle[idx];
                low = std::min(low, below);
                high = std::max(high, above);
                ++checked;
                if (below < -tol || above > tol) {
                    ++bad;
                    first_bad_slice = std::min(first_bad_slice, k);
                }
            }
        }
        note("%s: min(V - G) = %.3e, max(V - MV) = %.3e, violations %zu of %zu nodes%s",
             c.file, low, high, bad, checked,
             bad ? (" (earliest at t = " + std::to_string(g.time(first_bad_slice)) + ")").c_str()
                 : "");
        ok = ok && bad == 0;
    }
    const double secs = timer.seconds();
    note("runtime %.2f s (budget 60 s)", secs);
    return ok && secs < 60.0;
}

// 2. Solver against the pure-stopping lattice oracle, 201 x 201.
bool criterion_2() {
    Timer timer;
    const ProblemSpec spec = spec_named("pure_stopping.json");
    const Grid g = grid_1d(spec, 200);
    const ValueField v = solve_qvi(spec, g);
    const ValueField o = lattice_stopping_value(spec, g);
    const double limit = 1e-3 * (1.0 + v.diagnostics.bequest_sup);
    const double full = sup_gap(v.values, o.values);
    const double initial = sup_gap(v.slice(0), o.slice(0));
    std::size_t worst = 0;
    double worst_gap = 0.0;
    for (std::size_t k = 0; k < g.slices(); ++k) {
        const double gap = sup_gap(v.slice(k), o.slice(k));
        if (gap > worst_gap) {
            worst_gap = gap;
            worst = k;
        }
    }
    const double secs = timer.seconds();
    note("sup gap over all nodes %.3e (limit %.3e), worst slice t = %.4f", full, limit, g.time(worst));
    note("sup gap on V(0, .) %.3e; V(0,0) solver %.6f oracle %.6f", initial,
         v.value(0, g.nearest_node({0.0})), o.value(0, g.nearest_node({0.0})));
    note("runtime %.2f s (budget 30 s)", secs);
    return full <= limit && secs < 30.0;
}

// 3. Solver with stopping disabled against the pure-impulse oracle.
bool criterion_3() {
    Timer timer;
    const ProblemSpec spec = spec_named("impulse_control.json");
    const Grid g = grid_1d(spec, 200);
    SolverParams params;
    params.stopping = false;
    const ValueField v = solve_qvi(spec, g, params);
    const ValueField o = lattice_impulse_value(spec, g);
    const double full = sup_gap(v.values, o.values);
    const double initial = sup_gap(v.slice(0), o.slice(0));
    const double secs = timer.seconds();
    note("sup gap over all nodes %.3e, on V(0, .) %.3e (limit 1e-3)", full, initial);
    note("V(0,1) solver %.6f oracle %.6f", v.value(0, g.nearest_node({1.0})),
         o.value(0, g.nearest_node({1.0})));
    note("runtime %.2f s (budget 30 s)", secs);
    return full <= 1e-3 && secs < 30.0;
}

// 4. Both commit orders of the discrete game agree; fixed dominance direction.
bool criterion_4() {
    Timer timer;
    const ProblemSpec spec = spec_named("canonical_game.json");
    const Grid g = grid_1d(spec, 50);
    const ValueField lo = discrete_game_value(spec, g, GameOrder::infsup);
    const ValueField hi = discrete_game_value(spec, g, GameOrder::supinf);
    const double gap = sup_gap(lo.values, hi.values);
    double excess = -std::numeric_limits<double>::infinity();
    std::size_t differing = 0;
    for (std::size_t i = 0; i < lo.values.size(); ++i) {
        excess = std::max(excess, lo.values[i] - hi.values[i]);
        differing += std::abs(lo.values[i] - hi.values[i]) > 1e-6;
    }
    const bool dominance = excess <= 1e-12;
    const double secs = timer.seconds();
    note("sup |infsup - supinf| = %.3e (limit 1e-6), %zu of %zu nodes differ", gap, differing,
         lo.values.size());
    note("direction infsup <= supinf: %s (max infsup - supinf = %.3e)", dominance ? "holds" : "broken",
         excess);
    note("runtime %.2f s (budget 10 s)", secs);
    return gap <= 1e-6 && dominance && secs < 10.0;
}

// 5. Mean one-step DPP residual over three refinements of the canonical game.
bool criterion_5() {
    Timer timer;
    const ProblemSpec spec = spec_named("canonical_game.json");
    std::vector<DppSummary> runs;
    for (std::size_t n : {50, 100, 200, 400}) {
        const ValueField f = solve_qvi(spec, grid_1d(spec, n));
        runs.push_back(dpp_summary(spec, f));
        note("N = %3zu: mean residual %.4e, C = mean / (dt + dx) = %.4f", n, runs.back().mean,
             runs.back().constant);
    }
    bool ok = true;
    for (std::size_t i = 1; i < runs.size(); ++i) {
        const double ratio = runs[i].mean / runs[i - 1].mean;
        note("refinement %zu ratio %.3f (limit 0.7)", i, ratio);
        ok = ok && ratio <= 0.7;
    }
    const double secs = timer.seconds();
    note("runtime %.2f s (budget 120 s)", secs);
    return ok && secs < 120.0;
}

// 6. Monte-Carlo closure and unilateral deviations at (0, 0).
bool criterion_6() {
    Timer timer;
    const ProblemSpec spec = spec_named("canonical_game.json");
    const ValueField f = solve_qvi(spec, grid_1d(spec, 200));
    const PolicyPair pol = extract_policy(spec, f, default_act_tol(f));
    const Point x0{0.0};
    const double v00 = f.grid.interpolate(f.slice(0), x0);
    constexpr std::size_t kPaths = 10000;
    constexpr double kDt = 1e-3;
    constexpr std::uint64_t kSeed = 20240611;
    const double slack = kDefaultBiasSlack;
    const ControlRule ctrl = pol.controller.as_controller();
    const StopRule stop = pol.stopper.as_stopper();

    const ValueEstimate base = estimate_value(spec, ctrl, stop, 0.0, x0, kPaths, kDt, kSeed);
    const double diff = std::abs(base.mean - v00);
    bool ok = diff <= 3.0 * base.std_error + slack;
    note("V(0,0) = %.6f, estimate %.6f +/- %.4f, |diff| %.4f <= %.4f: %s", v00, base.mean,
         base.std_error, diff, 3.0 * base.std_error + slack,
         diff <= 3.0 * base.std_error + slack ? "yes" : "no");
    note("impulses/path %.3f, stopped %.3f, exited %.3f", base.mean_impulse_count, base.stop_fraction,
         base.exit_fraction);

    struct Deviation {
        const char* name;
        StopRule rule;
    };
    for (const Deviation& d : {Deviation{"never-stop", never_stop()},
                               Deviation{"stop-immediately", stop_immediately()},
                               Deviation{"random-stop(0.01)", random_stopper(0.01, kSeed)}}) {
        const ValueEstimate e = estimate_value(spec, ctrl, d.rule, 0.0, x0, kPaths, kDt, kSeed);
        const double lim = v00 + 3.0 * e.std_error + slack;
        note("stopper %-18s mean %.6f <= %.6f: %s", d.name, e.mean, lim, e.mean <= lim ? "yes" : "no");
        ok = ok && e.mean <= lim;
    }
    const ValueEstimate idle = estimate_value(spec, ControlRule{}, stop, 0.0, x0, kPaths, kDt, kSeed);
    const double lim = v00 - 3.0 * idle.std_error - slack;
    note("controller no-impulse     mean %.6f >= %.6f: %s", idle.mean, lim, idle.mean >= lim ? "yes" : "no");
    ok = ok && idle.mean >= lim;
    const double secs = timer.seconds();
    note("runtime %.2f s (budget 120 s)", secs);
    return ok && secs < 120.0;
}

// 7. Regularity probes change by at most 25% per refinement.
bool criterion_7() {
    const ProblemSpec spec = spec_named("canonical_game.json");
    std::vector<RegularityReport> probes;
    for (std::size_t n : {100, 200, 400}) {
        probes.push_back(regularity_probe(solve_qvi(spec, grid_1d(spec, n))));
        const auto& p = probes.back();
        note("N = %3zu: lipschitz_x %.4f, holder_t %.4f (with boundary pairs %.3f, terminal pair %.3f)",
             n, p.lipschitz_x, p.holder_t, p.lipschitz_x_with_boundary, p.holder_t_terminal);
    }
    bool ok = true;
    for (std::size_t i = 1; i < probes.size(); ++i) {
        const double lx = std::abs(probes[i].lipschitz_x / probes[i - 1].lipschitz_x - 1.0);
        const double ht = std::abs(probes[i].holder_t / probes[i - 1].holder_t - 1.0);
        note("refinement %zu: lipschitz change %.2f%%, holder change %.2f%% (limit 25%%)", i,
             100.0 * lx, 100.0 * ht);
        ok = ok && lx <= 0.25 && ht <= 0.25;
    }
    return ok;
}

// 8. Raising G by 0.1 raises V by at most 0.1.
bool criterion_8() {
    nlohmann::json doc;
    {
        std::ifstream in(kSpecDir + "/canonical_game.json");
        doc = nlohmann::json::parse(in);
    }
    const ProblemSpec s1 = load_spec(doc);
    auto params = doc["bequest"]["params"].get<std::vector<double>>();
    params.resize(6, 0.0);
    params[5] += 0.1;
    doc["bequest"]["params"] = params;
    const ProblemSpec s2 = load_spec(doc);
    const Grid g = grid_1d(s1, 200);
    const ValueField v1 = solve_qvi(s1, g);
    const ValueField v2 = solve_qvi(s2, g);
    const double tol = std::max(v1.diagnostics.fixed_point_tol, v2.diagnostics.fixed_point_tol);
    double lowest = std::numeric_limits<double>::infinity();
    double highest = -lowest;
    for (std::size_t i = 0; i < v1.values.size(); ++i) {
        const double d = v2.values[i] - v1.values[i];
        lowest = std::min(lowest, d);
        highest = std::max(highest, d);
    }
    note("V2 - V1 ranges over [%.12f, %.12f]; need >= 0 and <= 0.1 + %.1e", lowest, highest, 10 * tol);
    return lowest >= 0.0 && highest <= 0.1 + 10.0 * tol;
}

// 9. Laws of the intervention operator.
bool criterion_9() {
    Timer timer;
    const ProblemSpec spec = spec_named("canonical_game.json");
    const Grid g = grid_1d(spec, 200);
    const std::size_t n = g.node_count();
    const double t = 0.5;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    // Random Lipschitz slice that agrees with G on the two boundary nodes.
    auto random_slice = [&](double& lipschitz) {
        const double a = unit(rng), b = unit(rng), w = 1.0 + 3.0 * std::abs(unit(rng));
        const double phase = unit(rng) * 3.0;
        std::vector<double> phi(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = g.node(i)[0];
            phi[i] = a * std::sin(w * x + phase) + b * x;
        }
        const double gl = spec.bequest.scalar(t, g.node(0)), gr = spec.bequest.scalar(t, g.node(n - 1));
        const double dl = gl - phi[0], dr = gr - phi[n - 1];
        for (std::size_t i = 0; i < n; ++i) {
            const double s = static_cast<double>(i) / static_cast<double>(n - 1);
            phi[i] += (1.0 - s) * dl + s * dr;
        }
        lipschitz = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i)
            lipschitz = std::max(lipschitz, std::abs(phi[i + 1] - phi[i]) / g.step(0));
        return phi;
    };
    auto lip = [&](const std::vector<double>& v) {
        double m = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) m = std::max(m, std::abs(v[i + 1] - v[i]) / g.step(0));
        return m;
    };
    // Nodes whose every impulse lands in the closed domain (no exit branch).
    std::vector<char> landing(n, 1);
    for (std::size_t i = 0; i < n; ++i)
        for (const Point& z : spec.impulses)
            if (!spec.domain.contains_closed(impulse_response(spec, g.node(i), z))) landing[i] = 0;
    double min_cost = std::numeric_limits<double>::infinity();
    for (const Point& z : spec.impulses) min_cost = std::min(min_cost, spec.intervention_cost.scalar(t, z));

    double shift_err = 0.0, mono_worst = -std::numeric_limits<double>::infinity(), lip_excess = -1e300;
    double floor_worst = std::numeric_limits<double>::infinity();
    std::size_t missing = 0;
    for (int trial = 0; trial < 100; ++trial) {
        double l1 = 0.0, l2 = 0.0;
        const std::vector<double> phi = random_slice(l1);
        std::vector<double> bump = random_slice(l2);
        std::vector<double> psi(n);
        for (std::size_t i = 0; i < n; ++i) psi[i] = phi[i] + 0.3 * std::abs(bump[i] - bump[0]);
        const ImpulseEval mp = intervention_operator(spec, g, phi, t);
        const ImpulseEval mq = intervention_operator(spec, g, psi, t);
        const double a = 0.75 * unit(rng);
        std::vector<double> shifted(phi);
        for (double& v : shifted) v += a;
        const ImpulseEval ms = intervention_operator(spec, g, shifted, t);
        double phi_min = std::numeric_limits<double>::infinity();
        for (double v : phi) phi_min = std::min(phi_min, v);
        for (std::size_t i = 0; i < n; ++i) {
            missing += mp.argmin[i] < 0;
            mono_worst = std::max(mono_worst, mp.values[i] - mq.values[i]);
            if (landing[i]) {
                shift_err = std::max(shift_err, std::abs(ms.values[i] - (mp.values[i] + a)));
                floor_worst = std::min(floor_worst, mp.values[i] - (min_cost + phi_min));
            }
        }
        lip_excess = std::max(lip_excess, lip(mp.values) - (l1 + g.step(0)));
    }
    const bool shift_ok = shift_err <= 1e-12;
    const bool mono_ok = mono_worst <= 0.0;
    const bool xi_ok = missing == 0;
    const bool lip_ok = lip_excess <= 0.0;
    const bool floor_ok = floor_worst >= -1e-12;
    const double secs = timer.seconds();
    note("shift equivariance max error %.2e on nodes without exits: %s", shift_err, shift_ok ? "ok" : "broken");
    note("monotonicity over 100 pairs, max(M phi - M psi) %.2e: %s", mono_worst, mono_ok ? "ok" : "broken");
    note("minimizer missing at %zu nodes: %s", missing, xi_ok ? "ok" : "broken");
    note("Lip(M phi) - Lip(phi) - dx, worst %.3e: %s", lip_excess, lip_ok ? "ok" : "broken");
    note("M phi - (min c + min phi), worst %.3e: %s", floor_worst, floor_ok ? "ok" : "broken");
    note("runtime %.2f s (budget 10 s)", secs);
    return shift_ok && mono_ok && xi_ok && lip_ok && floor_ok && secs < 10.0;
}

// 10. Second-moment ratio stability of the free diffusion.
bool criterion_10() {
    Timer timer;
    auto make = [](double drift_slope) {
        nlohmann::json doc = {
            {"domain", {{"lower", {-10.0}}, {"upper", {10.0}}, {"horizon", 0.16}}},
            {"drift", {{"kind", "affine"}, {"params", {0.0, drift_slope}}}},
            {"vol", {{"kind", "constant"}, {"params", {1.0}}}},
            {"running_cost", {{"kind", "constant"}, {"params", {0.0}}}},
            {"bequest", {{"kind", "constant"}, {"params", {0.0}}}},
            {"intervention_cost", {{"kind", "constant"}, {"params", {0.1}}}},
            {"impulse_set", {-0.5}}};
        return load_spec(doc);
    };
    const double ladder[] = {0.01, 0.04, 0.16};
    constexpr std::size_t kPaths = 100000;
    constexpr double kDt = 1e-4;

    const MomentReport bm = moment_diagnostics(make(0.0), 0.0, Point{0.0}, kPaths, kDt, 11, ladder);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& e : bm.ladder) {
        note("h = %.2f: E[sup |X - x0|^2] / h = %.4f", e.h, e.ratio);
        lo = std::min(lo, e.ratio);
        hi = std::max(hi, e.ratio);
    }
    const bool stable = hi / lo <= 1.25 && hi <= 4.0;
    note("ratio spread max/min %.4f (limit 1.25), max %.4f (limit 4)", hi / lo, hi);

    const MomentReport g1 = moment_diagnostics(make(1.0), 0.0, Point{0.5}, kPaths, kDt, 12, ladder);
    const MomentReport g2 = moment_diagnostics(make(1.0), 0.0, Point{1.0}, kPaths, kDt, 13, ladder);
    const double growth = g2.growth_constant / g1.growth_constant;
    const bool growth_ok = growth >= 0.5 && growth <= 2.0;
    note("drift x: growth constants %.4f (x0 = 0.5), %.4f (x0 = 1.0), ratio %.4f (within 2x)",
         g1.growth_constant, g2.growth_constant, growth);
    const double secs = timer.seconds();
    note("runtime %.2f s (budget 60 s)", secs);
    return stable && growth_ok && secs < 60.0;
}

struct Criterion {
    const char* title;
    std::function<bool()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list{
        {"obstacle sandwich on the three canonical problems", criterion_1},
        {"pure stopping: solver vs lattice oracle", criterion_2},
        {"pure impulse control: solver vs lattice oracle", criterion_3},
        {"discrete game value: commit orders agree", criterion_4},
        {"DPP residual refinement", criterion_5},
        {"Monte-Carlo closure and unilateral deviations", criterion_6},
        {"regularity probes stable under refinement", criterion_7},
        {"comparison under a bequest shift", criterion_8},
        {"intervention operator laws", criterion_9},
        {"moment diagnostics", criterion_10},
    };
    return list;
}

bool run_one(std::size_t id) {
    const Criterion& c = criteria()[id - 1];
    std::printf("criterion %zu: %s\n", id, c.title);
    bool ok = false;
    try {
        ok = c.run();
    } catch (const std::exception& e) {
        note("error: %s", e.what());
    }
    std::printf("%s criterion %zu: %s\n", ok ? "PASS" : "FAIL", id, c.title);
    std::fflush(stdout);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> ids;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            const long id = std::strtol(argv[++i], nullptr, 10);
            if (id < 1 || id > static_cast<long>(criteria().size())) {
                std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
                return 2;
            }
            ids.push_back(static_cast<std::size_t>(id));
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
            return 2;
        }
    }
    if (ids.empty())
        for (std::size_t i = 1; i <= criteria().size(); ++i) ids.push_back(i);
    std::size_t failed = 0;
    for (std::size_t id : ids) failed += !run_one(id);
    if (ids.size() > 1) std::printf("%zu of %zu criteria passed\n", ids.size() - failed, ids.size());
    return failed == 0 ? 0 : 1;
}
