// isg: solve, cross-check and simulate impulse-control / stopping games.
//
// Exit codes: 0 success, 1 usage or validation failure, 2 numerical
// non-convergence (artifacts are still written and marked stale).

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "isg/errors.hpp"
#include "isg/field_io.hpp"
#include "isg/grid.hpp"
#include "isg/mc.hpp"
#include "isg/oracle.hpp"
#include "isg/policy.hpp"
#include "isg/qvi.hpp"
#include "isg/spec_io.hpp"
#include "isg/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kStale = 2;

struct Options {
    std::string spec;
    std::string out = ".";
    std::size_t nt = 200;
    std::vector<std::size_t> nx{200};
    std::optional<std::uint64_t> seed;
    std::size_t paths = 10000;
    double dt = 1e-3;
    std::vector<double> x0;
    double t0 = 0.0;
    std::string mode;
    std::string field;
    std::string kind = "game";
    bool no_stop = false;
    std::optional<double> act_tol;
    std::optional<double> tol;
    std::size_t max_outer = 50;
};

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw isg::Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

isg::Grid make_grid(const isg::ProblemSpec& spec, const Options& o) {
    std::vector<std::size_t> nx = o.nx;
    if (nx.size() == 1 && spec.dim() > 1) nx.assign(spec.dim(), nx.front());
    return isg::build_grid(spec.domain, o.nt, nx);
}

isg::Point start_point(const isg::ProblemSpec& spec, const Options& o) {
    if (o.x0.empty()) {
        isg::Point mid(spec.dim());
        for (std::size_t i = 0; i < spec.dim(); ++i)
            mid[i] = 0.5 * (spec.domain.lower[i] + spec.domain.upper[i]);
        return mid;
    }
    if (o.x0.size() != spec.dim()) throw isg::DimensionError("--x0 does not match the problem dimension");
    return isg::Point::from(o.x0);
}

void write_policies(const fs::path& dir, const isg::ProblemSpec& spec, isg::ValueField field,
                    double act_tol) {
    const bool stale = !field.diagnostics.converged;
    field.diagnostics.converged = true;  // extract anyway; the header carries the flag
    const isg::PolicyPair pair = isg::extract_policy(spec, field, act_tol);
    std::ofstream c(dir / "policy_controller.csv");
    isg::write_policy_csv(c, pair.controller);
    std::ofstream s(dir / "policy_stopper.csv");
    isg::write_policy_csv(s, pair.stopper);
    json header = isg::policy_header(pair);
    header["stale"] = stale;
    write_json(dir / "policy.json", header);
}

int cmd_solve(const Options& o) {
    const isg::ProblemSpec spec = isg::load_spec_file(o.spec);
    const isg::Grid grid = make_grid(spec, o);
    isg::SolverParams params;
    params.stopping = !o.no_stop;
    params.fixed_point_tol = o.tol;
    params.max_outer_iters = o.max_outer;
    const fs::path dir(o.out);
    fs::create_directories(dir);

    int code = kOk;
    isg::ValueField field;
    try {
        field = isg::solve_qvi(spec, grid, params);
    } catch (const isg::ConvergenceError& e) {
        std::cerr << "isg solve: " << e.what() << '\n';
        field = e.field();
        code = kStale;
    }
    const double act_tol = o.act_tol.value_or(isg::default_act_tol(field));
    isg::write_field(dir, field, act_tol);
    write_policies(dir, spec, field, act_tol);
    std::cout << "V(0, x0) = " << grid.interpolate(field.slice(0), start_point(spec, o))
              << (code == kOk ? "" : " (stale)") << "\nwrote " << dir.string() << '\n';
    return code;
}

int cmd_oracle(const Options& o) {
    const isg::ProblemSpec spec = isg::load_spec_file(o.spec);
    const isg::Grid grid = make_grid(spec, o);
    isg::ValueField field;
    if (o.kind == "stopping") field = isg::lattice_stopping_value(spec, grid);
    else if (o.kind == "impulse") field = isg::lattice_impulse_value(spec, grid);
    else if (o.kind == "infsup" || o.kind == "supinf" || o.kind == "game")
        field = isg::discrete_game_value(spec, grid,
                                         o.kind == "supinf" ? isg::GameOrder::supinf
                                                            : isg::GameOrder::infsup);
    else throw CLI::ValidationError("--kind", "expected stopping, impulse, infsup or supinf");
    const fs::path dir(o.out);
    isg::write_field(dir, field, isg::default_act_tol(field));
    std::cout << "oracle " << o.kind << " V(0, x0) = "
              << grid.interpolate(field.slice(0), start_point(spec, o)) << "\nwrote "
              << dir.string() << '\n';
    return kOk;
}

int cmd_simulate(const Options& o) {
    const isg::ProblemSpec spec = isg::load_spec_file(o.spec);
    const isg::Point x0 = start_point(spec, o);
    const std::uint64_t seed = o.seed.value_or(0);
    const fs::path dir(o.out);
    fs::create_directories(dir);

    std::optional<isg::ValueField> field;
    std::optional<isg::PolicyPair> pair;
    if (!o.field.empty()) {
        field = isg::load_field(o.field, spec);
        pair = isg::extract_policy(spec, *field, o.act_tol.value_or(isg::default_act_tol(*field)));
    }
    const isg::ControlRule ctrl = pair ? pair->controller.as_controller() : isg::ControlRule{};
    const isg::StopRule stop = pair ? pair->stopper.as_stopper() : isg::StopRule{};

    const isg::PathOutcome first = isg::simulate_path(spec, o.t0, x0, ctrl, stop, o.dt, seed);
    std::ofstream csv(dir / "path.csv");
    isg::write_path_csv(csv, spec, first);

    json report = {{"t0", o.t0}, {"dt", o.dt}, {"seed", seed}, {"policies", pair.has_value()}};
    if (o.paths >= 2) {
        const isg::ValueEstimate est =
            isg::estimate_value(spec, ctrl, stop, o.t0, x0, o.paths, o.dt, seed);
        report["estimate"] = est.to_json();
        std::cout << "mean " << est.mean << " +/- " << est.std_error << " over " << o.paths
                  << " paths\n";
    }
    write_json(dir / "simulate.json", report);
    return kOk;
}

int cmd_verify(const Options& o) {
    if (!o.seed) {
        std::cerr << "isg verify: --seed is required\n";
        return kUsage;
    }
    static const std::vector<std::string> modes{"oracle", "mc", "dpp", "regularity", "assumptions"};
    if (std::find(modes.begin(), modes.end(), o.mode) == modes.end()) {
        std::cerr << "isg verify: --mode must be one of oracle, mc, dpp, regularity, assumptions\n";
        return kUsage;
    }
    const isg::ProblemSpec spec = isg::load_spec_file(o.spec);

    isg::VerifyReport report;
    if (o.mode == "assumptions") {
        report = isg::verify_assumptions(spec, *o.seed);
    } else {
        if (o.field.empty() || !fs::exists(o.field)) {
            std::cerr << "isg verify: mode " << o.mode << " needs an existing --field value.csv\n";
            return kUsage;
        }
        const isg::ValueField field = isg::load_field(o.field, spec);
        if (!field.diagnostics.converged) {
            std::cerr << "isg verify: field is stale (solver did not converge)\n";
            return kStale;
        }
        if (o.mode == "oracle") {
            report = isg::verify_oracle(spec, field);
        } else if (o.mode == "mc") {
            isg::McSettings mc;
            mc.t0 = o.t0;
            mc.x0 = start_point(spec, o);
            mc.n_paths = o.paths;
            mc.dt = o.dt;
            mc.seed = *o.seed;
            report = isg::verify_mc(spec, field, mc);
        } else if (o.mode == "dpp") {
            report = isg::verify_dpp(spec, field);
        } else {
            report = isg::verify_regularity(spec, field);
        }
    }
    const fs::path dir(o.out);
    fs::create_directories(dir);
    json doc = report.to_json();
    doc["seed"] = *o.seed;
    write_json(dir / ("verify_" + o.mode + ".json"), doc);
    for (const auto& c : report.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << c.value
                  << " threshold=" << c.threshold << '\n';
    return report.passed() ? kOk : kUsage;
}

int cmd_validate(const Options& o) {
    const isg::ProblemSpec spec = isg::load_spec_file(o.spec);
    const isg::ValidationReport report = isg::validate_assumptions(spec, 64, o.seed.value_or(0));
    std::cout << report.to_json().dump(2) << '\n';
    return report.all_pass() ? kOk : kUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Impulse control vs stopping games: QVI solver, oracles and Monte-Carlo checks"};
    app.require_subcommand(1);
    Options o;

    auto common = [&o](CLI::App* cmd) {
        cmd->add_option("--spec", o.spec, "problem document (JSON)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", o.out, "output directory");
    };
    auto gridding = [&o](CLI::App* cmd) {
        cmd->add_option("--nt", o.nt, "time steps")->check(CLI::PositiveNumber);
        cmd->add_option("--nx", o.nx, "space cells, one value or one per axis")->delimiter(',');
    };
    auto sampling = [&o](CLI::App* cmd) {
        cmd->add_option("--seed", o.seed, "base seed; path i uses seed + i");
        cmd->add_option("--paths", o.paths, "number of simulated paths");
        cmd->add_option("--dt", o.dt, "simulation step")->check(CLI::PositiveNumber);
        cmd->add_option("--x0", o.x0, "start state")->delimiter(',');
        cmd->add_option("--t0", o.t0, "start time");
    };

    auto* solve = app.add_subcommand("solve", "solve the QVI and write value and policy artifacts");
    common(solve);
    gridding(solve);
    solve->add_flag("--no-stop", o.no_stop, "disable the stopper (pure impulse control)");
    solve->add_option("--tol", o.tol, "outer fixed-point tolerance");
    solve->add_option("--max-outer", o.max_outer, "outer iterations per slice");
    solve->add_option("--act-tol", o.act_tol, "active-set tolerance for the policies");
    solve->add_option("--x0", o.x0, "state reported on stdout")->delimiter(',');

    auto* oracle = app.add_subcommand("oracle", "brute-force lattice value");
    common(oracle);
    gridding(oracle);
    oracle->add_option("--kind", o.kind, "stopping, impulse, infsup or supinf");
    oracle->add_option("--x0", o.x0, "state reported on stdout")->delimiter(',');

    auto* simulate = app.add_subcommand("simulate", "simulate paths, optionally under solved policies");
    common(simulate);
    sampling(simulate);
    simulate->add_option("--field", o.field, "value.csv whose policies drive the players");
    simulate->add_option("--act-tol", o.act_tol, "active-set tolerance");

    auto* verify = app.add_subcommand("verify", "run a check suite and write verify_<mode>.json");
    common(verify);
    sampling(verify);
    verify->add_option("--mode", o.mode, "oracle, mc, dpp, regularity or assumptions")->required();
    verify->add_option("--field", o.field, "value.csv from solve");

    auto* validate = app.add_subcommand("validate", "check a problem document and its assumptions");
    validate->add_option("--spec", o.spec, "problem document (JSON)")->required()->check(CLI::ExistingFile);
    validate->add_option("--seed", o.seed, "probe seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*solve) return cmd_solve(o);
        if (*oracle) return cmd_oracle(o);
        if (*simulate) return cmd_simulate(o);
        if (*verify) return cmd_verify(o);
        if (*validate) return cmd_validate(o);
    } catch (const isg::ConvergenceError& e) {
        std::cerr << "isg: " << e.what() << '\n';
        return kStale;
    } catch (const isg::StaleFieldError& e) {
        std::cerr << "isg: " << e.what() << '\n';
        return kStale;
    } catch (const CLI::Error& e) {
        std::cerr << "isg: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "isg: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
