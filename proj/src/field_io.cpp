#include "isg/field_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "isg/errors.hpp"

namespace isg {

namespace {

void put(std::ostream& out, double v) {
    if (std::isinf(v)) out << (v > 0 ? "inf" : "-inf");
    else out << v;
}

double parse_number(std::string_view s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("value.csv: bad number '" + std::string(s) + "'");
    return v;
}

nlohmann::json grid_json(const Grid& g) {
    nlohmann::json nx = nlohmann::json::array(), lo = nlohmann::json::array(),
                   hi = nlohmann::json::array();
    for (std::size_t i = 0; i < g.dim(); ++i) {
        nx.push_back(g.cells(i));
        lo.push_back(g.lower(i));
        hi.push_back(g.upper(i));
    }
    return {{"dim", g.dim()}, {"nt", g.time_steps()}, {"nx", nx},
            {"lower", lo},    {"upper", hi},          {"horizon", g.horizon()},
            {"dt", g.dt()},   {"nodes", g.node_count()}};
}

}  // namespace

void write_value_csv(std::ostream& out, const ValueField& field, double act_tol) {
    const Grid& g = field.grid;
    out.precision(17);
    out << 't';
    for (std::size_t i = 0; i < g.dim(); ++i) out << ",x" << i + 1;
    out << ",V,MV,G,active_constraint\n";
    for (std::size_t k = 0; k < g.slices(); ++k) {
        for (std::size_t n = 0; n < g.node_count(); ++n) {
            const std::size_t idx = field.at(k, n);
            put(out, g.time(k));
            const Point x = g.node(n);
            for (std::size_t i = 0; i < g.dim(); ++i) {
                out << ',';
                put(out, x[i]);
            }
            out << ',';
            put(out, field.values[idx]);
            out << ',';
            put(out, field.impulse_obstacle[idx]);
            out << ',';
            put(out, field.bequest[idx]);
            out << ',' << to_string(field.active(k, n, act_tol)) << '\n';
        }
    }
}

nlohmann::json field_header(const ValueField& field) {
    const auto& d = field.diagnostics;
    nlohmann::json gaps = nlohmann::json::array();
    for (const auto& h : d.gap_history) gaps.push_back(h);
    std::size_t max_outer = 0;
    for (auto m : d.outer_iterations) max_outer = std::max(max_outer, m);
    double max_res = 0.0;
    for (double r : d.residual_norm) max_res = std::max(max_res, r);
    return {{"grid", grid_json(field.grid)},
            {"stale", !d.converged},
            {"diagnostics",
             {{"converged", d.converged},
              {"fixed_point_tol", d.fixed_point_tol},
              {"linear_solver_tol", d.linear_solver_tol},
              {"stop_penalty", d.stop_penalty},
              {"bequest_sup", d.bequest_sup},
              {"outer_iterations", d.outer_iterations},
              {"max_outer_iterations", max_outer},
              {"final_fixed_point_gap", d.final_gap},
              {"residual_norm", d.residual_norm},
              {"max_residual_norm", max_res},
              {"gauss_seidel_fallbacks", d.gauss_seidel_fallbacks},
              {"gap_history", gaps}}}};
}

void write_field(const std::filesystem::path& dir, const ValueField& field, double act_tol) {
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "value.csv");
    if (!csv) throw Error("cannot write " + (dir / "value.csv").string());
    write_value_csv(csv, field, act_tol);
    std::ofstream js(dir / "diagnostics.json");
    if (!js) throw Error("cannot write " + (dir / "diagnostics.json").string());
    js << field_header(field).dump(2) << '\n';
}

ValueField load_field(const std::filesystem::path& value_csv,
                      const std::filesystem::path& diagnostics_json, const ProblemSpec& spec) {
    std::ifstream hs(diagnostics_json);
    if (!hs) throw Error("cannot read " + diagnostics_json.string());
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(hs);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("diagnostics.json: ") + e.what());
    }

    ValueField field;
    try {
        const auto& gj = header.at("grid");
        DomainSpec dom;
        const auto lo = gj.at("lower").get<std::vector<double>>();
        const auto hi = gj.at("upper").get<std::vector<double>>();
        if (lo.size() != spec.dim()) throw DimensionError("stored field dimension does not match the problem");
        dom.lower = Point::from(lo);
        dom.upper = Point::from(hi);
        dom.horizon = gj.at("horizon").get<double>();
        const auto nx = gj.at("nx").get<std::vector<std::size_t>>();
        field.grid = Grid(dom, gj.at("nt").get<std::size_t>(), nx);

        const auto& dj = header.at("diagnostics");
        auto& d = field.diagnostics;
        d.converged = dj.at("converged").get<bool>();
        d.fixed_point_tol = dj.at("fixed_point_tol").get<double>();
        d.linear_solver_tol = dj.at("linear_solver_tol").get<double>();
        d.stop_penalty = dj.at("stop_penalty").get<double>();
        d.bequest_sup = dj.at("bequest_sup").get<double>();
        d.outer_iterations = dj.at("outer_iterations").get<std::vector<std::size_t>>();
        d.final_gap = dj.at("final_fixed_point_gap").get<std::vector<double>>();
        d.residual_norm = dj.at("residual_norm").get<std::vector<double>>();
        d.gauss_seidel_fallbacks = dj.at("gauss_seidel_fallbacks").get<std::size_t>();
        d.gap_history = dj.at("gap_history").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("diagnostics.json: ") + e.what());
    }

    const Grid& g = field.grid;
    const std::size_t n = g.node_count();
    const std::size_t total = g.slices() * n;
    field.values.resize(total);
    field.impulse_obstacle.resize(total);
    field.bequest.resize(total);

    std::ifstream in(value_csv);
    if (!in) throw Error("cannot read " + value_csv.string());
    std::string line;
    std::getline(in, line);
    const std::size_t value_col = 1 + g.dim();
    std::size_t row = 0;
    std::vector<std::string_view> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= total) throw ParseError("value.csv has more rows than the grid");
        cells.clear();
        std::string_view rest(line);
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
            cells.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        cells.push_back(rest);
        if (cells.size() != value_col + 4) throw ParseError("value.csv: wrong column count");
        field.values[row] = parse_number(cells[value_col]);
        field.impulse_obstacle[row] = parse_number(cells[value_col + 1]);
        field.bequest[row] = parse_number(cells[value_col + 2]);
        ++row;
    }
    if (row != total) throw ParseError("value.csv has fewer rows than the grid");

    field.stop_obstacle = field.bequest;
    if (field.diagnostics.stop_penalty > 0.0)
        for (std::size_t k = 0; k + 1 < g.slices(); ++k)
            for (std::size_t i = 0; i < n; ++i)
                if (!g.is_boundary(i)) field.stop_obstacle[k * n + i] = -field.diagnostics.stop_penalty;

    field.argmin.assign(total, -1);
    for (std::size_t k = 0; k < g.slices(); ++k) {
        const ImpulseEval ev = intervention_operator(spec, g, field.slice(k), g.time(k));
        std::copy(ev.argmin.begin(), ev.argmin.end(), field.argmin.begin() + k * n);
    }
    return field;
}

ValueField load_field(const std::filesystem::path& value_csv, const ProblemSpec& spec) {
    return load_field(value_csv, value_csv.parent_path() / "diagnostics.json", spec);
}

}  // namespace isg
