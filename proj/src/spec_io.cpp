#include "isg/spec_io.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>

#include "isg/errors.hpp"

namespace isg {

namespace {

using nlohmann::json;

void reject_unknown(const json& node, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (const auto& [key, _] : node.items())
        if (!allowed.contains(key))
            throw ParseError("unknown key '" + where + key + "'");
}

const json& require(const json& node, const std::string& key, const std::string& where) {
    if (!node.is_object() || !node.contains(key))
        throw ParseError("missing key '" + where + key + "'");
    return node.at(key);
}

double number(const json& node, const std::string& key) {
    if (!node.is_number()) throw ParseError("key '" + key + "' must be a number");
    return node.get<double>();
}

Point point(const json& node, const std::string& key) {
    if (node.is_number()) return Point{node.get<double>()};
    if (!node.is_array() || node.empty() || node.size() > kMaxDim)
        throw ParseError("key '" + key + "' must be a number or an array of 1.." +
                         std::to_string(kMaxDim) + " numbers");
    Point p(node.size());
    for (std::size_t i = 0; i < node.size(); ++i) p[i] = number(node[i], key);
    return p;
}

std::vector<double> numbers(const json& node, const std::string& key) {
    if (!node.is_array()) throw ParseError("key '" + key + "' must be an array of numbers");
    std::vector<double> out;
    out.reserve(node.size());
    for (const auto& v : node) out.push_back(number(v, key));
    return out;
}

CoefficientFn coefficient(const json& doc, const std::string& key, CoefficientShape shape,
                          std::size_t dim) {
    const json& node = require(doc, key, "");
    if (!node.is_object()) throw ParseError("key '" + key + "' must be an object");
    reject_unknown(node, {"kind", "params"}, key + ".");
    const json& kind = require(node, "kind", key + ".");
    if (!kind.is_string()) throw ParseError("key '" + key + ".kind' must be a string");
    CoefficientKind k;
    try {
        k = coefficient_kind_from(kind.get<std::string>());
    } catch (const ParseError& e) {
        throw ParseError("key '" + key + ".kind': " + e.what());
    }
    auto params = numbers(require(node, "params", key + "."), key + ".params");
    try {
        return CoefficientFn(k, std::move(params), shape, dim);
    } catch (const ValidationError& e) {
        throw ValidationError(key + ": " + e.what());
    }
}

ImpulseResponse response(const json& doc, std::size_t dim) {
    ImpulseResponse r;
    if (!doc.contains("impulse_response")) return r;
    const json& node = doc.at("impulse_response");
    std::string kind;
    if (node.is_string()) {
        kind = node.get<std::string>();
    } else if (node.is_object()) {
        reject_unknown(node, {"kind", "params"}, "impulse_response.");
        const json& k = require(node, "kind", "impulse_response.");
        if (!k.is_string()) throw ParseError("key 'impulse_response.kind' must be a string");
        kind = k.get<std::string>();
    } else {
        throw ParseError("key 'impulse_response' must be a string or an object");
    }
    if (kind == "translation") return r;
    if (kind != "custom-affine")
        throw ParseError("key 'impulse_response.kind': unknown response '" + kind + "'");
    const auto params =
        numbers(require(node, "params", "impulse_response."), "impulse_response.params");
    if (params.size() != 2 * dim * dim)
        throw ParseError("key 'impulse_response.params' must hold 2*p*p numbers");
    r.kind = ImpulseResponseKind::custom_affine;
    r.state_map.rows = r.state_map.cols = dim;
    r.impulse_map.rows = r.impulse_map.cols = dim;
    std::copy_n(params.begin(), dim * dim, r.state_map.a.begin());
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(dim * dim), dim * dim,
                r.impulse_map.a.begin());
    return r;
}

}  // namespace

ProblemSpec load_spec(const json& doc) {
    if (!doc.is_object()) throw ParseError("problem document must be an object");
    reject_unknown(doc,
                   {"domain", "drift", "vol", "running_cost", "bequest", "intervention_cost",
                    "impulse_set", "impulse_response", "cost_floor"},
                   "");

    ProblemSpec spec;
    const json& domain = require(doc, "domain", "");
    if (!domain.is_object()) throw ParseError("key 'domain' must be an object");
    reject_unknown(domain, {"lower", "upper", "horizon"}, "domain.");
    spec.domain.lower = point(require(domain, "lower", "domain."), "domain.lower");
    spec.domain.upper = point(require(domain, "upper", "domain."), "domain.upper");
    spec.domain.horizon = number(require(domain, "horizon", "domain."), "domain.horizon");
    const std::size_t p = spec.domain.lower.size();
    if (spec.domain.upper.size() != p)
        throw ParseError("key 'domain.upper' must match the dimension of 'domain.lower'");
    for (std::size_t i = 0; i < p; ++i)
        if (!(spec.domain.lower[i] < spec.domain.upper[i]))
            throw ValidationError("domain: lower must be < upper componentwise");
    if (!(spec.domain.horizon > 0.0)) throw ValidationError("domain: horizon must be positive");

    spec.drift = coefficient(doc, "drift", {p, 1}, p);
    spec.vol = coefficient(doc, "vol", {p, p}, p);
    spec.running_cost = coefficient(doc, "running_cost", {1, 1}, p);
    spec.bequest = coefficient(doc, "bequest", {1, 1}, p);
    spec.intervention_cost = coefficient(doc, "intervention_cost", {1, 1}, p);

    const json& zs = require(doc, "impulse_set", "");
    if (!zs.is_array()) throw ParseError("key 'impulse_set' must be an array");
    std::vector<Point> impulses;
    for (const auto& z : zs) {
        Point pz = point(z, "impulse_set");
        if (pz.size() != p) throw ParseError("key 'impulse_set': impulse dimension mismatch");
        impulses.push_back(pz);
    }
    spec.impulses = ImpulseSet(std::move(impulses));
    spec.response = response(doc, p);

    // The impulse obstacle logic relies on lambda_c > 0.
    const std::size_t n_times = 65;
    double lowest = std::numeric_limits<double>::infinity();
    for (const Point& z : spec.impulses)
        for (std::size_t k = 0; k < n_times; ++k) {
            const double t = spec.horizon() * static_cast<double>(k) / (n_times - 1);
            lowest = std::min(lowest, spec.intervention_cost.scalar(t, z));
        }
    if (doc.contains("cost_floor")) {
        spec.cost_floor = number(doc.at("cost_floor"), "cost_floor");
    } else {
        spec.cost_floor = lowest;
    }
    if (!(spec.cost_floor > 0.0))
        throw ValidationError("cost floor violated: cost_floor must be positive");
    if (lowest < spec.cost_floor)
        throw ValidationError("cost floor violated: min c(t,z) = " + std::to_string(lowest) +
                              " < " + std::to_string(spec.cost_floor));
    return spec;
}

ProblemSpec load_spec_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open problem document " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return load_spec(doc);
}

}  // namespace isg
