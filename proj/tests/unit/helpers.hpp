#pragma once

#include <json.hpp>

#include "isg/spec_io.hpp"

namespace isg::test {

/// Minimal 1-D problem on S = (-2, 2), T = 1: mu = 0, sigma = 1, f = 0,
/// G = 1, c = 0.1, Z = {-0.5, 0.5}. Keys in `patch` replace the defaults.
inline nlohmann::json base_doc(const nlohmann::json& patch = nlohmann::json::object()) {
    nlohmann::json doc = {
        {"domain", {{"lower", {-2.0}}, {"upper", {2.0}}, {"horizon", 1.0}}},
        {"drift", {{"kind", "constant"}, {"params", {0.0}}}},
        {"vol", {{"kind", "constant"}, {"params", {1.0}}}},
        {"running_cost", {{"kind", "constant"}, {"params", {0.0}}}},
        {"bequest", {{"kind", "constant"}, {"params", {1.0}}}},
        {"intervention_cost", {{"kind", "constant"}, {"params", {0.1}}}},
        {"impulse_set", {-0.5, 0.5}},
        {"impulse_response", "translation"},
    };
    for (auto it = patch.begin(); it != patch.end(); ++it) doc[it.key()] = it.value();
    return doc;
}

inline ProblemSpec make_spec(const nlohmann::json& patch = nlohmann::json::object()) {
    return load_spec(base_doc(patch));
}

inline nlohmann::json coef(const char* kind, std::initializer_list<double> params) {
    return {{"kind", kind}, {"params", params}};
}

}  // namespace isg::test
