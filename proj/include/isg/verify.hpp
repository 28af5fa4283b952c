#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "isg/mc.hpp"
#include "isg/qvi.hpp"

namespace isg {

struct VerifyCheck {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::string mode;
    std::vector<VerifyCheck> checks;
    nlohmann::json extra = nlohmann::json::object();

    bool passed() const;
    nlohmann::json to_json() const;
};

/// Grid with both Nt and every Nx multiplied by factor.
Grid refine(const Grid& grid, std::size_t factor);

/// Solver settings that reproduce how field was solved (stopping on or off).
SolverParams params_like(const ValueField& field);

/// Field against the lattice oracle on its own grid: pure stopping when Z is
/// empty, pure impulse when stopping was disabled, the infsup game otherwise.
VerifyReport verify_oracle(const ProblemSpec& spec, const ValueField& field);

struct McSettings {
    double t0 = 0.0;
    Point x0;
    std::size_t n_paths = 10000;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    double bias_slack = kDefaultBiasSlack;
    double random_stop_probability = 0.01;
};

VerifyReport verify_mc(const ProblemSpec& spec, const ValueField& field, const McSettings& mc);
VerifyReport verify_dpp(const ProblemSpec& spec, const ValueField& field);
VerifyReport verify_regularity(const ProblemSpec& spec, const ValueField& field);
VerifyReport verify_assumptions(const ProblemSpec& spec, std::uint64_t seed);

}  // namespace isg
