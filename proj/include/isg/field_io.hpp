#pragma once

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "isg/qvi.hpp"

namespace isg {

/// One row per (slice, node): t, x_1.., V, MV, G, active_constraint.
/// Numbers use 17 significant digits so a reload is bit-exact.
void write_value_csv(std::ostream& out, const ValueField& field, double act_tol);

/// Grid metadata, solver diagnostics and the stale flag.
nlohmann::json field_header(const ValueField& field);

/// Writes value.csv and diagnostics.json into dir.
void write_field(const std::filesystem::path& dir, const ValueField& field, double act_tol);

/// Reads value.csv plus its diagnostics.json. The minimizing impulses are
/// recomputed from the loaded values through the intervention operator.
ValueField load_field(const std::filesystem::path& value_csv,
                      const std::filesystem::path& diagnostics_json, const ProblemSpec& spec);

/// Looks for diagnostics.json next to value_csv.
ValueField load_field(const std::filesystem::path& value_csv, const ProblemSpec& spec);

}  // namespace isg
