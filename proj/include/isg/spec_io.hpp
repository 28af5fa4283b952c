#pragma once

#include <filesystem>

#include <json.hpp>

#include "isg/model.hpp"

namespace isg {

/// Builds a ProblemSpec from a problem document. Throws ParseError naming the
/// offending key on schema violations and ValidationError when the cost floor
/// or a coefficient layout is invalid.
ProblemSpec load_spec(const nlohmann::json& document);

ProblemSpec load_spec_file(const std::filesystem::path& path);

}  // namespace isg
