#pragma once

// nlohmann/json conversions shared by the persistence code and the CLI.

#include "kdcvg/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace kdcvg::json_io {

using nlohmann::json;

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& what);

json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j, const std::string& what);

json trajectory_to_json(const LatentTrajectory& traj);
LatentTrajectory trajectory_from_json(const json& j);

json read_json_file(const std::filesystem::path& path);
/// Writes via a sibling temporary file and rename.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Throws FormatVersionError unless j["format"] == expected.
void require_format(const json& j, const std::string& expected);

}  // namespace kdcvg::json_io
