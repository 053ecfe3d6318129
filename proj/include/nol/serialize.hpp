#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "nol/geometry.hpp"
#include "nol/refine.hpp"

namespace nol {

/// {"rotation": [9 numbers, row-major], "translation": [x, y, z]} in meters.
nlohmann::json pose_to_json(const RigidPose& pose);
RigidPose pose_from_json(const nlohmann::json& j);

/// {"fx", "fy", "cx", "cy", "width", "height"}
nlohmann::json camera_to_json(const Camera& camera);
Camera camera_from_json(const nlohmann::json& j);

nlohmann::json trace_to_json(const RefineTrace& trace, bool include_poses = false);

/// Reads and parses a JSON file; InputError on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary file in the same directory and renames it over
/// the destination. Throws InputError if the directory is not writable.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace nol
