#pragma once

#include <filesystem>
#include <string>

#include "nol/geometry.hpp"

namespace nol {

/// Wavefront OBJ (v/f records; polygons fan-triangulated) or PLY
/// (ascii, binary_little_endian, binary_big_endian). Normals in the file are
/// ignored and recomputed. Throws InputError on unreadable or malformed input.
TriangleMesh load_mesh(const std::filesystem::path& path);
TriangleMesh parse_obj(const std::string& text);
TriangleMesh parse_ply(const std::string& bytes);

std::string to_obj(const TriangleMesh& mesh);

}  // namespace nol
