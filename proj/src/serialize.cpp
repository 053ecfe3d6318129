#include "nol/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "nol/error.hpp"

namespace nol {

using nlohmann::json;

json pose_to_json(const RigidPose& pose) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(pose.rotation()(r, c));
  }
  const Vec3& t = pose.translation();
  return {{"rotation", rot}, {"translation", {t.x(), t.y(), t.z()}}};
}

RigidPose pose_from_json(const json& j) {
  try {
    const auto& rot = j.at("rotation");
    const auto& trans = j.at("translation");
    if (!rot.is_array() || rot.size() != 9 || !trans.is_array() || trans.size() != 3) {
      throw InputError("pose needs 9 rotation and 3 translation numbers");
    }
    Mat3 r;
    for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = rot[i].get<double>();
    const Vec3 t(trans[0].get<double>(), trans[1].get<double>(), trans[2].get<double>());
    return RigidPose::from_approximate(r, t);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad pose: ") + e.what());
  }
}

json camera_to_json(const Camera& c) {
  return {{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy}, {"width", c.width}, {"height", c.height}};
}

Camera camera_from_json(const json& j) {
  Camera c;
  try {
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad camera: ") + e.what());
  }
  c.validate();
  return c;
}

json trace_to_json(const RefineTrace& trace, bool include_poses) {
  json j;
  j["errors"] = trace.errors;
  j["iterations"] = trace.iterations_run;
  j["stop_reason"] = to_string(trace.stop_reason);
  j["final_pose"] = pose_to_json(trace.final_pose);
  if (trace.stop_reason == StopReason::kStarved) j["warning"] = "refinement starved: too few overlapping pixels";
  if (include_poses) {
    j["poses"] = json::array();
    for (const RigidPose& p : trace.poses) j["poses"].push_back(pose_to_json(p));
  }
  return j;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write to " + dir.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw InputError("write failed: " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot rename into " + path.string());
  }
}

}  // namespace nol
