#include <iostream>

#include "cli_internal.hpp"
#include "nol/error.hpp"
#include "nol/serialize.hpp"

namespace nol::cli {

using nlohmann::json;

void log(const std::string& message) { std::cerr << "nol: " << message << '\n'; }

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create directory " + dir.string());
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

namespace {

std::string get_string(const json& j, const char* key, bool required) {
  if (!j.contains(key)) {
    if (required) throw InputError(std::string("manifest entry lacks \"") + key + "\"");
    return {};
  }
  if (!j.at(key).is_string()) throw InputError(std::string("manifest field \"") + key + "\" must be a string");
  return j.at(key).get<std::string>();
}

std::int64_t get_id(const json& j, std::size_t fallback) {
  if (!j.contains("id")) return static_cast<std::int64_t>(fallback);
  if (!j.at("id").is_number_integer()) throw InputError("manifest id must be an integer");
  return j.at("id").get<std::int64_t>();
}

}  // namespace

Manifest read_manifest(const fs::path& path) {
  const json j = read_json_file(path);
  if (!j.is_object()) throw InputError(path.string() + ": manifest must be a JSON object");
  Manifest m;
  m.root = path.has_parent_path() ? path.parent_path() : fs::path(".");
  m.mesh = get_string(j, "mesh", false);
  m.camera = get_string(j, "camera", false);
  if (j.contains("frames")) {
    if (!j.at("frames").is_array()) throw InputError("manifest \"frames\" must be an array");
    std::size_t i = 0;
    for (const json& f : j.at("frames")) {
      FrameEntry e;
      e.id = get_id(f, i++);
      e.image = get_string(f, "image", false);
      e.mask = get_string(f, "mask", false);
      e.pose = get_string(f, "pose", true);
      e.pose_gt = get_string(f, "pose_gt", false);
      m.frames.push_back(std::move(e));
    }
  }
  if (j.contains("targets")) {
    if (!j.at("targets").is_array()) throw InputError("manifest \"targets\" must be an array");
    std::size_t i = 0;
    for (const json& t : j.at("targets")) {
      TargetEntry e;
      e.id = get_id(t, i++);
      e.pose = get_string(t, "pose", true);
      e.image = get_string(t, "image", false);
      e.mask = get_string(t, "mask", false);
      m.targets.push_back(std::move(e));
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "mesh" && key != "camera" && key != "frames" && key != "targets") m.extra[key] = value;
  }
  return m;
}

json manifest_to_json(const Manifest& m) {
  json j = m.extra;
  j["mesh"] = m.mesh;
  j["camera"] = m.camera;
  j["frames"] = json::array();
  for (const FrameEntry& f : m.frames) {
    json e = {{"id", f.id}, {"image", f.image}, {"mask", f.mask}, {"pose", f.pose}};
    if (!f.pose_gt.empty()) e["pose_gt"] = f.pose_gt;
    j["frames"].push_back(e);
  }
  j["targets"] = json::array();
  for (const TargetEntry& t : m.targets) {
    json e = {{"id", t.id}, {"pose", t.pose}};
    if (!t.image.empty()) e["image"] = t.image;
    if (!t.mask.empty()) e["mask"] = t.mask;
    j["targets"].push_back(e);
  }
  return j;
}

std::vector<RigidPose> read_pose_list(const fs::path& path) {
  const json j = read_json_file(path);
  std::vector<RigidPose> poses;
  const json* list = &j;
  if (j.is_object() && j.contains("poses")) list = &j.at("poses");
  if (list->is_array()) {
    for (const json& p : *list) poses.push_back(pose_from_json(p));
  } else if (list->is_object()) {
    poses.push_back(pose_from_json(*list));
  } else {
    throw InputError(path.string() + ": expected a pose or a list of poses");
  }
  return poses;
}

}  // namespace nol::cli
