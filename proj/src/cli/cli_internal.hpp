#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nol/geometry.hpp"
#include "nol/image.hpp"
#include "nol/raster.hpp"

namespace nol::cli {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
};

using Runner = std::function<void()>;

void add_common_options(CLI::App* sub, CommonOptions& common, bool out_required);

CLI::App* add_gen_scene(CLI::App& app, Runner& run);
CLI::App* add_render(CLI::App& app, Runner& run);
CLI::App* add_sample(CLI::App& app, Runner& run);
CLI::App* add_sweep(CLI::App& app, Runner& run);
CLI::App* add_eval(CLI::App& app, Runner& run);

void log(const std::string& message);

struct FrameEntry {
  std::int64_t id = 0;
  std::string image;
  std::string mask;
  std::string pose;
  std::string pose_gt;  // empty when absent
};

struct TargetEntry {
  std::int64_t id = 0;
  std::string pose;
  std::string image;  // optional ground truth
  std::string mask;
};

/// Paths inside a manifest are relative to the manifest's directory.
struct Manifest {
  fs::path root;
  std::string mesh;
  std::string camera;
  std::vector<FrameEntry> frames;
  std::vector<TargetEntry> targets;
  nlohmann::json extra = nlohmann::json::object();

  fs::path resolve(const std::string& rel) const { return root / rel; }
};

Manifest read_manifest(const fs::path& path);
nlohmann::json manifest_to_json(const Manifest& m);

/// Reads one pose file, a JSON array of poses, or {"poses": [...]}.
std::vector<RigidPose> read_pose_list(const fs::path& path);

void write_json(const fs::path& path, const nlohmann::json& j);
void ensure_directory(const fs::path& dir);

}  // namespace nol::cli
