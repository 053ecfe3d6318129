#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>

#include "doctest.h"
#include "nol/geometry.hpp"
#include "nol/image_io.hpp"
#include "nol/mesh_io.hpp"
#include "nol/sampling.hpp"
#include "nol/serialize.hpp"

using namespace nol;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& root() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "nol_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const fs::path& stdout_file = {}) {
  std::string cmd = std::string(NOL_BINARY) + " " + args;
  cmd += stdout_file.empty() ? " > /dev/null" : " > " + stdout_file.string();
  cmd += " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return out;
}

std::size_t count_png(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ".png";
  return n;
}

// One small scene shared by the render, sample and eval cases.
const fs::path& scene() {
  static const fs::path dir = [] {
    const fs::path d = root() / "scene";
    REQUIRE(run("gen-scene --seed 3 --resolution 64 --texture-size 64 --out " + d.string()) == 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run("--help") == 0);
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("render") == 2);
  CHECK(run("render --manifest " + (root() / "absent.json").string() + " --out " + (root() / "x").string()) == 2);
}

TEST_CASE("gen-scene") {
  const fs::path a = root() / "gen_a", b = root() / "gen_b";
  REQUIRE(run("gen-scene --seed 7 --resolution 64 --texture-size 64 --out " + a.string()) == 0);
  REQUIRE(run("gen-scene --seed 7 --resolution 64 --texture-size 64 --out " + b.string()) == 0);
  CHECK(tree(a) == tree(b));
  const json manifest = read_json_file(a / "manifest.json");
  CHECK(manifest.at("frames").size() == 5);
  CHECK(manifest.at("targets").size() == 1);
  CHECK(load_mesh(a / manifest.at("mesh").get<std::string>()).vertices().size() == 8);

  CHECK(run("gen-scene --shape sphere --out " + (root() / "gen_bad").string()) == 2);
  CHECK(run("gen-scene --out /proc/nol_unwritable") == 2);

  const fs::path cyl = root() / "gen_cyl";
  REQUIRE(run("gen-scene --shape cylinder --n-sources 3 --augment --resolution 64 --texture-size 64 --out " +
              cyl.string()) == 0);
  CHECK(read_json_file(cyl / "manifest.json").at("frames").size() == 3);
}

TEST_CASE("config file values yield to flags") {
  const fs::path cfg = root() / "gen.json";
  write_file_atomic(cfg, R"({"seed": 7, "resolution": 64, "texture-size": 64, "n-sources": 2})");
  const fs::path a = root() / "cfg_a", b = root() / "cfg_b";
  REQUIRE(run("gen-scene --config " + cfg.string() + " --out " + a.string()) == 0);
  CHECK(read_json_file(a / "manifest.json").at("frames").size() == 2);
  REQUIRE(run("gen-scene --config " + cfg.string() + " --n-sources 4 --out " + b.string()) == 0);
  CHECK(read_json_file(b / "manifest.json").at("frames").size() == 4);
}

TEST_CASE("render") {
  const std::string manifest = (scene() / "manifest.json").string();
  const fs::path plain = root() / "r_plain", refined = root() / "r_refined";
  REQUIRE(run("render --manifest " + manifest + " --gt-poses --no-refine --out " + plain.string()) == 0);
  REQUIRE(run("render --manifest " + manifest + " --gt-poses --out " + refined.string()) == 0);
  CHECK(read_file(plain / "render_0000.png") == read_file(refined / "render_0000.png"));
  CHECK(fs::exists(refined / "traces"));
  CHECK_FALSE(fs::exists(plain / "traces"));
  CHECK(fs::exists(refined / "index.json"));

  const fs::path noisy = root() / "r_noisy";
  REQUIRE(run("render --manifest " + manifest + " --workers 2 --out " + noisy.string()) == 0);
  const Image img = read_png(noisy / "render_0000.png");
  CHECK(img.width() == 64);

  const fs::path hemi = root() / "r_hemi";
  REQUIRE(run("render --manifest " + manifest + " --hemisphere --az-step 90 --el-step 45 --no-refine --out " +
              hemi.string()) == 0);
  CHECK(count_png(hemi) == 8);

  const fs::path inplane = root() / "r_inplane";
  REQUIRE(run("render --manifest " + manifest + " --inplane --no-refine --out " + inplane.string()) == 0);
  CHECK(count_png(inplane) == 7);

  CHECK(run("render --manifest " + manifest + " --k 9 --out " + (root() / "r_bad").string()) == 2);
}

TEST_CASE("render hemisphere default grid") {
  const fs::path hemi = root() / "r_hemi_full";
  REQUIRE(run("render --manifest " + (scene() / "manifest.json").string() + " --hemisphere --no-refine --workers 4 --out " +
              hemi.string()) == 0);
  CHECK(count_png(hemi) == 1296);
}

TEST_CASE("sample") {
  const fs::path manifest = scene() / "manifest.json";
  const fs::path div = root() / "div.json", vis = root() / "vis.json";
  REQUIRE(run("sample --manifest " + manifest.string() + " --strategy diversity --seed 2", div) == 0);
  const json ids = json::parse(read_file(div));
  CHECK(ids.is_array());
  CHECK(ids.size() >= 1);
  CHECK(ids.size() <= 16);

  REQUIRE(run("sample --manifest " + manifest.string() + " --strategy visibility", vis) == 0);
  const json got = json::parse(read_file(vis));

  const json m = read_json_file(manifest);
  const TriangleMesh mesh = load_mesh(scene() / m.at("mesh").get<std::string>());
  const Camera cam = camera_from_json(read_json_file(scene() / m.at("camera").get<std::string>()));
  std::vector<FrameRecord> frames;
  for (const json& f : m.at("frames")) {
    const RigidPose pose = pose_from_json(read_json_file(scene() / f.at("pose").get<std::string>()));
    frames.push_back(make_frame_record(f.at("id").get<std::int64_t>(), pose, mesh, cam));
  }
  json expected = json::array();
  for (const FrameRecord& r : greedy_visibility_sample(frames)) expected.push_back(r.id);
  CHECK(got == expected);

  const fs::path empty = root() / "empty.json";
  write_file_atomic(empty, R"({"mesh": "mesh.obj", "camera": "camera.json", "frames": []})");
  CHECK(run("sample --manifest " + empty.string()) == 2);
  CHECK(run("sample --manifest " + manifest.string() + " --strategy random") == 2);
}

TEST_CASE("eval") {
  const json m = read_json_file(scene() / "manifest.json");
  const std::string mesh = (scene() / m.at("mesh").get<std::string>()).string();
  json poses = json::array();
  json offset = json::array();
  for (const json& f : m.at("frames")) {
    const RigidPose p = pose_from_json(read_json_file(scene() / f.at("pose_gt").get<std::string>()));
    poses.push_back(pose_to_json(p));
    offset.push_back(pose_to_json(RigidPose(p.rotation(), p.translation() + Vec3(0.05, 0, 0))));
  }
  const fs::path gt = root() / "gt.json", off = root() / "off.json", out = root() / "eval.json";
  write_file_atomic(gt, poses.dump());
  write_file_atomic(off, offset.dump());
  REQUIRE(run("eval --mesh " + mesh + " --gt " + gt.string() + " --est " + gt.string(), out) == 0);
  json r = json::parse(read_file(out));
  CHECK(r.at("recall").get<double>() == 1.0);
  CHECK(r.at("rows").size() == 5);

  REQUIRE(run("eval --mesh " + mesh + " --gt " + gt.string() + " --est " + off.string() + " --symmetric", out) == 0);
  r = json::parse(read_file(out));
  CHECK(r.at("recall").get<double>() == 0.0);
  double correct = 0.0;
  for (const json& row : r.at("rows")) correct += row.at("correct").get<bool>();
  CHECK(r.at("recall").get<double>() == correct / r.at("rows").size());

  CHECK(run("eval --mesh " + mesh + " --gt " + gt.string() + " --est " + (root() / "none.json").string()) == 2);
}

TEST_CASE("sweep") {
  const std::string args = "sweep --seed 4 --trials 2 --n-sources 3 --resolution 128 --trans-levels 0 0.01 "
                           "--rot-levels 0 0.05 --diagonal --out ";
  const fs::path a = root() / "sweep_a", b = root() / "sweep_b";
  REQUIRE(run(args + a.string()) == 0);
  REQUIRE(run(args + b.string() + " --workers 3") == 0);
  CHECK(tree(a) == tree(b));
  const std::string csv = read_file(a / "sweep.csv");
  CHECK(csv.rfind("shape,trans_err,rot_err,metric,refined_mean,refined_std,unrefined_mean,unrefined_std,n\n", 0) == 0);
  std::istringstream rows(csv);
  std::string line;
  std::getline(rows, line);
  int lines = 0;
  while (std::getline(rows, line)) {
    ++lines;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    REQUIRE(cols.size() == 9);
    CHECK(cols[8] == "2");
    if (std::stod(cols[1]) == 0.0) CHECK(cols[4] == cols[6]);
  }
  CHECK(lines == 2 * 2 * 3);
  CHECK(read_json_file(a / "sweep.json").is_object());
}
