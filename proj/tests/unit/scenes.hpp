#pragma once

#include <cstdint>
#include <vector>

#include "nol/geometry.hpp"
#include "nol/raster.hpp"
#include "nol/rng.hpp"
#include "nol/scenegen.hpp"

namespace nol::testing {

inline TrialSet small_trial(PrimitiveKind kind, std::uint64_t seed, double trans_err = 0.0, double rot_err = 0.0,
                            int n_sources = 5) {
  TrialConfig cfg;
  cfg.resolution = 96;
  cfg.texture_size = 128;
  return make_trial_set(kind, random_target_pose(derive_seed(seed, 7), cfg), n_sources, trans_err, rot_err, seed, cfg);
}

inline std::vector<SourceView> encoded_views(const TrialSet& set, bool perturbed) {
  std::vector<SourceView> views = set.source_views(perturbed);
  for (SourceView& v : views) v = with_features(std::move(v), set.object.mesh, set.camera);
  return views;
}

/// Flat n x n grid of quads spanning [-half, half]^2 at height z, normal +z.
inline TriangleMesh grid_mesh(int n, double half, double z) {
  std::vector<Vec3> vertices;
  std::vector<TriangleMesh::Face> faces;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      vertices.emplace_back(-half + 2.0 * half * j / n, -half + 2.0 * half * i / n, z);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int a = i * (n + 1) + j, b = a + 1, c = a + n + 1, d = c + 1;
      faces.push_back({a, b, d});
      faces.push_back({a, d, c});
    }
  }
  return TriangleMesh(std::move(vertices), std::move(faces));
}

inline TriangleMesh merge(const TriangleMesh& a, const TriangleMesh& b) {
  std::vector<Vec3> vertices = a.vertices();
  std::vector<TriangleMesh::Face> faces = a.faces();
  const int offset = static_cast<int>(vertices.size());
  vertices.insert(vertices.end(), b.vertices().begin(), b.vertices().end());
  for (auto f : b.faces()) faces.push_back({f[0] + offset, f[1] + offset, f[2] + offset});
  return TriangleMesh(std::move(vertices), std::move(faces));
}

inline Image random_image(int h, int w, int c, std::uint64_t seed) {
  Rng rng(seed);
  Image img(h, w, c);
  for (double& x : img.values()) x = rng.uniform();
  return img;
}

}  // namespace nol::testing
