#include "prim/synthetic.hpp"

#include <random>

namespace prim {

TriangleMesh jitter_mesh(const TriangleMesh& mesh, double sigma, std::uint64_t seed) {
  TriangleMesh out = mesh;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& v : out.vertices) {
    for (int k = 0; k < 3; ++k) v[k] += noise(rng);
  }
  return out;
}

namespace {

double aabb_gap(const AlignedBox3d& a, const AlignedBox3d& b) {
  const Vector3d d = (a.min() - b.max()).cwiseMax(b.min() - a.max()).cwiseMax(0.0);
  return d.norm();
}

TriangleMesh assemble(const std::vector<OrientedBoxd>& boxes, double jitter_fraction, std::uint64_t seed) {
  TriangleMesh mesh;
  for (const auto& b : boxes) mesh.append(box_mesh(b));
  return jitter_mesh(mesh, jitter_fraction * mesh.bounds().sizes().norm(), seed);
}

}  // namespace

SyntheticShape synthetic_shape(std::uint64_t seed, const SyntheticOptions& options) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count_dist(options.min_boxes, options.max_boxes);
  std::uniform_real_distribution<double> side(options.min_side, options.max_side);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  const int count = count_dist(rng);

  SyntheticShape shape;
  shape.id = "synth_" + std::to_string(seed);
  for (int attempt = 0; static_cast<int>(shape.boxes.size()) < count; ++attempt) {
    if (attempt > 10000) throw Error(ErrorCode::InvalidArgument, "cannot place disjoint boxes");
    OrientedBoxd b;
    b.extents = Vector3d(side(rng), side(rng), side(rng)) / 2.0;
    b.center = Vector3d(pos(rng), pos(rng), pos(rng) * 0.5);
    bool ok = true;
    for (const auto& other : shape.boxes) {
      if (aabb_gap(b.aabb(), other.aabb()) < options.min_gap) ok = false;
    }
    if (ok) shape.boxes.push_back(b);
  }
  shape.mesh = assemble(shape.boxes, options.jitter_fraction, seed ^ 0x9e3779b97f4a7c15ULL);
  return shape;
}

std::vector<SyntheticShape> synthetic_suite(int count, std::uint64_t seed, const SyntheticOptions& options) {
  std::vector<SyntheticShape> out;
  for (int i = 0; i < count; ++i) out.push_back(synthetic_shape(seed + static_cast<std::uint64_t>(i), options));
  return out;
}

std::vector<SyntheticShape> jittered_copies(const SyntheticShape& base, int copies, std::uint64_t seed,
                                            double jitter_fraction) {
  std::vector<SyntheticShape> out;
  for (int c = 0; c < copies; ++c) {
    SyntheticShape s;
    s.id = base.id + "_copy" + std::to_string(c);
    s.boxes = base.boxes;
    s.mesh = assemble(base.boxes, jitter_fraction, seed + static_cast<std::uint64_t>(c));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace prim
