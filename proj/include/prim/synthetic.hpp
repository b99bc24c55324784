#pragma once

#include "prim/shape_io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace prim {

struct SyntheticOptions {
  int min_boxes = 2;
  int max_boxes = 4;
  double min_side = 0.3;
  double max_side = 0.9;
  double min_gap = 0.25;      // between box AABBs
  double jitter_fraction = 0.005;  // vertex noise sigma / mesh diagonal
};

struct SyntheticShape {
  std::string id;
  TriangleMesh mesh;
  std::vector<OrientedBoxd> boxes;  // before jitter
};

// Disjoint axis-aligned boxes, each an 8-vertex mesh, with Gaussian vertex jitter.
SyntheticShape synthetic_shape(std::uint64_t seed, const SyntheticOptions& options = {});
std::vector<SyntheticShape> synthetic_suite(int count, std::uint64_t seed, const SyntheticOptions& options = {});

// Independent jittered copies of one shape's boxes.
std::vector<SyntheticShape> jittered_copies(const SyntheticShape& base, int copies, std::uint64_t seed,
                                            double jitter_fraction = 0.005);

TriangleMesh jitter_mesh(const TriangleMesh& mesh, double sigma, std::uint64_t seed);

}  // namespace prim
