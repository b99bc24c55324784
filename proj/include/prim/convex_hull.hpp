#pragma once

#include "prim/geometry.hpp"

#include <array>
#include <vector>

namespace prim {

struct ConvexHull {
  std::vector<Vector3d> points;             // input points, unchanged
  std::vector<std::array<int, 3>> faces;    // outward (counter-clockwise seen from outside)

  Vector3d face_normal(std::size_t f) const;
  Vector3d face_centroid(std::size_t f) const;
};

// Incremental 3D hull. Points within `eps` (absolute; defaults to 1e-9 of the
// point-set diagonal) of a face count as lying on it. Throws DegenerateCloud for
// fewer than 4 points or a (near-)coplanar set.
ConvexHull convex_hull(const std::vector<Vector3d>& points, double eps = -1.0);

}  // namespace prim
