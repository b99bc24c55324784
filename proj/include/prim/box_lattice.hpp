#pragma once

#include "prim/geometry.hpp"

namespace prim {

struct LatticeCounts {
  long in_a = 0;
  long in_b = 0;
  long in_both = 0;

  long in_union() const { return in_a + in_b - in_both; }
};

// Counts samples of a resolution^3 lattice of cell centres spanning the joint
// axis-aligned bounds of two boxes. Inside-tests are evaluated row by row as
// exact line/box intervals, so the result equals per-sample point tests but
// costs O(resolution^2). Swapping a and b swaps in_a and in_b exactly.
template <typename Scalar>
LatticeCounts lattice_counts(const OrientedBox<Scalar>& a, const OrientedBox<Scalar>& b, int resolution) {
  LatticeCounts counts;
  Aabb3<Scalar> joint = a.aabb();
  joint.extend(b.aabb());
  const Vec3<Scalar> step = joint.sizes() / Scalar(resolution);
  if ((step.array() <= Scalar(0)).any()) return counts;
  const bool disjoint = !a.aabb().intersects(b.aabb());
  for (int k = 0; k < resolution; ++k) {
    const Scalar z = joint.min().z() + (k + Scalar(0.5)) * step.z();
    for (int j = 0; j < resolution; ++j) {
      const Scalar y = joint.min().y() + (j + Scalar(0.5)) * step.y();
      const Vec3<Scalar> origin(Scalar(0), y, z);
      std::pair<int, int> ra{0, 0}, rb{0, 0};
      if (auto ia = line_interval(a, origin, 0)) {
        ra = sample_range(joint.min().x(), step.x(), resolution, ia->first, ia->second);
      }
      if (auto ib = line_interval(b, origin, 0)) {
        rb = sample_range(joint.min().x(), step.x(), resolution, ib->first, ib->second);
      }
      counts.in_a += ra.second - ra.first;
      counts.in_b += rb.second - rb.first;
      if (!disjoint) {
        const int lo = std::max(ra.first, rb.first);
        const int hi = std::min(ra.second, rb.second);
        if (hi > lo) counts.in_both += hi - lo;
      }
    }
  }
  return counts;
}

template <typename Scalar>
Scalar lattice_iou(const OrientedBox<Scalar>& a, const OrientedBox<Scalar>& b, int resolution) {
  if (!a.aabb().intersects(b.aabb())) return Scalar(0);
  const LatticeCounts c = lattice_counts(a, b, resolution);
  const long u = c.in_union();
  return u > 0 ? Scalar(c.in_both) / Scalar(u) : Scalar(0);
}

}  // namespace prim
