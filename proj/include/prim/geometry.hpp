#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace prim {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Aabb3 = Eigen::AlignedBox<Scalar, 3>;

// A cuboid primitive. Columns of `axes` are the box's unit axes (right-handed);
// `extents` are half-lengths along those axes.
template <typename Scalar>
struct OrientedBox {
  Vec3<Scalar> center = Vec3<Scalar>::Zero();
  Mat3<Scalar> axes = Mat3<Scalar>::Identity();
  Vec3<Scalar> extents = Vec3<Scalar>::Constant(Scalar(0.5));
  std::vector<int> source_regions;

  Vec3<Scalar> to_local(const Vec3<Scalar>& p) const { return axes.transpose() * (p - center); }
  Vec3<Scalar> to_world(const Vec3<Scalar>& q) const { return center + axes * q; }

  // Closed containment; `margin` grows every half-length by an absolute amount.
  bool contains(const Vec3<Scalar>& p, Scalar margin = Scalar(0)) const {
    const Vec3<Scalar> q = to_local(p);
    return (q.array().abs() <= (extents.array() + margin)).all();
  }

  Scalar volume() const { return Scalar(8) * extents.prod(); }

  std::array<Vec3<Scalar>, 8> corners() const {
    std::array<Vec3<Scalar>, 8> out;
    for (int c = 0; c < 8; ++c) {
      Vec3<Scalar> s((c & 4) ? 1 : -1, (c & 2) ? 1 : -1, (c & 1) ? 1 : -1);
      out[c] = to_world(s.cwiseProduct(extents));
    }
    return out;
  }

  Aabb3<Scalar> aabb() const {
    // Half-widths of the world AABB are |R| * e.
    const Vec3<Scalar> half = axes.cwiseAbs() * extents;
    return Aabb3<Scalar>(center - half, center + half);
  }

  OrientedBox scaled_extents(Scalar factor) const {
    OrientedBox out = *this;
    out.extents *= factor;
    return out;
  }

  // Length of the box's projection onto a unit direction.
  Scalar projected_length(const Vec3<Scalar>& dir) const {
    return Scalar(2) * (axes.transpose() * dir).cwiseAbs().dot(extents);
  }

  template <typename Other>
  OrientedBox<Other> cast() const {
    OrientedBox<Other> out;
    out.center = center.template cast<Other>();
    out.axes = axes.template cast<Other>();
    out.extents = extents.template cast<Other>();
    out.source_regions = source_regions;
    return out;
  }
};

using OrientedBoxd = OrientedBox<double>;
using Vector3d = Vec3<double>;
using Matrix3d = Mat3<double>;
using AlignedBox3d = Aabb3<double>;

template <typename Scalar>
OrientedBox<Scalar> box_from_aabb(const Aabb3<Scalar>& box) {
  OrientedBox<Scalar> out;
  out.center = box.center();
  out.extents = box.sizes() / Scalar(2);
  return out;
}

template <typename Scalar>
bool is_rotation(const Mat3<Scalar>& r, Scalar tol) {
  return (r.transpose() * r - Mat3<Scalar>::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - Scalar(1)) <= tol;
}

// Applies a similarity (rotation possibly with reflection, uniform scale, translation)
// to a box. Reflections are absorbed by negating the third axis so the frame
// stays right-handed; the solid is unchanged because boxes are symmetric.
template <typename Scalar>
OrientedBox<Scalar> transform_box(const OrientedBox<Scalar>& box,
                                  const Eigen::Transform<Scalar, 3, Eigen::Affine>& t) {
  const Mat3<Scalar> linear = t.linear();
  const Scalar scale = std::cbrt(std::abs(linear.determinant()));
  OrientedBox<Scalar> out = box;
  out.center = t * box.center;
  out.axes = (linear / scale) * box.axes;
  if (out.axes.determinant() < 0) out.axes.col(2) = -out.axes.col(2);
  out.extents = box.extents * scale;
  return out;
}

// Parameter interval t for which origin + t * e_axis lies inside the box.
// Returns nullopt for an empty interval.
template <typename Scalar>
std::optional<std::pair<Scalar, Scalar>> line_interval(const OrientedBox<Scalar>& box,
                                                       const Vec3<Scalar>& origin, int axis) {
  Scalar lo = -std::numeric_limits<Scalar>::infinity();
  Scalar hi = std::numeric_limits<Scalar>::infinity();
  const Vec3<Scalar> d = origin - box.center;
  for (int k = 0; k < 3; ++k) {
    const Scalar slope = box.axes(axis, k);
    const Scalar offset = box.axes.col(k).dot(d);
    const Scalar e = box.extents[k];
    if (std::abs(slope) < std::numeric_limits<Scalar>::epsilon()) {
      if (std::abs(offset) > e) return std::nullopt;
      continue;
    }
    Scalar t0 = (-e - offset) / slope;
    Scalar t1 = (e - offset) / slope;
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  if (lo > hi) return std::nullopt;
  return std::make_pair(lo, hi);
}

// Index range [first, last) of samples x_i = start + (i + 0.5) * step, i in [0, n),
// that fall inside [lo, hi].
template <typename Scalar>
std::pair<int, int> sample_range(Scalar start, Scalar step, int n, Scalar lo, Scalar hi) {
  const Scalar a = (lo - start) / step - Scalar(0.5);
  const Scalar b = (hi - start) / step - Scalar(0.5);
  int first = static_cast<int>(std::ceil(a));
  int last = static_cast<int>(std::floor(b)) + 1;
  first = std::clamp(first, 0, n);
  last = std::clamp(last, 0, n);
  if (last < first) last = first;
  return {first, last};
}

// Möller-Trumbore, two-sided. Returns the ray parameter of the hit.
template <typename Scalar>
std::optional<Scalar> ray_triangle(const Vec3<Scalar>& origin, const Vec3<Scalar>& dir,
                                   const Vec3<Scalar>& a, const Vec3<Scalar>& b,
                                   const Vec3<Scalar>& c, Scalar t_min = Scalar(0)) {
  const Vec3<Scalar> e1 = b - a;
  const Vec3<Scalar> e2 = c - a;
  const Vec3<Scalar> p = dir.cross(e2);
  const Scalar det = e1.dot(p);
  if (std::abs(det) < Scalar(1e-14)) return std::nullopt;
  const Scalar inv = Scalar(1) / det;
  const Vec3<Scalar> s = origin - a;
  const Scalar u = s.dot(p) * inv;
  if (u < Scalar(0) || u > Scalar(1)) return std::nullopt;
  const Vec3<Scalar> q = s.cross(e1);
  const Scalar v = dir.dot(q) * inv;
  if (v < Scalar(0) || u + v > Scalar(1)) return std::nullopt;
  const Scalar t = e2.dot(q) * inv;
  if (t <= t_min) return std::nullopt;
  return t;
}

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection 5.1.5).
template <typename Scalar>
Vec3<Scalar> closest_point_on_triangle(const Vec3<Scalar>& p, const Vec3<Scalar>& a,
                                       const Vec3<Scalar>& b, const Vec3<Scalar>& c) {
  const Vec3<Scalar> ab = b - a, ac = c - a, ap = p - a;
  const Scalar d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3<Scalar> bp = p - b;
  const Scalar d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const Scalar vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
  const Vec3<Scalar> cp = p - c;
  const Scalar d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const Scalar vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
  const Scalar va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  const Scalar denom = Scalar(1) / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

template <typename Scalar>
Scalar point_triangle_distance(const Vec3<Scalar>& p, const Vec3<Scalar>& a,
                               const Vec3<Scalar>& b, const Vec3<Scalar>& c) {
  return (p - closest_point_on_triangle(p, a, b, c)).norm();
}

// Separating-axis test between a triangle and an axis-aligned box given by
// center and half-size (Akenine-Möller). Touching counts as overlap.
template <typename Scalar>
bool triangle_aabb_overlap(const Vec3<Scalar>& box_center, const Vec3<Scalar>& half,
                           const Vec3<Scalar>& a, const Vec3<Scalar>& b, const Vec3<Scalar>& c) {
  const Vec3<Scalar> v0 = a - box_center, v1 = b - box_center, v2 = c - box_center;
  const std::array<Vec3<Scalar>, 3> edges{v1 - v0, v2 - v1, v0 - v2};

  for (int k = 0; k < 3; ++k) {
    const Scalar lo = std::min({v0[k], v1[k], v2[k]});
    const Scalar hi = std::max({v0[k], v1[k], v2[k]});
    if (lo > half[k] || hi < -half[k]) return false;
  }

  const Vec3<Scalar> normal = edges[0].cross(edges[1]);
  {
    const Scalar r = half.dot(normal.cwiseAbs());
    const Scalar s = normal.dot(v0);
    if (std::abs(s) > r) return false;
  }

  const std::array<Vec3<Scalar>, 3> verts{v0, v1, v2};
  for (const auto& e : edges) {
    for (int k = 0; k < 3; ++k) {
      Vec3<Scalar> axis = Vec3<Scalar>::Zero();
      axis[k] = 1;
      axis = axis.cross(e);
      if (axis.squaredNorm() < Scalar(1e-30)) continue;
      Scalar lo = std::numeric_limits<Scalar>::infinity();
      Scalar hi = -lo;
      for (const auto& v : verts) {
        const Scalar p = axis.dot(v);
        lo = std::min(lo, p);
        hi = std::max(hi, p);
      }
      const Scalar r = half.dot(axis.cwiseAbs());
      if (lo > r || hi < -r) return false;
    }
  }
  return true;
}

// Separating-axis test between an oriented box and an axis-aligned box.
template <typename Scalar>
bool box_aabb_overlap(const OrientedBox<Scalar>& box, const Vec3<Scalar>& aabb_center,
                      const Vec3<Scalar>& half) {
  const Mat3<Scalar>& r = box.axes;  // columns: box axes in world coords
  const Mat3<Scalar> abs_r = r.cwiseAbs().array() + Scalar(1e-12);
  const Vec3<Scalar> t = box.center - aabb_center;
  const Vec3<Scalar>& e = box.extents;

  for (int i = 0; i < 3; ++i) {
    if (std::abs(t[i]) > half[i] + abs_r.row(i).dot(e)) return false;
  }
  for (int k = 0; k < 3; ++k) {
    if (std::abs(r.col(k).dot(t)) > e[k] + abs_r.col(k).dot(half)) return false;
  }
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      Vec3<Scalar> unit = Vec3<Scalar>::Zero();
      unit[i] = 1;
      const Vec3<Scalar> axis = unit.cross(r.col(k));
      if (axis.squaredNorm() < Scalar(1e-20)) continue;
      const Scalar ra = half.dot(axis.cwiseAbs());
      const Scalar rb = (r.transpose() * axis).cwiseAbs().dot(e);
      if (std::abs(axis.dot(t)) > ra + rb) return false;
    }
  }
  return true;
}

template <typename Scalar>
Aabb3<Scalar> bounds_of(const std::vector<Vec3<Scalar>>& points) {
  Aabb3<Scalar> box;
  box.setEmpty();
  for (const auto& p : points) box.extend(p);
  return box;
}

}  // namespace prim
