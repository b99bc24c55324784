#include "prim/convex_hull.hpp"

#include "prim/error.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace prim {

Vector3d ConvexHull::face_normal(std::size_t f) const {
  const auto& t = faces[f];
  const Vector3d n = (points[t[1]] - points[t[0]]).cross(points[t[2]] - points[t[0]]);
  const double len = n.norm();
  return len > 0 ? Vector3d(n / len) : Vector3d::Zero();
}

Vector3d ConvexHull::face_centroid(std::size_t f) const {
  const auto& t = faces[f];
  return (points[t[0]] + points[t[1]] + points[t[2]]) / 3.0;
}

namespace {

struct Face {
  std::array<int, 3> v;
  Vector3d normal;
  double offset;  // normal . x = offset on the plane
  bool alive = true;
};

Face make_face(const std::vector<Vector3d>& pts, int a, int b, int c) {
  Face f{{a, b, c}, Vector3d::Zero(), 0.0};
  const Vector3d n = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
  const double len = n.norm();
  if (len > 0) f.normal = n / len;
  f.offset = f.normal.dot(pts[a]);
  return f;
}

}  // namespace

ConvexHull convex_hull(const std::vector<Vector3d>& points, double eps) {
  if (points.size() < 4) throw Error(ErrorCode::DegenerateCloud, "convex hull needs at least 4 points");
  const AlignedBox3d bounds = bounds_of(points);
  const double diag = bounds.sizes().norm();
  if (eps < 0) eps = 1e-9 * std::max(diag, 1e-300);
  const int n = static_cast<int>(points.size());

  int i0 = 0;
  for (int i = 1; i < n; ++i) {
    if (points[i].x() < points[i0].x()) i0 = i;
  }
  int i1 = -1;
  double best = 0;
  for (int i = 0; i < n; ++i) {
    const double d = (points[i] - points[i0]).norm();
    if (d > best) best = d, i1 = i;
  }
  if (i1 < 0 || best <= eps) throw Error(ErrorCode::DegenerateCloud, "points coincide");
  const Vector3d dir = (points[i1] - points[i0]).normalized();
  int i2 = -1;
  best = 0;
  for (int i = 0; i < n; ++i) {
    const double d = (points[i] - points[i0]).cross(dir).norm();
    if (d > best) best = d, i2 = i;
  }
  if (i2 < 0 || best <= eps) throw Error(ErrorCode::DegenerateCloud, "points are collinear");
  const Vector3d plane_n = (points[i1] - points[i0]).cross(points[i2] - points[i0]).normalized();
  int i3 = -1;
  best = 0;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(plane_n.dot(points[i] - points[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (i3 < 0 || best <= eps) throw Error(ErrorCode::DegenerateCloud, "points are coplanar");

  std::vector<Face> faces;
  const Vector3d inner = (points[i0] + points[i1] + points[i2] + points[i3]) / 4.0;
  auto add = [&](int a, int b, int c) {
    Face f = make_face(points, a, b, c);
    if (f.normal.dot(inner) > f.offset) {
      std::swap(f.v[1], f.v[2]);
      f = make_face(points, f.v[0], f.v[1], f.v[2]);
    }
    faces.push_back(f);
  };
  add(i0, i1, i2);
  add(i0, i1, i3);
  add(i0, i2, i3);
  add(i1, i2, i3);

  std::vector<int> visible;
  std::set<std::pair<int, int>> edges;
  for (int p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    visible.clear();
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
      if (faces[f].alive && faces[f].normal.dot(points[p]) - faces[f].offset > eps) visible.push_back(f);
    }
    if (visible.empty()) continue;
    edges.clear();
    for (int f : visible) {
      const auto& v = faces[f].v;
      for (int k = 0; k < 3; ++k) edges.emplace(v[k], v[(k + 1) % 3]);
    }
    for (int f : visible) {
      faces[f].alive = false;
      const auto v = faces[f].v;
      for (int k = 0; k < 3; ++k) {
        const int a = v[k], b = v[(k + 1) % 3];
        if (!edges.count({b, a})) faces.push_back(make_face(points, a, b, p));
      }
    }
  }

  ConvexHull hull;
  hull.points = points;
  for (const auto& f : faces) {
    if (f.alive) hull.faces.push_back(f.v);
  }
  return hull;
}

}  // namespace prim
