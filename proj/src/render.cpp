#include "prim/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

namespace prim {

Intrinsics Intrinsics::from_vertical_fov(int width, int height, double fov_deg) {
  Intrinsics k;
  const double half = fov_deg * std::numbers::pi / 360.0;
  k.fy = (height / 2.0) / std::tan(half);
  k.fx = k.fy;
  k.cx = (width - 1) / 2.0;
  k.cy = (height - 1) / 2.0;
  return k;
}

CameraView look_at(const Vector3d& eye, const Vector3d& target, const Vector3d& up) {
  const Vector3d f = (target - eye).normalized();
  Vector3d r = f.cross(up);
  if (r.norm() < 1e-12) r = f.cross(Vector3d::UnitY());
  r.normalize();
  const Vector3d d = f.cross(r);
  Matrix3d rot;
  rot.row(0) = r.transpose();
  rot.row(1) = d.transpose();
  rot.row(2) = f.transpose();
  CameraView view;
  view.world_to_camera.linear() = rot;
  view.world_to_camera.translation() = -rot * eye;
  return view;
}

std::vector<CameraView> camera_rig(const AlignedBox3d& bounds, const RigOptions& options) {
  if (bounds.isEmpty() || !(bounds.sizes().norm() > 0)) {
    throw Error(ErrorCode::DegenerateBounds, "camera rig needs bounds with non-zero extent");
  }
  const Vector3d center = bounds.center();
  const double distance = options.distance_factor * bounds.sizes().norm();
  std::vector<CameraView> rig;
  for (int v = 0; v < options.views; ++v) {
    const double az = 360.0 * v / options.views;
    const double el = (v % 2 == 1) ? options.elevation_deg : 0.0;
    const double a = az * std::numbers::pi / 180.0;
    const double e = el * std::numbers::pi / 180.0;
    const Vector3d dir(std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e));
    CameraView view = look_at(center + distance * dir, center);
    view.azimuth_deg = az;
    view.elevation_deg = el;
    rig.push_back(view);
  }
  return rig;
}

Vector3d DepthView::back_project(int u, int v) const {
  const Vector3d local = intrinsics.ray(u, v) * at(u, v);
  return camera.world_to_camera.inverse() * local;
}

// ---------------------------------------------------------------------------
// BVH ray caster

struct MeshRayCaster::Impl {
  struct Node {
    AlignedBox3d box;
    int left = -1, right = -1;
    int begin = 0, end = 0;
  };
  std::vector<Vector3d> a, b, c;
  std::vector<int> order;
  std::vector<Node> nodes;

  int build(int begin, int end, std::vector<Vector3d>& centroids) {
    Node node;
    node.box.setEmpty();
    for (int i = begin; i < end; ++i) {
      const int t = order[i];
      node.box.extend(a[t]);
      node.box.extend(b[t]);
      node.box.extend(c[t]);
    }
    node.begin = begin;
    node.end = end;
    const int id = static_cast<int>(nodes.size());
    nodes.push_back(node);
    if (end - begin <= 4) return id;
    AlignedBox3d cbox;
    cbox.setEmpty();
    for (int i = begin; i < end; ++i) cbox.extend(centroids[order[i]]);
    int axis = 0;
    cbox.sizes().maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](int x, int y) { return centroids[x][axis] < centroids[y][axis]; });
    const int l = build(begin, mid, centroids);
    const int r = build(mid, end, centroids);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }

  static bool slab(const AlignedBox3d& box, const Vector3d& o, const Vector3d& inv, double t_max) {
    double t0 = 0, t1 = t_max;
    for (int k = 0; k < 3; ++k) {
      double n = (box.min()[k] - o[k]) * inv[k];
      double f = (box.max()[k] - o[k]) * inv[k];
      if (n > f) std::swap(n, f);
      if (std::isnan(n) || std::isnan(f)) {
        if (o[k] < box.min()[k] || o[k] > box.max()[k]) return false;
        continue;
      }
      t0 = std::max(t0, n);
      t1 = std::min(t1, f);
      if (t0 > t1) return false;
    }
    return true;
  }
};

MeshRayCaster::MeshRayCaster(const TriangleMesh& mesh) : impl_(std::make_unique<Impl>()) {
  mesh.validate();
  std::vector<Vector3d> centroids;
  for (const auto& f : mesh.faces) {
    impl_->a.push_back(mesh.vertices[f[0]]);
    impl_->b.push_back(mesh.vertices[f[1]]);
    impl_->c.push_back(mesh.vertices[f[2]]);
    centroids.push_back((mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0);
  }
  impl_->order.resize(mesh.faces.size());
  std::iota(impl_->order.begin(), impl_->order.end(), 0);
  impl_->build(0, static_cast<int>(mesh.faces.size()), centroids);
}

MeshRayCaster::~MeshRayCaster() = default;
MeshRayCaster::MeshRayCaster(MeshRayCaster&&) noexcept = default;
MeshRayCaster& MeshRayCaster::operator=(MeshRayCaster&&) noexcept = default;

double MeshRayCaster::cast(const Vector3d& origin, const Vector3d& dir) const {
  const Impl& m = *impl_;
  const Vector3d inv = dir.cwiseInverse();
  double best = std::numeric_limits<double>::infinity();
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Impl::Node& node = m.nodes[stack[--top]];
    if (!Impl::slab(node.box, origin, inv, best)) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int t = m.order[i];
        if (auto hit = ray_triangle(origin, dir, m.a[t], m.b[t], m.c[t]); hit && *hit < best) best = *hit;
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return std::isfinite(best) ? best : 0.0;
}

DepthView render_depth(const MeshRayCaster& caster, const CameraView& camera, const Intrinsics& intrinsics,
                       int width, int height) {
  if (width < 16 || height < 16) throw Error(ErrorCode::InvalidArgument, "depth views need at least 16x16 pixels");
  DepthView view;
  view.width = width;
  view.height = height;
  view.camera = camera;
  view.intrinsics = intrinsics;
  view.depth.assign(static_cast<std::size_t>(width) * height, 0.0);
  const Eigen::Isometry3d cam_to_world = camera.world_to_camera.inverse();
  const Vector3d eye = cam_to_world.translation();
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const Vector3d dir = cam_to_world.linear() * intrinsics.ray(u, v);
      view.depth[static_cast<std::size_t>(v) * width + u] = caster.cast(eye, dir);
    }
  }
  return view;
}

DepthView render_depth(const TriangleMesh& mesh, const CameraView& camera, const Intrinsics& intrinsics,
                       int width, int height) {
  return render_depth(MeshRayCaster(mesh), camera, intrinsics, width, height);
}

// ---------------------------------------------------------------------------
// Normals

Eigen::Vector2d ViewCloud::project(const Vector3d& world_point) const {
  const Vector3d c = camera.world_to_camera * world_point;
  return {intrinsics.fx * c.x() / c.z() + intrinsics.cx, intrinsics.fy * c.y() / c.z() + intrinsics.cy};
}

ViewCloud normals_from_depth(const DepthView& view, const NormalOptions& options) {
  ViewCloud out;
  out.view_id = view.view_id;
  out.camera = view.camera;
  out.intrinsics = view.intrinsics;
  out.width = view.width;
  out.height = view.height;
  const Vector3d eye = view.camera.eye();

  auto usable = [&](int u, int v, double centre) {
    if (u < 0 || v < 0 || u >= view.width || v >= view.height) return false;
    const double d = view.at(u, v);
    return d > 0 && std::abs(d - centre) <= options.max_relative_jump * centre;
  };

  // One-sided tangent along (du, dv): of the two sides, take the one whose
  // next sample continues the step most linearly, so pixels beside a crease
  // or silhouette get the tangent of their own surface.
  auto tangent = [&](int u, int v, int du, int dv, double centre, Vector3d& t) {
    const Vector3d p = view.back_project(u, v);
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int side : {1, -1}) {
      const int u1 = u + side * du, v1 = v + side * dv;
      if (!usable(u1, v1, centre)) continue;
      const Vector3d p1 = view.back_project(u1, v1);
      const int u2 = u1 + side * du, v2 = v1 + side * dv;
      double residual = 1e300;
      if (usable(u2, v2, centre)) residual = (view.back_project(u2, v2) - 2.0 * p1 + p).norm();
      if (!found || residual < best) {
        best = residual;
        t = side * (p1 - p);
        found = true;
      }
    }
    return found;
  };

  for (int v = 0; v < view.height; ++v) {
    for (int u = 0; u < view.width; ++u) {
      const double d = view.at(u, v);
      if (d <= 0) continue;
      Vector3d tu, tv;
      if (!tangent(u, v, 1, 0, d, tu) || !tangent(u, v, 0, 1, d, tv)) continue;
      const Vector3d p = view.back_project(u, v);
      Vector3d n = tu.cross(tv);
      const double len = n.norm();
      if (!(len > 0)) continue;
      n /= len;
      const Vector3d to_point = (p - eye).normalized();
      double facing = n.dot(to_point);
      if (facing > 0) {
        n = -n;
        facing = -facing;
      }
      if (facing > -1e-6) continue;  // grazing
      out.cloud.push_back(p, n);
      out.pixels.emplace_back(u, v);
    }
  }
  return out;
}

std::vector<DepthView> render_views(const TriangleMesh& mesh, const RenderOptions& options) {
  const MeshRayCaster caster(mesh);
  const auto rig = camera_rig(mesh.bounds(), options.rig);
  const Intrinsics k = Intrinsics::from_vertical_fov(options.width, options.height, options.vertical_fov_deg);
  std::vector<DepthView> views;
  for (std::size_t i = 0; i < rig.size(); ++i) {
    DepthView view = render_depth(caster, rig[i], k, options.width, options.height);
    view.view_id = static_cast<int>(i);
    views.push_back(std::move(view));
  }
  return views;
}

void write_depth_pgm(const std::filesystem::path& path, const DepthView& view) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (double d : view.depth) {
    if (d > 0) {
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  out << "P5\n" << view.width << ' ' << view.height << "\n65535\n";
  for (double d : view.depth) {
    unsigned value = 0;
    if (d > 0) {
      const double t = hi > lo ? (d - lo) / (hi - lo) : 0.0;
      value = 1 + static_cast<unsigned>(std::lround(t * 65534.0));
    }
    const char bytes[2] = {static_cast<char>((value >> 8) & 0xff), static_cast<char>(value & 0xff)};
    out.write(bytes, 2);
  }
}

}  // namespace prim
