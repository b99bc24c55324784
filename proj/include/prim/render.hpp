#pragma once

#include "prim/shape_io.hpp"

#include <filesystem>
#include <memory>
#include <vector>

namespace prim {

// Pinhole intrinsics; pixel (u, v) is sampled at its integer coordinate, so the
// principal point of a W x H image is ((W-1)/2, (H-1)/2).
struct Intrinsics {
  double fx = 1, fy = 1, cx = 0, cy = 0;

  static Intrinsics from_vertical_fov(int width, int height, double fov_deg);
  Vector3d ray(double u, double v) const {  // camera frame, unit length
    return Vector3d((u - cx) / fx, (v - cy) / fy, 1.0).normalized();
  }
};

// Camera frame: x right, y down, z along the optical axis.
struct CameraView {
  Eigen::Isometry3d world_to_camera = Eigen::Isometry3d::Identity();
  double azimuth_deg = 0;
  double elevation_deg = 0;

  Vector3d eye() const { return world_to_camera.inverse().translation(); }
  Vector3d forward() const { return world_to_camera.linear().row(2).transpose(); }
};

struct RigOptions {
  double distance_factor = 2.5;  // camera distance / bounds diagonal
  double elevation_deg = 15.0;   // applied to every other view
  int views = 6;
};

// Six views at azimuths 0, 60, ..., 300 degrees about +z, alternating between
// horizontal and elevated, all looking at the bounds centre.
std::vector<CameraView> camera_rig(const AlignedBox3d& bounds, const RigOptions& options = {});
CameraView look_at(const Vector3d& eye, const Vector3d& target, const Vector3d& up = Vector3d::UnitZ());

struct DepthView {
  int width = 0, height = 0;
  std::vector<double> depth;  // row-major, distance along the pixel ray; 0 = miss
  CameraView camera;
  Intrinsics intrinsics;
  int view_id = 0;

  double at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  Vector3d back_project(int u, int v) const;  // world frame
};

// Nearest-hit ray caster over a bounding volume hierarchy.
class MeshRayCaster {
 public:
  explicit MeshRayCaster(const TriangleMesh& mesh);
  ~MeshRayCaster();
  MeshRayCaster(MeshRayCaster&&) noexcept;
  MeshRayCaster& operator=(MeshRayCaster&&) noexcept;

  // Distance along a unit direction to the nearest hit, or 0 for a miss.
  double cast(const Vector3d& origin, const Vector3d& dir) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

DepthView render_depth(const TriangleMesh& mesh, const CameraView& camera, const Intrinsics& intrinsics,
                       int width, int height);
DepthView render_depth(const MeshRayCaster& caster, const CameraView& camera, const Intrinsics& intrinsics,
                       int width, int height);

struct ViewCloud {
  PointCloud cloud;  // world frame
  int view_id = 0;
  CameraView camera;
  Intrinsics intrinsics;
  int width = 0, height = 0;
  std::vector<Eigen::Vector2i> pixels;  // source pixel of each point

  Eigen::Vector2d project(const Vector3d& world_point) const;
};

struct NormalOptions {
  // Neighbours whose depth differs from the centre by more than this fraction
  // of the centre depth are treated as across a discontinuity.
  double max_relative_jump = 0.03;
};

ViewCloud normals_from_depth(const DepthView& view, const NormalOptions& options = {});

struct RenderOptions {
  int width = 128;
  int height = 128;
  double vertical_fov_deg = 40.0;
  RigOptions rig;
  NormalOptions normals;
};

std::vector<DepthView> render_views(const TriangleMesh& mesh, const RenderOptions& options = {});

// 16-bit binary PGM. Hits map linearly from [min depth, max depth] onto
// [1, 65535]; misses are 0. Samples are big-endian.
void write_depth_pgm(const std::filesystem::path& path, const DepthView& view);

}  // namespace prim
