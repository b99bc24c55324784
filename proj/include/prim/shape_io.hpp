#pragma once

#include "prim/error.hpp"
#include "prim/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace prim {

struct TriangleMesh {
  std::vector<Vector3d> vertices;
  std::vector<Eigen::Vector3i> faces;

  // Throws ParseError for out-of-range indices and EmptyMesh when there are no faces.
  void validate() const;
  AlignedBox3d bounds() const;
  double face_area(std::size_t f) const;
  Vector3d face_normal(std::size_t f) const;  // unit; zero for degenerate faces
  double surface_area() const;

  void append(const TriangleMesh& other);
};

struct MeshLoadReport {
  std::vector<std::size_t> degenerate_faces;  // zero-area faces, kept in the mesh
  std::size_t polygons_triangulated = 0;
};

// OFF (primary) or a minimal OBJ subset (v / f lines), chosen by extension.
TriangleMesh load_mesh(const std::filesystem::path& path, MeshLoadReport* report = nullptr);
TriangleMesh read_off(std::istream& in, MeshLoadReport* report = nullptr);
TriangleMesh read_obj(std::istream& in, MeshLoadReport* report = nullptr);
void write_off(std::ostream& out, const TriangleMesh& mesh);
void save_off(const std::filesystem::path& path, const TriangleMesh& mesh);

// Closed 12-triangle mesh of an oriented box, outward winding.
TriangleMesh box_mesh(const OrientedBoxd& box);

// Cubic lattice: cell (i,j,k) spans origin + [i,i+1) * voxel_size along x (etc.).
struct GridSpec {
  int resolution = 0;
  Vector3d origin = Vector3d::Zero();
  double voxel_size = 0.0;

  Vector3d cell_center(int i, int j, int k) const {
    return origin + (Vector3d(i, j, k).array() + 0.5).matrix() * voxel_size;
  }
  double side() const { return resolution * voxel_size; }
  bool same_lattice(const GridSpec& other, double tol = 1e-9) const;

  // Bounding cube of `box`: each side grown by `padding` (fraction of the extent),
  // then made cubic around the box centre.
  static GridSpec bounding_cube(const AlignedBox3d& box, int resolution, double padding = 0.02);
};

class VoxelGrid {
 public:
  VoxelGrid() = default;
  explicit VoxelGrid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int resolution() const { return spec_.resolution; }
  const Vector3d& origin() const { return spec_.origin; }
  double voxel_size() const { return spec_.voxel_size; }

  std::size_t size() const { return occupancy_.size(); }
  std::size_t index(int i, int j, int k) const {
    const std::size_t r = static_cast<std::size_t>(spec_.resolution);
    return static_cast<std::size_t>(i) + r * (static_cast<std::size_t>(j) + r * static_cast<std::size_t>(k));
  }
  bool at(int i, int j, int k) const { return occupancy_[index(i, j, k)] != 0; }
  void set(int i, int j, int k, bool v) { occupancy_[index(i, j, k)] = v ? 1 : 0; }
  bool operator[](std::size_t idx) const { return occupancy_[idx] != 0; }
  void set(std::size_t idx, bool v) { occupancy_[idx] = v ? 1 : 0; }

  // Occupancy of the cell containing p; false outside the grid.
  bool occupied_at(const Vector3d& p) const;
  std::size_t count() const;
  Vector3d cell_center(int i, int j, int k) const { return spec_.cell_center(i, j, k); }
  const std::vector<std::uint8_t>& data() const { return occupancy_; }

 private:
  GridSpec spec_;
  std::vector<std::uint8_t> occupancy_;
};

enum class FillMode { Solid, Hollow };

// Surface voxels (cells that intersect a triangle) plus, in Solid mode, every cell
// unreachable from the grid boundary through empty cells (6-connected).
VoxelGrid voxelize(const TriangleMesh& mesh, int resolution, FillMode fill = FillMode::Solid);
VoxelGrid voxelize(const TriangleMesh& mesh, const GridSpec& lattice, FillMode fill = FillMode::Solid);

enum class BoxRaster { CellCenter, CellOverlap };

// Occupies cells whose centre lies in any box (CellCenter) or whose cell touches
// any box (CellOverlap).
VoxelGrid rasterize_boxes(const std::vector<OrientedBoxd>& boxes, const GridSpec& lattice,
                          BoxRaster rule = BoxRaster::CellCenter);

// Voxel file: see docs/voxel_format.md.
void write_voxels(std::ostream& out, const VoxelGrid& grid);
VoxelGrid read_voxels(std::istream& in);
void save_voxels(const std::filesystem::path& path, const VoxelGrid& grid);
VoxelGrid load_voxels(const std::filesystem::path& path);

struct PointCloud {
  std::vector<Vector3d> points;
  std::vector<Vector3d> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  void push_back(const Vector3d& p, const Vector3d& n) {
    points.push_back(p);
    normals.push_back(n);
  }
  void append(const PointCloud& other);
  // Throws InvalidArgument when normals are not unit length or misaligned.
  void validate(double tol = 1e-6) const;
};

PointCloud sample_surface_points(const TriangleMesh& mesh, int count, std::uint64_t seed);

// Similarity mapping the input cloud into its canonical frame: centred at the
// centroid, principal axes on +x,+y,+z by descending variance, longest principal
// extent 1, axis signs fixed by non-negative third moments.
struct CanonicalFrame {
  Eigen::Affine3d transform = Eigen::Affine3d::Identity();
  Matrix3d rotation = Matrix3d::Identity();  // rows: principal axes
  double scale = 1.0;
  Vector3d centroid = Vector3d::Zero();
};

CanonicalFrame canonical_frame(const std::vector<Vector3d>& points);
std::pair<PointCloud, CanonicalFrame> canonical_align(const PointCloud& cloud);
PointCloud transform_cloud(const PointCloud& cloud, const Eigen::Affine3d& t);
TriangleMesh transform_mesh(const TriangleMesh& mesh, const Eigen::Affine3d& t);

}  // namespace prim
