#pragma once

#include "prim/proposals.hpp"
#include "prim/shape_io.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace prim {

using Vector6d = Eigen::Matrix<double, 6, 1>;

// Unary cost entries, in the order the fused weight vectors use.
enum CostIndex : int { kOccupancy = 0, kUniformity, kCompactness, kSupport, kConvexity, kSymmetry };
inline constexpr std::array<std::string_view, 6> kCostNames{"oc", "su", "pc", "sc", "co", "ss"};
int cost_index(std::string_view name);  // -1 when unknown

using CostVector = Vector6d;

struct CrfWeights {
  Vector6d mu_u = (Vector6d() << 1.0, 0.5, 1.0, -0.5, 0.5, 0.5).finished();
  Vector6d w = Vector6d::Ones();
  double mu_pw = 2.0;
  double mu_par = 0.05;
  double mu_cov = -3.0;
  double mu_coc = -0.5;

  // mu_pw > 0, mu_par > 0, mu_cov < 0, mu_coc < 0, w > 0. With
  // allow_disabled_terms the two higher-order weights may also be exactly 0,
  // which switches those potentials off.
  void validate(bool allow_disabled_terms = false) const;
};

// ---------------------------------------------------------------------------
// Unary costs

// Fraction of grid cell centres inside the box that are empty; 1 when no
// centre falls inside.
double cost_occupancy(const OrientedBoxd& box, const VoxelGrid& grid);

// Mean Shannon entropy (nats) of each source region's normal histogram over 26
// directions of the box frame.
double cost_uniformity(const OrientedBoxd& box, const std::vector<SegmentedRegion>& regions,
                       const std::vector<ViewCloud>& clouds);
int normal_direction_bin(const Vector3d& local_normal);

struct CompactnessOptions {
  int cells = 16;            // face raster is cells x cells
  double face_band = 0.02;   // absolute distance from the face plane
  double splat_radius = 0.0; // absolute footprint of one point on the face
  // Pixels covered by one point across its ray (0 = off). The footprint is
  // stretched by 1 / cos of the incidence angle along the ray.
  double pixel_footprint = 0.0;
};

// Mean uncovered face-area fraction over the box faces whose outward normal
// opposes at least one camera viewing direction.
double cost_compactness(const OrientedBoxd& box, const std::vector<ViewCloud>& clouds,
                        const CompactnessOptions& options = {});

// n_sc / (n_ex - n_sc), never above `cap`; `cap` when the shell is empty.
double support_ratio(long n_support, long n_extended, double cap);

struct SupportOptions {
  double enlarge = 0.05;
  double cap = 10.0;
  // The shell is at least this many voxels thick. A 5% shell is thinner than a
  // cell on coarse grids, which turns the ratio into quantisation noise.
  double min_shell_cells = 1.0;
};

// support_ratio over occupied cells in the box and in the box grown by
// `enlarge` (per-axis, at least min_shell_cells voxels).
double cost_support(const OrientedBoxd& box, const VoxelGrid& grid, const SupportOptions& options = {});

struct ConvexityOptions {
  int max_points_per_view = 400;  // deterministic stride subsampling above this
};

// Mean distance of in-box points to the camera-facing part of their convex
// hull, averaged over the views with a non-degenerate hull.
double cost_convexity(const OrientedBoxd& box, const std::vector<ViewCloud>& clouds,
                      const ConvexityOptions& options = {});

// Reflective symmetry about the three principal planes of the cloud.
double cost_symmetry(const OrientedBoxd& box, const PointCloud& cloud);

PointCloud points_in_box(const OrientedBoxd& box, const std::vector<ViewCloud>& clouds, double margin = 0.0);

double fuse_unary(const CostVector& costs, const CrfWeights& weights);

// Per-cost normalisers 1 / p95 (nearest rank), clamped to [1e-3, 1e3]. When
// p95 is 0 the largest value stands in; an all-zero cost gets 1.
Vector6d calibrate_normalizers(const std::vector<CostVector>& costs);

// ---------------------------------------------------------------------------
// Pairwise and higher-order costs

double cuboid_iou(const OrientedBoxd& a, const OrientedBoxd& b, int resolution = 64);
double cost_pairwise_overlap(const OrientedBoxd& a, const OrientedBoxd& b, int resolution = 64);
std::vector<double> coverage_costs(const std::vector<SegmentedRegion>& regions);

// Fraction of a region's points inside the box (grown by an absolute margin).
double region_inside_fraction(const OrientedBoxd& box, const SegmentedRegion& region,
                              const std::vector<ViewCloud>& clouds, double margin);

// ---------------------------------------------------------------------------
// Per-shape bundle

struct PairCost {
  int i = 0, j = 0;  // i < j
  double cost = 0;
};

struct CoocEntry {
  int neighbor = 0;   // index of the neighbouring shape
  int primitive = 0;  // index into that shape's selected primitives
  double iou = 0;     // c^coc
};

struct ShapeContext {
  std::string shape_id;
  double diagonal = 1.0;
  VoxelGrid grid;
  std::vector<ViewCloud> clouds;
  std::vector<OrientedBoxd> proposals;
  std::vector<double> source_area;
  std::vector<SegmentedRegion> regions;
  std::vector<CostVector> unary;
  std::vector<double> coverage_costs;
  std::vector<PairCost> overlap;                  // only pairs with positive cost
  std::vector<std::vector<int>> region_boxes;     // proposals i with r_k in b_i
  std::vector<std::vector<CoocEntry>> cooc;       // t_i per proposal
  CanonicalFrame canonical;

  void validate() const;
};

}  // namespace prim
