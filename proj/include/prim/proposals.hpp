#pragma once

#include "prim/render.hpp"

#include <utility>
#include <vector>

namespace prim {

struct SegmentedRegion {
  int id = 0;
  std::vector<int> point_indices;  // into the ViewCloud of view_id
  Vector3d mean_normal = Vector3d::UnitZ();
  double area = 0;
  int view_id = 0;
};

// Greedy region growing over proximity and normal agreement. A point joins a
// region when it lies within spacing_threshold of a member and its normal is
// within angle_threshold_deg of the region's running mean normal. Regions with
// fewer than min_region_size points are dropped; their points stay unassigned.
std::vector<SegmentedRegion> segment_regions(const ViewCloud& cloud, double angle_threshold_deg,
                                             double spacing_threshold, int min_region_size = 30);

// Median nearest-neighbour distance of a cloud (0 for fewer than 2 points).
double median_point_spacing(const PointCloud& cloud);

// Pairs (id_a < id_b) of regions of one view whose closest points are nearer
// than proximity_threshold and whose mean normals are 45..135 degrees apart.
std::vector<std::pair<int, int>> candidate_region_pairs(const std::vector<SegmentedRegion>& regions,
                                                        const ViewCloud& cloud, double proximity_threshold);

// Box spanned by the first region's normal and the second normal's orthogonal
// component; extents are the tight half-spans of both regions' points,
// floored at min_extent.
OrientedBoxd fit_box(const SegmentedRegion& first, const SegmentedRegion& second, const ViewCloud& cloud,
                     double min_extent);

struct ProposalConfig {
  RenderOptions render;
  double angle_threshold_deg = 20.0;
  double spacing_factor = 3.0;    // x median point spacing
  int min_region_size = 30;
  double proximity_factor = 5.0;  // x median point spacing
  double dedup_threshold = 0.9;
  double min_extent_fraction = 0.01;  // x shape diagonal
  int dedup_iou_resolution = 32;
};

struct ProposalSet {
  std::vector<OrientedBoxd> boxes;
  std::vector<double> source_area;       // per box, summed area of its two regions
  std::vector<SegmentedRegion> regions;  // global ids: regions[k].id == k
  std::vector<ViewCloud> views;          // indexed by view id
};

ProposalSet generate_proposals(const TriangleMesh& mesh, const ProposalConfig& config = {});
ProposalSet proposals_from_views(const std::vector<ViewCloud>& views, double shape_diagonal,
                                 const ProposalConfig& config = {});

}  // namespace prim
