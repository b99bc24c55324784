#include "prim/proposals.hpp"

#include "prim/box_lattice.hpp"
#include "prim/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

namespace prim {

double median_point_spacing(const PointCloud& cloud) {
  if (cloud.size() < 2) return 0.0;
  const KdTree<double> tree(cloud.points);
  std::vector<double> d(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    d[i] = std::sqrt(tree.nearest(cloud.points[i], static_cast<int>(i)).squared_distance);
  }
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

std::vector<SegmentedRegion> segment_regions(const ViewCloud& view, double angle_threshold_deg,
                                             double spacing_threshold, int min_region_size) {
  const PointCloud& cloud = view.cloud;
  std::vector<SegmentedRegion> regions;
  if (cloud.empty()) return regions;
  const KdTree<double> tree(cloud.points);
  const double cos_threshold = std::cos(angle_threshold_deg * std::numbers::pi / 180.0);

  std::vector<double> nn_spacing(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    nn_spacing[i] = std::sqrt(tree.nearest(cloud.points[i], static_cast<int>(i)).squared_distance);
    if (!std::isfinite(nn_spacing[i])) nn_spacing[i] = 0.0;
  }

  std::vector<int> label(cloud.size(), -1);
  std::vector<int> queue, neighbours;
  int next_label = 0;
  for (std::size_t seed = 0; seed < cloud.size(); ++seed) {
    if (label[seed] >= 0) continue;
    const int current = next_label++;
    label[seed] = current;
    std::vector<int> members{static_cast<int>(seed)};
    Vector3d normal_sum = cloud.normals[seed];
    Vector3d mean = normal_sum.normalized();
    queue.assign(1, static_cast<int>(seed));
    for (std::size_t head = 0; head < queue.size(); ++head) {
      tree.radius(cloud.points[queue[head]], spacing_threshold, neighbours);
      std::sort(neighbours.begin(), neighbours.end());
      for (int q : neighbours) {
        if (label[q] >= 0) continue;
        if (cloud.normals[q].dot(mean) < cos_threshold) continue;
        label[q] = current;
        members.push_back(q);
        queue.push_back(q);
        normal_sum += cloud.normals[q];
        mean = normal_sum.normalized();
      }
    }
    if (static_cast<int>(members.size()) < min_region_size) {
      // Leave these points unassigned rather than re-seeding them.
      for (int m : members) label[m] = -2;
      continue;
    }
    SegmentedRegion region;
    region.id = static_cast<int>(regions.size());
    region.view_id = view.view_id;
    region.mean_normal = mean;
    std::sort(members.begin(), members.end());
    double spacing = 0;
    for (int m : members) spacing += nn_spacing[m];
    spacing /= static_cast<double>(members.size());
    region.area = static_cast<double>(members.size()) * spacing * spacing;
    region.point_indices = std::move(members);
    if (!(region.area > 0)) continue;
    regions.push_back(std::move(region));
  }
  return regions;
}

std::vector<std::pair<int, int>> candidate_region_pairs(const std::vector<SegmentedRegion>& regions,
                                                        const ViewCloud& view, double proximity_threshold) {
  std::set<std::pair<int, int>> pairs;
  if (regions.size() < 2) return {};
  const PointCloud& cloud = view.cloud;
  std::vector<int> label(cloud.size(), -1);
  for (std::size_t r = 0; r < regions.size(); ++r) {
    for (int idx : regions[r].point_indices) label[idx] = static_cast<int>(r);
  }
  const double max_cos = std::cos(std::numbers::pi / 4.0);
  auto angle_ok = [&](int a, int b) {
    return std::abs(regions[a].mean_normal.dot(regions[b].mean_normal)) <= max_cos + 1e-12;
  };

  const KdTree<double> tree(cloud.points);
  std::vector<int> neighbours;
  const double r2 = proximity_threshold * proximity_threshold;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    for (int idx : regions[r].point_indices) {
      tree.radius(cloud.points[idx], proximity_threshold, neighbours);
      for (int q : neighbours) {
        const int other = label[q];
        if (other < 0 || other == static_cast<int>(r)) continue;
        if ((cloud.points[q] - cloud.points[idx]).squaredNorm() >= r2) continue;
        const int a = std::min(static_cast<int>(r), other);
        const int b = std::max(static_cast<int>(r), other);
        if (angle_ok(a, b)) pairs.emplace(regions[a].id, regions[b].id);
      }
    }
  }
  return {pairs.begin(), pairs.end()};
}

OrientedBoxd fit_box(const SegmentedRegion& first, const SegmentedRegion& second, const ViewCloud& view,
                     double min_extent) {
  const Vector3d n1 = first.mean_normal.normalized();
  const Vector3d n2 = second.mean_normal.normalized();
  if (n1.cross(n2).norm() < 1e-6) throw Error(ErrorCode::DegeneratePair, "region normals are parallel");
  Matrix3d axes;
  axes.col(0) = n1;
  axes.col(1) = (n2 - n2.dot(n1) * n1).normalized();
  axes.col(2) = axes.col(0).cross(axes.col(1));

  Vector3d lo = Vector3d::Constant(std::numeric_limits<double>::infinity());
  Vector3d hi = -lo;
  for (const SegmentedRegion* region : {&first, &second}) {
    for (int idx : region->point_indices) {
      const Vector3d q = axes.transpose() * view.cloud.points[idx];
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
    }
  }
  if (!std::isfinite(lo.x())) throw Error(ErrorCode::DegeneratePair, "regions have no points");
  OrientedBoxd box;
  box.axes = axes;
  box.center = axes * ((lo + hi) / 2.0);
  box.extents = ((hi - lo) / 2.0).cwiseMax(min_extent);
  box.source_regions = {first.id, second.id};
  return box;
}

ProposalSet proposals_from_views(const std::vector<ViewCloud>& views, double shape_diagonal,
                                 const ProposalConfig& config) {
  ProposalSet out;
  out.views = views;
  const double min_extent = config.min_extent_fraction * shape_diagonal;

  std::vector<OrientedBoxd> raw;
  std::vector<double> raw_area;
  for (const ViewCloud& view : out.views) {
    if (view.cloud.empty()) continue;
    const double spacing = median_point_spacing(view.cloud);
    if (!(spacing > 0)) continue;
    auto local = segment_regions(view, config.angle_threshold_deg, config.spacing_factor * spacing,
                                 config.min_region_size);
    const int offset = static_cast<int>(out.regions.size());
    for (auto& r : local) r.id += offset;
    // candidate_region_pairs reports ids, which are now global.
    const auto pairs = candidate_region_pairs(local, view, config.proximity_factor * spacing);
    for (const auto& [a, b] : pairs) {
      const SegmentedRegion& ra = local[a - offset];
      const SegmentedRegion& rb = local[b - offset];
      try {
        raw.push_back(fit_box(ra, rb, view, min_extent));
        raw_area.push_back(ra.area + rb.area);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegeneratePair) throw;
      }
    }
    for (auto& r : local) out.regions.push_back(std::move(r));
  }

  std::vector<int> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return raw_area[a] > raw_area[b]; });
  for (int idx : order) {
    bool keep = true;
    for (const auto& kept : out.boxes) {
      if (lattice_iou(raw[idx], kept, config.dedup_iou_resolution) > config.dedup_threshold) {
        keep = false;
        break;
      }
    }
    if (keep) {
      out.boxes.push_back(raw[idx]);
      out.source_area.push_back(raw_area[idx]);
    }
  }
  return out;
}

ProposalSet generate_proposals(const TriangleMesh& mesh, const ProposalConfig& config) {
  mesh.validate();
  const auto depth_views = render_views(mesh, config.render);
  std::vector<ViewCloud> views;
  views.reserve(depth_views.size());
  for (const auto& dv : depth_views) views.push_back(normals_from_depth(dv, config.render.normals));
  return proposals_from_views(views, mesh.bounds().sizes().norm(), config);
}

}  // namespace prim
