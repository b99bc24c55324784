#include "prim/potentials.hpp"

#include "prim/box_lattice.hpp"
#include "prim/convex_hull.hpp"
#include "prim/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace prim {

int cost_index(std::string_view name) {
  for (std::size_t i = 0; i < kCostNames.size(); ++i) {
    if (kCostNames[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void CrfWeights::validate(bool allow_disabled_terms) const {
  auto fail = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!mu_u.allFinite() || !w.allFinite()) fail("weights must be finite");
  if ((w.array() <= 0).any()) fail("normalizers w must be positive");
  if (!(mu_pw > 0)) fail("mu_pw must be > 0");
  if (!(mu_par > 0)) fail("mu_par must be > 0");
  if (allow_disabled_terms) {
    if (!(mu_cov <= 0)) fail("mu_cov must be <= 0");
    if (!(mu_coc <= 0)) fail("mu_coc must be <= 0");
  } else {
    if (!(mu_cov < 0)) fail("mu_cov must be < 0");
    if (!(mu_coc < 0)) fail("mu_coc must be < 0");
  }
}

namespace {

// Calls f(cell index) for every grid cell whose centre lies inside the box.
template <typename F>
void for_each_cell_in_box(const VoxelGrid& grid, const OrientedBoxd& box, F&& f) {
  const GridSpec& spec = grid.spec();
  const int r = spec.resolution;
  const double h = spec.voxel_size;
  const AlignedBox3d bb = box.aabb();
  const auto [j0, j1] = sample_range(spec.origin.y(), h, r, bb.min().y(), bb.max().y());
  const auto [k0, k1] = sample_range(spec.origin.z(), h, r, bb.min().z(), bb.max().z());
  for (int k = k0; k < k1; ++k) {
    const double z = spec.origin.z() + (k + 0.5) * h;
    for (int j = j0; j < j1; ++j) {
      const double y = spec.origin.y() + (j + 0.5) * h;
      const auto interval = line_interval(box, Vector3d(0.0, y, z), 0);
      if (!interval) continue;
      const auto [i0, i1] = sample_range(spec.origin.x(), h, r, interval->first, interval->second);
      for (int i = i0; i < i1; ++i) f(grid.index(i, j, k));
    }
  }
}

// Points this close to a box face count as inside. Proposals are fitted to
// extreme points, so many points sit exactly on a face where round-off from a
// rigid motion would flip them in or out.
double face_tolerance(const OrientedBoxd& box) { return 1e-9 * box.extents.maxCoeff(); }

const std::array<Vector3d, 26>& direction_bins() {
  static const std::array<Vector3d, 26> bins = [] {
    std::array<Vector3d, 26> out;
    int n = 0;
    for (int x = -1; x <= 1; ++x)
      for (int y = -1; y <= 1; ++y)
        for (int z = -1; z <= 1; ++z)
          if (x || y || z) out[n++] = Vector3d(x, y, z).normalized();
    return out;
  }();
  return bins;
}

double entropy(const std::array<int, 26>& hist) {
  double total = 0;
  for (int c : hist) total += c;
  if (total <= 0) return 0.0;
  double h = 0;
  for (int c : hist) {
    if (c > 0) {
      const double p = c / total;
      h -= p * std::log(p);
    }
  }
  return h;
}

}  // namespace

double cost_occupancy(const OrientedBoxd& box, const VoxelGrid& grid) {
  long total = 0, empty = 0;
  for_each_cell_in_box(grid, box, [&](std::size_t idx) {
    ++total;
    if (!grid[idx]) ++empty;
  });
  if (total == 0) return 1.0;
  return static_cast<double>(empty) / static_cast<double>(total);
}

int normal_direction_bin(const Vector3d& local_normal) {
  const auto& bins = direction_bins();
  int best = 0;
  double best_dot = -std::numeric_limits<double>::infinity();
  for (int b = 0; b < 26; ++b) {
    const double d = bins[b].dot(local_normal);
    if (d > best_dot) best_dot = d, best = b;
  }
  return best;
}

double cost_uniformity(const OrientedBoxd& box, const std::vector<SegmentedRegion>& regions,
                       const std::vector<ViewCloud>& clouds) {
  if (box.source_regions.empty()) throw Error(ErrorCode::NoSourceRegions, "box has no source regions");
  double sum = 0;
  for (int id : box.source_regions) {
    if (id < 0 || id >= static_cast<int>(regions.size())) {
      throw Error(ErrorCode::InvalidArgument, "unknown source region " + std::to_string(id));
    }
    const SegmentedRegion& region = regions[id];
    const PointCloud& cloud = clouds.at(region.view_id).cloud;
    std::array<int, 26> hist{};
    for (int idx : region.point_indices) ++hist[normal_direction_bin(box.axes.transpose() * cloud.normals[idx])];
    sum += entropy(hist);
  }
  return sum / static_cast<double>(box.source_regions.size());
}

double cost_compactness(const OrientedBoxd& box, const std::vector<ViewCloud>& clouds,
                        const CompactnessOptions& options) {
  const int s = options.cells;
  const double tol = face_tolerance(box);
  struct Near {
    Vector3d local;
    Vector3d ray;        // box frame, unit
    double pixel = 0;    // footprint across the ray
  };
  // Points near the box, gathered once with their viewing ray.
  std::vector<Near> near;
  for (const auto& view : clouds) {
    const Vector3d eye = view.camera.eye();
    const double per_unit = options.pixel_footprint > 0 ? options.pixel_footprint / view.intrinsics.fy : 0.0;
    for (const auto& p : view.cloud.points) {
      if (!box.contains(p, options.face_band + tol)) continue;
      const Vector3d d = p - eye;
      const double dist = d.norm();
      near.push_back({box.to_local(p), box.axes.transpose() * (d / std::max(dist, 1e-300)), per_unit * dist});
    }
  }
  double sum = 0;
  int visible = 0;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(s) * s);
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign : {-1, 1}) {
      const Vector3d normal = sign * box.axes.col(axis);
      bool faces_camera = false;
      for (const auto& view : clouds) {
        if (normal.dot(view.camera.forward()) < 0) {
          faces_camera = true;
          break;
        }
      }
      if (!faces_camera) continue;
      ++visible;
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      const double eu = box.extents[u], ev = box.extents[v];
      const double cu_len = 2 * eu / s, cv_len = 2 * ev / s;
      std::fill(mask.begin(), mask.end(), 0);
      for (const auto& pt : near) {
        const Vector3d& q = pt.local;
        if (std::abs(sign * q[axis] - box.extents[axis]) > options.face_band + tol) continue;
        if (std::abs(q[u]) > eu + tol || std::abs(q[v]) > ev + tol) continue;
        const double fu = (q[u] + eu) / cu_len, fv = (q[v] + ev) / cv_len;
        const int cu = std::clamp(static_cast<int>(fu), 0, s - 1);
        const int cv = std::clamp(static_cast<int>(fv), 0, s - 1);
        mask[static_cast<std::size_t>(cv) * s + cu] = 1;
        // Footprint on the face: a disc of splat_radius joined with the pixel
        // footprint, stretched along the ray's in-plane direction.
        const double across = std::max(options.splat_radius, pt.pixel);
        if (across <= 0) continue;
        Eigen::Vector2d t(pt.ray[u], pt.ray[v]);
        const double cosine = std::max(std::abs(pt.ray[axis]), 0.05);
        double along = std::max(options.splat_radius, pt.pixel / cosine);
        if (t.norm() < 1e-12) {
          t = Eigen::Vector2d::UnitX();
          along = across;
        } else {
          t.normalize();
        }
        const double reach = std::max(across, along);
        const int u0 = std::max(0, static_cast<int>(std::floor(fu - reach / cu_len - 0.5)));
        const int u1 = std::min(s - 1, static_cast<int>(fu + reach / cu_len + 0.5));
        const int v0 = std::max(0, static_cast<int>(std::floor(fv - reach / cv_len - 0.5)));
        const int v1 = std::min(s - 1, static_cast<int>(fv + reach / cv_len + 0.5));
        for (int jv = v0; jv <= v1; ++jv) {
          for (int ju = u0; ju <= u1; ++ju) {
            const Eigen::Vector2d delta((ju + 0.5 - fu) * cu_len, (jv + 0.5 - fv) * cv_len);
            const double a = delta.dot(t) / along;
            const double b = (delta.x() * -t.y() + delta.y() * t.x()) / across;
            if (a * a + b * b <= 1.0) mask[static_cast<std::size_t>(jv) * s + ju] = 1;
          }
        }
      }
      const double covered = static_cast<double>(std::count(mask.begin(), mask.end(), 1)) / (s * s);
      sum += 1.0 - covered;
    }
  }
  if (visible == 0) throw Error(ErrorCode::NoVisibleFaces, "no box face faces a camera");
  return sum / visible;
}

double support_ratio(long n_support, long n_extended, double cap) {
  if (n_extended == n_support) return cap;
  return std::min(cap, static_cast<double>(n_support) / static_cast<double>(n_extended - n_support));
}

double cost_support(const OrientedBoxd& box, const VoxelGrid& grid, const SupportOptions& options) {
  OrientedBoxd grown = box;
  const double shell = options.min_shell_cells * grid.voxel_size();
  for (int a = 0; a < 3; ++a) grown.extents[a] = std::max(box.extents[a] * (1.0 + options.enlarge), box.extents[a] + shell);
  long cells = 0, n_ex = 0, n_sc = 0;
  for_each_cell_in_box(grid, grown, [&](std::size_t idx) {
    ++cells;
    if (grid[idx]) ++n_ex;
  });
  if (cells == 0) throw Error(ErrorCode::EmptyIntersection, "enlarged box contains no grid cell");
  for_each_cell_in_box(grid, box, [&](std::size_t idx) {
    if (grid[idx]) ++n_sc;
  });
  return support_ratio(n_sc, n_ex, options.cap);
}

double cost_convexity(const OrientedBoxd& box, const std::vector<ViewCloud>& clouds,
                      const ConvexityOptions& options) {
  double sum = 0;
  int contributing = 0;
  std::vector<Vector3d> pts;
  const double tol = face_tolerance(box);
  for (const auto& view : clouds) {
    pts.clear();
    for (const auto& p : view.cloud.points) {
      if (box.contains(p, tol)) pts.push_back(p);
    }
    if (pts.size() < 4) continue;
    if (options.max_points_per_view > 0 && static_cast<int>(pts.size()) > options.max_points_per_view) {
      std::vector<Vector3d> sub;
      const std::size_t m = pts.size();
      const std::size_t k = static_cast<std::size_t>(options.max_points_per_view);
      for (std::size_t i = 0; i < k; ++i) sub.push_back(pts[i * m / k]);
      pts.swap(sub);
    }
    ConvexHull hull;
    try {
      hull = convex_hull(pts);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DegenerateCloud) continue;
      throw;
    }
    const Vector3d eye = view.camera.eye();
    std::vector<std::size_t> frontal;
    // Points on one image row or column lie in a plane through the eye, so
    // silhouette faces are edge-on and their sign is round-off. Skip them.
    for (std::size_t f = 0; f < hull.faces.size(); ++f) {
      const Vector3d to_eye = eye - hull.face_centroid(f);
      if (hull.face_normal(f).dot(to_eye) > 1e-6 * to_eye.norm()) frontal.push_back(f);
    }
    if (frontal.empty()) continue;
    double total = 0;
    for (const auto& p : pts) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t f : frontal) {
        const auto& t = hull.faces[f];
        best = std::min(best, point_triangle_distance(p, hull.points[t[0]], hull.points[t[1]], hull.points[t[2]]));
      }
      total += best;
    }
    sum += total / static_cast<double>(pts.size());
    ++contributing;
  }
  if (contributing == 0) throw Error(ErrorCode::NoValidViews, "no view has a non-degenerate point set in the box");
  return sum / contributing;
}

double cost_symmetry(const OrientedBoxd& box, const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n < 10) throw Error(ErrorCode::TooFewPoints, "symmetry needs at least 10 points");
  Vector3d centroid = Vector3d::Zero();
  for (const auto& p : cloud.points) centroid += p;
  centroid /= static_cast<double>(n);
  Matrix3d cov = Matrix3d::Zero();
  for (const auto& p : cloud.points) cov += (p - centroid) * (p - centroid).transpose();
  cov /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix3d> eig(cov);
  const Vector3d pi = eig.eigenvalues().cwiseMax(0.0);
  const double pi_sum = pi.sum();
  if (!(pi_sum > 0)) throw Error(ErrorCode::DegenerateCovariance, "points coincide");

  double cost = 0;
  std::vector<Vector3d> reflected(n);
  for (int x = 0; x < 3; ++x) {
    if (pi[x] <= 0) continue;
    const Vector3d a = eig.eigenvectors().col(x);
    for (std::size_t j = 0; j < n; ++j) {
      reflected[j] = cloud.points[j] - 2.0 * (cloud.points[j] - centroid).dot(a) * a;
    }
    const KdTree<double> tree(reflected);
    double position = 0, normal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto hit = tree.nearest(cloud.points[j]);
      const Vector3d& q = cloud.normals[hit.index];
      const Vector3d q_reflected = q - 2.0 * q.dot(a) * a;
      position += std::sqrt(hit.squared_distance);
      normal += 1.0 - cloud.normals[j].dot(q_reflected);
    }
    const double length = box.projected_length(a);
    const double term = position / (static_cast<double>(n) * length) + normal / static_cast<double>(n);
    cost += pi[x] * term;
  }
  return cost / pi_sum;
}

PointCloud points_in_box(const OrientedBoxd& box, const std::vector<ViewCloud>& clouds, double margin) {
  PointCloud out;
  const double tol = face_tolerance(box);
  for (const auto& view : clouds) {
    for (std::size_t i = 0; i < view.cloud.size(); ++i) {
      if (box.contains(view.cloud.points[i], margin + tol)) out.push_back(view.cloud.points[i], view.cloud.normals[i]);
    }
  }
  return out;
}

double fuse_unary(const CostVector& costs, const CrfWeights& weights) {
  return weights.mu_u.dot(weights.w.cwiseProduct(costs));
}

Vector6d calibrate_normalizers(const std::vector<CostVector>& costs) {
  Vector6d w = Vector6d::Ones();
  if (costs.empty()) return w;
  std::vector<double> column(costs.size());
  for (int t = 0; t < 6; ++t) {
    for (std::size_t i = 0; i < costs.size(); ++i) column[i] = costs[i][t];
    std::sort(column.begin(), column.end());
    const std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(column.size())));
    double scale = column[std::max<std::size_t>(rank, 1) - 1];
    // A cost that is zero on at least 95% of proposals has no percentile
    // scale; use its largest value instead.
    if (!(scale > 0)) scale = column.back();
    const double inv = scale > 0 ? 1.0 / scale : 1.0;
    w[t] = std::clamp(inv, 1e-3, 1e3);
  }
  return w;
}

double cuboid_iou(const OrientedBoxd& a, const OrientedBoxd& b, int resolution) {
  if (resolution < 16) throw Error(ErrorCode::InvalidArgument, "cuboid_iou needs resolution >= 16");
  return lattice_iou(a, b, resolution);
}

double cost_pairwise_overlap(const OrientedBoxd& a, const OrientedBoxd& b, int resolution) {
  if (resolution < 16) throw Error(ErrorCode::InvalidArgument, "overlap needs resolution >= 16");
  if (!a.aabb().intersects(b.aabb())) return 0.0;
  const LatticeCounts c = lattice_counts(a, b, resolution);
  const long smaller = std::min(c.in_a, c.in_b);
  return smaller > 0 ? static_cast<double>(c.in_both) / static_cast<double>(smaller) : 0.0;
}

std::vector<double> coverage_costs(const std::vector<SegmentedRegion>& regions) {
  double total = 0;
  for (const auto& r : regions) total += r.area;
  std::vector<double> out(regions.size(), 0.0);
  if (total > 0) {
    for (std::size_t k = 0; k < regions.size(); ++k) out[k] = regions[k].area / total;
  }
  return out;
}

double region_inside_fraction(const OrientedBoxd& box, const SegmentedRegion& region,
                              const std::vector<ViewCloud>& clouds, double margin) {
  if (region.point_indices.empty()) return 0.0;
  const PointCloud& cloud = clouds.at(region.view_id).cloud;
  std::size_t inside = 0;
  for (int idx : region.point_indices) {
    if (box.contains(cloud.points[idx], margin)) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(region.point_indices.size());
}

void ShapeContext::validate() const {
  if (unary.size() != proposals.size()) throw Error(ErrorCode::InvalidArgument, "unary/proposal count mismatch");
  if (coverage_costs.size() != regions.size()) throw Error(ErrorCode::InvalidArgument, "coverage/region count mismatch");
  if (!region_boxes.empty() && region_boxes.size() != regions.size())
    throw Error(ErrorCode::InvalidArgument, "incidence/region count mismatch");
  if (!cooc.empty() && cooc.size() != proposals.size())
    throw Error(ErrorCode::InvalidArgument, "co-occurrence/proposal count mismatch");
  for (const auto& p : overlap) {
    if (p.i < 0 || p.j <= p.i || p.j >= static_cast<int>(proposals.size()))
      throw Error(ErrorCode::InvalidArgument, "bad overlap pair");
  }
}

}  // namespace prim
