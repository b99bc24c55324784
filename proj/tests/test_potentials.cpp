#include "prim/convex_hull.hpp"
#include "prim/potentials.hpp"
#include "support.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace prim;
using namespace prim::testing;

namespace {

// Grid with every cell whose centre passes `pred` occupied.
template <typename Pred>
VoxelGrid grid_where(const GridSpec& spec, Pred pred) {
  VoxelGrid g(spec);
  for (int k = 0; k < spec.resolution; ++k)
    for (int j = 0; j < spec.resolution; ++j)
      for (int i = 0; i < spec.resolution; ++i) g.set(i, j, k, pred(spec.cell_center(i, j, k)));
  return g;
}

GridSpec cube_spec(double lo, double hi, int n) {
  GridSpec s;
  s.resolution = n;
  s.origin = Vector3d::Constant(lo);
  s.voxel_size = (hi - lo) / n;
  return s;
}

ViewCloud single_view(PointCloud cloud, const CameraView& cam) {
  ViewCloud v;
  v.cloud = std::move(cloud);
  v.camera = cam;
  v.intrinsics = Intrinsics::from_vertical_fov(64, 64, 40);
  v.width = v.height = 64;
  return v;
}

CameraView overhead() { return look_at(Vector3d(0, 0, 5), Vector3d::Zero(), Vector3d::UnitY()); }

// Entropy of the nearest-direction histogram, directions compared by angle.
double entropy_oracle(const std::vector<Vector3d>& local_normals) {
  std::vector<Vector3d> dirs;
  for (int z = -1; z <= 1; ++z)
    for (int y = -1; y <= 1; ++y)
      for (int x = -1; x <= 1; ++x)
        if (x || y || z) dirs.push_back(Vector3d(x, y, z).normalized());
  std::map<int, int> hist;
  for (const auto& n : local_normals) {
    int best = 0;
    double best_angle = 10;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      const double angle = std::acos(std::clamp(n.normalized().dot(dirs[d]), -1.0, 1.0));
      if (angle < best_angle) best_angle = angle, best = static_cast<int>(d);
    }
    ++hist[best];
  }
  double h = 0;
  for (const auto& [bin, count] : hist) {
    const double p = static_cast<double>(count) / local_normals.size();
    h -= p * std::log(p);
  }
  return h;
}

double symmetry_oracle(const OrientedBoxd& box, const PointCloud& c) {
  const std::size_t n = c.size();
  Vector3d mean = Vector3d::Zero();
  for (const auto& p : c.points) mean += p;
  mean /= n;
  Matrix3d cov = Matrix3d::Zero();
  for (const auto& p : c.points) cov += (p - mean) * (p - mean).transpose();
  cov /= n;
  Eigen::SelfAdjointEigenSolver<Matrix3d> eig(cov);
  double num = 0, den = 0;
  for (int x = 0; x < 3; ++x) {
    const Vector3d a = eig.eigenvectors().col(x);
    const double pi = std::max(eig.eigenvalues()[x], 0.0);
    double pos = 0, nrm = 0;
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < n; ++m) {
        const Vector3d r = c.points[m] - 2 * (c.points[m] - mean).dot(a) * a;
        const double d = (r - c.points[j]).norm();
        if (d < best_d) best_d = d, best = m;
      }
      const Vector3d q = c.normals[best] - 2 * c.normals[best].dot(a) * a;
      pos += best_d;
      nrm += 1 - c.normals[j].dot(q);
    }
    num += pi * (pos / (n * box.projected_length(a)) + nrm / n);
    den += pi;
  }
  return num / den;
}

// All eight sign copies of points in the positive octant. With `flip`, each
// copy's normal is negated when an odd number of signs changed.
PointCloud octant_mirrored(std::mt19937_64& rng, int base, bool flip) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  PointCloud c;
  for (int i = 0; i < base; ++i) {
    const Vector3d p(3 * u(rng), 2 * u(rng), u(rng));
    const Vector3d n = Vector3d(u(rng), u(rng), u(rng)).normalized();
    for (int s = 0; s < 8; ++s) {
      const Vector3d sign((s & 1) ? -1 : 1, (s & 2) ? -1 : 1, (s & 4) ? -1 : 1);
      const double parity = flip ? sign.prod() : 1.0;
      c.push_back(sign.cwiseProduct(p), parity * sign.cwiseProduct(n));
    }
  }
  return c;
}

}  // namespace

TEST_CASE("occupancy") {
  const GridSpec spec = cube_spec(-1, 1, 20);
  const OrientedBoxd box = aabb_box(Vector3d(-0.5, -0.5, -0.5), Vector3d(0.5, 0.5, 0.5));
  CHECK(cost_occupancy(box, grid_where(spec, [](const Vector3d&) { return true; })) == 0.0);
  CHECK(cost_occupancy(box, grid_where(spec, [](const Vector3d&) { return false; })) == 1.0);
  // Lower half of the box filled; 10 cells per axis inside.
  const VoxelGrid slab = grid_where(spec, [](const Vector3d& p) { return p.z() < 0; });
  CHECK(std::abs(cost_occupancy(box, slab) - 0.5) <= 1.0 / 1000);
  // No cell centre inside a sliver between centres.
  const OrientedBoxd sliver = aabb_box(Vector3d(0.01, 0.01, 0.01), Vector3d(0.02, 0.02, 0.02));
  CHECK(cost_occupancy(sliver, slab) == 1.0);
}

TEST_CASE("uniformity") {
  std::mt19937_64 rng(11);
  OrientedBoxd box;
  box.source_regions = {0};
  SegmentedRegion region;
  ViewCloud view;
  auto fill = [&](const std::vector<Vector3d>& normals) {
    view.cloud = PointCloud();
    region.point_indices.clear();
    for (std::size_t i = 0; i < normals.size(); ++i) {
      view.cloud.push_back(Vector3d::Zero(), normals[i].normalized());
      region.point_indices.push_back(static_cast<int>(i));
    }
  };

  fill(std::vector<Vector3d>(30, Vector3d(0.1, 0.05, 1)));
  CHECK(cost_uniformity(box, {region}, {view}) == doctest::Approx(0.0));

  std::vector<Vector3d> two;
  for (int i = 0; i < 20; ++i) two.push_back(i % 2 ? Vector3d::UnitX() : Vector3d(0, 1, 1));
  fill(two);
  CHECK(cost_uniformity(box, {region}, {view}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  SUBCASE("hemispherical cap against a histogram oracle") {
    std::normal_distribution<double> g(0, 1);
    std::vector<Vector3d> cap;
    while (cap.size() < 500) {
      Vector3d n(g(rng), g(rng), g(rng));
      if (n.z() > 0) cap.push_back(n.normalized());
    }
    fill(cap);
    box.axes = random_rotation(rng);
    std::vector<Vector3d> local;
    for (const auto& n : cap) local.push_back(box.axes.transpose() * n);
    const double h = cost_uniformity(box, {region}, {view});
    CHECK(std::abs(h - entropy_oracle(local)) <= 1e-6);
    CHECK(h >= 0);
    CHECK(h <= std::log(26.0));
  }
  SUBCASE("bins are the 26 neighbour directions") {
    std::set<int> bins;
    for (int z = -1; z <= 1; ++z)
      for (int y = -1; y <= 1; ++y)
        for (int x = -1; x <= 1; ++x)
          if (x || y || z) bins.insert(normal_direction_bin(Vector3d(x, y, z).normalized()));
    CHECK(bins.size() == 26);
  }
}

TEST_CASE("compactness") {
  const OrientedBoxd box = aabb_box(Vector3d(-0.5, -0.5, -0.5), Vector3d(0.5, 0.5, 0.5));
  const CompactnessOptions opts;  // 16 x 16 cells
  auto top_face = [](double x_max) {
    PointCloud c;
    for (int i = 0; i < 64; ++i)
      for (int j = 0; j < 64; ++j) {
        const Vector3d p(-0.5 + (i + 0.5) / 64, -0.5 + (j + 0.5) / 64, 0.5);
        if (p.x() < x_max) c.push_back(p, Vector3d::UnitZ());
      }
    return c;
  };
  // Only the +z face opposes the overhead view.
  CHECK(cost_compactness(box, {single_view(top_face(1.0), overhead())}, opts) == doctest::Approx(0.0));
  CHECK(cost_compactness(box, {single_view(PointCloud(), overhead())}, opts) == 1.0);
  const double half = cost_compactness(box, {single_view(top_face(0.0), overhead())}, opts);
  CHECK(std::abs(half - 0.5) <= 2.0 / opts.cells);

  // A side camera adds the -x face, which has no points.
  const CameraView side = look_at(Vector3d(-5, 0, 0), Vector3d::Zero());
  const double two = cost_compactness(box, {single_view(top_face(1.0), overhead()), single_view(PointCloud(), side)}, opts);
  // Top-face points within the band of the -x face mark its top row.
  CHECK(std::abs(two - 0.5) <= 1.0 / opts.cells);

  try {
    cost_compactness(box, {}, opts);
    FAIL("expected NoVisibleFaces");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoVisibleFaces);
  }
}

TEST_CASE("support") {
  CHECK(support_ratio(100, 150, 10) == doctest::Approx(2.0));
  CHECK(support_ratio(100, 100, 10) == 10.0);
  CHECK(support_ratio(100, 101, 10) == 10.0);
  CHECK(support_ratio(0, 5, 10) == 0.0);

  const GridSpec spec = cube_spec(-1, 1, 24);
  const OrientedBoxd box = aabb_box(Vector3d(-0.41, -0.33, -0.29), Vector3d(0.37, 0.31, 0.43));
  const VoxelGrid interior = grid_where(spec, [&](const Vector3d& p) { return box.contains(p); });
  CHECK(cost_support(box, interior) == 10.0);

  SUBCASE("random grid against a counting oracle") {
    std::mt19937_64 rng(21);
    std::bernoulli_distribution coin(0.4);
    std::uniform_real_distribution<double> u(-0.4, 0.4), e(0.1, 0.5);
    for (int trial = 0; trial < 20; ++trial) {
      const VoxelGrid g = grid_where(spec, [&](const Vector3d&) { return coin(rng); });
      OrientedBoxd b;
      b.center = Vector3d(u(rng), u(rng), u(rng));
      b.axes = random_rotation(rng);
      b.extents = Vector3d(e(rng), e(rng), e(rng));
      SupportOptions opts;
      OrientedBoxd grown = b;
      for (int a = 0; a < 3; ++a)
        grown.extents[a] = std::max(1.05 * b.extents[a], b.extents[a] + opts.min_shell_cells * spec.voxel_size);
      long n_sc = 0, n_ex = 0;
      for (int k = 0; k < 24; ++k)
        for (int j = 0; j < 24; ++j)
          for (int i = 0; i < 24; ++i) {
            if (!g.at(i, j, k)) continue;
            const Vector3d c = spec.cell_center(i, j, k);
            n_sc += b.contains(c);
            n_ex += grown.contains(c);
          }
      CHECK(cost_support(b, g, opts) == support_ratio(n_sc, n_ex, opts.cap));
    }
  }
}

TEST_CASE("convexity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  const OrientedBoxd box = aabb_box(Vector3d(-2, -2, -2), Vector3d(2, 2, 2));

  SUBCASE("spherical cap facing the camera") {
    PointCloud c;
    while (c.size() < 300) {
      const Vector3d p(u(rng), u(rng), u(rng));
      if (p.z() < 0.3) continue;
      c.push_back(p.normalized(), p.normalized());
    }
    const double co = cost_convexity(box, {single_view(c, overhead())});
    CHECK(co >= 0);
    CHECK(co <= 1e-6);
  }
  SUBCASE("a notch is farther from its frontal hull than its ridges") {
    // z = |x| over y in [-1, 1]: a V opening toward the overhead camera.
    PointCloud c, ridges;
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 10; ++j) {
        const double x = -1 + i / 10.0, y = -1 + j / 5.0;
        c.push_back(Vector3d(x, y, std::abs(x)), Vector3d::UnitZ());
        if (i == 0 || i == 20) ridges.push_back(Vector3d(x, y, std::abs(x)), Vector3d::UnitZ());
      }
    const double notch = cost_convexity(box, {single_view(c, overhead())});
    CHECK(notch > 0.1);
    // Hull-distance oracle: the frontal hull is the cap z = 1, so the mean
    // distance is 1 - mean |x|.
    double mean = 0;
    for (const auto& p : c.points) mean += 1 - p.z();
    CHECK(notch == doctest::Approx(mean / c.size()).epsilon(1e-9));
    ridges.push_back(Vector3d(0, 0, 0.9), Vector3d::UnitZ());
    CHECK(cost_convexity(box, {single_view(ridges, overhead())}) < notch);
  }
  SUBCASE("too few points") {
    PointCloud c;
    for (int i = 0; i < 3; ++i) c.push_back(Vector3d(i * 0.1, 0, 0), Vector3d::UnitZ());
    try {
      cost_convexity(box, {single_view(c, overhead())});
      FAIL("expected NoValidViews");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoValidViews);
    }
  }
}

TEST_CASE("symmetry") {
  std::mt19937_64 rng(8);
  const OrientedBoxd box = aabb_box(Vector3d(-3, -2, -1), Vector3d(3, 2, 1));

  CHECK(std::abs(cost_symmetry(box, octant_mirrored(rng, 20, false))) <= 1e-9);
  CHECK(cost_symmetry(box, octant_mirrored(rng, 20, true)) == doctest::Approx(2.0).epsilon(1e-9));

  SUBCASE("random cloud against an O(n^2) oracle") {
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 5; ++trial) {
      PointCloud c;
      for (int i = 0; i < 80; ++i)
        c.push_back(Vector3d(3 * u(rng), 2 * u(rng), u(rng)), Vector3d(u(rng), u(rng), u(rng) + 2).normalized());
      const double got = cost_symmetry(box, c);
      CHECK(got >= 0);
      CHECK(std::abs(got - symmetry_oracle(box, c)) <= 1e-9);

      // Uniform scaling of cloud and box.
      PointCloud scaled = c;
      for (auto& p : scaled.points) p *= 2.0;
      CHECK(cost_symmetry(box.scaled_extents(2.0), scaled) == got);
      for (auto& p : scaled.points) p *= 1.85;
      CHECK(cost_symmetry(box.scaled_extents(3.7), scaled) == doctest::Approx(got).epsilon(1e-12));
    }
  }
  SUBCASE("too few points") {
    PointCloud c;
    for (int i = 0; i < 9; ++i) c.push_back(Vector3d(i, i * i, 1), Vector3d::UnitZ());
    try {
      cost_symmetry(box, c);
      FAIL("expected TooFewPoints");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooFewPoints);
    }
  }
}

TEST_CASE("fuse_unary") {
  CrfWeights w;
  w.mu_u = Vector6d::Ones();
  w.w = Vector6d::Ones();
  const CostVector c = (CostVector() << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6).finished();
  CHECK(fuse_unary(c, w) == doctest::Approx(2.1));
  w.mu_u.setZero();
  CHECK(fuse_unary(c, w) == 0.0);
  w.mu_u << 1, 0, 0, 0, 0, 0;
  w.w = Vector6d::Constant(2);
  CHECK(fuse_unary(CostVector::Constant(0.5), w) == doctest::Approx(1.0));

  SUBCASE("linear in the costs") {
    // Dyadic values keep every product and sum exact.
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> d(-64, 64);
    CrfWeights v;
    for (int t = 0; t < 6; ++t) {
      v.mu_u[t] = d(rng) / 16.0;
      v.w[t] = (d(rng) + 65) / 32.0;
    }
    for (int trial = 0; trial < 50; ++trial) {
      CostVector a, b;
      for (int t = 0; t < 6; ++t) a[t] = d(rng) / 8.0, b[t] = d(rng) / 8.0;
      CHECK(fuse_unary(a + b, v) == fuse_unary(a, v) + fuse_unary(b, v));
    }
  }
}

TEST_CASE("cuboid iou and overlap") {
  const OrientedBoxd a = aabb_box(Vector3d(0, 0, 0), Vector3d(1, 1, 1));
  const OrientedBoxd shifted = aabb_box(Vector3d(0.5, 0, 0), Vector3d(1.5, 1, 1));
  const OrientedBoxd far = aabb_box(Vector3d(3, 3, 3), Vector3d(4, 4, 4));
  const OrientedBoxd inner = aabb_box(Vector3d(0.2, 0.2, 0.2), Vector3d(0.6, 0.6, 0.6));

  CHECK(cuboid_iou(a, a) == doctest::Approx(1.0));
  CHECK(cuboid_iou(a, far) == 0.0);
  CHECK(std::abs(cuboid_iou(a, shifted, 64) - 1.0 / 3.0) <= 0.02);
  CHECK(cost_pairwise_overlap(a, a) == doctest::Approx(1.0));
  CHECK(cost_pairwise_overlap(a, far) == 0.0);
  CHECK(cost_pairwise_overlap(a, inner) == doctest::Approx(1.0));
  CHECK_THROWS_AS(cuboid_iou(a, a, 8), Error);

  SUBCASE("iou is symmetric and bounded") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-0.5, 0.5), e(0.1, 0.8);
    for (int trial = 0; trial < 50; ++trial) {
      OrientedBoxd p, q;
      p.center = Vector3d(u(rng), u(rng), u(rng));
      q.center = Vector3d(u(rng), u(rng), u(rng));
      p.axes = random_rotation(rng);
      q.axes = random_rotation(rng);
      p.extents = Vector3d(e(rng), e(rng), e(rng));
      q.extents = Vector3d(e(rng), e(rng), e(rng));
      const double iou = cuboid_iou(p, q);
      CHECK(iou == cuboid_iou(q, p));
      CHECK(iou >= 0);
      CHECK(iou <= 1);
    }
  }
}

TEST_CASE("coverage costs") {
  std::vector<SegmentedRegion> r(1);
  r[0].area = 2.5;
  CHECK(coverage_costs(r) == std::vector<double>{1.0});
  r.resize(2);
  r[1].area = 2.5;
  CHECK(coverage_costs(r) == std::vector<double>{0.5, 0.5});
  r[0].area = 1;
  r[1].area = 3;
  CHECK(coverage_costs(r) == std::vector<double>{0.25, 0.75});
  CHECK(coverage_costs({}).empty());
}

TEST_CASE("normaliser calibration") {
  std::vector<CostVector> costs;
  for (int i = 1; i <= 20; ++i) {
    CostVector c = CostVector::Zero();
    c[kOccupancy] = i / 20.0;       // p95 = 0.95
    c[kSupport] = i == 20 ? 4 : 0;  // p95 = 0, max 4
    c[kSymmetry] = 1e-6;            // clamps high
    costs.push_back(c);
  }
  const Vector6d w = calibrate_normalizers(costs);
  CHECK(w[kOccupancy] == doctest::Approx(1 / 0.95));
  CHECK(w[kSupport] == doctest::Approx(0.25));
  CHECK(w[kUniformity] == 1.0);
  CHECK(w[kSymmetry] == 1e3);
  CHECK(calibrate_normalizers({}) == Vector6d::Ones());
}

TEST_CASE("weights validation") {
  CrfWeights w;
  CHECK_NOTHROW(w.validate());
  w.mu_coc = 0;
  CHECK_THROWS_AS(w.validate(), Error);
  CHECK_NOTHROW(w.validate(true));
  w.mu_pw = 0;
  CHECK_THROWS_AS(w.validate(true), Error);
  CHECK(cost_index("sc") == kSupport);
  CHECK(cost_index("xx") == -1);
}

TEST_CASE("point costs are invariant to a joint rigid motion") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  OrientedBoxd box = aabb_box(Vector3d(-1.5, -1, -1), Vector3d(1.5, 1, 1));
  PointCloud c;
  for (int i = 0; i < 200; ++i) {
    const Vector3d p(1.4 * u(rng), 0.9 * u(rng), 0.9 * u(rng));
    c.push_back(p, Vector3d(u(rng), u(rng), 1.5).normalized());
  }
  const double ss = cost_symmetry(box, c);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Affine3d t = random_rigid(rng);
    CHECK(std::abs(cost_symmetry(transform_box(box, t), transform_cloud(c, t)) - ss) <= 1e-6);
  }
}
