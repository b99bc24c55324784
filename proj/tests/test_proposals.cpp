#include "prim/potentials.hpp"
#include "prim/proposals.hpp"
#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace prim;
using namespace prim::testing;

namespace {

// Grid samples of a planar rectangle spanned by u and v around `center`.
void add_plane(PointCloud& cloud, const Vector3d& center, const Vector3d& u, const Vector3d& v, int nu, int nv,
               std::mt19937_64* rng = nullptr, double sigma = 0.0) {
  const Vector3d n = u.cross(v).normalized();
  std::normal_distribution<double> noise(0.0, sigma);
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      Vector3d p = center + u * ((i + 0.5) / nu - 0.5) + v * ((j + 0.5) / nv - 0.5);
      if (rng) p += Vector3d(noise(*rng), noise(*rng), noise(*rng));
      cloud.push_back(p, n);
    }
  }
}

ViewCloud as_view(PointCloud cloud) {
  ViewCloud v;
  v.cloud = std::move(cloud);
  return v;
}

}  // namespace

TEST_CASE("two separated parallel planes give two regions") {
  PointCloud c;
  add_plane(c, Vector3d(0, 0, 0), Vector3d(1, 0, 0), Vector3d(0, 1, 0), 25, 20);
  add_plane(c, Vector3d(0, 0, 1), Vector3d(1, 0, 0), Vector3d(0, 1, 0), 25, 20);
  const auto regions = segment_regions(as_view(c), 20, 3 * median_point_spacing(c), 30);
  REQUIRE(regions.size() == 2);
  CHECK(regions[0].point_indices.size() == 500);
  CHECK(regions[1].point_indices.size() == 500);
  for (const auto& r : regions) CHECK(r.area > 0);
}

TEST_CASE("an L-shaped dihedral splits at the crease") {
  PointCloud c;
  // Floor in z = 0 for x in [0,1], wall in x = 0 for z in [0,1].
  add_plane(c, Vector3d(0.5, 0.5, 0), Vector3d(1, 0, 0), Vector3d(0, 1, 0), 20, 20);
  add_plane(c, Vector3d(0, 0.5, 0.5), Vector3d(0, 1, 0), Vector3d(0, 0, 1), 20, 20);
  const auto regions = segment_regions(as_view(c), 20, 3 * median_point_spacing(c), 30);
  REQUIRE(regions.size() == 2);
  // Ground truth: the first 400 points are floor, the rest wall.
  for (const auto& r : regions) {
    const bool floor = r.point_indices.front() < 400;
    for (int idx : r.point_indices) CHECK((idx < 400) == floor);
    CHECK(r.point_indices.size() == 400);
  }
}

TEST_CASE("too few points give no region") {
  PointCloud c;
  for (int i = 0; i < 5; ++i) c.push_back(Vector3d(i * 10.0, 0, 0), Vector3d::UnitZ());
  CHECK(segment_regions(as_view(c), 20, 1.0, 20).empty());
}

TEST_CASE("segmentation is a partition") {
  PointCloud c;
  add_plane(c, Vector3d(0.5, 0.5, 0), Vector3d(1, 0, 0), Vector3d(0, 1, 0), 20, 20);
  add_plane(c, Vector3d(0, 0.5, 0.5), Vector3d(0, 1, 0), Vector3d(0, 0, 1), 20, 20);
  add_plane(c, Vector3d(0.5, 0, 0.5), Vector3d(1, 0, 0), Vector3d(0, 0, 1), 20, 20);
  const auto regions = segment_regions(as_view(c), 20, 3 * median_point_spacing(c), 30);
  std::set<int> seen;
  for (const auto& r : regions)
    for (int idx : r.point_indices) CHECK(seen.insert(idx).second);
}

TEST_CASE("candidate pairs") {
  SUBCASE("perpendicular touching planes") {
    PointCloud c;
    add_plane(c, Vector3d(0.5, 0.5, 0), Vector3d(1, 0, 0), Vector3d(0, 1, 0), 20, 20);
    add_plane(c, Vector3d(0, 0.5, 0.5), Vector3d(0, 1, 0), Vector3d(0, 0, 1), 20, 20);
    const ViewCloud v = as_view(c);
    const double h = median_point_spacing(c);
    const auto regions = segment_regions(v, 20, 3 * h, 30);
    CHECK(candidate_region_pairs(regions, v, 5 * h).size() == 1);
  }
  SUBCASE("parallel planes") {
    PointCloud c;
    add_plane(c, Vector3d(0, 0, 0), Vector3d(1, 0, 0), Vector3d(0, 1, 0), 20, 20);
    add_plane(c, Vector3d(0, 0, 0.1), Vector3d(1, 0, 0), Vector3d(0, 1, 0), 20, 20);
    const ViewCloud v = as_view(c);
    const double h = median_point_spacing(c);
    const auto regions = segment_regions(v, 20, 0.07, 30);
    REQUIRE(regions.size() == 2);
    CHECK(candidate_region_pairs(regions, v, 5 * h).empty());
  }
  SUBCASE("three faces of a corner") {
    PointCloud c;
    add_plane(c, Vector3d(0.5, 0.5, 0), Vector3d(1, 0, 0), Vector3d(0, 1, 0), 20, 20);
    add_plane(c, Vector3d(0, 0.5, 0.5), Vector3d(0, 1, 0), Vector3d(0, 0, 1), 20, 20);
    add_plane(c, Vector3d(0.5, 0, 0.5), Vector3d(0, 0, 1), Vector3d(1, 0, 0), 20, 20);
    const ViewCloud v = as_view(c);
    const double h = median_point_spacing(c);
    const auto regions = segment_regions(v, 20, 3 * h, 30);
    REQUIRE(regions.size() == 3);
    // Oracle: every pair of distinct corner faces is perpendicular and touching.
    const auto pairs = candidate_region_pairs(regions, v, 5 * h);
    CHECK(pairs.size() == 3);
    for (const auto& [a, b] : pairs) CHECK(a < b);
  }
}

TEST_CASE("fit_box on two faces of a unit cube") {
  PointCloud c;
  // Top face z = 0.5 and front face y = -0.5 of the cube [-0.5, 0.5]^3.
  add_plane(c, Vector3d(0, 0, 0.5), Vector3d(1, 0, 0), Vector3d(0, 1, 0), 30, 30);
  add_plane(c, Vector3d(0, -0.5, 0), Vector3d(1, 0, 0), Vector3d(0, 0, 1), 30, 30);
  SegmentedRegion top, front;
  top.mean_normal = Vector3d::UnitZ();
  front.mean_normal = -Vector3d::UnitY();
  for (int i = 0; i < 900; ++i) top.point_indices.push_back(i);
  for (int i = 900; i < 1800; ++i) front.point_indices.push_back(i);
  const ViewCloud v = as_view(c);
  const OrientedBoxd box = fit_box(top, front, v, 0.01);
  CHECK(is_rotation(box.axes, 1e-9));
  // The sample grid stops half a spacing short of each edge.
  const double covered = 0.5 * (1.0 - 1.0 / 30);
  for (int a = 0; a < 3; ++a) {
    const double e = box.extents[a];
    CHECK((std::abs(e - covered) <= 0.02 * covered || std::abs(e - 0.5) <= 0.02 * 0.5));
  }

  SUBCASE("jittered points stay within 5% of the clean fit") {
    std::mt19937_64 rng(2);
    PointCloud j;
    add_plane(j, Vector3d(0, 0, 0.5), Vector3d(1, 0, 0), Vector3d(0, 1, 0), 30, 30, &rng, 0.005);
    add_plane(j, Vector3d(0, -0.5, 0), Vector3d(1, 0, 0), Vector3d(0, 0, 1), 30, 30, &rng, 0.005);
    const OrientedBoxd jb = fit_box(top, front, as_view(j), 0.01);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(jb.extents[a] - box.extents[a]) <= 0.05 * box.extents[a]);
  }
  SUBCASE("parallel normals are degenerate") {
    SegmentedRegion also_top = top;
    try {
      fit_box(top, also_top, v, 0.01);
      FAIL("expected DegeneratePair");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegeneratePair);
    }
  }
}

TEST_CASE("proposals for a single box") {
  OrientedBoxd truth;
  truth.extents = Vector3d(0.6, 0.4, 0.3);
  const ProposalSet set = generate_proposals(box_mesh(truth));
  REQUIRE(!set.boxes.empty());
  double best = 0;
  for (const auto& b : set.boxes) best = std::max(best, cuboid_iou(b, truth));
  CHECK(best >= 0.7);
  for (std::size_t k = 0; k < set.regions.size(); ++k) CHECK(set.regions[k].id == static_cast<int>(k));
}

TEST_CASE("proposals for a table include the slab") {
  const OrientedBoxd slab = aabb_box(Vector3d(-1, -0.6, 0.9), Vector3d(1, 0.6, 1.0));
  TriangleMesh table = box_mesh(slab);
  for (double x : {-0.9, 0.8})
    for (double y : {-0.5, 0.4}) table.append(box_mesh(aabb_box(Vector3d(x, y, 0), Vector3d(x + 0.1, y + 0.1, 0.9))));
  const ProposalConfig config;
  const ProposalSet set = generate_proposals(table, config);
  double best = 0;
  for (const auto& b : set.boxes) best = std::max(best, cuboid_iou(b, slab));
  CHECK(best >= 0.5);

  SUBCASE("invariants") {
    for (const auto& b : set.boxes) {
      CHECK(is_rotation(b.axes, 1e-9));
      CHECK((b.extents.array() > 0).all());
      // Source points inside the box grown by 1%.
      int inside = 0;
      const OrientedBoxd grown = b.scaled_extents(1.01);
      for (int rid : b.source_regions) {
        const SegmentedRegion& r = set.regions[rid];
        for (int idx : r.point_indices) inside += grown.contains(set.views[r.view_id].cloud.points[idx]);
      }
      CHECK(inside >= config.min_region_size);
    }
    for (std::size_t i = 0; i < set.boxes.size(); ++i)
      for (std::size_t j = i + 1; j < set.boxes.size(); ++j)
        CHECK(cuboid_iou(set.boxes[i], set.boxes[j], config.dedup_iou_resolution) <= config.dedup_threshold + 1e-12);
  }
}

TEST_CASE("a tiny blob yields no proposals") {
  // A far-away speck stretches the rig so the blob covers a pixel or two.
  OrientedBoxd blob;
  blob.extents = Vector3d::Constant(0.5);
  TriangleMesh m = box_mesh(blob);
  m.append(box_mesh(aabb_box(Vector3d(400, 400, 400), Vector3d(400.01, 400.01, 400.01))));
  const ProposalSet set = generate_proposals(m);
  CHECK(set.boxes.empty());
}
