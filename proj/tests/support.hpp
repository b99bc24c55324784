#pragma once

#include "prim/potentials.hpp"
#include "prim/render.hpp"
#include "prim/shape_io.hpp"
#include "prim/solver.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace prim::testing {

inline TriangleMesh unit_cube(const Vector3d& center = Vector3d::Zero(), double side = 1.0) {
  OrientedBoxd box;
  box.center = center;
  box.extents = Vector3d::Constant(side / 2);
  return box_mesh(box);
}

inline OrientedBoxd aabb_box(const Vector3d& lo, const Vector3d& hi) {
  return box_from_aabb(AlignedBox3d(lo, hi));
}

inline Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

inline Eigen::Affine3d random_rigid(std::mt19937_64& rng, double translation = 2.0) {
  std::uniform_real_distribution<double> u(-translation, translation);
  Eigen::Affine3d t = Eigen::Affine3d::Identity();
  t.linear() = random_rotation(rng);
  t.translation() = Vector3d(u(rng), u(rng), u(rng));
  return t;
}

struct RandomCrf {
  ShapeContext ctx;
  CrfWeights weights;
};

struct RandomCrfOptions {
  int max_proposals = 12;
  int max_regions = 10;
  bool cooccurrence = true;
  bool positive_unary = false;  // force every fused unary cost above zero
};

// A CRF instance with random costs, incidence and weights of the admissible
// signs. Geometry is irrelevant to the solver, so boxes are unit placeholders.
inline RandomCrf random_crf(std::uint64_t seed, const RandomCrfOptions& o = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> np(1, o.max_proposals), nr(1, o.max_regions);
  RandomCrf out;
  CrfWeights& w = out.weights;
  for (int t = 0; t < 6; ++t) {
    w.mu_u[t] = 0.1 + u01(rng);
    w.w[t] = 0.2 + 2.0 * u01(rng);
  }
  w.mu_u[kSupport] = -w.mu_u[kSupport];
  w.mu_pw = 0.1 + 3.0 * u01(rng);
  w.mu_par = 0.01 + 0.3 * u01(rng);
  w.mu_cov = -(0.5 + 4.0 * u01(rng));
  w.mu_coc = o.cooccurrence ? -(0.05 + u01(rng)) : 0.0;

  ShapeContext& ctx = out.ctx;
  const int n = np(rng), r = nr(rng);
  ctx.proposals.resize(n);
  for (int i = 0; i < n; ++i) {
    CostVector c;
    for (int t = 0; t < 6; ++t) c[t] = u01(rng);
    c[kSupport] *= 2.0;
    if (o.positive_unary && fuse_unary(c, w) <= 0) c[kSupport] = 0;
    ctx.unary.push_back(c);
  }
  std::vector<double> area(r);
  for (double& a : area) a = 0.05 + u01(rng);
  const double total = std::accumulate(area.begin(), area.end(), 0.0);
  ctx.regions.resize(r);
  ctx.region_boxes.resize(r);
  for (int k = 0; k < r; ++k) {
    ctx.regions[k].id = k;
    ctx.regions[k].area = area[k];
    ctx.coverage_costs.push_back(area[k] / total);
    for (int i = 0; i < n; ++i) {
      if (u01(rng) < 0.3) ctx.region_boxes[k].push_back(i);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (u01(rng) < 0.3) ctx.overlap.push_back({i, j, u01(rng)});
    }
  }
  ctx.cooc.resize(n);
  if (o.cooccurrence) {
    for (int i = 0; i < n; ++i) {
      if (u01(rng) < 0.4) {
        const int entries = 1 + static_cast<int>(u01(rng) * 2);
        for (int e = 0; e < entries; ++e) ctx.cooc[i].push_back({e, 0, 0.05 + 0.95 * u01(rng)});
      }
    }
  }
  return out;
}

// Moves a view cloud and its camera rigidly.
inline ViewCloud transform_view(const ViewCloud& view, const Eigen::Affine3d& t) {
  ViewCloud out = view;
  out.cloud = transform_cloud(view.cloud, t);
  Eigen::Isometry3d iso = Eigen::Isometry3d::Identity();
  iso.linear() = t.linear();
  iso.translation() = t.translation();
  out.camera.world_to_camera = view.camera.world_to_camera * iso.inverse();
  return out;
}

// Quarter turn about +z through the lattice centre, then a shift by whole
// voxels. Returns the grid and the world transform it realises, which is an
// exact relabelling of cells.
inline std::pair<VoxelGrid, Eigen::Affine3d> quarter_turn(const VoxelGrid& grid, const Eigen::Vector3i& shift) {
  const GridSpec& s = grid.spec();
  GridSpec moved = s;
  moved.origin += shift.cast<double>() * s.voxel_size;
  VoxelGrid out(moved);
  const int n = s.resolution;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (grid.at(i, j, k)) out.set(n - 1 - j, i, k, true);
  const Vector3d c = s.origin + Vector3d::Constant(s.side() / 2);
  Eigen::Affine3d t = Eigen::Affine3d::Identity();
  t.linear() = Eigen::AngleAxisd(M_PI / 2, Vector3d::UnitZ()).toRotationMatrix();
  t.translation() = c - t.linear() * c + shift.cast<double>() * s.voxel_size;
  return {out, t};
}

inline int count_selected(const MilpProblem& p, const Solution& s) {
  return static_cast<int>(selected_proposals(p, s).size());
}

// Minimum-weight assignment on the zero-padded square matrix by enumerating
// permutations.
inline double brute_force_assignment(const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(std::max(w.rows(), w.cols()));
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(n, n);
  sq.topLeftCorner(w.rows(), w.cols()) = w;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double t = 0;
    for (int i = 0; i < n; ++i) t += sq(i, perm[i]);
    best = std::min(best, t);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace prim::testing
