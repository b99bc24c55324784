// Acceptance run: one PASS/FAIL line per criterion. `acceptance N` runs only
// criterion N. Exit status is the number of failed criteria.

#include "prim/codec.hpp"
#include "prim/eval.hpp"
#include "prim/matching.hpp"
#include "prim/pipeline.hpp"
#include "prim/synthetic.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

using namespace prim;
using namespace prim::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr int kSolverInstances = 200;

RandomCrf solver_instance(int i, bool positive_unary = false) {
  RandomCrfOptions o;
  o.max_proposals = 12;
  o.max_regions = 10;
  o.positive_unary = positive_unary;
  return random_crf(1000 + i, o);
}

Outcome solver_optimality() {
  const auto t0 = Clock::now();
  double worst = 0;
  for (int i = 0; i < kSolverInstances; ++i) {
    const RandomCrf inst = solver_instance(i);
    const MilpProblem p = build_milp(inst.ctx, inst.weights);
    const Solution bb = solve_branch_and_bound(p);
    const Solution ex = solve_exhaustive(p);
    if (bb.status != SolveStatus::Optimal) return {false, fmt("instance %d not proven optimal", i)};
    worst = std::max(worst, std::abs(bb.objective_value - ex.objective_value));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 60, fmt("max |bb - exhaustive| = %.3g over %d instances, %.2f s", worst, kSolverInstances, secs)};
}

Outcome matching_optimality() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  double worst_gap = 0, worst_slack = 0, worst_infeasible = 0;
  for (int t = 0; t < 500; ++t) {
    const int rows = dim(rng), cols = (t % 3 == 0) ? rows : dim(rng);
    Eigen::MatrixXd w(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w(i, j) = val(rng);
    const MatchingResult m = bipartite_match(w);
    worst_gap = std::max(worst_gap, std::abs(m.total() - brute_force_assignment(w)));
    for (const Match& e : m.matches) worst_slack = std::max(worst_slack, std::abs(m.z_p[e.p] + m.z_q[e.q] - w(e.p, e.q)));
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) worst_infeasible = std::max(worst_infeasible, m.z_p[i] + m.z_q[j] - w(i, j));
  }
  const bool ok = worst_gap <= 1e-9 && worst_slack <= 1e-9 && worst_infeasible <= 1e-9;
  return {ok, fmt("max optimality gap %.3g, max tight-edge slack %.3g, max dual violation %.3g", worst_gap, worst_slack,
                  worst_infeasible)};
}

// Co-occurrence rewards can pay for a box on their own, so the null-assignment
// property is checked with both higher-order rewards off.
Outcome null_assignment() {
  int nonzero = 0;
  for (int i = 0; i < kSolverInstances; ++i) {
    RandomCrf inst = solver_instance(i, true);
    inst.weights.mu_cov = 0;
    inst.weights.mu_coc = 0;
    const MilpProblem p = build_milp(inst.ctx, inst.weights);
    if (count_selected(p, solve_branch_and_bound(p)) != 0) ++nonzero;
  }
  return {nonzero == 0, fmt("%d of %d instances selected a primitive", nonzero, kSolverInstances)};
}

Outcome parsimony_monotonicity() {
  int violations = 0;
  for (int i = 0; i < kSolverInstances; ++i) {
    RandomCrf inst = solver_instance(i);
    const MilpProblem p1 = build_milp(inst.ctx, inst.weights);
    const int n1 = count_selected(p1, solve_exhaustive(p1));
    inst.weights.mu_par *= 2;
    const MilpProblem p2 = build_milp(inst.ctx, inst.weights);
    const int n2 = count_selected(p2, solve_exhaustive(p2));
    if (n2 > n1) ++violations;
  }
  return {violations == 0, fmt("%d of %d instances grew when mu_par doubled", violations, kSolverInstances)};
}

Outcome metric_reproduction() {
  const double f = f_measure(0.199, 0.830);
  return {std::abs(f - 0.321) <= 0.0005, fmt("f_measure(0.199, 0.830) = %.5f", f)};
}

Outcome synthetic_end_to_end() {
  const auto t0 = Clock::now();
  PipelineConfig cfg;
  cfg.cooc_rounds = 1;
  const auto suite = synthetic_suite(25, 1);
  std::vector<PreparedShape> shapes(suite.size());
  parallel_for(static_cast<int>(suite.size()), cfg.threads,
               [&](int i) { shapes[i] = prepare_shape(suite[i].mesh, suite[i].id, cfg); });
  const DatasetRun run = run_dataset(shapes, cfg, true);
  double recall = 0;
  int over = 0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    recall += run.shapes[i].metrics.recall;
    if (run.shapes[i].boxes.size() > suite[i].boxes.size() + 1) ++over;
  }
  recall /= static_cast<double>(suite.size());
  const double secs = seconds_since(t0);
  return {recall >= 0.90 && over == 0 && secs < 300,
          fmt("mean recall %.4f (need >= 0.90), %d shapes above true count + 1, %.1f s", recall, over, secs)};
}

Outcome geometric_oracles() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0), side(0.2, 1.0);
  double iou_err = 0;
  for (int t = 0; t < 100; ++t) {
    Vector3d la(u(rng), u(rng), u(rng)), lb = la + Vector3d(u(rng), u(rng), u(rng)) * 0.5;
    Vector3d sa(side(rng), side(rng), side(rng)), sb(side(rng), side(rng), side(rng));
    const AlignedBox3d a(la, la + sa), b(lb, lb + sb);
    const double inter = a.intersection(b).isEmpty() ? 0.0 : a.intersection(b).volume();
    const double exact = inter / (a.volume() + b.volume() - inter);
    iou_err = std::max(iou_err, std::abs(cuboid_iou(box_from_aabb(a), box_from_aabb(b), 64) - exact));
  }

  // Mirror-symmetric cloud: every point of a random octant reflected into all
  // eight, normals reflected with it.
  double sym = 0;
  for (int t = 0; t < 5; ++t) {
    PointCloud cloud;
    const Vector3d scale(1.5 + t * 0.1, 1.0, 0.5);
    for (int j = 0; j < 40; ++j) {
      Vector3d p(std::abs(u(rng)), std::abs(u(rng)), std::abs(u(rng)));
      p = p.cwiseProduct(scale);
      Vector3d n = Vector3d(u(rng), u(rng), u(rng)).normalized();
      for (int m = 0; m < 8; ++m) {
        const Vector3d s((m & 1) ? -1 : 1, (m & 2) ? -1 : 1, (m & 4) ? -1 : 1);
        cloud.push_back(p.cwiseProduct(s), n.cwiseProduct(s));
      }
    }
    const Matrix3d r = random_rotation(rng);
    Eigen::Affine3d tr = Eigen::Affine3d::Identity();
    tr.linear() = r;
    tr.translation() = Vector3d(u(rng), u(rng), u(rng));
    const PointCloud moved = transform_cloud(cloud, tr);
    OrientedBoxd box;
    box.center = tr.translation();
    box.axes = r;
    box.extents = scale;
    sym = std::max(sym, cost_symmetry(box, moved));
  }

  // Convex patch: samples of a sphere cap seen from outside.
  double convex = 0;
  {
    ViewCloud view;
    view.camera = look_at(Vector3d(0, 0, 5), Vector3d::Zero());
    for (int j = 0; j < 400; ++j) {
      const double th = 0.6 * std::abs(u(rng)), ph = M_PI * u(rng);
      const Vector3d n(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
      view.cloud.push_back(n, n);
    }
    OrientedBoxd box;
    box.extents = Vector3d::Constant(1.1);
    convex = cost_convexity(box, {view});
  }

  // Rigid invariance on a rendered synthetic shape.
  PipelineConfig cfg;
  const SyntheticShape shape = synthetic_shape(3);
  const PreparedShape prep = prepare_shape(shape.mesh, shape.id, cfg);
  const ShapeContext& ctx = prep.ctx;
  const Eigen::Affine3d motion = random_rigid(rng);
  std::vector<ViewCloud> moved;
  for (const auto& v : ctx.clouds) moved.push_back(transform_view(v, motion));
  const auto [turned, turn] = quarter_turn(ctx.grid, Eigen::Vector3i(3, -2, 1));
  const CompactnessOptions compact{cfg.compactness_cells, cfg.compactness_band_fraction * ctx.diagonal,
                                   cfg.compactness_splat_fraction * ctx.diagonal, cfg.compactness_pixel_footprint};
  double point_err = 0, voxel_err = 0;
  const int checked = std::min<int>(10, static_cast<int>(ctx.proposals.size()));
  for (int i = 0; i < checked; ++i) {
    const OrientedBoxd& b = ctx.proposals[i];
    const OrientedBoxd bm = transform_box(b, motion);
    const OrientedBoxd bt = transform_box(b, turn);
    point_err = std::max(point_err, std::abs(cost_uniformity(b, ctx.regions, ctx.clouds) - cost_uniformity(bm, ctx.regions, moved)));
    point_err = std::max(point_err, std::abs(cost_compactness(b, ctx.clouds, compact) - cost_compactness(bm, moved, compact)));
    point_err = std::max(point_err, std::abs(cost_convexity(b, ctx.clouds) - cost_convexity(bm, moved)));
    point_err = std::max(point_err, std::abs(cost_symmetry(b, points_in_box(b, ctx.clouds)) - cost_symmetry(bm, points_in_box(bm, moved))));
    voxel_err = std::max(voxel_err, std::abs(cost_occupancy(b, ctx.grid) - cost_occupancy(bt, turned)));
    const double s0 = cost_support(b, ctx.grid), s1 = cost_support(bt, turned);
    voxel_err = std::max(voxel_err, std::abs(s0 - s1) / std::max(1.0, std::abs(s0)));
  }
  const bool ok = iou_err <= 0.02 && sym <= 1e-9 && convex <= 1e-6 && point_err <= 1e-6 && voxel_err <= 0.02;
  return {ok, fmt("iou err %.4f, symmetry %.2g, convexity %.2g, point-cost drift %.2g, voxel-cost drift %.2g", iou_err, sym,
                  convex, point_err, voxel_err)};
}

Outcome ablation_property() {
  PipelineConfig cfg;
  cfg.cooc_rounds = 1;
  const auto suite = synthetic_suite(25, 1);
  std::vector<PreparedShape> shapes(suite.size());
  parallel_for(static_cast<int>(suite.size()), cfg.threads,
               [&](int i) { shapes[i] = prepare_shape(suite[i].mesh, suite[i].id, cfg); });
  const auto rows = run_ablation(shapes, cfg, {});
  const double full = rows.front().mean_recall, unary = rows.back().mean_recall;
  return {unary < full, fmt("%s %.4f < %s %.4f", rows.back().name.c_str(), unary, rows.front().name.c_str(), full)};
}

Outcome codec_roundtrip() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ext(0.05, 0.5);
  std::uniform_int_distribution<int> count(1, 6);
  double worst = 1.0;
  for (int t = 0; t < 50; ++t) {
    std::vector<OrientedBoxd> boxes(count(rng));
    for (auto& b : boxes) {
      b.center = Vector3d(u(rng), u(rng), u(rng));
      b.axes = random_rotation(rng);
      b.extents = Vector3d(ext(rng), ext(rng), ext(rng));
    }
    worst = std::min(worst, roundtrip_iou(boxes, 64));
  }
  return {worst >= 0.98, fmt("min voxel IoU %.4f over 50 sets", worst)};
}

Outcome cooccurrence_effect() {
  const SyntheticShape base = synthetic_shape(1);
  const auto copies = jittered_copies(base, 4, 99);
  auto consistency = [&](double mu_coc, int rounds) {
    PipelineConfig cfg;
    cfg.weights.mu_coc = mu_coc;
    cfg.cooc_rounds = rounds;
    std::vector<PreparedShape> shapes(copies.size());
    for (std::size_t i = 0; i < copies.size(); ++i) shapes[i] = prepare_shape(copies[i].mesh, copies[i].id, cfg);
    const DatasetRun run = run_dataset(shapes, cfg, false);
    return selection_consistency(shapes, run.shapes, cfg.iou_resolution);
  };
  const double with = consistency(CrfWeights{}.mu_coc, 2);
  const double without = consistency(0.0, 1);
  return {with >= without, fmt("matched IoU %.4f with co-occurrence vs %.4f without", with, without)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"solver optimality", solver_optimality},
      {"matching optimality", matching_optimality},
      {"null assignment", null_assignment},
      {"parsimony monotonicity", parsimony_monotonicity},
      {"metric reproduction", metric_reproduction},
      {"synthetic end-to-end", synthetic_end_to_end},
      {"geometric cost oracles", geometric_oracles},
      {"ablation harness property", ablation_property},
      {"codec round-trip", codec_roundtrip},
      {"co-occurrence effect", cooccurrence_effect},
  };
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (only && id != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2d %-28s %s  %s\n", id, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed;
}
