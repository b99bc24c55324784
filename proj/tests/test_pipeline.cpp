#include "prim/pipeline.hpp"
#include "prim/serialize.hpp"
#include "prim/synthetic.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace prim;
using namespace prim::testing;

namespace {

std::vector<PreparedShape> prepared_suite(int count, std::uint64_t seed, const PipelineConfig& cfg) {
  std::vector<PreparedShape> out;
  for (auto& s : synthetic_suite(count, seed)) out.push_back(prepare_shape(std::move(s.mesh), s.id, cfg));
  return out;
}

double mean_recall(const DatasetRun& run) {
  double sum = 0;
  for (const auto& s : run.shapes) sum += s.metrics.recall;
  return sum / run.shapes.size();
}

}  // namespace

TEST_CASE("config keys") {
  PipelineConfig cfg;
  set_config_value(cfg, "mu_par", "0.125");
  CHECK(cfg.weights.mu_par == 0.125);
  set_config_value(cfg, "mu_u", "1,2,3,-4,5,6");
  CHECK(cfg.weights.mu_u[kSupport] == -4);
  set_config_value(cfg, "truth_fill", "solid");
  CHECK(cfg.eval.truth_fill == FillMode::Solid);
  CHECK_THROWS_AS(set_config_value(cfg, "no_such_key", "1"), Error);
  CHECK_THROWS_AS(set_config_value(cfg, "truth_fill", "foam"), Error);

  for (const auto& k : config_keys()) {
    PipelineConfig fresh;
    // Every getter's output is accepted by its setter.
    CHECK_NOTHROW(k.set(fresh, k.get(cfg)));
    CHECK(k.get(fresh) == k.get(cfg));
  }

  const auto path = std::filesystem::temp_directory_path() / "prim_test_config.json";
  {
    std::ofstream out(path);
    out << R"({"knn": 3, "calibrate_normalizers": false, "w": [1, 2, 3, 4, 5, 6]})";
  }
  PipelineConfig from_file;
  apply_config_file(from_file, path);
  CHECK(from_file.knn == 3);
  CHECK_FALSE(from_file.calibrate_normalizers);
  CHECK(from_file.weights.w[5] == 6);
  std::filesystem::remove(path);
}

TEST_CASE("unary-only baseline keeps min(k, n)") {
  ShapeContext ctx;
  ctx.proposals.resize(3);
  ctx.unary = {CostVector::Constant(0.3), CostVector::Constant(0.1), CostVector::Constant(0.2)};
  const auto top = unary_top_k(ctx, CrfWeights(), 4);
  CHECK(top.size() == 3);
  CHECK(unary_top_k(ctx, CrfWeights(), 2) == std::vector<int>{1, 2});
}

TEST_CASE("dominated proposals are never needed") {
  for (int seed = 0; seed < 30; ++seed) {
    const RandomCrf r = random_crf(2000 + seed);
    const MilpProblem p = build_milp(r.ctx, r.weights);
    const double optimum = solve_exhaustive(p).objective_value;
    SelectOptions pruned;
    pruned.prune_dominated = true;
    const Selection s = select_primitives(r.ctx, r.weights, pruned);
    CHECK(std::abs(s.energy - optimum) <= 1e-9);
  }
}

TEST_CASE("synthetic shapes") {
  const SyntheticShape s = synthetic_shape(4);
  CHECK(s.boxes.size() >= 2);
  CHECK(s.boxes.size() <= 4);
  CHECK(s.mesh.faces.size() == 12 * s.boxes.size());
  for (std::size_t i = 0; i < s.boxes.size(); ++i)
    for (std::size_t j = i + 1; j < s.boxes.size(); ++j) CHECK_FALSE(s.boxes[i].aabb().intersects(s.boxes[j].aabb()));
  const SyntheticShape again = synthetic_shape(4);
  CHECK(again.mesh.vertices == s.mesh.vertices);
  const auto copies = jittered_copies(s, 3, 1);
  REQUIRE(copies.size() == 3);
  CHECK(copies[0].mesh.vertices != copies[1].mesh.vertices);
}

TEST_CASE("serialisation round trips") {
  std::mt19937_64 rng(30);
  std::vector<OrientedBoxd> boxes(3);
  for (auto& b : boxes) {
    b.axes = random_rotation(rng);
    b.center = Vector3d(0.5, -1, 2);
    b.source_regions = {1, 4};
  }
  std::stringstream buf;
  write_boxes_json(buf, boxes);
  const auto back = read_boxes_json(buf);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].axes == boxes[i].axes);
    CHECK(back[i].center == boxes[i].center);
    CHECK(back[i].source_regions == boxes[i].source_regions);
  }

  const RandomCrf r = random_crf(44);
  std::stringstream bundle;
  write_context_bundle(bundle, r.ctx);
  const ShapeContext ctx = read_context_bundle(bundle);
  const MilpProblem a = build_milp(r.ctx, r.weights), b = build_milp(ctx, r.weights);
  CHECK(solve_exhaustive(a).objective_value == solve_exhaustive(b).objective_value);
}

TEST_CASE("dataset runs") {
  PipelineConfig cfg;
  cfg.cooc_rounds = 1;
  auto shapes = prepared_suite(6, 3, cfg);
  const DatasetRun full = run_dataset(shapes, cfg);
  REQUIRE(full.shapes.size() == 6);
  for (const auto& s : full.shapes) {
    CHECK(s.evaluated);
    CHECK(s.boxes.size() == s.selection.indices.size());
  }

  SUBCASE("empty drop set reproduces the full run") {
    const auto rows = run_ablation(shapes, cfg, {});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].name == "full");
    CHECK(rows[0].mean_recall == mean_recall(full));
    const DatasetRun again = run_dataset(shapes, cfg);
    for (std::size_t i = 0; i < full.shapes.size(); ++i)
      CHECK(again.shapes[i].selection.indices == full.shapes[i].selection.indices);
  }
}

// The occupancy term rewards boxes that avoid empty space, which on hollow
// ground truth costs recall; see the README.
TEST_CASE("dropping occupancy does not raise recall" * doctest::may_fail()) {
  PipelineConfig cfg;
  cfg.cooc_rounds = 1;
  auto shapes = prepared_suite(12, 1, cfg);
  const auto rows = run_ablation(shapes, cfg, {"oc"});
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].mean_recall <= rows[0].mean_recall);
}
