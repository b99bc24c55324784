#pragma once

#include "prim/eval.hpp"
#include "prim/potentials.hpp"
#include "prim/proposals.hpp"
#include "prim/solver.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace prim {

struct PipelineConfig {
  ProposalConfig proposals;
  int cost_grid_resolution = 64;
  double compactness_band_fraction = 0.02;  // x shape diagonal
  int compactness_cells = 16;
  double compactness_splat_fraction = 0.015;  // x shape diagonal
  double compactness_pixel_footprint = 1.0;
  SupportOptions support;
  ConvexityOptions convexity;
  int symmetry_max_points = 2000;
  double incidence_fraction = 0.5;
  double incidence_margin_fraction = 0.02;  // x shape diagonal
  int overlap_resolution = 32;
  int iou_resolution = 64;
  CrfWeights weights;
  bool calibrate_normalizers = true;
  bool prune_dominated = true;
  double time_limit_s = 30.0;
  int cooc_rounds = 2;  // round 0 without co-occurrence, then rebuilds
  int knn = 5;
  int unary_top_k = 4;
  int frame_samples = 20000;
  int threads = 0;  // 0 = hardware concurrency
  EvalOptions eval;
};

// Every tunable as a string-valued key, shared by CLI flags and config files.
struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};
const std::vector<ConfigKey>& config_keys();
void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);
// JSON object of key -> value; unknown keys throw InvalidArgument.
void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path);
std::string config_json(const PipelineConfig& cfg);

struct PreparedShape {
  std::string id;
  TriangleMesh mesh;
  ShapeContext ctx;
  std::vector<std::string> notes;  // recoverable per-proposal cost failures
};

PreparedShape prepare_shape(TriangleMesh mesh, std::string id, const PipelineConfig& cfg);
CostVector proposal_costs(const OrientedBoxd& box, const ShapeContext& ctx, const PipelineConfig& cfg,
                          std::vector<std::string>* notes = nullptr);

struct SelectOptions {
  double time_limit_s = 30.0;
  bool prune_dominated = true;
};

struct Selection {
  std::vector<int> indices;  // into ctx.proposals
  double energy = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  long nodes = 0;
  int pruned = 0;
  double seconds = 0.0;
};

// Proposal i is dropped when its activation cost psi_i + mu_par is at least
// the largest energy it could remove through coverage and co-occurrence; some
// optimum never selects it.
std::vector<char> dominated_proposals(const ShapeContext& ctx, const CrfWeights& weights);

Selection select_primitives(const ShapeContext& ctx, const CrfWeights& weights, const SelectOptions& options = {});
// Lowest fused unary energies, ties to the lower index.
std::vector<int> unary_top_k(const ShapeContext& ctx, const CrfWeights& weights, int k);

struct ShapeResult {
  std::string id;
  Selection selection;
  std::vector<OrientedBoxd> boxes;
  std::vector<double> energies;  // fused unary per selected box
  VoxelMetrics metrics;
  bool evaluated = false;
};

struct DatasetRun {
  CrfWeights weights;  // after calibration
  int rounds = 0;
  std::vector<ShapeResult> shapes;
  std::vector<std::vector<std::string>> neighbors;
};

enum class SelectionMethod { Crf, UnaryTopK };

DatasetRun run_dataset(std::vector<PreparedShape>& shapes, const PipelineConfig& cfg, bool evaluate = true,
                       SelectionMethod method = SelectionMethod::Crf);

struct AblationRow {
  std::string name;
  double mean_recall = 0, mean_precision = 0, mean_f_measure = 0, mean_count = 0;
};

// "full", one "w/o <cost>" row per dropped cost name, then "unary only (top k)".
std::vector<AblationRow> run_ablation(std::vector<PreparedShape>& shapes, const PipelineConfig& cfg,
                                      const std::vector<std::string>& drop);

// Mean over shape pairs of the matched IoU between selected sets in canonical
// frames (matched IoU total / larger set size).
double selection_consistency(const std::vector<PreparedShape>& shapes, const std::vector<ShapeResult>& results,
                             int iou_resolution = 64);

void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace prim
