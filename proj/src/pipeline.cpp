#include "prim/pipeline.hpp"

#include "prim/matching.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace prim {

// ---------------------------------------------------------------------------
// Config registry

namespace {

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, key + ": expected a number, got '" + v + "'");
}

int parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d != std::floor(d)) throw Error(ErrorCode::InvalidArgument, key + ": expected an integer");
  return static_cast<int>(d);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw Error(ErrorCode::InvalidArgument, key + ": expected a boolean");
}

Vector6d parse_vec6(const std::string& key, const std::string& v) {
  std::string s = v;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  Vector6d out;
  std::string tok;
  int n = 0;
  while (in >> tok) {
    if (n == 6) throw Error(ErrorCode::InvalidArgument, key + ": expected 6 values");
    out[n++] = parse_double(key, tok);
  }
  if (n != 6) throw Error(ErrorCode::InvalidArgument, key + ": expected 6 values");
  return out;
}

std::string fmt(double d) {
  std::ostringstream s;
  s.precision(17);
  s << d;
  return s.str();
}

std::string fmt(const Vector6d& v) {
  std::string out;
  for (int i = 0; i < 6; ++i) out += (i ? "," : "") + fmt(v[i]);
  return out;
}

template <typename T>
ConfigKey number_key(std::string name, std::string help, T PipelineConfig::*member) {
  return {name, std::move(help),
          [member, name](PipelineConfig& c, const std::string& v) {
            if constexpr (std::is_same_v<T, int>) c.*member = parse_int(name, v);
            else c.*member = parse_double(name, v);
          },
          [member](const PipelineConfig& c) { return fmt(static_cast<double>(c.*member)); }};
}

ConfigKey bool_key(std::string name, std::string help, bool PipelineConfig::*member) {
  return {name, std::move(help), [member, name](PipelineConfig& c, const std::string& v) { c.*member = parse_bool(name, v); },
          [member](const PipelineConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

template <typename Get>
ConfigKey nested_double(std::string name, std::string help, Get get) {
  return {name, std::move(help), [get, name](PipelineConfig& c, const std::string& v) { get(c) = parse_double(name, v); },
          [get](const PipelineConfig& c) { return fmt(get(const_cast<PipelineConfig&>(c))); }};
}

template <typename Get>
ConfigKey nested_int(std::string name, std::string help, Get get) {
  return {name, std::move(help), [get, name](PipelineConfig& c, const std::string& v) { get(c) = parse_int(name, v); },
          [get](const PipelineConfig& c) { return fmt(get(const_cast<PipelineConfig&>(c))); }};
}

std::vector<ConfigKey> make_keys() {
  std::vector<ConfigKey> k;
  k.push_back({"mu_u", "unary cost weights oc,su,pc,sc,co,ss",
               [](PipelineConfig& c, const std::string& v) { c.weights.mu_u = parse_vec6("mu_u", v); },
               [](const PipelineConfig& c) { return fmt(c.weights.mu_u); }});
  k.push_back({"w", "unary normalisers (replaced when calibrate_normalizers is on)",
               [](PipelineConfig& c, const std::string& v) { c.weights.w = parse_vec6("w", v); },
               [](const PipelineConfig& c) { return fmt(c.weights.w); }});
  k.push_back(nested_double("mu_pw", "pairwise overlap weight (> 0)", [](PipelineConfig& c) -> double& { return c.weights.mu_pw; }));
  k.push_back(nested_double("mu_par", "parsimony weight (> 0)", [](PipelineConfig& c) -> double& { return c.weights.mu_par; }));
  k.push_back(nested_double("mu_cov", "coverage weight (< 0)", [](PipelineConfig& c) -> double& { return c.weights.mu_cov; }));
  k.push_back(nested_double("mu_coc", "co-occurrence weight (< 0)", [](PipelineConfig& c) -> double& { return c.weights.mu_coc; }));
  k.push_back(nested_int("render_width", "depth image width", [](PipelineConfig& c) -> int& { return c.proposals.render.width; }));
  k.push_back(nested_int("render_height", "depth image height", [](PipelineConfig& c) -> int& { return c.proposals.render.height; }));
  k.push_back(nested_double("fov_deg", "vertical field of view", [](PipelineConfig& c) -> double& { return c.proposals.render.vertical_fov_deg; }));
  k.push_back(nested_double("camera_distance_factor", "camera distance / shape diagonal",
                            [](PipelineConfig& c) -> double& { return c.proposals.render.rig.distance_factor; }));
  k.push_back(nested_double("elevation_deg", "elevation of every other view",
                            [](PipelineConfig& c) -> double& { return c.proposals.render.rig.elevation_deg; }));
  k.push_back(nested_double("max_depth_jump", "relative depth jump treated as a discontinuity",
                            [](PipelineConfig& c) -> double& { return c.proposals.render.normals.max_relative_jump; }));
  k.push_back(nested_double("angle_threshold_deg", "region growing normal threshold",
                            [](PipelineConfig& c) -> double& { return c.proposals.angle_threshold_deg; }));
  k.push_back(nested_double("spacing_factor", "region growing radius / median point spacing",
                            [](PipelineConfig& c) -> double& { return c.proposals.spacing_factor; }));
  k.push_back(nested_int("min_region_size", "minimum points per region", [](PipelineConfig& c) -> int& { return c.proposals.min_region_size; }));
  k.push_back(nested_double("proximity_factor", "region pair distance / median point spacing",
                            [](PipelineConfig& c) -> double& { return c.proposals.proximity_factor; }));
  k.push_back(nested_double("dedup_threshold", "proposal IoU above which the smaller-area one is dropped",
                            [](PipelineConfig& c) -> double& { return c.proposals.dedup_threshold; }));
  k.push_back(nested_double("min_extent_fraction", "box half-length floor / shape diagonal",
                            [](PipelineConfig& c) -> double& { return c.proposals.min_extent_fraction; }));
  k.push_back(number_key("cost_grid_resolution", "voxel grid for occupancy and support", &PipelineConfig::cost_grid_resolution));
  k.push_back(number_key("compactness_band_fraction", "face band / shape diagonal", &PipelineConfig::compactness_band_fraction));
  k.push_back(number_key("compactness_splat_fraction", "point footprint on box faces / shape diagonal",
                         &PipelineConfig::compactness_splat_fraction));
  k.push_back(number_key("compactness_pixel_footprint", "pixels one point covers on a box face (0 = off)",
                         &PipelineConfig::compactness_pixel_footprint));
  k.push_back(number_key("compactness_cells", "face raster size", &PipelineConfig::compactness_cells));
  k.push_back(nested_double("support_enlarge", "support shell growth", [](PipelineConfig& c) -> double& { return c.support.enlarge; }));
  k.push_back(nested_double("support_cap", "support value with an empty shell", [](PipelineConfig& c) -> double& { return c.support.cap; }));
  k.push_back(nested_double("support_min_shell_cells", "minimum support shell thickness in voxels",
                            [](PipelineConfig& c) -> double& { return c.support.min_shell_cells; }));
  k.push_back(nested_int("convexity_max_points", "points per view for the hull",
                         [](PipelineConfig& c) -> int& { return c.convexity.max_points_per_view; }));
  k.push_back(number_key("symmetry_max_points", "points used by the symmetry cost", &PipelineConfig::symmetry_max_points));
  k.push_back(number_key("incidence_fraction", "region share inside a box for r_k in b_i", &PipelineConfig::incidence_fraction));
  k.push_back(number_key("incidence_margin_fraction", "incidence box margin / shape diagonal", &PipelineConfig::incidence_margin_fraction));
  k.push_back(number_key("overlap_resolution", "lattice for pairwise overlap", &PipelineConfig::overlap_resolution));
  k.push_back(number_key("iou_resolution", "lattice for co-occurrence IoU", &PipelineConfig::iou_resolution));
  k.push_back(bool_key("calibrate_normalizers", "set w from the dataset's 95th percentiles", &PipelineConfig::calibrate_normalizers));
  k.push_back(bool_key("prune_dominated", "drop proposals no optimum needs before solving", &PipelineConfig::prune_dominated));
  k.push_back(number_key("time_limit_s", "branch and bound limit per shape", &PipelineConfig::time_limit_s));
  k.push_back(number_key("cooc_rounds", "selection rounds (1 = co-occurrence off)", &PipelineConfig::cooc_rounds));
  k.push_back(number_key("knn", "neighbours per shape for co-occurrence", &PipelineConfig::knn));
  k.push_back(number_key("unary_top_k", "boxes kept by the unary-only baseline", &PipelineConfig::unary_top_k));
  k.push_back(number_key("frame_samples", "surface samples for canonical frames", &PipelineConfig::frame_samples));
  k.push_back(number_key("threads", "worker threads (0 = all cores)", &PipelineConfig::threads));
  k.push_back(nested_int("eval_resolution", "evaluation grid", [](PipelineConfig& c) -> int& { return c.eval.resolution; }));
  k.push_back({"truth_fill", "solid | hollow",
               [](PipelineConfig& c, const std::string& v) {
                 if (v == "solid") c.eval.truth_fill = FillMode::Solid;
                 else if (v == "hollow") c.eval.truth_fill = FillMode::Hollow;
                 else throw Error(ErrorCode::InvalidArgument, "truth_fill: expected solid or hollow");
               },
               [](const PipelineConfig& c) { return std::string(c.eval.truth_fill == FillMode::Solid ? "solid" : "hollow"); }});
  k.push_back({"eval_frame", "canonical | model",
               [](PipelineConfig& c, const std::string& v) {
                 if (v == "canonical") c.eval.frame = EvalFrame::Canonical;
                 else if (v == "model") c.eval.frame = EvalFrame::Model;
                 else throw Error(ErrorCode::InvalidArgument, "eval_frame: expected canonical or model");
               },
               [](const PipelineConfig& c) { return std::string(c.eval.frame == EvalFrame::Canonical ? "canonical" : "model"); }});
  k.push_back({"eval_raster", "overlap | center",
               [](PipelineConfig& c, const std::string& v) {
                 if (v == "overlap") c.eval.primitive_raster = BoxRaster::CellOverlap;
                 else if (v == "center") c.eval.primitive_raster = BoxRaster::CellCenter;
                 else throw Error(ErrorCode::InvalidArgument, "eval_raster: expected overlap or center");
               },
               [](const PipelineConfig& c) {
                 return std::string(c.eval.primitive_raster == BoxRaster::CellOverlap ? "overlap" : "center");
               }});
  return k;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = make_keys();
  return keys;
}

void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : config_keys()) {
    if (k.name == key) {
      k.set(cfg, value);
      return;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
}

void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, path.string() + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (value.is_string()) text = value.get<std::string>();
    else if (value.is_boolean()) text = value.get<bool>() ? "true" : "false";
    else if (value.is_number()) text = fmt(value.get<double>());
    else if (value.is_array()) {
      for (const auto& e : value) text += (text.empty() ? "" : ",") + fmt(e.get<double>());
    } else {
      throw Error(ErrorCode::ParseError, key + ": unsupported value type");
    }
    set_config_value(cfg, key, text);
  }
}

std::string config_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  for (const auto& k : config_keys()) j[k.name] = k.get(cfg);
  return j.dump(2);
}

// ---------------------------------------------------------------------------

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Shape preparation

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

template <typename F>
double guarded(F&& f, const char* name, std::vector<std::string>* notes) {
  try {
    return f();
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::NoVisibleFaces:
      case ErrorCode::EmptyIntersection:
      case ErrorCode::NoValidViews:
      case ErrorCode::TooFewPoints:
      case ErrorCode::DegenerateCovariance:
      case ErrorCode::NoSourceRegions:
        if (notes) notes->push_back(std::string(name) + ": " + e.what());
        return kUnset;
      default:
        throw;
    }
  }
}

}  // namespace

CostVector proposal_costs(const OrientedBoxd& box, const ShapeContext& ctx, const PipelineConfig& cfg,
                          std::vector<std::string>* notes) {
  CostVector c;
  c[kOccupancy] = cost_occupancy(box, ctx.grid);
  c[kUniformity] = guarded([&] { return cost_uniformity(box, ctx.regions, ctx.clouds); }, "su", notes);
  const CompactnessOptions compact{cfg.compactness_cells, cfg.compactness_band_fraction * ctx.diagonal,
                                   cfg.compactness_splat_fraction * ctx.diagonal, cfg.compactness_pixel_footprint};
  c[kCompactness] = guarded([&] { return cost_compactness(box, ctx.clouds, compact); }, "pc", notes);
  c[kSupport] = guarded([&] { return cost_support(box, ctx.grid, cfg.support); }, "sc", notes);
  c[kConvexity] = guarded([&] { return cost_convexity(box, ctx.clouds, cfg.convexity); }, "co", notes);
  c[kSymmetry] = guarded(
      [&] {
        PointCloud inside = points_in_box(box, ctx.clouds);
        const int cap = cfg.symmetry_max_points;
        if (cap > 0 && static_cast<int>(inside.size()) > cap) {
          PointCloud sub;
          const std::size_t m = inside.size();
          for (int i = 0; i < cap; ++i) {
            const std::size_t k = static_cast<std::size_t>(i) * m / static_cast<std::size_t>(cap);
            sub.push_back(inside.points[k], inside.normals[k]);
          }
          inside = std::move(sub);
        }
        return cost_symmetry(box, inside);
      },
      "ss", notes);
  return c;
}

PreparedShape prepare_shape(TriangleMesh mesh, std::string id, const PipelineConfig& cfg) {
  mesh.validate();
  PreparedShape out;
  out.id = std::move(id);
  ShapeContext& ctx = out.ctx;
  ctx.shape_id = out.id;
  ctx.diagonal = mesh.bounds().sizes().norm();
  if (!(ctx.diagonal > 0)) throw Error(ErrorCode::DegenerateBounds, out.id + ": zero-size mesh");

  ProposalSet ps = generate_proposals(mesh, cfg.proposals);
  ctx.clouds = std::move(ps.views);
  ctx.proposals = std::move(ps.boxes);
  ctx.source_area = std::move(ps.source_area);
  ctx.regions = std::move(ps.regions);
  ctx.grid = voxelize(mesh, cfg.cost_grid_resolution, FillMode::Solid);
  ctx.canonical = shape_canonical_frame(mesh, cfg.frame_samples);

  const int n = static_cast<int>(ctx.proposals.size());
  ctx.unary.assign(n, CostVector::Zero());
  for (int i = 0; i < n; ++i) ctx.unary[i] = proposal_costs(ctx.proposals[i], ctx, cfg, &out.notes);
  // A cost that cannot be evaluated for a proposal takes the worst value seen
  // for that cost on this shape.
  for (int t = 0; t < 6; ++t) {
    double worst = kUnset;
    for (const auto& c : ctx.unary) {
      if (!std::isnan(c[t])) worst = std::isnan(worst) ? c[t] : (cfg.weights.mu_u[t] >= 0 ? std::max(worst, c[t]) : std::min(worst, c[t]));
    }
    if (std::isnan(worst)) worst = t == kSupport ? 0.0 : 1.0;
    for (auto& c : ctx.unary) {
      if (std::isnan(c[t])) c[t] = worst;
    }
  }

  ctx.coverage_costs = coverage_costs(ctx.regions);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double c = cost_pairwise_overlap(ctx.proposals[i], ctx.proposals[j], cfg.overlap_resolution);
      if (c > 0) ctx.overlap.push_back({i, j, c});
    }
  }
  const double margin = cfg.incidence_margin_fraction * ctx.diagonal;
  ctx.region_boxes.assign(ctx.regions.size(), {});
  for (std::size_t k = 0; k < ctx.regions.size(); ++k) {
    for (int i = 0; i < n; ++i) {
      if (region_inside_fraction(ctx.proposals[i], ctx.regions[k], ctx.clouds, margin) >= cfg.incidence_fraction)
        ctx.region_boxes[k].push_back(i);
    }
  }
  ctx.validate();
  out.mesh = std::move(mesh);
  return out;
}

// ---------------------------------------------------------------------------
// Selection

std::vector<char> dominated_proposals(const ShapeContext& ctx, const CrfWeights& weights) {
  const std::size_t n = ctx.proposals.size();
  std::vector<double> gain(n, 0.0);
  for (std::size_t k = 0; k < ctx.region_boxes.size(); ++k) {
    for (int i : ctx.region_boxes[k]) gain[i] += std::abs(weights.mu_cov) * ctx.coverage_costs[k];
  }
  if (!ctx.cooc.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& e : ctx.cooc[i]) gain[i] += std::abs(weights.mu_coc) * e.iou;
    }
  }
  std::vector<char> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = fuse_unary(ctx.unary[i], weights) + weights.mu_par >= gain[i];
  }
  return out;
}

Selection select_primitives(const ShapeContext& ctx, const CrfWeights& weights, const SelectOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Selection sel;
  if (ctx.proposals.empty()) return sel;
  const int n = static_cast<int>(ctx.proposals.size());

  std::vector<char> drop(n, 0);
  if (options.prune_dominated && weights.mu_pw >= 0) drop = dominated_proposals(ctx, weights);
  std::vector<int> keep, remap(n, -1);
  for (int i = 0; i < n; ++i) {
    if (!drop[i]) {
      remap[i] = static_cast<int>(keep.size());
      keep.push_back(i);
    }
  }
  sel.pruned = n - static_cast<int>(keep.size());
  if (keep.empty()) {
    sel.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sel;
  }

  // Sub-context over the kept proposals; regions and their costs are unchanged.
  ShapeContext sub;
  sub.shape_id = ctx.shape_id;
  sub.regions = ctx.regions;
  sub.coverage_costs = ctx.coverage_costs;
  for (int i : keep) {
    sub.proposals.push_back(ctx.proposals[i]);
    sub.unary.push_back(ctx.unary[i]);
    if (!ctx.cooc.empty()) sub.cooc.push_back(ctx.cooc[i]);
  }
  for (const auto& p : ctx.overlap) {
    if (remap[p.i] >= 0 && remap[p.j] >= 0) sub.overlap.push_back({remap[p.i], remap[p.j], p.cost});
  }
  sub.region_boxes.resize(ctx.region_boxes.size());
  for (std::size_t k = 0; k < ctx.region_boxes.size(); ++k) {
    for (int i : ctx.region_boxes[k]) {
      if (remap[i] >= 0) sub.region_boxes[k].push_back(remap[i]);
    }
  }

  const MilpProblem problem = build_milp(sub, weights);
  BranchAndBoundOptions bb;
  bb.time_limit = std::chrono::duration<double>(options.time_limit_s);
  const Solution s = solve_branch_and_bound(problem, bb);
  for (int local : selected_proposals(problem, s)) sel.indices.push_back(keep[local]);
  sel.energy = s.objective_value;
  sel.status = s.status;
  sel.nodes = s.node_count;
  sel.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sel;
}

std::vector<int> unary_top_k(const ShapeContext& ctx, const CrfWeights& weights, int k) {
  std::vector<int> order(ctx.proposals.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> e(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) e[i] = fuse_unary(ctx.unary[i], weights);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return e[a] < e[b]; });
  if (static_cast<int>(order.size()) > k) order.resize(std::max(k, 0));
  std::sort(order.begin(), order.end());
  return order;
}

// ---------------------------------------------------------------------------
// Dataset runs

namespace {

std::vector<OrientedBoxd> canonical_boxes(const PreparedShape& shape, const std::vector<int>& indices) {
  std::vector<OrientedBoxd> out;
  for (int i : indices) out.push_back(transform_box(shape.ctx.proposals[i], shape.ctx.canonical.transform));
  return out;
}

}  // namespace

DatasetRun run_dataset(std::vector<PreparedShape>& shapes, const PipelineConfig& cfg, bool evaluate,
                       SelectionMethod method) {
  DatasetRun run;
  run.weights = cfg.weights;
  if (cfg.calibrate_normalizers) {
    std::vector<CostVector> all;
    for (const auto& s : shapes) all.insert(all.end(), s.ctx.unary.begin(), s.ctx.unary.end());
    if (!all.empty()) run.weights.w = calibrate_normalizers(all);
  }
  run.weights.validate(true);
  const int m = static_cast<int>(shapes.size());
  run.shapes.resize(m);
  run.neighbors.resize(m);
  const SelectOptions select{cfg.time_limit_s, cfg.prune_dominated};

  CrfWeights round0 = run.weights;
  round0.mu_coc = 0.0;
  for (auto& s : shapes) s.ctx.cooc.clear();
  parallel_for(m, cfg.threads, [&](int i) {
    ShapeResult& r = run.shapes[i];
    r.id = shapes[i].id;
    if (method == SelectionMethod::UnaryTopK) r.selection.indices = unary_top_k(shapes[i].ctx, run.weights, cfg.unary_top_k);
    else r.selection = select_primitives(shapes[i].ctx, round0, select);
  });
  run.rounds = 1;

  const bool cooc = method == SelectionMethod::Crf && cfg.cooc_rounds > 1 && m > 1 && run.weights.mu_coc != 0.0;
  if (cooc) {
    std::vector<ShapeDescriptor> descriptors(m);
    parallel_for(m, cfg.threads, [&](int i) { descriptors[i] = shape_descriptor(shapes[i].ctx.grid, shapes[i].id); });
    std::map<std::string, int> index;
    for (int i = 0; i < m; ++i) index[shapes[i].id] = i;
    const int k = std::min(cfg.knn, m - 1);
    for (int i = 0; i < m; ++i) run.neighbors[i] = knn_shapes(descriptors[i], descriptors, k);

    for (int round = 1; round < cfg.cooc_rounds; ++round) {
      std::vector<std::vector<OrientedBoxd>> previous(m);
      for (int i = 0; i < m; ++i) previous[i] = canonical_boxes(shapes[i], run.shapes[i].selection.indices);
      std::vector<Selection> next(m);
      parallel_for(m, cfg.threads, [&](int i) {
        std::vector<std::vector<OrientedBoxd>> nb;
        for (const auto& id : run.neighbors[i]) nb.push_back(previous[index.at(id)]);
        shapes[i].ctx.cooc = build_cooccurrence(shapes[i].ctx, nb, cfg.iou_resolution);
        next[i] = select_primitives(shapes[i].ctx, run.weights, select);
      });
      for (int i = 0; i < m; ++i) run.shapes[i].selection = std::move(next[i]);
      ++run.rounds;
    }
  }

  parallel_for(m, cfg.threads, [&](int i) {
    ShapeResult& r = run.shapes[i];
    r.boxes.clear();
    r.energies.clear();
    for (int idx : r.selection.indices) {
      r.boxes.push_back(shapes[i].ctx.proposals[idx]);
      r.energies.push_back(fuse_unary(shapes[i].ctx.unary[idx], run.weights));
    }
    if (evaluate) {
      r.metrics = evaluate_shape(shapes[i].mesh, r.boxes, cfg.eval);
      r.evaluated = true;
    }
  });
  return run;
}

namespace {

AblationRow summarize(const std::string& name, const DatasetRun& run) {
  AblationRow row;
  row.name = name;
  if (run.shapes.empty()) return row;
  for (const auto& s : run.shapes) {
    row.mean_recall += s.metrics.recall;
    row.mean_precision += s.metrics.precision;
    row.mean_f_measure += s.metrics.f_measure;
    row.mean_count += static_cast<double>(s.boxes.size());
  }
  const double n = static_cast<double>(run.shapes.size());
  row.mean_recall /= n;
  row.mean_precision /= n;
  row.mean_f_measure /= n;
  row.mean_count /= n;
  return row;
}

}  // namespace

std::vector<AblationRow> run_ablation(std::vector<PreparedShape>& shapes, const PipelineConfig& cfg,
                                      const std::vector<std::string>& drop) {
  std::vector<AblationRow> rows;
  rows.push_back(summarize("full", run_dataset(shapes, cfg)));
  for (const auto& name : drop) {
    const int t = cost_index(name);
    if (t < 0) throw Error(ErrorCode::InvalidArgument, "unknown cost '" + name + "'");
    PipelineConfig c = cfg;
    c.weights.mu_u[t] = 0.0;
    rows.push_back(summarize("w/o " + name, run_dataset(shapes, c)));
  }
  rows.push_back(summarize("unary only (top " + std::to_string(cfg.unary_top_k) + ")",
                           run_dataset(shapes, cfg, true, SelectionMethod::UnaryTopK)));
  return rows;
}

double selection_consistency(const std::vector<PreparedShape>& shapes, const std::vector<ShapeResult>& results,
                             int iou_resolution) {
  double total = 0;
  int pairs = 0;
  for (std::size_t a = 0; a < shapes.size(); ++a) {
    const auto ba = canonical_boxes(shapes[a], results[a].selection.indices);
    for (std::size_t b = a + 1; b < shapes.size(); ++b) {
      const auto bb = canonical_boxes(shapes[b], results[b].selection.indices);
      ++pairs;
      const std::size_t larger = std::max(ba.size(), bb.size());
      if (larger == 0) {
        total += 1.0;
        continue;
      }
      if (ba.empty() || bb.empty()) continue;
      Eigen::MatrixXd iou(ba.size(), bb.size());
      for (std::size_t i = 0; i < ba.size(); ++i)
        for (std::size_t j = 0; j < bb.size(); ++j) iou(i, j) = cuboid_iou(ba[i], bb[j], iou_resolution);
      total += -bipartite_match(-iou).total() / static_cast<double>(larger);
    }
  }
  return pairs ? total / pairs : 0.0;
}

}  // namespace prim
