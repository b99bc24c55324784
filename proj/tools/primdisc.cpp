// primdisc: cuboid primitive discovery from meshes.

#include "prim/codec.hpp"
#include "prim/pipeline.hpp"
#include "prim/serialize.hpp"
#include "prim/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using prim::PipelineConfig;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void add_config_flags(CLI::App* app, Common& common) {
  app->add_option("--config", common.config_file, "JSON file of config keys")->check(CLI::ExistingFile);
  for (const auto& key : prim::config_keys()) {
    common.options[key.name] = app->add_option("--" + key.name, common.values[key.name], key.help);
  }
}

PipelineConfig resolve_config(const Common& common) {
  PipelineConfig cfg;
  if (!common.config_file.empty()) prim::apply_config_file(cfg, common.config_file);
  for (const auto& [name, opt] : common.options) {
    if (opt->count() > 0) prim::set_config_value(cfg, name, common.values.at(name));
  }
  return cfg;
}

std::vector<fs::path> mesh_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".off" || ext == ".obj")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Loaded {
  std::vector<prim::PreparedShape> shapes;
  std::vector<std::pair<std::string, std::string>> failures;  // id, message
};

Loaded prepare_all(const std::vector<fs::path>& paths, const PipelineConfig& cfg) {
  Loaded out;
  std::vector<std::optional<prim::PreparedShape>> slots(paths.size());
  std::vector<std::string> errors(paths.size());
  prim::parallel_for(static_cast<int>(paths.size()), cfg.threads, [&](int i) {
    try {
      slots[i] = prim::prepare_shape(prim::load_mesh(paths[i]), paths[i].stem().string(), cfg);
    } catch (const prim::Error& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (slots[i]) out.shapes.push_back(std::move(*slots[i]));
    else out.failures.emplace_back(paths[i].stem().string(), errors[i]);
  }
  return out;
}

nlohmann::ordered_json manifest(const std::string& command, const PipelineConfig& cfg, const prim::DatasetRun* run,
                                const Loaded& loaded) {
  nlohmann::ordered_json m;
  m["tool"] = "primdisc";
  m["version"] = kVersion;
  m["command"] = command;
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
#ifdef __VERSION__
  m["compiler"] = __VERSION__;
#endif
  m["config"] = nlohmann::ordered_json::parse(prim::config_json(cfg));
  m["shapes"] = nlohmann::ordered_json::array();
  if (run) {
    m["calibrated_w"] = std::vector<double>(run->weights.w.data(), run->weights.w.data() + 6);
    m["rounds"] = run->rounds;
    for (std::size_t i = 0; i < run->shapes.size(); ++i) {
      const auto& s = run->shapes[i];
      nlohmann::ordered_json e;
      e["id"] = s.id;
      e["status"] = "ok";
      e["solver_status"] = std::string(prim::to_string(s.selection.status));
      e["proposals"] = loaded.shapes[i].ctx.proposals.size();
      e["selected"] = s.selection.indices;
      e["energy"] = s.selection.energy;
      e["nodes"] = s.selection.nodes;
      e["pruned"] = s.selection.pruned;
      e["seconds"] = s.selection.seconds;
      e["neighbors"] = run->neighbors[i];
      e["notes"] = loaded.shapes[i].notes.size();
      if (s.evaluated) {
        e["recall"] = s.metrics.recall;
        e["precision"] = s.metrics.precision;
      }
      m["shapes"].push_back(e);
    }
  }
  for (const auto& [id, msg] : loaded.failures) m["shapes"].push_back({{"id", id}, {"status", "error"}, {"error", msg}});
  return m;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw prim::Error(prim::ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

void write_outputs(const fs::path& dir, const prim::PreparedShape& shape, const prim::ShapeResult& r) {
  {
    std::ofstream out(dir / (r.id + ".boxes.json"));
    prim::write_boxes_json(out, r.boxes);
  }
  prim::save_boxes_obj(dir / (r.id + ".obj"), r.boxes);
  if (!r.boxes.empty()) prim::save_primitives(dir / (r.id + ".primitives.json"), prim::encode(r.boxes, r.energies));
  (void)shape;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cuboid primitive discovery"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // discover
  Common discover_common;
  std::vector<std::string> discover_inputs;
  std::string discover_out = "out";
  bool discover_eval = false, discover_depth = false, discover_bundle = false;
  auto* discover = app.add_subcommand("discover", "meshes -> primitives JSON, OBJ and manifest");
  discover->add_option("meshes", discover_inputs, "mesh files (.off/.obj) or directories")->required();
  discover->add_option("-o,--out", discover_out, "output directory");
  discover->add_flag("--evaluate", discover_eval, "also compute voxel metrics");
  discover->add_flag("--dump-depth", discover_depth, "write rendered depth maps as 16-bit PGM");
  discover->add_flag("--bundle", discover_bundle, "write the cached cost bundle per shape");
  add_config_flags(discover, discover_common);

  // evaluate
  Common eval_common;
  std::string eval_dir, eval_out = "metrics.csv";
  auto* evaluate = app.add_subcommand("evaluate", "dataset directory -> metrics CSV");
  evaluate->add_option("dataset", eval_dir, "directory of meshes")->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("-o,--out", eval_out, "CSV path");
  add_config_flags(evaluate, eval_common);

  // ablate
  Common ablate_common;
  std::string ablate_dir, ablate_out = "ablation.csv", ablate_drop = "oc,su,pc,sc,co,ss";
  auto* ablate = app.add_subcommand("ablate", "dataset directory + drop list -> table CSV");
  ablate->add_option("dataset", ablate_dir, "directory of meshes")->required()->check(CLI::ExistingDirectory);
  ablate->add_option("--drop", ablate_drop, "comma-separated cost names (oc,su,pc,sc,co,ss)");
  ablate->add_option("-o,--out", ablate_out, "CSV path");
  add_config_flags(ablate, ablate_common);

  // export
  std::string export_in, export_obj, export_vox, export_mode = "expected";
  int export_res = 64;
  std::uint64_t export_seed = 0;
  auto* exp = app.add_subcommand("export", "primitives JSON -> OBJ and/or voxel file");
  exp->add_option("primitives", export_in, "primitives JSON")->required()->check(CLI::ExistingFile);
  exp->add_option("--obj", export_obj, "OBJ output");
  exp->add_option("--voxels", export_vox, "voxel file output");
  exp->add_option("--resolution", export_res, "voxel resolution");
  exp->add_option("--mode", export_mode, "expected | sampled")->check(CLI::IsMember({"expected", "sampled"}));
  exp->add_option("--seed", export_seed, "seed for sampled mode");

  // synth
  int synth_count = 25;
  std::uint64_t synth_seed = 1;
  std::string synth_out = "synthetic";
  auto* synth = app.add_subcommand("synth", "write a synthetic suite of jittered box assemblies");
  synth->add_option("--count", synth_count, "number of shapes");
  synth->add_option("--seed", synth_seed, "first seed");
  synth->add_option("-o,--out", synth_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*discover) {
      const PipelineConfig cfg = resolve_config(discover_common);
      std::vector<fs::path> paths;
      for (const auto& in : discover_inputs) {
        if (fs::is_directory(in)) {
          const auto files = mesh_files(in);
          paths.insert(paths.end(), files.begin(), files.end());
        } else {
          paths.emplace_back(in);
        }
      }
      fs::create_directories(discover_out);
      Loaded loaded = prepare_all(paths, cfg);
      const prim::DatasetRun run = prim::run_dataset(loaded.shapes, cfg, discover_eval);
      for (std::size_t i = 0; i < loaded.shapes.size(); ++i) {
        const auto& shape = loaded.shapes[i];
        write_outputs(discover_out, shape, run.shapes[i]);
        if (discover_bundle) {
          std::ofstream out(fs::path(discover_out) / (shape.id + ".bundle.json"));
          prim::write_context_bundle(out, shape.ctx);
        }
        if (discover_depth) {
          const auto views = prim::render_views(shape.mesh, cfg.proposals.render);
          for (const auto& v : views)
            prim::write_depth_pgm(fs::path(discover_out) / (shape.id + ".view" + std::to_string(v.view_id) + ".pgm"), v);
        }
        std::cout << shape.id << ": " << run.shapes[i].boxes.size() << " primitives from "
                  << shape.ctx.proposals.size() << " proposals\n";
      }
      for (const auto& [id, msg] : loaded.failures) std::cerr << id << ": " << msg << '\n';
      write_text(fs::path(discover_out) / "manifest.json", manifest("discover", cfg, &run, loaded).dump(2) + "\n");
      return loaded.failures.empty() ? 0 : 2;
    }

    if (*evaluate) {
      const PipelineConfig cfg = resolve_config(eval_common);
      Loaded loaded = prepare_all(mesh_files(eval_dir), cfg);
      const prim::DatasetRun run = prim::run_dataset(loaded.shapes, cfg, true);
      ensure_parent(eval_out);
      std::ofstream out(eval_out);
      if (!out) throw prim::Error(prim::ErrorCode::IoError, "cannot write " + eval_out);
      out << "shape_id,primitives,recall,precision,accuracy,f_measure,tp,fp,fn,tn,solver_status,seconds\n";
      double recall = 0;
      for (const auto& s : run.shapes) {
        const auto& m = s.metrics;
        out << s.id << ',' << s.boxes.size() << ',' << m.recall << ',' << m.precision << ',' << m.accuracy << ','
            << m.f_measure << ',' << m.tp << ',' << m.fp << ',' << m.fn << ',' << m.tn << ','
            << prim::to_string(s.selection.status) << ',' << s.selection.seconds << '\n';
        recall += m.recall;
      }
      if (!run.shapes.empty()) std::cout << "mean recall " << recall / run.shapes.size() << '\n';
      const fs::path manifest_path = fs::path(eval_out).parent_path() / "manifest.json";
      write_text(manifest_path, manifest("evaluate", cfg, &run, loaded).dump(2) + "\n");
      return loaded.failures.empty() ? 0 : 2;
    }

    if (*ablate) {
      const PipelineConfig cfg = resolve_config(ablate_common);
      std::vector<std::string> drop;
      std::stringstream ss(ablate_drop);
      for (std::string tok; std::getline(ss, tok, ',');) {
        if (!tok.empty()) drop.push_back(tok);
      }
      Loaded loaded = prepare_all(mesh_files(ablate_dir), cfg);
      const auto rows = prim::run_ablation(loaded.shapes, cfg, drop);
      ensure_parent(ablate_out);
      std::ofstream out(ablate_out);
      if (!out) throw prim::Error(prim::ErrorCode::IoError, "cannot write " + ablate_out);
      out << "configuration,mean_recall,mean_precision,mean_f_measure,mean_primitives\n";
      for (const auto& r : rows) {
        out << '"' << r.name << "\"," << r.mean_recall << ',' << r.mean_precision << ',' << r.mean_f_measure << ','
            << r.mean_count << '\n';
        std::cout << r.name << ": recall " << r.mean_recall << '\n';
      }
      const fs::path manifest_path = fs::path(ablate_out).parent_path() / "manifest.json";
      write_text(manifest_path, manifest("ablate", cfg, nullptr, loaded).dump(2) + "\n");
      return loaded.failures.empty() ? 0 : 2;
    }

    if (*exp) {
      const prim::PrimitiveSet set = prim::load_primitives(export_in);
      if (!export_obj.empty()) {
        ensure_parent(export_obj);
        prim::save_boxes_obj(export_obj, set.boxes());
      }
      if (!export_vox.empty()) {
        const auto mode = export_mode == "sampled" ? prim::DecodeMode::Sampled : prim::DecodeMode::Expected;
        ensure_parent(export_vox);
        prim::save_voxels(export_vox, prim::decode(set, export_res, mode, export_seed));
      }
      if (export_obj.empty() && export_vox.empty()) std::cerr << "nothing to export (use --obj or --voxels)\n";
      return 0;
    }

    if (*synth) {
      fs::create_directories(synth_out);
      for (const auto& s : prim::synthetic_suite(synth_count, synth_seed)) {
        prim::save_off(fs::path(synth_out) / (s.id + ".off"), s.mesh);
        std::ofstream out(fs::path(synth_out) / (s.id + ".truth.json"));
        prim::write_boxes_json(out, s.boxes);
      }
      return 0;
    }
  } catch (const prim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
