#include "jrmpc/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "jrmpc/config.hpp"
#include "jrmpc/errors.hpp"
#include "jrmpc/icp.hpp"
#include "jrmpc/metrics.hpp"
#include "jrmpc/outliers.hpp"
#include "jrmpc/point_io.hpp"
#include "jrmpc/run_record.hpp"

namespace jrmpc {

namespace {

namespace fs = std::filesystem;

/// Usage-level failure (exit 1) raised by the subcommand handlers.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw UsageError("missing input file: " + path);
}

RunConfig config_or_default(const std::string& path) {
  if (path.empty()) return default_config();
  require_file(path);
  return load_config(path);
}

std::vector<PointSet> read_inputs(const std::vector<std::string>& inputs) {
  for (const auto& p : inputs) require_file(p);
  std::vector<PointSet> sets;
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    sets.push_back(parse_point_file(inputs[j], format_from_path(inputs[j]), j));
    if (sets.back().empty()) throw UsageError("input has no points: " + inputs[j]);
  }
  return sets;
}

/// Transforms of a previous record, rescaled to normalized units.
std::optional<std::vector<RigidTransform>> read_init(const std::string& path, std::size_t count,
                                                     double scale) {
  if (path.empty()) return std::nullopt;
  require_file(path);
  const RunRecord rec = load_record(path);
  if (rec.transforms.size() != count) {
    throw UsageError("init record " + path + " holds " + std::to_string(rec.transforms.size()) +
                     " transforms for " + std::to_string(count) + " inputs");
  }
  return denormalize(rec.transforms, 1.0 / scale);
}

void add_truth_metrics(RunRecord& rec, const std::string& truth_path) {
  if (truth_path.empty()) return;
  require_file(truth_path);
  const GroundTruth truth = load_truth(truth_path);
  if (truth.transforms.size() != rec.transforms.size()) {
    throw UsageError("truth holds " + std::to_string(truth.transforms.size()) +
                     " transforms, record holds " + std::to_string(rec.transforms.size()));
  }
  const RotationErrorReport rep = rotation_rmse(rec.transforms, truth.transforms);
  rec.metrics["rotation_rmse"] = rep.mean;
  rec.metrics["mean_composition_angle"] = mean_composition_angle(rec.transforms, truth.transforms);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

struct RegisterArgs {
  std::vector<std::string> inputs;
  std::string config;
  std::string out;
  std::string truth;
  std::string init;
};

void add_register_options(CLI::App* cmd, RegisterArgs& a) {
  cmd->add_option("--inputs", a.inputs, "Point files (.ply ASCII or .xyz), one per view")->required();
  cmd->add_option("--config", a.config, "JSON configuration file");
  cmd->add_option("--out", a.out, "Run record to write")->required();
  cmd->add_option("--truth", a.truth, "Ground truth; adds rotation metrics to the record");
  cmd->add_option("--init", a.init, "Run record whose transforms are used as the initial poses");
}

int run_register_batch(const RegisterArgs& a, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  RunConfig cfg = config_or_default(a.config);
  std::vector<PointSet> sets = read_inputs(a.inputs);
  const double scale = normalize_sets(sets);
  const auto provided = read_init(a.init, sets.size(), scale);
  const InitialEstimate est =
      initialize(sets, cfg.init, cfg.batch.gamma, cfg.uniform_volume(), cfg.epsilon, provided);
  const BatchResult res = run_batch(sets, est.transforms, est.model, cfg.batch);

  RunRecord rec;
  rec.command = "register-batch";
  rec.config = config_to_json(cfg);
  rec.seed = cfg.seed;
  rec.inputs = a.inputs;
  rec.trace = res.trace;
  rec.transforms = denormalize(res.transforms, scale);
  rec.normalization_scale = scale;
  rec.model = denormalize(res.model, scale);
  rec.mixture = MixtureSummary::of(rec.model);
  rec.converged = res.converged;
  add_truth_metrics(rec, a.truth);
  rec.runtime_ms = elapsed_ms(start);
  save_record(rec, a.out);
  out << "iterations=" << res.trace.size() << "\n";
  out << "components=" << rec.model.size() << "\n";
  if (!res.trace.empty()) out << "objective=" << fmt(res.trace.back().objective) << "\n";
  for (const auto& [k, v] : rec.metrics) out << k << "=" << fmt(v) << "\n";
  return kExitOk;
}

int run_register_incremental(const RegisterArgs& a, std::optional<std::size_t> window,
                             std::optional<std::size_t> group, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  RunConfig cfg = config_or_default(a.config);
  if (window) cfg.window.back_size = *window;
  if (group) cfg.window.front_size = *group;
  cfg.validate();
  std::vector<PointSet> sets = read_inputs(a.inputs);
  const double scale = normalize_sets(sets);
  const auto provided = read_init(a.init, sets.size(), scale);
  const WindowedResult res = run_windowed(sets, cfg.window, provided);

  RunRecord rec;
  rec.command = "register-incremental";
  rec.config = config_to_json(cfg);
  rec.seed = cfg.seed;
  rec.inputs = a.inputs;
  rec.transforms = denormalize(res.transforms, scale);
  rec.normalization_scale = scale;
  rec.model = denormalize(res.model, scale);
  rec.mixture = MixtureSummary::of(rec.model);
  rec.integrations = res.integrations;
  for (auto& i : rec.integrations) {
    i.transform = RigidTransform(i.transform.rotation(), i.transform.translation() * scale);
  }
  rec.flagged_groups = res.flagged_groups;
  rec.converged = true;
  add_truth_metrics(rec, a.truth);
  rec.runtime_ms = elapsed_ms(start);
  save_record(rec, a.out);
  out << "mean_sets=" << res.mean_sets.size() << "\n";
  out << "flagged_groups=" << res.flagged_groups.size() << "\n";
  out << "components=" << rec.model.size() << "\n";
  for (const auto& [k, v] : rec.metrics) out << k << "=" << fmt(v) << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::string model;
  std::size_t blob = 0;
  std::string config;
  std::vector<double> angles;
  std::optional<double> snr_db;
  bool no_noise = false;
  std::optional<double> outliers;
  std::string out_dir;
  std::string format = "ply";
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  RunConfig cfg = config_or_default(a.config);
  SynthConfig sc = cfg.synth;
  if (!a.angles.empty()) sc.angles_deg = a.angles;
  if (a.snr_db) sc.snr_db = *a.snr_db;
  if (a.no_noise) sc.snr_db.reset();
  if (a.outliers) sc.outlier_fraction = *a.outliers;
  sc.validate();

  Points model;
  if (!a.model.empty()) {
    require_file(a.model);
    model = parse_point_file(a.model).points;
  } else if (a.blob > 0) {
    model = make_blob_object(a.blob, sc.seed);
  } else {
    throw UsageError("synth needs --model <file> or --blob <count>");
  }
  const SyntheticScene scene = synthesize_views(model, sc);
  fs::create_directories(a.out_dir);
  for (std::size_t v = 0; v < scene.views.size(); ++v) {
    char name[32];
    std::snprintf(name, sizeof name, "view_%02zu.%s", v, a.format.c_str());
    const std::string path = (fs::path(a.out_dir) / name).string();
    write_point_file(scene.views[v], path);
    out << "view=" << path << "\n";
  }
  const std::string truth = (fs::path(a.out_dir) / "truth.json").string();
  save_truth(scene.truth, truth);
  out << "truth=" << truth << "\n";
  return kExitOk;
}

int run_eval(const std::string& record_path, const std::string& truth_path, std::ostream& out) {
  require_file(record_path);
  require_file(truth_path);
  const RunRecord rec = load_record(record_path);
  const GroundTruth truth = load_truth(truth_path);
  if (truth.transforms.size() != rec.transforms.size()) {
    throw UsageError("truth holds " + std::to_string(truth.transforms.size()) +
                     " transforms, record holds " + std::to_string(rec.transforms.size()));
  }
  const RotationErrorReport rep = rotation_rmse(rec.transforms, truth.transforms);
  out << "rotation_rmse=" << fmt(rep.mean) << "\n";
  for (std::size_t j = 0; j < rep.per_view.size(); ++j) {
    out << "rotation_error_" << j + 2 << "=" << fmt(rep.per_view[j]) << "\n";
  }
  out << "mean_composition_angle=" << fmt(mean_composition_angle(rec.transforms, truth.transforms))
      << "\n";
  out << "runtime_ms=" << fmt(rec.runtime_ms) << "\n";
  return kExitOk;
}

int run_classify(const std::string& record_path, const std::string& out_path, bool verbose,
                 std::ostream& out) {
  require_file(record_path);
  const RunRecord rec = load_record(record_path);
  const ComponentLabels labels = classify_components(rec.model);
  const PointSet scene = export_scene_model(rec.model, labels);
  if (verbose) {
    out << "components=" << labels.outlier.size() << "\n";
    out << "threshold=" << fmt(labels.threshold) << "\n";
    out << "outliers=" << labels.outlier_count() << "\n";
    std::string ids;
    for (std::size_t k = 0; k < labels.outlier.size(); ++k) {
      if (labels.outlier[k]) ids += (ids.empty() ? "" : ",") + std::to_string(k);
    }
    out << "outlier_components=" << ids << "\n";
  }
  if (!out_path.empty()) {
    write_point_file(scene, out_path);
    out << "scene_model=" << out_path << "\n";
  }
  return kExitOk;
}

int run_baseline_icp(const RegisterArgs& a, const std::string& mode, std::size_t iterations,
                     std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<PointSet> sets = read_inputs(a.inputs);
  const double scale = normalize_sets(sets);
  const auto provided = read_init(a.init, sets.size(), scale);
  std::vector<RigidTransform> transforms = mode == "sequential"
                                               ? sequential_icp(sets, iterations, provided)
                                               : one_vs_all_icp(sets, iterations);
  RunRecord rec;
  rec.command = "baseline-icp";
  rec.config = {{"mode", mode}, {"iterations", iterations}};
  rec.inputs = a.inputs;
  rec.transforms = denormalize(transforms, scale);
  rec.normalization_scale = scale;
  rec.model = MixtureModel::with_uniform_priors(Points(3, 0), Eigen::VectorXd(0), 0.0, 1.0, 1e-3);
  rec.converged = true;
  add_truth_metrics(rec, a.truth);
  rec.runtime_ms = elapsed_ms(start);
  save_record(rec, a.out);
  for (const auto& [k, v] : rec.metrics) out << k << "=" << fmt(v) << "\n";
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint registration of multiple point sets with a robust Gaussian mixture", "jrmpc"};
  app.require_subcommand(1);

  RegisterArgs batch_args;
  auto* batch = app.add_subcommand("register-batch", "Batch EM registration of all inputs");
  add_register_options(batch, batch_args);

  RegisterArgs inc_args;
  std::optional<std::size_t> window;
  std::optional<std::size_t> group;
  auto* inc = app.add_subcommand("register-incremental", "Windowed incremental registration of a sequence");
  add_register_options(inc, inc_args);
  inc->add_option("--window", window, "Mean sets kept in the back-end window (N_b)");
  inc->add_option("--group", group, "Frames per front-end group (N_f)");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate synthetic partial views with ground truth");
  auto* model_opt = synth->add_option("--model", synth_args.model, "Model point file");
  synth->add_option("--blob", synth_args.blob, "Use a procedural object with this many points")
      ->excludes(model_opt);
  synth->add_option("--config", synth_args.config, "JSON configuration file");
  synth->add_option("--angles", synth_args.angles, "View angles in degrees");
  auto* snr = synth->add_option("--snr-db", synth_args.snr_db, "Signal-to-noise ratio in dB");
  synth->add_flag("--no-noise", synth_args.no_noise, "Disable Gaussian noise")->excludes(snr);
  synth->add_option("--outliers", synth_args.outliers, "Outlier fraction per view");
  synth->add_option("--out-dir", synth_args.out_dir, "Output directory")->required();
  synth->add_option("--format", synth_args.format, "View file format")
      ->check(CLI::IsMember({"ply", "xyz"}));

  std::string record_path;
  std::string truth_path;
  auto* eval = app.add_subcommand("eval", "Print rotation metrics of a record as key=value lines");
  eval->add_option("--record", record_path, "Run record")->required();
  eval->add_option("--truth", truth_path, "Ground truth file")->required();

  std::string classify_record;
  std::string classify_out;
  auto* classify = app.add_subcommand("classify", "Label components and write the inlier scene model");
  classify->add_option("--record", classify_record, "Run record")->required();
  classify->add_option("--out", classify_out, "Scene model point file");

  std::string export_record;
  std::string export_out;
  auto* exporter = app.add_subcommand("export-model", "Write the inlier means of a record");
  exporter->add_option("--record", export_record, "Run record")->required();
  exporter->add_option("--out", export_out, "Scene model point file")->required();

  RegisterArgs icp_args;
  std::string icp_mode = "one-vs-all";
  std::size_t icp_iterations = 100;
  auto* icp = app.add_subcommand("baseline-icp", "Pairwise ICP baseline");
  add_register_options(icp, icp_args);
  icp->add_option("--mode", icp_mode, "one-vs-all or sequential")
      ->check(CLI::IsMember({"one-vs-all", "sequential"}));
  icp->add_option("--iterations", icp_iterations, "ICP iterations per pair");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return kExitUsage;
  }

  try {
    if (*batch) return run_register_batch(batch_args, out);
    if (*inc) return run_register_incremental(inc_args, window, group, out);
    if (*synth) return run_synth(synth_args, out);
    if (*eval) return run_eval(record_path, truth_path, out);
    if (*classify) return run_classify(classify_record, classify_out, true, out);
    if (*exporter) return run_classify(export_record, export_out, false, out);
    if (*icp) return run_baseline_icp(icp_args, icp_mode, icp_iterations, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace jrmpc
