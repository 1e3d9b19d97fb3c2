#include "jrmpc/run_record.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "jrmpc/errors.hpp"
#include "jrmpc/outliers.hpp"

namespace jrmpc {

using nlohmann::json;

namespace {

json points_to_json(const Points& p) {
  json out = json::array();
  for (Eigen::Index i = 0; i < p.cols(); ++i) out.push_back({p(0, i), p(1, i), p(2, i)});
  return out;
}

Points points_from_json(const json& j) {
  Points p(3, static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    for (int d = 0; d < 3; ++d) p(d, static_cast<Eigen::Index>(i)) = j.at(i).at(static_cast<std::size_t>(d)).get<double>();
  }
  return p;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json model_to_json(const MixtureModel& m) {
  return {{"means", points_to_json(m.means)},
          {"variances", vector_to_json(m.variances)},
          {"priors", vector_to_json(m.priors)},
          {"gamma", m.gamma},
          {"h", m.h},
          {"epsilon", m.epsilon}};
}

MixtureModel model_from_json(const json& j) {
  MixtureModel m;
  m.means = points_from_json(j.at("means"));
  m.variances = vector_from_json(j.at("variances"));
  m.priors = vector_from_json(j.at("priors"));
  m.gamma = j.at("gamma").get<double>();
  m.h = j.at("h").get<double>();
  m.epsilon = j.at("epsilon").get<double>();
  return m;
}

void write_text(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

json read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  }
}

}  // namespace

MixtureSummary MixtureSummary::of(const MixtureModel& model, std::size_t bins) {
  MixtureSummary s;
  s.components = model.size();
  if (model.size() == 0) return s;
  const double lo = model.variances.minCoeff();
  const double hi = model.variances.maxCoeff();
  bins = std::max<std::size_t>(bins, 1);
  s.sigma_counts.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) {
    s.sigma_bin_edges.push_back(lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins));
  }
  for (Eigen::Index k = 0; k < model.variances.size(); ++k) {
    std::size_t b = hi > lo ? static_cast<std::size_t>((model.variances[k] - lo) / (hi - lo) *
                                                        static_cast<double>(bins))
                            : 0;
    s.sigma_counts[std::min(b, bins - 1)]++;
  }
  const ComponentLabels labels = classify_components(model);
  s.threshold = labels.threshold;
  for (std::size_t k = 0; k < labels.outlier.size(); ++k) {
    if (labels.outlier[k]) s.rejected.push_back(k);
  }
  return s;
}

json transform_to_json(const RigidTransform& t) {
  std::vector<double> r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r.push_back(t.rotation()(i, j));
  }
  const Vec3& tr = t.translation();
  return {{"rotation", r}, {"translation", {tr[0], tr[1], tr[2]}}};
}

RigidTransform transform_from_json(const json& j) {
  const auto r = j.at("rotation").get<std::vector<double>>();
  const auto t = j.at("translation").get<std::vector<double>>();
  if (r.size() != 9 || t.size() != 3) {
    throw DomainError("transform needs 9 rotation and 3 translation entries");
  }
  Mat3 rot;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) rot(i, k) = r[static_cast<std::size_t>(3 * i + k)];
  }
  return RigidTransform(rot, Vec3(t[0], t[1], t[2]));
}

json to_json(const RunRecord& r) {
  json trace = json::array();
  for (const auto& it : r.trace) {
    trace.push_back({{"iteration", it.iteration},
                     {"objective", it.objective},
                     {"objective_start", it.objective_start},
                     {"cm_gain", it.cm_gain},
                     {"log_likelihood", it.log_likelihood},
                     {"rotation_change", it.rotation_change},
                     {"translation_change", it.translation_change},
                     {"mean_change", it.mean_change}});
  }
  json transforms = json::array();
  for (const auto& t : r.transforms) transforms.push_back(transform_to_json(t));
  json integrations = json::array();
  for (const auto& rec : r.integrations) {
    integrations.push_back({{"set_id", rec.set_id},
                            {"transform", transform_to_json(rec.transform)},
                            {"masses", vector_to_json(rec.masses)},
                            {"recycled", rec.recycled},
                            {"rigid_step_skipped", rec.rigid_step_skipped}});
  }
  return {{"command", r.command},
          {"config", r.config},
          {"seed", r.seed},
          {"inputs", r.inputs},
          {"trace", trace},
          {"transforms", transforms},
          {"normalization_scale", r.normalization_scale},
          {"model", model_to_json(r.model)},
          {"mixture",
           {{"components", r.mixture.components},
            {"sigma_bin_edges", r.mixture.sigma_bin_edges},
            {"sigma_counts", r.mixture.sigma_counts},
            {"rejected", r.mixture.rejected},
            {"threshold", r.mixture.threshold}}},
          {"integrations", integrations},
          {"flagged_groups", r.flagged_groups},
          {"converged", r.converged},
          {"metrics", r.metrics},
          {"runtime_ms", r.runtime_ms}};
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.command = j.at("command").get<std::string>();
  r.config = j.at("config");
  r.seed = j.at("seed").get<std::uint64_t>();
  r.inputs = j.at("inputs").get<std::vector<std::string>>();
  for (const auto& it : j.at("trace")) {
    IterationRecord rec;
    rec.iteration = it.at("iteration").get<std::size_t>();
    rec.objective = it.at("objective").get<double>();
    rec.objective_start = it.at("objective_start").get<double>();
    rec.cm_gain = it.at("cm_gain").get<double>();
    rec.log_likelihood = it.at("log_likelihood").get<double>();
    rec.rotation_change = it.at("rotation_change").get<double>();
    rec.translation_change = it.at("translation_change").get<double>();
    rec.mean_change = it.at("mean_change").get<double>();
    r.trace.push_back(rec);
  }
  for (const auto& t : j.at("transforms")) r.transforms.push_back(transform_from_json(t));
  r.normalization_scale = j.at("normalization_scale").get<double>();
  r.model = model_from_json(j.at("model"));
  const json& mix = j.at("mixture");
  r.mixture.components = mix.at("components").get<std::size_t>();
  r.mixture.sigma_bin_edges = mix.at("sigma_bin_edges").get<std::vector<double>>();
  r.mixture.sigma_counts = mix.at("sigma_counts").get<std::vector<std::size_t>>();
  r.mixture.rejected = mix.at("rejected").get<std::vector<std::size_t>>();
  r.mixture.threshold = mix.at("threshold").get<double>();
  for (const auto& it : j.at("integrations")) {
    IntegrationRecord rec;
    rec.set_id = it.at("set_id").get<std::size_t>();
    rec.transform = transform_from_json(it.at("transform"));
    rec.masses = vector_from_json(it.at("masses"));
    rec.recycled = it.at("recycled").get<std::vector<std::size_t>>();
    rec.rigid_step_skipped = it.at("rigid_step_skipped").get<bool>();
    r.integrations.push_back(std::move(rec));
  }
  r.flagged_groups = j.at("flagged_groups").get<std::vector<std::size_t>>();
  r.converged = j.at("converged").get<bool>();
  r.metrics = j.at("metrics").get<std::map<std::string, double>>();
  r.runtime_ms = j.at("runtime_ms").get<double>();
  return r;
}

void save_record(const RunRecord& r, const std::string& path) { write_text(path, to_json(r)); }

RunRecord load_record(const std::string& path) {
  const json j = read_text(path);
  try {
    return record_from_json(j);
  } catch (const json::exception& e) {
    throw ParseError(path, 0, std::string("malformed run record: ") + e.what());
  }
}

json to_json(const GroundTruth& t) {
  json transforms = json::array();
  for (const auto& tr : t.transforms) transforms.push_back(transform_to_json(tr));
  json outliers = json::array();
  for (const auto& labels : t.outlier) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i]) idx.push_back(i);
    }
    outliers.push_back({{"points", labels.size()}, {"outlier_indices", idx}});
  }
  return {{"transforms", transforms},
          {"outliers", outliers},
          {"signal_power", t.signal_power},
          {"noise_power", t.noise_power}};
}

GroundTruth truth_from_json(const json& j) {
  GroundTruth t;
  for (const auto& tr : j.at("transforms")) t.transforms.push_back(transform_from_json(tr));
  for (const auto& o : j.at("outliers")) {
    std::vector<bool> labels(o.at("points").get<std::size_t>(), false);
    for (const auto i : o.at("outlier_indices").get<std::vector<std::size_t>>()) {
      if (i >= labels.size()) throw DomainError("outlier index out of range");
      labels[i] = true;
    }
    t.outlier.push_back(std::move(labels));
  }
  t.signal_power = j.at("signal_power").get<std::vector<double>>();
  t.noise_power = j.at("noise_power").get<std::vector<double>>();
  return t;
}

void save_truth(const GroundTruth& t, const std::string& path) { write_text(path, to_json(t)); }

GroundTruth load_truth(const std::string& path) {
  const json j = read_text(path);
  try {
    return truth_from_json(j);
  } catch (const json::exception& e) {
    throw ParseError(path, 0, std::string("malformed ground truth: ") + e.what());
  }
}

std::vector<RigidTransform> denormalize(const std::vector<RigidTransform>& transforms, double scale) {
  std::vector<RigidTransform> out;
  out.reserve(transforms.size());
  for (const auto& t : transforms) out.emplace_back(t.rotation(), t.translation() * scale);
  return out;
}

MixtureModel denormalize(const MixtureModel& model, double scale) {
  MixtureModel m = model;
  m.means *= scale;
  m.variances *= scale * scale;
  m.epsilon *= scale;
  m.h *= scale * scale * scale;
  return m;
}

}  // namespace jrmpc
