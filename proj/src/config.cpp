#include "jrmpc/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "jrmpc/errors.hpp"

namespace jrmpc {

using nlohmann::json;

namespace {

// Reads keys from one JSON object and remembers which were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    used_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(key_path(key), "expected a number");
      out = v->get<double>();
    }
  }

  void read(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(key_path(key), "expected a nonnegative integer");
      out = v->get<std::size_t>();
    }
  }

  void read(const std::string& key, std::uint64_t& out, int /*tag*/) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(key_path(key), "expected a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void read(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(key_path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void read(const std::string& key, std::optional<double>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        out.reset();
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        throw ConfigError(key_path(key), "expected a number or null");
      }
    }
  }

  template <typename Enum, std::size_t N>
  void read_enum(const std::string& key, Enum& out,
                 const std::pair<const char*, Enum> (&names)[N]) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_string()) throw ConfigError(key_path(key), "expected a string");
    const std::string s = v->get<std::string>();
    for (const auto& [name, value] : names) {
      if (s == name) {
        out = value;
        return;
      }
    }
    std::string allowed;
    for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    throw ConfigError(key_path(key), "unknown value '" + s + "' (expected one of: " + allowed + ")");
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(key_path(it.key()), "unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

constexpr std::pair<const char*, MeanStrategy> kMeanNames[] = {
    {"sphere", MeanStrategy::sphere},
    {"sample_one_set", MeanStrategy::sample_one_set},
    {"sample_aligned", MeanStrategy::sample_aligned}};
constexpr std::pair<const char*, TranslationStrategy> kTranslationNames[] = {
    {"centroid", TranslationStrategy::centroid},
    {"median", TranslationStrategy::median},
    {"provided", TranslationStrategy::provided}};
constexpr std::pair<const char*, KPolicy> kKPolicyNames[] = {{"fraction", KPolicy::fraction},
                                                             {"absolute", KPolicy::absolute}};
constexpr std::pair<const char*, SigmaStrategy> kSigmaNames[] = {
    {"median_distance", SigmaStrategy::median_distance}, {"fixed", SigmaStrategy::fixed}};
constexpr std::pair<const char*, UpdateForm> kFormNames[] = {{"moments", UpdateForm::moments},
                                                             {"printed", UpdateForm::printed}};

template <typename Enum, std::size_t N>
std::string enum_name(Enum value, const std::pair<const char*, Enum> (&names)[N]) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "?";
}

void read_batch(const json& obj, const std::string& path, BatchConfig& b) {
  Section s(obj, path);
  s.read("components", b.components);
  s.read("max_iterations", b.max_iterations);
  s.read("gamma", b.gamma);
  s.read("update_priors", b.update_priors);
  s.read("fix_variance_iters", b.fix_variance_iters);
  s.read("convergence_tol", b.convergence_tol);
  s.finish();
}

json write_batch(const BatchConfig& b) {
  return {{"components", b.components},
          {"max_iterations", b.max_iterations},
          {"gamma", b.gamma},
          {"update_priors", b.update_priors},
          {"fix_variance_iters", b.fix_variance_iters},
          {"convergence_tol", b.convergence_tol}};
}

void read_init(const json& obj, const std::string& path, InitConfig& c) {
  Section s(obj, path);
  s.read_enum("mean_strategy", c.mean_strategy, kMeanNames);
  s.read_enum("translation_strategy", c.translation_strategy, kTranslationNames);
  s.read_enum("k_policy", c.k_policy, kKPolicyNames);
  s.read("k_fraction", c.k_fraction);
  s.read("k_absolute", c.k_absolute);
  s.read("sphere_radius_scale", c.sphere_radius_scale);
  s.read_enum("sigma_strategy", c.sigma_strategy, kSigmaNames);
  s.read("sigma_fixed", c.sigma_fixed);
  s.read("sigma_scale", c.sigma_scale);
  s.finish();
}

json write_init(const InitConfig& c) {
  return {{"mean_strategy", enum_name(c.mean_strategy, kMeanNames)},
          {"translation_strategy", enum_name(c.translation_strategy, kTranslationNames)},
          {"k_policy", enum_name(c.k_policy, kKPolicyNames)},
          {"k_fraction", c.k_fraction},
          {"k_absolute", c.k_absolute},
          {"sphere_radius_scale", c.sphere_radius_scale},
          {"sigma_strategy", enum_name(c.sigma_strategy, kSigmaNames)},
          {"sigma_fixed", c.sigma_fixed},
          {"sigma_scale", c.sigma_scale}};
}

void read_synth(const json& obj, SynthConfig& c) {
  Section s(obj, "synth");
  if (const json* v = s.find("angles_deg")) {
    if (!v->is_array()) throw ConfigError("synth.angles_deg", "expected an array of numbers");
    c.angles_deg.clear();
    for (const auto& a : *v) {
      if (!a.is_number()) throw ConfigError("synth.angles_deg", "expected an array of numbers");
      c.angles_deg.push_back(a.get<double>());
    }
  }
  if (const json* v = s.find("cardinality")) {
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number_unsigned() ||
        !(*v)[1].is_number_unsigned()) {
      throw ConfigError("synth.cardinality", "expected [lo, hi] nonnegative integers");
    }
    c.cardinality_lo = (*v)[0].get<std::size_t>();
    c.cardinality_hi = (*v)[1].get<std::size_t>();
  }
  s.read("snr_db", c.snr_db);
  s.read("outlier_fraction", c.outlier_fraction);
  s.read("outlier_cluster_count", c.outlier_cluster_count);
  s.read("outlier_radius_fraction", c.outlier_radius_fraction);
  s.finish();
}

json write_synth(const SynthConfig& c) {
  return {{"angles_deg", c.angles_deg},
          {"cardinality", {c.cardinality_lo, c.cardinality_hi}},
          {"snr_db", c.snr_db ? json(*c.snr_db) : json(nullptr)},
          {"outlier_fraction", c.outlier_fraction},
          {"outlier_cluster_count", c.outlier_cluster_count},
          {"outlier_radius_fraction", c.outlier_radius_fraction}};
}

void read_window(const json& obj, WindowConfig& w) {
  Section s(obj, "window");
  s.read("front_size", w.front_size);
  s.read("back_size", w.back_size);
  if (const json* v = s.find("front_batch")) read_batch(*v, "window.front_batch", w.front_batch);
  if (const json* v = s.find("back_batch")) read_batch(*v, "window.back_batch", w.back_batch);
  if (const json* v = s.find("front_init")) read_init(*v, "window.front_init", w.front_init);
  if (const json* v = s.find("aligned_front_batch")) {
    read_batch(*v, "window.aligned_front_batch", w.aligned_front_batch);
  }
  if (const json* v = s.find("aligned_front_init")) {
    read_init(*v, "window.aligned_front_init", w.aligned_front_init);
  }
  if (const json* v = s.find("back_init")) read_init(*v, "window.back_init", w.back_init);
  s.read("bootstrap_iterations", w.bootstrap_iterations);
  s.read("integrate_iterations", w.integrate_iterations);
  s.read("refine_iterations", w.refine_iterations);
  s.read("refine_every", w.refine_every);
  s.read("rejection_fraction", w.rejection_fraction);
  s.read("recycle", w.recycle);
  s.read_enum("update_form", w.update_form, kFormNames);
  s.finish();
}

json write_window(const WindowConfig& w) {
  return {{"front_size", w.front_size},
          {"back_size", w.back_size},
          {"front_batch", write_batch(w.front_batch)},
          {"back_batch", write_batch(w.back_batch)},
          {"front_init", write_init(w.front_init)},
          {"aligned_front_batch", write_batch(w.aligned_front_batch)},
          {"aligned_front_init", write_init(w.aligned_front_init)},
          {"back_init", write_init(w.back_init)},
          {"bootstrap_iterations", w.bootstrap_iterations},
          {"integrate_iterations", w.integrate_iterations},
          {"refine_iterations", w.refine_iterations},
          {"refine_every", w.refine_every},
          {"rejection_fraction", w.rejection_fraction},
          {"recycle", w.recycle},
          {"update_form", enum_name(w.update_form, kFormNames)}};
}

template <typename F>
void checked(const char* section, F&& f) {
  try {
    f();
  } catch (const ContractViolation& e) {
    throw ConfigError(section, e.what());
  }
}

}  // namespace

double RunConfig::uniform_volume() const { return h.value_or(sphere_volume(0.5)); }

void RunConfig::resolve_seeds() {
  init.seed = seed;
  synth.seed = seed;
  window.seed = seed;
  window.front_init.seed = seed;
  window.aligned_front_init.seed = seed;
  window.back_init.seed = seed;
  window.epsilon = epsilon;
  window.h = h;
}

void RunConfig::validate() const {
  checked("batch", [&] { batch.validate(); });
  checked("init", [&] { init.validate(); });
  checked("synth", [&] { synth.validate(); });
  checked("window.front_batch", [&] { window.front_batch.validate(); });
  checked("window.back_batch", [&] { window.back_batch.validate(); });
  checked("window.front_init", [&] { window.front_init.validate(); });
  checked("window.aligned_front_batch", [&] { window.aligned_front_batch.validate(); });
  checked("window.aligned_front_init", [&] { window.aligned_front_init.validate(); });
  checked("window.back_init", [&] { window.back_init.validate(); });
  if (window.front_size < 2) throw ConfigError("window.front_size", "must be at least 2");
  if (window.back_size < 2) throw ConfigError("window.back_size", "must be at least 2");
  if (!(epsilon > 0.0)) throw ConfigError("model.epsilon", "must be positive");
  if (h && !(*h > 0.0)) throw ConfigError("model.h", "must be positive");
}

RunConfig config_from_json(const json& doc) {
  RunConfig cfg;
  if (doc.is_null()) {
    cfg.resolve_seeds();
    return cfg;
  }
  Section root(doc, "");
  root.read("seed", cfg.seed, 0);
  if (const json* v = root.find("batch")) read_batch(*v, "batch", cfg.batch);
  if (const json* v = root.find("init")) read_init(*v, "init", cfg.init);
  if (const json* v = root.find("synth")) read_synth(*v, cfg.synth);
  if (const json* v = root.find("window")) read_window(*v, cfg.window);
  if (const json* v = root.find("model")) {
    Section s(*v, "model");
    s.read("epsilon", cfg.epsilon);
    s.read("h", cfg.h);
    s.finish();
  }
  root.finish();
  cfg.resolve_seeds();
  cfg.validate();
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  return {{"seed", cfg.seed},
          {"batch", write_batch(cfg.batch)},
          {"init", write_init(cfg.init)},
          {"synth", write_synth(cfg.synth)},
          {"window", write_window(cfg.window)},
          {"model", {{"epsilon", cfg.epsilon}, {"h", cfg.h ? json(*cfg.h) : json(nullptr)}}}};
}

void apply_env_overrides(RunConfig& cfg) {
  const char* env = std::getenv("JRMPC_SEED");
  if (env == nullptr || *env == '\0') return;
  const std::string_view s(env);
  std::uint64_t seed = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("JRMPC_SEED", "not a nonnegative integer: '" + std::string(s) + "'");
  }
  cfg.seed = seed;
  cfg.resolve_seeds();
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.resolve_seeds();
  apply_env_overrides(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json doc;
  if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("<file>", path + ": " + e.what());
    }
  }
  RunConfig cfg = config_from_json(doc);
  apply_env_overrides(cfg);
  return cfg;
}

}  // namespace jrmpc
