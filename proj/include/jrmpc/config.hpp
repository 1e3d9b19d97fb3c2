#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "jrmpc/batch.hpp"
#include "jrmpc/incremental.hpp"
#include "jrmpc/init.hpp"
#include "jrmpc/synth.hpp"

namespace jrmpc {

/// Everything a run can be configured with. Sections map one-to-one to the
/// JSON objects "batch", "init", "synth", "window" and "model"; "seed" is
/// top level and is copied into every seeded component by resolve_seeds().
struct RunConfig {
  BatchConfig batch{};
  InitConfig init{};
  SynthConfig synth{};
  WindowConfig window{};
  double epsilon = 1e-3;
  /// Uniform-component volume in normalized units; nullopt = sphere of radius 0.5.
  std::optional<double> h;
  std::uint64_t seed = 0;

  double uniform_volume() const;
  /// Propagates `seed`, `epsilon` and `h` into the sub-configs.
  void resolve_seeds();
  /// Runs every sub-config's validate(); rethrows as ConfigError naming the section.
  void validate() const;
};

/// Parses and validates a config document. Unknown keys and type mismatches
/// throw ConfigError with the dotted key path.
RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Reads `path`; an empty or whitespace-only file yields the defaults.
/// JRMPC_SEED in the environment overrides the seed.
RunConfig load_config(const std::string& path);
/// Defaults plus the JRMPC_SEED override.
RunConfig default_config();

/// Applies JRMPC_SEED if set. Throws ConfigError on a malformed value.
void apply_env_overrides(RunConfig& cfg);

}  // namespace jrmpc
