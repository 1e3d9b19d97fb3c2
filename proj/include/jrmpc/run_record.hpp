#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "jrmpc/batch.hpp"
#include "jrmpc/incremental.hpp"
#include "jrmpc/synth.hpp"
#include "jrmpc/types.hpp"

namespace jrmpc {

struct MixtureSummary {
  std::size_t components = 0;
  /// Variance histogram over [min, max] in equal-width bins.
  std::vector<double> sigma_bin_edges;
  std::vector<std::size_t> sigma_counts;
  /// Components above the 2 x median variance threshold.
  std::vector<std::size_t> rejected;
  double threshold = 0.0;

  static MixtureSummary of(const MixtureModel& model, std::size_t bins = 10);
};

/// Persistent result of one CLI run. All geometry (transforms, model) is in
/// the original input units; `normalization_scale` records the factor that
/// was divided out internally.
struct RunRecord {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<IterationRecord> trace;
  std::vector<RigidTransform> transforms;
  double normalization_scale = 1.0;
  MixtureModel model;
  MixtureSummary mixture;
  std::vector<IntegrationRecord> integrations;
  std::vector<std::size_t> flagged_groups;
  bool converged = false;
  /// rotation_rmse, mean_composition_angle, ... when ground truth was available.
  std::map<std::string, double> metrics;
  double runtime_ms = 0.0;
};

nlohmann::json transform_to_json(const RigidTransform& t);
/// Throws DomainError if the rotation is not orthonormal within 1e-9.
RigidTransform transform_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);

/// Pretty-printed JSON; the only run-dependent field is "runtime_ms".
void save_record(const RunRecord& r, const std::string& path);
RunRecord load_record(const std::string& path);

nlohmann::json to_json(const GroundTruth& t);
GroundTruth truth_from_json(const nlohmann::json& j);
void save_truth(const GroundTruth& t, const std::string& path);
GroundTruth load_truth(const std::string& path);

/// Multiplies translations by `scale`.
std::vector<RigidTransform> denormalize(const std::vector<RigidTransform>& transforms, double scale);
/// Means by `scale`, variances and epsilon by scale^2 and scale, h by scale^3.
MixtureModel denormalize(const MixtureModel& model, double scale);

}  // namespace jrmpc
