#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "jrmpc/batch.hpp"
#include "jrmpc/init.hpp"
#include "jrmpc/types.hpp"

namespace jrmpc {

/// How m_gmm_update recombines the new set with the frozen history.
enum class UpdateForm {
  /// Exact recombination of (mass, sum x, sum |x|^2); equals a batch M-step
  /// over all sets with the earlier transforms frozen.
  moments,
  /// Literal transcription of the published recurrences (zeta_k, u_mk,
  /// Delta mu_k, per-component eta). Kept for comparison only.
  printed,
};

struct UpdateDiagnostics {
  std::vector<std::size_t> skipped;  // alpha_mk == 0, left untouched
  std::vector<std::size_t> clamped;  // recombined variance fell below the floor
};

/// Mixture fitted to sets 1..m-1 plus the statistics needed to fold in set m.
///
/// Invariant: priors[k] * stats.eta == stats.mass[k] for every Gaussian k.
struct IncrementalState {
  MixtureModel model;
  ComponentStats stats;
  /// Fraction of K recycled after each integration (0 disables recycling).
  double rejection_fraction = 0.0;
  std::mt19937_64 rng{0};
  UpdateDiagnostics last_update;

  /// Builds the state from stored posteriors of already registered sets. Means,
  /// variances and priors are recomputed from the accumulated statistics;
  /// `base` provides gamma, h, epsilon and fallback means for massless components.
  static IncrementalState from_history(const std::vector<PointSet>& sets,
                                       const std::vector<RigidTransform>& transforms,
                                       const std::vector<ResponsibilityMatrix>& resp,
                                       const MixtureModel& base, double rejection_fraction = 0.0,
                                       std::uint64_t seed = 0);
};

ResponsibilityMatrix e_step_new_set(const IncrementalState& state, const PointSet& new_set,
                                    const RigidTransform& transform);

/// Closed-form rigid step of the new set against the state's means.
RigidTransform m_rigid_new_set(const IncrementalState& state, const PointSet& new_set,
                               const ResponsibilityMatrix& resp);

/// Folds the new set's posteriors into `state`. Components the new set does not
/// touch keep their mean and variance.
IncrementalState m_gmm_update(const IncrementalState& state, const PointSet& new_set,
                              const RigidTransform& transform, const ResponsibilityMatrix& resp,
                              UpdateForm form = UpdateForm::moments);

struct IntegrateOptions {
  std::size_t iterations = 1;  // Q
  bool recycle = true;         // honours state.rejection_fraction
  UpdateForm form = UpdateForm::moments;
};

struct IntegrationRecord {
  std::size_t set_id = 0;
  RigidTransform transform;
  Eigen::VectorXd masses;              // alpha_mk of the last iteration
  std::vector<std::size_t> recycled;   // component ids re-seeded from the new set
  bool rigid_step_skipped = false;     // too few active components; transform kept
};

struct IntegrationResult {
  RigidTransform transform;
  IncrementalState state;
  IntegrationRecord record;
};

/// E-step, rigid step and mixture update repeated `iterations` times, each
/// update starting from the frozen state of sets 1..m-1; then optional
/// recycling of rejection_fraction * K components (degenerate ones first).
IntegrationResult integrate_set(const IncrementalState& state, const PointSet& new_set,
                                const RigidTransform& init_transform,
                                const IntegrateOptions& options = {});

/// Settings of the two-level pipeline for long sequences.
/// For sets that already start near their final pose: means sampled from the
/// aligned data and variances at 2% of the median-distance value, with no
/// frozen-variance iterations. Broad initial variances let the first rigid
/// steps swing such sets far away from a good start.
InitConfig prealigned_init();
BatchConfig prealigned_batch();

struct WindowConfig {
  std::size_t front_size = 3;   // N_f, frames per front-end group
  std::size_t back_size = 10;   // N_b, mean sets kept in the back-end window
  /// Front-end settings without provided poses.
  BatchConfig front_batch{};
  InitConfig front_init{};
  /// Front-end settings when run_windowed receives provided poses.
  BatchConfig aligned_front_batch = prealigned_batch();
  InitConfig aligned_front_init = prealigned_init();
  /// The back-end always starts from chained front-end poses. Its K policy
  /// applies to mean-set cardinalities.
  InitConfig back_init = prealigned_init();
  BatchConfig back_batch = prealigned_batch();
  std::size_t bootstrap_iterations = 50;
  std::size_t integrate_iterations = 1;
  std::size_t refine_iterations = 30;
  /// Batch refinement of the window after every `refine_every` integrations (0 = never).
  std::size_t refine_every = 1;
  /// Negative selects K / (number of mean sets).
  double rejection_fraction = -1.0;
  bool recycle = true;
  UpdateForm update_form = UpdateForm::moments;
  double epsilon = 1e-3;
  /// Uniform-component volume; nullopt means the volume of a sphere of radius 0.5.
  std::optional<double> h;
  std::uint64_t seed = 0;
};

struct WindowedResult {
  std::vector<RigidTransform> transforms;  // per frame, into the back-end frame
  MixtureModel model;
  std::vector<PointSet> mean_sets;         // front-end output, group frames
  std::vector<std::size_t> flagged_groups; // front-end failures (identity fallback)
  std::vector<IntegrationRecord> integrations;
};

/// Front-end: batch registration of N_f successive frames with one shared
/// frame between groups, reduced to inlier means. Back-end: incremental
/// integration of those mean sets with periodic batch refinement. `provided`
/// pre-aligns the frames when available.
WindowedResult run_windowed(const std::vector<PointSet>& sequence, const WindowConfig& cfg,
                            const std::optional<std::vector<RigidTransform>>& provided = std::nullopt);

}  // namespace jrmpc
