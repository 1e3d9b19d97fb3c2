#pragma once

#include <cstddef>
#include <vector>

#include "jrmpc/procrustes.hpp"
#include "jrmpc/types.hpp"

namespace jrmpc {

struct BatchConfig {
  /// Expected K; 0 accepts whatever the initial model carries.
  std::size_t components = 0;
  std::size_t max_iterations = 100;
  /// Outlier/inlier ratio; overrides the initial model's gamma.
  double gamma = 0.1;
  bool update_priors = false;
  /// Leading iterations during which variances stay at their initial values.
  std::size_t fix_variance_iters = 10;
  double convergence_tol = 1e-6;

  void validate() const;
};

/// One EM iteration as seen from the outside.
struct IterationRecord {
  std::size_t iteration = 0;
  /// Objective f evaluated at the parameters produced by this iteration and the
  /// posteriors they were fitted to.
  double objective = 0.0;
  /// f at the parameters entering this iteration, with the same posteriors.
  double objective_start = 0.0;
  /// Change of f - floor_term across this iteration's M-steps. Each step
  /// maximises that floored objective, so this is >= 0 up to round-off.
  double cm_gain = 0.0;
  /// Data log-likelihood (constants dropped) at the parameters entering this iteration.
  double log_likelihood = 0.0;
  double rotation_change = 0.0;     // max_j geodesic angle between successive R_j
  double translation_change = 0.0;  // max_j |t_j^q - t_j^{q-1}|
  double mean_change = 0.0;         // max_k |mu_k^q - mu_k^{q-1}| / spread of mu^{q-1}
};

struct BatchResult {
  std::vector<RigidTransform> transforms;
  MixtureModel model;
  std::vector<ResponsibilityMatrix> responsibilities;
  std::vector<IterationRecord> trace;
  bool converged = false;
};

struct VirtualPoints {
  Points points;                     // w_jk; NaN columns for massless components
  Eigen::VectorXd mass;              // sum_i alpha_jik
  std::vector<std::size_t> massless;  // components excluded from the rigid step
};

/// Posterior-weighted average of the set per component, in the set frame.
VirtualPoints virtual_points(const PointSet& set, const ResponsibilityMatrix& resp);

/// Closed-form means, variances (unless `update_variances` is false) and,
/// when enabled, priors. A component without posterior mass keeps its mean,
/// gets variance epsilon^2 and so becomes degenerate.
MixtureModel m_gmm_step(const std::vector<PointSet>& sets,
                        const std::vector<RigidTransform>& transforms,
                        const std::vector<ResponsibilityMatrix>& resp,
                        const MixtureModel& previous, const BatchConfig& config,
                        bool update_variances = true);

/// Model-frame sufficient statistics summed over all sets.
ComponentStats accumulate_stats(const std::vector<PointSet>& sets,
                                const std::vector<RigidTransform>& transforms,
                                const std::vector<ResponsibilityMatrix>& resp, double gamma);

/// Alternates E, M-rigid and M-GMM steps until `max_iterations` or until the
/// parameter change falls below `convergence_tol` (checked once variances are free).
/// Throws Diverged if the objective stops being finite.
BatchResult run_batch(const std::vector<PointSet>& sets,
                      const std::vector<RigidTransform>& init_transforms,
                      const MixtureModel& init_model, const BatchConfig& config);

}  // namespace jrmpc
