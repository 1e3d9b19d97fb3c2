#pragma once

#include <vector>

#include "jrmpc/types.hpp"

namespace jrmpc {

/// Density of the uniform outlier class as it enters the posterior
/// denominator: gamma / (h (gamma + 1)). Zero when gamma is zero.
double uniform_density(const MixtureModel& model);

/// Expected complete-data log-likelihood (constants dropped) for isotropic
/// components:
///
///   f = -1/2 sum_jik a_jik (|T_j v_ji - mu_k|^2 / s_k + 3 log s_k - 2 log p_k)
///       + log p_{K+1} sum_ji a_ji,K+1
///
/// Evaluated term by term; run_batch computes the same value from per-component
/// scatter sums.
double evaluate_objective(const std::vector<PointSet>& sets,
                          const std::vector<RigidTransform>& transforms,
                          const MixtureModel& model,
                          const std::vector<ResponsibilityMatrix>& resp);

/// Same objective from per-component totals: mass a_k, scatter
/// sum a |x - mu_k|^2, and total outlier mass.
double objective_from_totals(const MixtureModel& model, const Eigen::VectorXd& mass,
                             const Eigen::VectorXd& scatter, double outlier_mass);

/// (3 eps^2 / 2) sum_k a_k / s_k. The variance update s = S / 3a + eps^2 is
/// the exact maximiser of f minus this term, not of f itself.
double floor_term(const MixtureModel& model, const Eigen::VectorXd& mass);

}  // namespace jrmpc
