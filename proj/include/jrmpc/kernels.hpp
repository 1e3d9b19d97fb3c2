#pragma once

// Data-parallel O(N K) kernels behind the EM steps.
//
// The default versions parallelise over points with OpenMP. Reductions run over
// fixed-size point blocks that are combined in block order, so results do not
// depend on the thread count. The `serial` namespace holds plain reference
// implementations used by the tests and the kernel benchmark.

#include <vector>

#include "jrmpc/types.hpp"

namespace jrmpc {

/// Posteriors of every point of `set` under `model`, with the set mapped by `t`.
///
/// alpha_ik = beta_ik / (sum_s beta_is + gamma / (h (gamma + 1))),
/// beta_ik  = p_k s_k^{-3/2} exp(-|R v_i + t - mu_k|^2 / (2 s_k)),
/// computed in log space. The last column holds the outlier posterior.
ResponsibilityMatrix e_step(const PointSet& set, const RigidTransform& t, const MixtureModel& model);

std::vector<ResponsibilityMatrix> e_step(const std::vector<PointSet>& sets,
                                         const std::vector<RigidTransform>& transforms,
                                         const MixtureModel& model);

/// Per-component posterior mass, weighted sum and weighted squared norm of the
/// set's points in the set frame.
SetMoments accumulate_moments(const PointSet& set, const ResponsibilityMatrix& resp);

/// sum_i alpha_ik |R v_i + t - mu_k|^2 for every component k.
Eigen::VectorXd weighted_scatter(const PointSet& set, const RigidTransform& t,
                                 const ResponsibilityMatrix& resp, const Points& means);

namespace serial {

ResponsibilityMatrix e_step(const PointSet& set, const RigidTransform& t, const MixtureModel& model);
SetMoments accumulate_moments(const PointSet& set, const ResponsibilityMatrix& resp);
Eigen::VectorXd weighted_scatter(const PointSet& set, const RigidTransform& t,
                                 const ResponsibilityMatrix& resp, const Points& means);

}  // namespace serial

/// Number of OpenMP threads the kernels will use.
int kernel_threads();

}  // namespace jrmpc
