#pragma once

#include <vector>

#include "jrmpc/types.hpp"

namespace jrmpc {

/// Inputs of the closed-form rigid step for one set.
///
/// Only components with positive posterior mass are kept; a massless component
/// has no virtual point and would contribute a zero column anyway.
struct RigidStepStatistics {
  Points virtual_points;   // W_j, 3 x K_active
  Points means;            // M, 3 x K_active
  Eigen::VectorXd lambda;  // diagonal of Lambda_j: sqrt(mass_k / s_k)
  std::vector<std::size_t> active;

  std::size_t size() const noexcept { return active.size(); }

  /// P_j = I - Lambda e e^T Lambda / (e^T Lambda^2 e), materialised (K_active^2 memory).
  Eigen::MatrixXd projection() const;
  /// M Lambda P Lambda W^T, evaluated as a weighted centred cross-covariance.
  Mat3 cross_matrix() const;

  /// Builds W_j and Lambda_j from set-frame moments and the current mixture.
  static RigidStepStatistics build(const SetMoments& moments, const MixtureModel& model);
};

struct ProcrustesSolution {
  RigidTransform transform;
  /// Last entry of S_j = diag(1, 1, |U^l| |U^r|).
  double reflection_sign = 1.0;
  Vec3 singular_values = Vec3::Zero();
};

/// Weighted Procrustes with determinant guard: minimises
/// || (R W + t e^T - M) Lambda ||_F over proper rotations.
///
/// Throws InsufficientConstraint with fewer than three active components and
/// DegenerateGeometry when the cross matrix has rank below two.
ProcrustesSolution solve_rigid_step(const RigidStepStatistics& stats);

/// Transform part of solve_rigid_step.
RigidTransform m_rigid_step(const RigidStepStatistics& stats);

/// Rigid motion minimising sum_i w_i |R source_i + t - target_i|^2.
RigidTransform weighted_procrustes(const Points& source, const Points& target,
                                   const Eigen::VectorXd& weights);

}  // namespace jrmpc
