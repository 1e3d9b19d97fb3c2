#pragma once

#include <vector>

#include "jrmpc/types.hpp"

namespace jrmpc {

struct RotationErrorReport {
  double mean = 0.0;
  /// ||R1^T Rj - G1^T Gj||_F for j = 2..M (index 0 is set 2).
  std::vector<double> per_view;
};

/// Frobenius rotation error of every set relative to the first one. Both
/// argument lists hold set-to-model transforms; only rotations matter.
RotationErrorReport rotation_rmse(const std::vector<RigidTransform>& estimated,
                                  const std::vector<RigidTransform>& truth);

/// ||Ra^T Rb - Ga^T Gb||_F for one pair of sets (0-based indices).
double pair_rotation_error(const std::vector<RigidTransform>& estimated,
                           const std::vector<RigidTransform>& truth, std::size_t a, std::size_t b);

/// Mean over all sets of the geodesic angle (degrees) between the estimated
/// and true rotation, both expressed relative to set 1.
double mean_composition_angle(const std::vector<RigidTransform>& estimated,
                              const std::vector<RigidTransform>& truth);

/// Geodesic angle (degrees) between relative poses a->b of estimate and truth.
double relative_rotation_error_deg(const std::vector<RigidTransform>& estimated,
                                   const std::vector<RigidTransform>& truth, std::size_t a,
                                   std::size_t b);

}  // namespace jrmpc
