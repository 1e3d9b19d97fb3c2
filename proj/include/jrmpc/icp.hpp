#pragma once

#include <optional>
#include <vector>

#include "jrmpc/types.hpp"

namespace jrmpc {

struct IcpOptions {
  std::size_t max_iterations = 100;
  /// Stop once the mean squared residual changes by less than this.
  double tolerance = 1e-12;
  RigidTransform init{};
};

struct IcpResult {
  RigidTransform transform;  // data frame -> model frame
  double rmse = 0.0;
  std::size_t iterations = 0;
  /// Residual grew three iterations in a row; `transform` is the best seen.
  bool diverged = false;
};

/// Point-to-point ICP: nearest neighbours in `model`, then Procrustes, repeated.
/// No correspondence rejection.
IcpResult pairwise_icp(const PointSet& data, const PointSet& model, const IcpOptions& options = {});

/// Every set j >= 2 registered against set 1, translations initialised by
/// centroid alignment. Returns transforms into set 1's frame (set 1 = identity).
std::vector<RigidTransform> one_vs_all_icp(const std::vector<PointSet>& sets, std::size_t iterations);

/// Chains ICP between consecutive sets. With `provided` the chain starts from
/// provided[0] and each pair is initialised with the provided relative pose;
/// otherwise from the identity with centroid alignment.
std::vector<RigidTransform> sequential_icp(
    const std::vector<PointSet>& sets, std::size_t iterations,
    const std::optional<std::vector<RigidTransform>>& provided = std::nullopt);

}  // namespace jrmpc
