#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "jrmpc/types.hpp"

namespace jrmpc {

enum class MeanStrategy { sphere, sample_one_set, sample_aligned };
enum class TranslationStrategy { centroid, median, provided };
enum class KPolicy { fraction, absolute };
enum class SigmaStrategy { median_distance, fixed };

struct InitConfig {
  MeanStrategy mean_strategy = MeanStrategy::sphere;
  TranslationStrategy translation_strategy = TranslationStrategy::centroid;
  KPolicy k_policy = KPolicy::fraction;
  double k_fraction = 0.6;
  std::size_t k_absolute = 0;
  /// Sphere radius as a multiple of the bounding-box diameter of the centred union.
  double sphere_radius_scale = 0.6;
  SigmaStrategy sigma_strategy = SigmaStrategy::median_distance;
  double sigma_fixed = 1.0;
  /// Multiplies the median-distance variances.
  double sigma_scale = 1.0;
  /// Seeds the sampling mean strategies.
  std::uint64_t seed = 0;

  void validate() const;
};

/// Identity rotations; translations send each set's centroid (or per-axis
/// median) to the origin. With `provided` every transform is the identity and
/// the caller is expected to substitute its own.
std::vector<RigidTransform> init_transforms(const std::vector<PointSet>& sets, const InitConfig& cfg);

/// K means on a Fibonacci lattice over the sphere centred at the centroid of
/// the transformed union, radius = sphere_radius_scale * bounding-box diameter.
Points init_means_sphere(const std::vector<PointSet>& sets,
                         const std::vector<RigidTransform>& transforms, std::size_t k,
                         const InitConfig& cfg);

/// Dispatches on cfg.mean_strategy. The sampling strategies draw (seeded) points
/// from the first transformed set or from the whole transformed union.
Points init_means(const std::vector<PointSet>& sets, const std::vector<RigidTransform>& transforms,
                  std::size_t k, const InitConfig& cfg);

/// Median squared distance from each mean to all transformed points, or the fixed value.
Eigen::VectorXd init_variances(const std::vector<PointSet>& sets,
                               const std::vector<RigidTransform>& transforms, const Points& means,
                               const InitConfig& cfg);

struct KChoice {
  std::size_t count = 0;
  bool clamped = false;  // raised to the minimum of 3
};

KChoice choose_K(const std::vector<PointSet>& sets, const InitConfig& cfg);

struct InitialEstimate {
  std::vector<RigidTransform> transforms;
  MixtureModel model;
  KChoice k;
};

/// Full initialization: K, transforms (or `provided`), means, variances and
/// priors 1/(K+1).
InitialEstimate initialize(const std::vector<PointSet>& sets, const InitConfig& cfg, double gamma,
                           double h, double epsilon,
                           const std::optional<std::vector<RigidTransform>>& provided = std::nullopt);

/// Axis-aligned bounding box diagonal of a point matrix.
double bounding_box_diameter(const Points& points);

/// Transformed union of all sets, one point per column.
Points transformed_union(const std::vector<PointSet>& sets,
                         const std::vector<RigidTransform>& transforms);

}  // namespace jrmpc
