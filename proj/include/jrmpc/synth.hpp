#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "jrmpc/types.hpp"

namespace jrmpc {

struct SynthConfig {
  /// View angles in degrees; each view is rotated about the y axis.
  std::vector<double> angles_deg{0.0, 10.0, 20.0, 30.0};
  std::size_t cardinality_lo = 1000;
  std::size_t cardinality_hi = 2000;
  /// Signal-to-noise ratio in dB; nullopt disables noise.
  std::optional<double> snr_db = 10.0;
  /// Outliers per view as a fraction of that view's inlier count.
  double outlier_fraction = 0.3;
  std::size_t outlier_cluster_count = 5;
  /// Ball radius around each outlier centre, relative to the view's bounding-box diameter.
  double outlier_radius_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruth {
  /// View-to-model transforms.
  std::vector<RigidTransform> transforms;
  /// Per view, per point: true for planted outliers.
  std::vector<std::vector<bool>> outlier;
  /// Per view: centred signal power and empirical noise power, both per coordinate.
  std::vector<double> signal_power;
  std::vector<double> noise_power;
};

struct SyntheticScene {
  std::vector<PointSet> views;
  GroundTruth truth;
};

/// Simulates partial views of `model_points`: centre, downsample to a random
/// cardinality, rotate about y, drop points with z < 0, add Gaussian noise at
/// the requested SNR and clustered outliers. Bit-reproducible for a fixed seed.
SyntheticScene synthesize_views(const Points& model_points, const SynthConfig& cfg);

/// Asymmetric animal-like surface (a union of ellipsoids) sampled with `n` points,
/// centred at the origin with bounding-box diameter 1.
Points make_blob_object(std::size_t n, std::uint64_t seed);

/// Rotation about the y axis (the one that keeps the xz plane).
Mat3 rotation_y(double degrees);

}  // namespace jrmpc
