#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace jrmpc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
/// 3 x N matrix, one point per column.
using Points = Eigen::Matrix3Xd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One view's samples, expressed in the view's own frame.
struct PointSet {
  std::size_t id = 0;
  Points points;

  PointSet() = default;
  /// Throws DomainError on a non-finite coordinate.
  PointSet(std::size_t id, Points pts);

  std::size_t size() const noexcept { return static_cast<std::size_t>(points.cols()); }
  bool empty() const noexcept { return points.cols() == 0; }
  Vec3 centroid() const;
};

/// Total number of points over all sets.
std::size_t total_points(const std::vector<PointSet>& sets);

/// Proper rigid motion x -> R x + t mapping a set frame to the model frame.
class RigidTransform {
 public:
  static constexpr double kTolerance = 1e-9;

  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  /// Throws DomainError unless R^T R = I and det R = +1 within kTolerance.
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static bool is_rotation(const Mat3& r, double tol = kTolerance);

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Points apply(const Points& p) const;
  RigidTransform inverse() const;
  /// (this * rhs).apply(x) == this->apply(rhs.apply(x)).
  RigidTransform operator*(const RigidTransform& rhs) const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

Vec3 apply_transform(const RigidTransform& t, const Vec3& p);

/// Rotation about a unit axis by `radians`.
Mat3 axis_angle(const Vec3& axis, double radians);
/// Geodesic angle of a rotation in radians, accurate near zero.
double rotation_angle(const Mat3& r);

/// K isotropic Gaussians plus one uniform component.
///
/// `priors` has K+1 entries; the last is the uniform weight. `epsilon` is the
/// variance regulariser: M-step variances are floored by epsilon^2.
struct MixtureModel {
  Points means;
  Eigen::VectorXd variances;
  Eigen::VectorXd priors;
  double gamma = 0.0;
  double h = 1.0;
  double epsilon = 1e-3;

  std::size_t size() const noexcept { return static_cast<std::size_t>(means.cols()); }
  double variance_floor() const noexcept { return epsilon * epsilon; }
  bool is_degenerate(std::size_t k) const;
  std::vector<std::size_t> degenerate_components() const;

  /// Checks shapes, positivity of variances and h, and that priors sum to one.
  void validate() const;

  static MixtureModel with_uniform_priors(Points means, Eigen::VectorXd variances, double gamma,
                                          double h, double epsilon);
};

double sphere_volume(double radius);

/// Posteriors of one set: N_j rows, K+1 columns (last column is the outlier class).
struct ResponsibilityMatrix {
  std::size_t set_id = 0;
  RowMatrix alpha;
  /// sum_i log(sum_k beta_ik + uniform term), i.e. the data log-likelihood up to constants.
  double log_likelihood = 0.0;
  /// Rows where every beta underflowed and the uniform fallback was used.
  std::size_t underflow_rows = 0;

  std::size_t points() const noexcept { return static_cast<std::size_t>(alpha.rows()); }
  std::size_t components() const noexcept {
    return alpha.cols() > 0 ? static_cast<std::size_t>(alpha.cols() - 1) : 0;
  }
};

/// Posterior-weighted sums of one set, in the set's own frame.
struct SetMoments {
  Eigen::VectorXd mass;            // sum_i alpha_ik
  Points weighted_sum;             // sum_i alpha_ik v_i
  Eigen::VectorXd weighted_sq_norm;  // sum_i alpha_ik |v_i|^2
  double outlier_mass = 0.0;       // sum_i alpha_i,K+1
  std::size_t point_count = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(mass.size()); }
};

/// Cumulative sufficient statistics per component, in the model frame.
struct ComponentStats {
  Eigen::VectorXd mass;
  Points first_moment;
  Eigen::VectorXd second_moment;
  double eta = 0.0;
  double outlier_mass = 0.0;
  double point_count = 0.0;

  static ComponentStats zeros(std::size_t k);
  /// Maps set-frame moments through `t`; eta = (gamma+1)(N_j - outlier mass).
  static ComponentStats from_moments(const SetMoments& m, const RigidTransform& t, double gamma);

  std::size_t size() const noexcept { return static_cast<std::size_t>(mass.size()); }
  ComponentStats& operator+=(const ComponentStats& rhs);

  /// first_moment / mass; components without mass keep `fallback`.
  Points means(const Points& fallback) const;
  /// Isotropic variance about `means` plus `floor`; massless or negative entries clamp to `floor`.
  Eigen::VectorXd variances(const Points& means, double floor, std::vector<std::size_t>* clamped = nullptr) const;
};

}  // namespace jrmpc

namespace jrmpc {

/// Median with the two middle values averaged for even counts. Throws on empty input.
double median(std::vector<double> values);

}  // namespace jrmpc
