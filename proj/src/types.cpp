#include "jrmpc/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "jrmpc/errors.hpp"

namespace jrmpc {

PointSet::PointSet(std::size_t set_id, Points pts) : id(set_id), points(std::move(pts)) {
  if (!points.allFinite()) {
    throw DomainError("point set " + std::to_string(id) + " has a non-finite coordinate");
  }
}

Vec3 PointSet::centroid() const {
  if (empty()) throw ContractViolation("centroid of an empty point set");
  return points.rowwise().mean();
}

std::size_t total_points(const std::vector<PointSet>& sets) {
  std::size_t n = 0;
  for (const auto& s : sets) n += s.size();
  return n;
}

bool RigidTransform::is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const Mat3 gram = r.transpose() * r;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_rotation(rotation_)) throw DomainError("matrix is not a proper rotation");
  if (!translation_.allFinite()) throw DomainError("non-finite translation");
}

Points RigidTransform::apply(const Points& p) const {
  return (rotation_ * p).colwise() + translation_;
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return RigidTransform(rt, -(rt * translation_));
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  return RigidTransform(rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_);
}

Vec3 apply_transform(const RigidTransform& t, const Vec3& p) { return t.apply(p); }

Mat3 axis_angle(const Vec3& axis, double radians) {
  return Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix();
}

double rotation_angle(const Mat3& r) {
  const Vec3 skew(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = 0.5 * skew.norm();
  const double c = 0.5 * (r.trace() - 1.0);
  return std::atan2(s, c);
}

bool MixtureModel::is_degenerate(std::size_t k) const {
  const double floor = variance_floor();
  return variances[static_cast<Eigen::Index>(k)] - floor <= 1e-9 * floor;
}

std::vector<std::size_t> MixtureModel::degenerate_components() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < size(); ++k) {
    if (is_degenerate(k)) out.push_back(k);
  }
  return out;
}

void MixtureModel::validate() const {
  const auto k = means.cols();
  if (k < 1) throw ContractViolation("mixture needs at least one component");
  if (variances.size() != k) throw ContractViolation("variances/means size mismatch");
  if (priors.size() != k + 1) throw ContractViolation("priors must have K+1 entries");
  if (!means.allFinite()) throw DomainError("non-finite mean");
  if (!(variances.array() > 0.0).all() || !variances.allFinite()) {
    throw DomainError("variances must be positive and finite");
  }
  if (!(priors.array() >= 0.0).all()) throw DomainError("negative prior");
  if (std::abs(priors.sum() - 1.0) > 1e-12) throw DomainError("priors do not sum to one");
  if (!(h > 0.0)) throw DomainError("uniform volume h must be positive");
  if (!(gamma >= 0.0)) throw DomainError("gamma must be nonnegative");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
}

MixtureModel MixtureModel::with_uniform_priors(Points means, Eigen::VectorXd variances,
                                               double gamma, double h, double epsilon) {
  MixtureModel m;
  const auto k = means.cols();
  m.means = std::move(means);
  m.variances = std::move(variances);
  m.priors = Eigen::VectorXd::Constant(k + 1, 1.0 / static_cast<double>(k + 1));
  m.gamma = gamma;
  m.h = h;
  m.epsilon = epsilon;
  return m;
}

double sphere_volume(double radius) {
  return 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
}

ComponentStats ComponentStats::zeros(std::size_t k) {
  ComponentStats s;
  const auto n = static_cast<Eigen::Index>(k);
  s.mass = Eigen::VectorXd::Zero(n);
  s.first_moment = Points::Zero(3, n);
  s.second_moment = Eigen::VectorXd::Zero(n);
  return s;
}

ComponentStats ComponentStats::from_moments(const SetMoments& m, const RigidTransform& t,
                                            double gamma) {
  const Mat3& r = t.rotation();
  const Vec3& tr = t.translation();
  ComponentStats s;
  s.mass = m.mass;
  // sum a (R v + t) = R (sum a v) + a t
  s.first_moment = (r * m.weighted_sum) + tr * m.mass.transpose();
  // sum a |R v + t|^2 = sum a |v|^2 + 2 t^T R (sum a v) + a |t|^2
  s.second_moment = m.weighted_sq_norm + 2.0 * ((r * m.weighted_sum).transpose() * tr) +
                    m.mass * tr.squaredNorm();
  s.outlier_mass = m.outlier_mass;
  s.point_count = static_cast<double>(m.point_count);
  s.eta = (gamma + 1.0) * (s.point_count - s.outlier_mass);
  return s;
}

ComponentStats& ComponentStats::operator+=(const ComponentStats& rhs) {
  if (rhs.size() != size()) throw ContractViolation("component stats size mismatch");
  mass += rhs.mass;
  first_moment += rhs.first_moment;
  second_moment += rhs.second_moment;
  eta += rhs.eta;
  outlier_mass += rhs.outlier_mass;
  point_count += rhs.point_count;
  return *this;
}

Points ComponentStats::means(const Points& fallback) const {
  Points mu = fallback;
  for (Eigen::Index k = 0; k < mass.size(); ++k) {
    if (mass[k] > 0.0) mu.col(k) = first_moment.col(k) / mass[k];
  }
  return mu;
}

Eigen::VectorXd ComponentStats::variances(const Points& mu, double floor,
                                          std::vector<std::size_t>* clamped) const {
  Eigen::VectorXd var(mass.size());
  for (Eigen::Index k = 0; k < mass.size(); ++k) {
    if (!(mass[k] > 0.0)) {
      var[k] = floor;
      continue;
    }
    // E|x - mu|^2 = E|x|^2 - 2 mu.E[x] + |mu|^2
    const Vec3 mean_x = first_moment.col(k) / mass[k];
    const double scatter = second_moment[k] / mass[k] - 2.0 * mu.col(k).dot(mean_x) +
                           mu.col(k).squaredNorm();
    if (scatter < 0.0) {
      var[k] = floor;
      if (clamped) clamped->push_back(static_cast<std::size_t>(k));
    } else {
      var[k] = scatter / 3.0 + floor;
    }
  }
  return var;
}

}  // namespace jrmpc


namespace jrmpc {

double median(std::vector<double> values) {
  if (values.empty()) throw ContractViolation("median of an empty range");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace jrmpc
