#include "jrmpc/procrustes.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "jrmpc/errors.hpp"

namespace jrmpc {

Eigen::MatrixXd RigidStepStatistics::projection() const {
  const auto k = static_cast<Eigen::Index>(size());
  const double trace = lambda.squaredNorm();
  return Eigen::MatrixXd::Identity(k, k) - (lambda * lambda.transpose()) / trace;
}

Mat3 RigidStepStatistics::cross_matrix() const {
  const Eigen::VectorXd w2 = lambda.array().square();
  const double trace = w2.sum();
  const Vec3 mean_mu = means * w2 / trace;
  const Vec3 mean_w = virtual_points * w2 / trace;
  const Points mu_c = means.colwise() - mean_mu;
  const Points w_c = virtual_points.colwise() - mean_w;
  return mu_c * w2.asDiagonal() * w_c.transpose();
}

RigidStepStatistics RigidStepStatistics::build(const SetMoments& moments, const MixtureModel& model) {
  if (moments.size() != model.size()) {
    throw ContractViolation("rigid step: moments and mixture disagree on K");
  }
  RigidStepStatistics s;
  for (std::size_t k = 0; k < moments.size(); ++k) {
    if (moments.mass[static_cast<Eigen::Index>(k)] > 0.0) s.active.push_back(k);
  }
  const auto n = static_cast<Eigen::Index>(s.active.size());
  s.virtual_points.resize(3, n);
  s.means.resize(3, n);
  s.lambda.resize(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto k = static_cast<Eigen::Index>(s.active[static_cast<std::size_t>(c)]);
    const double mass = moments.mass[k];
    s.virtual_points.col(c) = moments.weighted_sum.col(k) / mass;
    s.means.col(c) = model.means.col(k);
    s.lambda[c] = std::sqrt(mass / model.variances[k]);
  }
  return s;
}

ProcrustesSolution solve_rigid_step(const RigidStepStatistics& stats) {
  if (stats.size() < 3) {
    throw InsufficientConstraint("rigid step needs at least 3 active components, got " +
                                 std::to_string(stats.size()));
  }
  const Eigen::VectorXd w2 = stats.lambda.array().square();
  const double trace = w2.sum();
  if (!(trace > 0.0) || !std::isfinite(trace)) {
    throw InsufficientConstraint("rigid step weights vanish");
  }
  const Mat3 a = stats.cross_matrix();
  Eigen::JacobiSVD<Mat3> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!sv.allFinite() || !(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0]) {
    throw DegenerateGeometry("rigid step cross matrix has rank < 2");
  }
  const Mat3& ul = svd.matrixU();
  const Mat3& ur = svd.matrixV();
  const double sign = ul.determinant() * ur.determinant() < 0.0 ? -1.0 : 1.0;
  const Mat3 r = ul * Vec3(1.0, 1.0, sign).asDiagonal() * ur.transpose();
  // t = (M - R W) Lambda^2 e / trace(Lambda^2)
  const Vec3 t = (stats.means - r * stats.virtual_points) * w2 / trace;
  return {RigidTransform(r, t), sign, sv};
}

RigidTransform m_rigid_step(const RigidStepStatistics& stats) {
  return solve_rigid_step(stats).transform;
}

RigidTransform weighted_procrustes(const Points& source, const Points& target,
                                   const Eigen::VectorXd& weights) {
  if (source.cols() != target.cols() || source.cols() != weights.size()) {
    throw ContractViolation("weighted_procrustes: size mismatch");
  }
  RigidStepStatistics s;
  s.virtual_points = source;
  s.means = target;
  s.lambda = weights.cwiseMax(0.0).cwiseSqrt();
  s.active.resize(static_cast<std::size_t>(source.cols()));
  for (std::size_t i = 0; i < s.active.size(); ++i) s.active[i] = i;
  return m_rigid_step(s);
}

}  // namespace jrmpc
