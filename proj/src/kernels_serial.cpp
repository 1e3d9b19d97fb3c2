// Reference kernels: one loop nest each, no blocking, no threads.

#include <cmath>
#include <limits>

#include "jrmpc/errors.hpp"
#include "jrmpc/kernels.hpp"
#include "jrmpc/objective.hpp"

namespace jrmpc::serial {

ResponsibilityMatrix e_step(const PointSet& set, const RigidTransform& t, const MixtureModel& model) {
  model.validate();
  const Eigen::Index n = set.points.cols();
  const Eigen::Index k_count = model.means.cols();
  const double cu = uniform_density(model);

  ResponsibilityMatrix out;
  out.set_id = set.id;
  out.alpha.resize(n, k_count + 1);
  Eigen::VectorXd log_beta(k_count);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 x = t.apply(Vec3(set.points.col(i)));
    for (Eigen::Index k = 0; k < k_count; ++k) {
      const double s = model.variances[k];
      log_beta[k] = std::log(model.priors[k]) - 1.5 * std::log(s) -
                    (x - model.means.col(k)).squaredNorm() / (2.0 * s);
    }
    double top = log_beta.maxCoeff();
    if (cu > 0.0) top = std::max(top, std::log(cu));
    if (cu == 0.0 && top < std::log(std::numeric_limits<double>::min())) {
      out.alpha.row(i).head(k_count).setConstant(1.0 / static_cast<double>(k_count));
      out.alpha(i, k_count) = 0.0;
      ++out.underflow_rows;
      out.log_likelihood += top;
      continue;
    }
    const Eigen::VectorXd scaled = (log_beta.array() - top).exp();
    const double outlier = cu > 0.0 ? cu * std::exp(-top) : 0.0;
    const double denom = scaled.sum() + outlier;
    out.alpha.row(i).head(k_count) = scaled.transpose() / denom;
    out.alpha(i, k_count) = outlier / denom;
    out.log_likelihood += top + std::log(denom);
  }
  return out;
}

SetMoments accumulate_moments(const PointSet& set, const ResponsibilityMatrix& resp) {
  if (static_cast<std::size_t>(resp.alpha.rows()) != set.size()) {
    throw ContractViolation("responsibility matrix does not match point set");
  }
  const Eigen::Index k_count = resp.alpha.cols() - 1;
  SetMoments m;
  m.mass = resp.alpha.leftCols(k_count).colwise().sum().transpose();
  m.weighted_sum = set.points * resp.alpha.leftCols(k_count);
  m.weighted_sq_norm = resp.alpha.leftCols(k_count).transpose() *
                       set.points.colwise().squaredNorm().transpose();
  m.outlier_mass = resp.alpha.col(k_count).sum();
  m.point_count = set.size();
  return m;
}

Eigen::VectorXd weighted_scatter(const PointSet& set, const RigidTransform& t,
                                 const ResponsibilityMatrix& resp, const Points& means) {
  const Eigen::Index k_count = resp.alpha.cols() - 1;
  if (means.cols() != k_count || static_cast<std::size_t>(resp.alpha.rows()) != set.size()) {
    throw ContractViolation("weighted_scatter: shape mismatch");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(k_count);
  for (Eigen::Index i = 0; i < resp.alpha.rows(); ++i) {
    const Vec3 x = t.apply(Vec3(set.points.col(i)));
    for (Eigen::Index k = 0; k < k_count; ++k) {
      out[k] += resp.alpha(i, k) * (x - means.col(k)).squaredNorm();
    }
  }
  return out;
}

}  // namespace jrmpc::serial
