#include "jrmpc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "jrmpc/errors.hpp"
#include "jrmpc/objective.hpp"

namespace jrmpc {

namespace {

constexpr Eigen::Index kBlock = 512;

Eigen::Index block_count(Eigen::Index n) { return (n + kBlock - 1) / kBlock; }

void check_resp(const PointSet& set, const ResponsibilityMatrix& resp) {
  if (static_cast<std::size_t>(resp.alpha.rows()) != set.size() || resp.alpha.cols() < 2) {
    throw ContractViolation("responsibility matrix does not match point set " +
                            std::to_string(set.id));
  }
}

}  // namespace

int kernel_threads() { return omp_get_max_threads(); }

ResponsibilityMatrix e_step(const PointSet& set, const RigidTransform& t, const MixtureModel& model) {
  model.validate();
  const Eigen::Index n = set.points.cols();
  const Eigen::Index k_count = model.means.cols();
  const double cu = uniform_density(model);
  const double log_cu = cu > 0.0 ? std::log(cu) : -std::numeric_limits<double>::infinity();
  const double log_min_normal = std::log(std::numeric_limits<double>::min());

  std::vector<double> log_norm(static_cast<std::size_t>(k_count));
  std::vector<double> half_prec(static_cast<std::size_t>(k_count));
  std::vector<double> mx(static_cast<std::size_t>(k_count)), my(mx.size()), mz(mx.size());
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double s = model.variances[k];
    const auto u = static_cast<std::size_t>(k);
    log_norm[u] = std::log(model.priors[k]) - 1.5 * std::log(s);
    half_prec[u] = 0.5 / s;
    mx[u] = model.means(0, k);
    my[u] = model.means(1, k);
    mz[u] = model.means(2, k);
  }

  ResponsibilityMatrix out;
  out.set_id = set.id;
  out.alpha.resize(n, k_count + 1);
  std::vector<double> row_loglik(static_cast<std::size_t>(n));
  std::vector<unsigned char> underflow(static_cast<std::size_t>(n), 0);

  const Mat3 r = t.rotation();
  const Vec3 tr = t.translation();

#pragma omp parallel
  {
    std::vector<double> lb(static_cast<std::size_t>(k_count));
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vec3 x = r * set.points.col(i) + tr;
      const double x0 = x[0], x1 = x[1], x2 = x[2];
      double m = log_cu;
      for (Eigen::Index k = 0; k < k_count; ++k) {
        const auto u = static_cast<std::size_t>(k);
        const double d0 = x0 - mx[u], d1 = x1 - my[u], d2 = x2 - mz[u];
        lb[u] = log_norm[u] - half_prec[u] * (d0 * d0 + d1 * d1 + d2 * d2);
        m = std::max(m, lb[u]);
      }
      double* row = out.alpha.row(i).data();
      // Every beta would be zero in linear arithmetic and there is no outlier class.
      if (cu == 0.0 && m < log_min_normal) {
        const double flat = 1.0 / static_cast<double>(k_count);
        std::fill(row, row + k_count, flat);
        row[k_count] = 0.0;
        underflow[static_cast<std::size_t>(i)] = 1;
        row_loglik[static_cast<std::size_t>(i)] = m;
        continue;
      }
      double sum = 0.0;
      for (Eigen::Index k = 0; k < k_count; ++k) {
        const double e = std::exp(lb[static_cast<std::size_t>(k)] - m);
        row[k] = e;
        sum += e;
      }
      const double outlier = cu > 0.0 ? std::exp(log_cu - m) : 0.0;
      sum += outlier;
      const double inv = 1.0 / sum;
      for (Eigen::Index k = 0; k < k_count; ++k) row[k] *= inv;
      row[k_count] = outlier * inv;
      row_loglik[static_cast<std::size_t>(i)] = m + std::log(sum);
    }
  }

  for (std::size_t i = 0; i < row_loglik.size(); ++i) {
    out.log_likelihood += row_loglik[i];
    out.underflow_rows += underflow[i];
  }
  return out;
}

std::vector<ResponsibilityMatrix> e_step(const std::vector<PointSet>& sets,
                                         const std::vector<RigidTransform>& transforms,
                                         const MixtureModel& model) {
  if (sets.size() != transforms.size()) {
    throw ContractViolation("e_step: one transform per set required");
  }
  std::vector<ResponsibilityMatrix> out;
  out.reserve(sets.size());
  for (std::size_t j = 0; j < sets.size(); ++j) out.push_back(e_step(sets[j], transforms[j], model));
  return out;
}

SetMoments accumulate_moments(const PointSet& set, const ResponsibilityMatrix& resp) {
  check_resp(set, resp);
  const Eigen::Index n = set.points.cols();
  const Eigen::Index k_count = resp.alpha.cols() - 1;
  const Eigen::Index blocks = block_count(n);
  // Per block: mass | sum_x | sum_y | sum_z | sum_sq | outlier, laid out as K-long runs.
  const Eigen::Index stride = 5 * k_count + 1;
  std::vector<double> partial(static_cast<std::size_t>(blocks * stride), 0.0);

#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    double* acc = partial.data() + b * stride;
    double* mass = acc;
    double* sx = acc + k_count;
    double* sy = acc + 2 * k_count;
    double* sz = acc + 3 * k_count;
    double* sq = acc + 4 * k_count;
    const Eigen::Index end = std::min(n, (b + 1) * kBlock);
    for (Eigen::Index i = b * kBlock; i < end; ++i) {
      const double v0 = set.points(0, i), v1 = set.points(1, i), v2 = set.points(2, i);
      const double nv = v0 * v0 + v1 * v1 + v2 * v2;
      const double* row = resp.alpha.row(i).data();
      for (Eigen::Index k = 0; k < k_count; ++k) {
        const double w = row[k];
        mass[k] += w;
        sx[k] += w * v0;
        sy[k] += w * v1;
        sz[k] += w * v2;
        sq[k] += w * nv;
      }
      acc[5 * k_count] += row[k_count];
    }
  }

  SetMoments m;
  m.mass = Eigen::VectorXd::Zero(k_count);
  m.weighted_sum = Points::Zero(3, k_count);
  m.weighted_sq_norm = Eigen::VectorXd::Zero(k_count);
  m.point_count = static_cast<std::size_t>(n);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const double* acc = partial.data() + b * stride;
    for (Eigen::Index k = 0; k < k_count; ++k) {
      m.mass[k] += acc[k];
      m.weighted_sum(0, k) += acc[k_count + k];
      m.weighted_sum(1, k) += acc[2 * k_count + k];
      m.weighted_sum(2, k) += acc[3 * k_count + k];
      m.weighted_sq_norm[k] += acc[4 * k_count + k];
    }
    m.outlier_mass += acc[5 * k_count];
  }
  return m;
}

Eigen::VectorXd weighted_scatter(const PointSet& set, const RigidTransform& t,
                                 const ResponsibilityMatrix& resp, const Points& means) {
  check_resp(set, resp);
  const Eigen::Index n = set.points.cols();
  const Eigen::Index k_count = resp.alpha.cols() - 1;
  if (means.cols() != k_count) throw ContractViolation("weighted_scatter: means/resp mismatch");
  const Eigen::Index blocks = block_count(n);
  std::vector<double> partial(static_cast<std::size_t>(blocks * k_count), 0.0);
  const Eigen::RowVectorXd mx = means.row(0), my = means.row(1), mz = means.row(2);
  const Mat3 r = t.rotation();
  const Vec3 tr = t.translation();

#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    double* acc = partial.data() + b * k_count;
    const Eigen::Index end = std::min(n, (b + 1) * kBlock);
    for (Eigen::Index i = b * kBlock; i < end; ++i) {
      const Vec3 x = r * set.points.col(i) + tr;
      const double x0 = x[0], x1 = x[1], x2 = x[2];
      const double* row = resp.alpha.row(i).data();
      for (Eigen::Index k = 0; k < k_count; ++k) {
        const double d0 = x0 - mx[k], d1 = x1 - my[k], d2 = x2 - mz[k];
        acc[k] += row[k] * (d0 * d0 + d1 * d1 + d2 * d2);
      }
    }
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(k_count);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    out += Eigen::Map<const Eigen::VectorXd>(partial.data() + b * k_count, k_count);
  }
  return out;
}

}  // namespace jrmpc
