#include "jrmpc/batch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jrmpc/errors.hpp"
#include "jrmpc/kernels.hpp"
#include "jrmpc/objective.hpp"

namespace jrmpc {

void BatchConfig::validate() const {
  if (max_iterations < 1) throw ContractViolation("batch: at least one iteration required");
  if (!(gamma >= 0.0)) throw ContractViolation("batch: gamma must be nonnegative");
  if (!(convergence_tol > 0.0)) throw ContractViolation("batch: convergence_tol must be positive");
}

VirtualPoints virtual_points(const PointSet& set, const ResponsibilityMatrix& resp) {
  const SetMoments m = accumulate_moments(set, resp);
  VirtualPoints out;
  out.mass = m.mass;
  out.points.resize(3, m.mass.size());
  for (Eigen::Index k = 0; k < m.mass.size(); ++k) {
    if (m.mass[k] > 0.0) {
      out.points.col(k) = m.weighted_sum.col(k) / m.mass[k];
    } else {
      out.points.col(k).setConstant(std::numeric_limits<double>::quiet_NaN());
      out.massless.push_back(static_cast<std::size_t>(k));
    }
  }
  return out;
}

namespace {

struct GmmUpdate {
  MixtureModel model;
  Eigen::VectorXd mass;
  Eigen::VectorXd scatter;  // about the new means
  double outlier_mass = 0.0;
};

void check_inputs(const std::vector<PointSet>& sets, const std::vector<RigidTransform>& transforms,
                  const std::vector<ResponsibilityMatrix>& resp, const MixtureModel& model) {
  if (sets.empty()) throw ContractViolation("no point sets");
  if (sets.size() != transforms.size() || sets.size() != resp.size()) {
    throw ContractViolation("sets, transforms and responsibilities differ in count");
  }
  for (const auto& r : resp) {
    if (r.components() != model.size()) {
      throw ContractViolation("responsibilities and mixture disagree on K");
    }
  }
}

GmmUpdate gmm_update(const std::vector<PointSet>& sets,
                     const std::vector<RigidTransform>& transforms,
                     const std::vector<ResponsibilityMatrix>& resp,
                     const std::vector<SetMoments>& moments, const MixtureModel& previous,
                     const BatchConfig& config, bool update_variances) {
  const auto k_count = static_cast<Eigen::Index>(previous.size());
  GmmUpdate u;
  u.model = previous;
  u.mass = Eigen::VectorXd::Zero(k_count);
  Points first = Points::Zero(3, k_count);
  double points = 0.0;
  for (std::size_t j = 0; j < sets.size(); ++j) {
    const auto& m = moments[j];
    u.mass += m.mass;
    first += transforms[j].rotation() * m.weighted_sum + transforms[j].translation() * m.mass.transpose();
    u.outlier_mass += m.outlier_mass;
    points += static_cast<double>(m.point_count);
  }
  for (Eigen::Index k = 0; k < k_count; ++k) {
    if (u.mass[k] > 0.0) u.model.means.col(k) = first.col(k) / u.mass[k];
  }

  u.scatter = Eigen::VectorXd::Zero(k_count);
  for (std::size_t j = 0; j < sets.size(); ++j) {
    u.scatter += weighted_scatter(sets[j], transforms[j], resp[j], u.model.means);
  }

  const double floor = previous.variance_floor();
  if (update_variances) {
    for (Eigen::Index k = 0; k < k_count; ++k) {
      u.model.variances[k] = u.mass[k] > 0.0 ? u.scatter[k] / (3.0 * u.mass[k]) + floor : floor;
    }
  }

  if (config.update_priors) {
    const double eta = (previous.gamma + 1.0) * (points - u.outlier_mass);
    if (eta > 0.0) {
      u.model.priors.head(k_count) = u.mass / eta;
      u.model.priors[k_count] = std::max(0.0, 1.0 - u.model.priors.head(k_count).sum());
    }
  }
  return u;
}

// Largest mean displacement relative to the spread of the previous means; both
// are unchanged by a common rigid motion of the model frame.
double max_mean_change(const Points& before, const Points& after) {
  const double spread = (before.rowwise().maxCoeff() - before.rowwise().minCoeff()).norm();
  const double scale = spread > 0.0 ? spread : 1.0;
  return (after - before).colwise().norm().maxCoeff() / scale;
}

}  // namespace

MixtureModel m_gmm_step(const std::vector<PointSet>& sets,
                        const std::vector<RigidTransform>& transforms,
                        const std::vector<ResponsibilityMatrix>& resp,
                        const MixtureModel& previous, const BatchConfig& config,
                        bool update_variances) {
  check_inputs(sets, transforms, resp, previous);
  std::vector<SetMoments> moments;
  moments.reserve(sets.size());
  for (std::size_t j = 0; j < sets.size(); ++j) moments.push_back(accumulate_moments(sets[j], resp[j]));
  return gmm_update(sets, transforms, resp, moments, previous, config, update_variances).model;
}

ComponentStats accumulate_stats(const std::vector<PointSet>& sets,
                                const std::vector<RigidTransform>& transforms,
                                const std::vector<ResponsibilityMatrix>& resp, double gamma) {
  if (sets.size() != transforms.size() || sets.size() != resp.size() || sets.empty()) {
    throw ContractViolation("accumulate_stats: inconsistent inputs");
  }
  ComponentStats total = ComponentStats::zeros(resp.front().components());
  for (std::size_t j = 0; j < sets.size(); ++j) {
    total += ComponentStats::from_moments(accumulate_moments(sets[j], resp[j]), transforms[j], gamma);
  }
  return total;
}

BatchResult run_batch(const std::vector<PointSet>& sets,
                      const std::vector<RigidTransform>& init_transforms,
                      const MixtureModel& init_model, const BatchConfig& config) {
  config.validate();
  if (sets.empty()) throw ContractViolation("run_batch: no point sets");
  if (sets.size() != init_transforms.size()) {
    throw ContractViolation("run_batch: one initial transform per set required");
  }
  if (config.components != 0 && config.components != init_model.size()) {
    throw ContractViolation("run_batch: initial model has " + std::to_string(init_model.size()) +
                            " components, config expects " + std::to_string(config.components));
  }

  BatchResult result;
  result.model = init_model;
  result.model.gamma = config.gamma;
  result.model.validate();
  result.transforms = init_transforms;

  for (std::size_t q = 1; q <= config.max_iterations; ++q) {
    IterationRecord rec;
    rec.iteration = q;

    // E-step with Theta^{q-1}.
    result.responsibilities = e_step(sets, result.transforms, result.model);
    for (const auto& r : result.responsibilities) rec.log_likelihood += r.log_likelihood;

    double floored_start = 0.0;
    {
      Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(result.model.size()));
      Eigen::VectorXd scatter = mass;
      double outlier = 0.0;
      for (std::size_t j = 0; j < sets.size(); ++j) {
        const auto& a = result.responsibilities[j].alpha;
        mass += a.leftCols(a.cols() - 1).colwise().sum().transpose();
        outlier += a.col(a.cols() - 1).sum();
        scatter += weighted_scatter(sets[j], result.transforms[j], result.responsibilities[j],
                                    result.model.means);
      }
      rec.objective_start = objective_from_totals(result.model, mass, scatter, outlier);
      floored_start = rec.objective_start - floor_term(result.model, mass);
    }

    // M-rigid-step with mu^{q-1}, sigma^{q-1}.
    std::vector<SetMoments> moments;
    moments.reserve(sets.size());
    std::vector<RigidTransform> next_transforms;
    next_transforms.reserve(sets.size());
    for (std::size_t j = 0; j < sets.size(); ++j) {
      moments.push_back(accumulate_moments(sets[j], result.responsibilities[j]));
      next_transforms.push_back(m_rigid_step(RigidStepStatistics::build(moments.back(), result.model)));
    }

    // M-GMM-step with the new transforms.
    const bool free_variance = q > config.fix_variance_iters;
    GmmUpdate upd = gmm_update(sets, next_transforms, result.responsibilities, moments,
                               result.model, config, free_variance);

    rec.objective = objective_from_totals(upd.model, upd.mass, upd.scatter, upd.outlier_mass);
    rec.cm_gain = rec.objective - floor_term(upd.model, upd.mass) - floored_start;
    if (!std::isfinite(rec.objective) || !upd.model.means.allFinite() ||
        !upd.model.variances.allFinite()) {
      throw Diverged(q, "batch EM produced non-finite parameters");
    }
    for (std::size_t j = 0; j < sets.size(); ++j) {
      const auto& prev = result.transforms[j];
      const auto& next = next_transforms[j];
      rec.rotation_change = std::max(
          rec.rotation_change, rotation_angle(prev.rotation().transpose() * next.rotation()));
      rec.translation_change =
          std::max(rec.translation_change, (next.translation() - prev.translation()).norm());
    }
    rec.mean_change = max_mean_change(result.model.means, upd.model.means);

    result.transforms = std::move(next_transforms);
    result.model = std::move(upd.model);
    result.trace.push_back(rec);

    if (free_variance && rec.rotation_change + rec.translation_change < config.convergence_tol &&
        rec.mean_change < config.convergence_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace jrmpc
