#include "jrmpc/incremental.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jrmpc/errors.hpp"
#include "jrmpc/kernels.hpp"
#include "jrmpc/procrustes.hpp"

namespace jrmpc {

namespace {

void set_priors_from_stats(MixtureModel& model, const ComponentStats& stats) {
  const auto k_count = model.means.cols();
  if (stats.eta > 0.0) {
    model.priors.head(k_count) = stats.mass / stats.eta;
    model.priors[k_count] = std::max(0.0, 1.0 - model.priors.head(k_count).sum());
  }
}

}  // namespace

IncrementalState IncrementalState::from_history(const std::vector<PointSet>& sets,
                                                const std::vector<RigidTransform>& transforms,
                                                const std::vector<ResponsibilityMatrix>& resp,
                                                const MixtureModel& base, double rejection_fraction,
                                                std::uint64_t seed) {
  IncrementalState s;
  s.stats = accumulate_stats(sets, transforms, resp, base.gamma);
  s.model = base;
  s.model.means = s.stats.means(base.means);
  s.model.variances = s.stats.variances(s.model.means, base.variance_floor());
  set_priors_from_stats(s.model, s.stats);
  s.rejection_fraction = rejection_fraction;
  s.rng.seed(seed);
  return s;
}

ResponsibilityMatrix e_step_new_set(const IncrementalState& state, const PointSet& new_set,
                                    const RigidTransform& transform) {
  return e_step(new_set, transform, state.model);
}

RigidTransform m_rigid_new_set(const IncrementalState& state, const PointSet& new_set,
                               const ResponsibilityMatrix& resp) {
  return m_rigid_step(RigidStepStatistics::build(accumulate_moments(new_set, resp), state.model));
}

IncrementalState m_gmm_update(const IncrementalState& state, const PointSet& new_set,
                              const RigidTransform& transform, const ResponsibilityMatrix& resp,
                              UpdateForm form) {
  if (resp.components() != state.model.size()) {
    throw ContractViolation("m_gmm_update: responsibilities and mixture disagree on K");
  }
  const SetMoments moments = accumulate_moments(new_set, resp);
  const ComponentStats contrib = ComponentStats::from_moments(moments, transform, state.model.gamma);

  IncrementalState next = state;
  next.last_update = {};
  next.stats += contrib;
  const double floor = state.model.variance_floor();
  const auto k_count = static_cast<Eigen::Index>(state.model.size());

  if (form == UpdateForm::moments) {
    for (Eigen::Index k = 0; k < k_count; ++k) {
      const auto id = static_cast<std::size_t>(k);
      if (!(contrib.mass[k] > 0.0)) {
        next.last_update.skipped.push_back(id);
        continue;
      }
      const double m = next.stats.mass[k];
      const Vec3 mu = next.stats.first_moment.col(k) / m;
      const double scatter = next.stats.second_moment[k] / m - mu.squaredNorm();
      next.model.means.col(k) = mu;
      if (scatter < 0.0) {
        next.model.variances[k] = floor;
        next.last_update.clamped.push_back(id);
      } else {
        next.model.variances[k] = scatter / 3.0 + floor;
      }
    }
    set_priors_from_stats(next.model, next.stats);
    return next;
  }

  // Printed recurrences, transcribed term by term.
  const double gamma = state.model.gamma;
  const double eta_prev = state.stats.eta;
  const double n_m = static_cast<double>(moments.point_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const auto id = static_cast<std::size_t>(k);
    const double a = moments.mass[k];
    const double zeta = eta_prev * state.model.priors[k] / a;
    if (!(a > 0.0) || !std::isfinite(zeta)) {
      next.last_update.skipped.push_back(id);
      continue;
    }
    const Vec3 u = transform.apply(Vec3(moments.weighted_sum.col(k) / a));
    const Vec3 mu_prev = state.model.means.col(k);
    const Vec3 mu = (zeta * mu_prev + u) / (zeta + 1.0);
    const Vec3 delta = mu - mu_prev;
    double var = (zeta * state.model.variances[k] + delta.squaredNorm() -
                  delta.dot(u - mu_prev / a)) /
                 (zeta + 1.0);
    if (!(var >= floor)) {
      var = floor;
      next.last_update.clamped.push_back(id);
    }
    const double eta_k = eta_prev + (gamma + 1.0) * (n_m + 1.0 - a);
    next.model.means.col(k) = mu;
    next.model.variances[k] = var;
    next.model.priors[k] = (a * zeta + 1.0) / eta_k;
  }
  next.model.priors[k_count] = std::max(0.0, 1.0 - next.model.priors.head(k_count).sum());
  return next;
}

namespace {

std::vector<std::size_t> recycle_components(IncrementalState& state, const PointSet& new_set,
                                            const RigidTransform& transform) {
  const std::size_t k_count = state.model.size();
  const auto quota = static_cast<std::size_t>(
      std::llround(state.rejection_fraction * static_cast<double>(k_count)));
  if (quota == 0 || new_set.empty()) return {};

  std::vector<std::size_t> chosen = state.model.degenerate_components();
  for (std::size_t k = 0; k < k_count; ++k) {
    if (state.stats.mass[static_cast<Eigen::Index>(k)] == 0.0 &&
        std::find(chosen.begin(), chosen.end(), k) == chosen.end()) {
      chosen.push_back(k);
    }
  }
  if (chosen.size() > quota) {
    chosen.resize(quota);
  } else {
    std::vector<std::size_t> rest;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (std::find(chosen.begin(), chosen.end(), k) == chosen.end()) rest.push_back(k);
    }
    std::shuffle(rest.begin(), rest.end(), state.rng);
    rest.resize(std::min(rest.size(), quota - chosen.size()));
    chosen.insert(chosen.end(), rest.begin(), rest.end());
  }
  std::sort(chosen.begin(), chosen.end());

  const Eigen::VectorXd& var = state.model.variances;
  const double sigma = median(std::vector<double>(var.data(), var.data() + var.size()));
  const Eigen::VectorXd& mass = state.stats.mass;
  const double seed_mass = median(std::vector<double>(mass.data(), mass.data() + mass.size()));
  const double floor = state.model.variance_floor();
  const double gamma = state.model.gamma;
  std::uniform_int_distribution<Eigen::Index> pick(0, new_set.points.cols() - 1);
  for (std::size_t id : chosen) {
    const auto k = static_cast<Eigen::Index>(id);
    const Vec3 mu = transform.apply(Vec3(new_set.points.col(pick(state.rng))));
    state.stats.eta += (gamma + 1.0) * (seed_mass - state.stats.mass[k]);
    state.stats.mass[k] = seed_mass;
    state.stats.first_moment.col(k) = seed_mass * mu;
    state.stats.second_moment[k] = seed_mass * (mu.squaredNorm() + 3.0 * std::max(0.0, sigma - floor));
    state.model.means.col(k) = mu;
    state.model.variances[k] = std::max(sigma, floor);
  }
  set_priors_from_stats(state.model, state.stats);
  return chosen;
}

}  // namespace

IntegrationResult integrate_set(const IncrementalState& state, const PointSet& new_set,
                                const RigidTransform& init_transform,
                                const IntegrateOptions& options) {
  if (options.iterations < 1) throw ContractViolation("integrate_set: at least one iteration");
  IntegrationResult out{init_transform, state, {}};
  out.record.set_id = new_set.id;
  for (std::size_t q = 1; q <= options.iterations; ++q) {
    const ResponsibilityMatrix resp = e_step_new_set(out.state, new_set, out.transform);
    try {
      out.transform = m_rigid_new_set(out.state, new_set, resp);
    } catch (const InsufficientConstraint&) {
      out.record.rigid_step_skipped = true;
    } catch (const DegenerateGeometry&) {
      out.record.rigid_step_skipped = true;
    }
    out.state = m_gmm_update(state, new_set, out.transform, resp, options.form);
    out.record.masses = resp.alpha.leftCols(resp.alpha.cols() - 1).colwise().sum().transpose();
    if (!out.state.model.means.allFinite() || !out.state.model.variances.allFinite()) {
      throw Diverged(q, "incremental update produced non-finite parameters");
    }
  }
  if (options.recycle && out.state.rejection_fraction > 0.0) {
    out.record.recycled = recycle_components(out.state, new_set, out.transform);
  }
  out.record.transform = out.transform;
  return out;
}

}  // namespace jrmpc
