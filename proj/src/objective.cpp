#include "jrmpc/objective.hpp"

#include <cmath>

#include "jrmpc/errors.hpp"

namespace jrmpc {

double uniform_density(const MixtureModel& model) {
  if (!(model.h > 0.0)) throw DomainError("uniform volume h must be positive");
  if (!(model.gamma >= 0.0)) throw DomainError("gamma must be nonnegative");
  if (model.gamma == 0.0) return 0.0;
  return model.gamma / (model.h * (model.gamma + 1.0));
}

namespace {

// 0 * log 0 is taken as 0: a component with zero prior and zero mass adds nothing.
double weighted_log(double weight, double value) {
  if (weight == 0.0) return 0.0;
  return weight * std::log(value);
}

void check_variances(const MixtureModel& model) {
  if (!(model.variances.array() > 0.0).all()) {
    throw DomainError("objective needs positive variances");
  }
}

}  // namespace

double evaluate_objective(const std::vector<PointSet>& sets,
                          const std::vector<RigidTransform>& transforms,
                          const MixtureModel& model,
                          const std::vector<ResponsibilityMatrix>& resp) {
  const std::size_t k_count = model.size();
  if (sets.size() != transforms.size() || sets.size() != resp.size()) {
    throw ContractViolation("objective: sets, transforms and responsibilities differ in count");
  }
  if (model.variances.size() != model.means.cols() ||
      model.priors.size() != model.means.cols() + 1) {
    throw ContractViolation("objective: mixture shapes are inconsistent");
  }
  check_variances(model);

  double gaussian = 0.0;
  double outlier_mass = 0.0;
  for (std::size_t j = 0; j < sets.size(); ++j) {
    const auto& a = resp[j].alpha;
    if (static_cast<std::size_t>(a.rows()) != sets[j].size() ||
        static_cast<std::size_t>(a.cols()) != k_count + 1) {
      throw ContractViolation("objective: responsibility shape mismatch for set " +
                              std::to_string(j));
    }
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const Vec3 x = transforms[j].apply(Vec3(sets[j].points.col(i)));
      for (std::size_t k = 0; k < k_count; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const double w = a(i, kk);
        if (w == 0.0) continue;
        const double s = model.variances[kk];
        gaussian += w * ((x - model.means.col(kk)).squaredNorm() / s + 3.0 * std::log(s)) -
                    2.0 * weighted_log(w, model.priors[kk]);
      }
      outlier_mass += a(i, static_cast<Eigen::Index>(k_count));
    }
  }
  return -0.5 * gaussian + weighted_log(outlier_mass, model.priors[static_cast<Eigen::Index>(k_count)]);
}

double objective_from_totals(const MixtureModel& model, const Eigen::VectorXd& mass,
                             const Eigen::VectorXd& scatter, double outlier_mass) {
  check_variances(model);
  const auto k_count = model.means.cols();
  double gaussian = 0.0;
  for (Eigen::Index k = 0; k < k_count; ++k) {
    if (mass[k] == 0.0) continue;
    const double s = model.variances[k];
    gaussian += scatter[k] / s + mass[k] * 3.0 * std::log(s) -
                2.0 * weighted_log(mass[k], model.priors[k]);
  }
  return -0.5 * gaussian + weighted_log(outlier_mass, model.priors[k_count]);
}

double floor_term(const MixtureModel& model, const Eigen::VectorXd& mass) {
  check_variances(model);
  return 1.5 * model.variance_floor() * (mass.array() / model.variances.array()).sum();
}

}  // namespace jrmpc
