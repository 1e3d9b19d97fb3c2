#include "jrmpc/init.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>

#include "jrmpc/errors.hpp"

namespace jrmpc {

void InitConfig::validate() const {
  if (k_policy == KPolicy::fraction && !(k_fraction > 0.0 && k_fraction <= 4.0)) {
    throw ContractViolation("init: k_fraction must lie in (0, 4]");
  }
  if (k_policy == KPolicy::absolute && k_absolute < 1) {
    throw ContractViolation("init: absolute K must be at least 1");
  }
  if (!(sphere_radius_scale >= 0.5)) {
    throw ContractViolation("init: sphere_radius_scale below 0.5 would not enclose the data");
  }
  if (sigma_strategy == SigmaStrategy::fixed && !(sigma_fixed > 0.0)) {
    throw ContractViolation("init: fixed sigma must be positive");
  }
  if (!(sigma_scale > 0.0) || !std::isfinite(sigma_scale)) {
    throw ContractViolation("init: sigma_scale must be positive");
  }
}

double bounding_box_diameter(const Points& points) {
  if (points.cols() == 0) return 0.0;
  return (points.rowwise().maxCoeff() - points.rowwise().minCoeff()).norm();
}

Points transformed_union(const std::vector<PointSet>& sets,
                         const std::vector<RigidTransform>& transforms) {
  if (sets.size() != transforms.size()) throw ContractViolation("one transform per set required");
  Points all(3, static_cast<Eigen::Index>(total_points(sets)));
  Eigen::Index at = 0;
  for (std::size_t j = 0; j < sets.size(); ++j) {
    const auto n = sets[j].points.cols();
    all.middleCols(at, n) = transforms[j].apply(sets[j].points);
    at += n;
  }
  return all;
}

std::vector<RigidTransform> init_transforms(const std::vector<PointSet>& sets, const InitConfig& cfg) {
  if (sets.empty()) throw ContractViolation("init_transforms: no point sets");
  std::vector<RigidTransform> out;
  out.reserve(sets.size());
  for (const auto& s : sets) {
    if (s.empty()) throw ContractViolation("init_transforms: point set " + std::to_string(s.id) + " is empty");
    Vec3 anchor = Vec3::Zero();
    switch (cfg.translation_strategy) {
      case TranslationStrategy::centroid:
        anchor = s.centroid();
        break;
      case TranslationStrategy::median:
        for (int d = 0; d < 3; ++d) {
          const Eigen::RowVectorXd row = s.points.row(d);
          anchor[d] = median(std::vector<double>(row.data(), row.data() + row.size()));
        }
        break;
      case TranslationStrategy::provided:
        break;
    }
    out.emplace_back(Mat3::Identity(), -anchor);
  }
  return out;
}

Points init_means_sphere(const std::vector<PointSet>& sets,
                         const std::vector<RigidTransform>& transforms, std::size_t k,
                         const InitConfig& cfg) {
  if (k < 1) throw ContractViolation("init_means_sphere: K must be at least 1");
  const Points all = transformed_union(sets, transforms);
  const Vec3 center = all.cols() > 0 ? Vec3(all.rowwise().mean()) : Vec3::Zero();
  double radius = cfg.sphere_radius_scale * bounding_box_diameter(all);
  if (!(radius > 0.0)) radius = 1.0;

  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  Points means(3, static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(k);
    const double ring = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    const Vec3 dir(ring * std::cos(phi), ring * std::sin(phi), z);
    means.col(static_cast<Eigen::Index>(i)) = center + radius * dir.normalized();
  }
  return means;
}

Points init_means(const std::vector<PointSet>& sets, const std::vector<RigidTransform>& transforms,
                  std::size_t k, const InitConfig& cfg) {
  if (cfg.mean_strategy == MeanStrategy::sphere) return init_means_sphere(sets, transforms, k, cfg);
  if (sets.empty()) throw ContractViolation("init_means: no point sets");

  const Points pool = cfg.mean_strategy == MeanStrategy::sample_one_set
                          ? transforms.front().apply(sets.front().points)
                          : transformed_union(sets, transforms);
  if (pool.cols() == 0) throw ContractViolation("init_means: nothing to sample from");
  std::mt19937_64 rng(cfg.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(pool.cols()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  std::shuffle(order.begin(), order.end(), rng);
  Points means(3, static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    // Wraps around when K exceeds the pool; repeated means separate after the first M-step.
    means.col(static_cast<Eigen::Index>(i)) = pool.col(order[i % order.size()]);
  }
  return means;
}

Eigen::VectorXd init_variances(const std::vector<PointSet>& sets,
                               const std::vector<RigidTransform>& transforms, const Points& means,
                               const InitConfig& cfg) {
  const auto k_count = means.cols();
  if (cfg.sigma_strategy == SigmaStrategy::fixed) {
    return Eigen::VectorXd::Constant(k_count, cfg.sigma_fixed);
  }
  const Points all = transformed_union(sets, transforms);
  if (all.cols() == 0) throw ContractViolation("init_variances: no points");
  Eigen::VectorXd out(k_count);
#pragma omp parallel
  {
    std::vector<double> d2(static_cast<std::size_t>(all.cols()));
#pragma omp for schedule(static)
    for (Eigen::Index k = 0; k < k_count; ++k) {
      for (Eigen::Index i = 0; i < all.cols(); ++i) {
        d2[static_cast<std::size_t>(i)] = (all.col(i) - means.col(k)).squaredNorm();
      }
      out[k] = cfg.sigma_scale * median(d2);
    }
  }
  return out;
}

KChoice choose_K(const std::vector<PointSet>& sets, const InitConfig& cfg) {
  if (sets.empty()) throw ContractViolation("choose_K: no point sets");
  KChoice c;
  if (cfg.k_policy == KPolicy::absolute) {
    c.count = cfg.k_absolute;
  } else {
    const double mean_card =
        static_cast<double>(total_points(sets)) / static_cast<double>(sets.size());
    c.count = static_cast<std::size_t>(std::llround(cfg.k_fraction * mean_card));
  }
  if (c.count < 3) {
    std::cerr << "warning: K=" << c.count << " raised to 3 (rigid step needs three components)\n";
    c.count = 3;
    c.clamped = true;
  }
  return c;
}

InitialEstimate initialize(const std::vector<PointSet>& sets, const InitConfig& cfg, double gamma,
                           double h, double epsilon,
                           const std::optional<std::vector<RigidTransform>>& provided) {
  cfg.validate();
  InitialEstimate est;
  est.k = choose_K(sets, cfg);
  if (provided) {
    if (provided->size() != sets.size()) throw ContractViolation("initialize: one provided transform per set");
    est.transforms = *provided;
  } else {
    if (cfg.mean_strategy == MeanStrategy::sample_aligned) {
      throw ContractViolation("initialize: sample-aligned means need caller-provided transforms");
    }
    est.transforms = init_transforms(sets, cfg);
  }
  Points means = init_means(sets, est.transforms, est.k.count, cfg);
  Eigen::VectorXd variances = init_variances(sets, est.transforms, means, cfg);
  const double floor = epsilon * epsilon;
  variances = variances.cwiseMax(floor);
  est.model = MixtureModel::with_uniform_priors(std::move(means), std::move(variances), gamma, h, epsilon);
  return est;
}

}  // namespace jrmpc
