#include "jrmpc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "jrmpc/errors.hpp"
#include "jrmpc/init.hpp"

namespace jrmpc {

void SynthConfig::validate() const {
  if (angles_deg.empty()) throw ContractViolation("synth: at least one view angle required");
  if (cardinality_lo < 1 || cardinality_hi < cardinality_lo) {
    throw ContractViolation("synth: cardinality range must satisfy 1 <= lo <= hi");
  }
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw ContractViolation("synth: outlier_fraction must lie in [0, 1)");
  }
  if (outlier_fraction > 0.0 && outlier_cluster_count < 1) {
    throw ContractViolation("synth: outliers need at least one cluster");
  }
}

Mat3 rotation_y(double degrees) {
  const double a = degrees * std::numbers::pi / 180.0;
  Mat3 r;
  r << std::cos(a), 0.0, std::sin(a),
       0.0, 1.0, 0.0,
       -std::sin(a), 0.0, std::cos(a);
  return r;
}

namespace {

Vec3 random_in_ball(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const Vec3 p(u(rng), u(rng), u(rng));
    if (p.squaredNorm() <= 1.0) return radius * p;
  }
}

}  // namespace

SyntheticScene synthesize_views(const Points& model_points, const SynthConfig& cfg) {
  cfg.validate();
  if (model_points.cols() == 0) throw ContractViolation("synth: empty model");
  const Points model = model_points.colwise() - Vec3(model_points.rowwise().mean());
  std::mt19937_64 rng(cfg.seed);

  SyntheticScene scene;
  std::vector<Eigen::Index> index(static_cast<std::size_t>(model.cols()));
  for (std::size_t view = 0; view < cfg.angles_deg.size(); ++view) {
    const double angle = cfg.angles_deg[view];
    std::uniform_int_distribution<std::size_t> card(cfg.cardinality_lo, cfg.cardinality_hi);
    const std::size_t wanted = std::min(card(rng), index.size());
    std::iota(index.begin(), index.end(), Eigen::Index{0});
    for (std::size_t i = 0; i < wanted; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, index.size() - 1);
      std::swap(index[i], index[pick(rng)]);
    }
    std::sort(index.begin(), index.begin() + static_cast<std::ptrdiff_t>(wanted));

    const Mat3 rot = rotation_y(angle);
    std::vector<Vec3> kept;
    kept.reserve(wanted);
    for (std::size_t i = 0; i < wanted; ++i) {
      const Vec3 p = rot * model.col(index[i]);
      if (p.z() >= 0.0) kept.push_back(p);
    }
    if (kept.empty()) {
      std::ostringstream msg;
      msg << "view at angle " << angle << " deg is empty after rejecting z < 0";
      throw SynthesisError(msg.str());
    }
    const auto n_in = static_cast<Eigen::Index>(kept.size());
    Points pts(3, n_in);
    for (Eigen::Index i = 0; i < n_in; ++i) pts.col(i) = kept[static_cast<std::size_t>(i)];

    const Vec3 center = pts.rowwise().mean();
    const double signal = (pts.colwise() - center).squaredNorm() / (3.0 * static_cast<double>(n_in));
    double noise = 0.0;
    if (cfg.snr_db) {
      const double sd = std::sqrt(signal / std::pow(10.0, *cfg.snr_db / 10.0));
      std::normal_distribution<double> gauss(0.0, sd);
      for (Eigen::Index i = 0; i < n_in; ++i) {
        const Vec3 e(gauss(rng), gauss(rng), gauss(rng));
        pts.col(i) += e;
        noise += e.squaredNorm();
      }
      noise /= 3.0 * static_cast<double>(n_in);
    }

    const auto n_out = static_cast<Eigen::Index>(
        std::llround(cfg.outlier_fraction * static_cast<double>(n_in)));
    Points all(3, n_in + n_out);
    all.leftCols(n_in) = pts;
    if (n_out > 0) {
      const double radius = cfg.outlier_radius_fraction * bounding_box_diameter(pts);
      std::uniform_int_distribution<Eigen::Index> any(0, n_in - 1);
      std::vector<Vec3> centers;
      for (std::size_t c = 0; c < cfg.outlier_cluster_count; ++c) centers.push_back(pts.col(any(rng)));
      std::uniform_int_distribution<std::size_t> which(0, centers.size() - 1);
      for (Eigen::Index i = 0; i < n_out; ++i) {
        all.col(n_in + i) = centers[which(rng)] + random_in_ball(rng, radius);
      }
    }

    std::vector<bool> labels(static_cast<std::size_t>(n_in + n_out), false);
    std::fill(labels.begin() + n_in, labels.end(), true);
    scene.views.emplace_back(view, std::move(all));
    scene.truth.transforms.emplace_back(rot.transpose(), Vec3::Zero());
    scene.truth.outlier.push_back(std::move(labels));
    scene.truth.signal_power.push_back(signal);
    scene.truth.noise_power.push_back(noise);
  }
  return scene;
}

namespace {

struct Ellipsoid {
  Vec3 center;
  Vec3 radii;
  Mat3 axes;
};

// Knud Thomsen's approximation of the ellipsoid surface area (without 4*pi).
double surface_weight(const Vec3& r) {
  constexpr double p = 1.6;
  return std::pow((std::pow(r[0] * r[1], p) + std::pow(r[0] * r[2], p) + std::pow(r[1] * r[2], p)) / 3.0,
                  1.0 / p);
}

}  // namespace

Points make_blob_object(std::size_t n, std::uint64_t seed) {
  // A small four-legged animal: body, head, two ears, tail and three paws.
  const std::vector<Ellipsoid> parts = {
      {Vec3(0.0, 0.0, 0.0), Vec3(0.50, 0.38, 0.34), axis_angle(Vec3::UnitZ(), 0.2)},
      {Vec3(0.52, 0.30, 0.05), Vec3(0.24, 0.21, 0.19), Mat3::Identity()},
      {Vec3(0.50, 0.68, 0.12), Vec3(0.07, 0.26, 0.05), axis_angle(Vec3::UnitX(), 0.35)},
      {Vec3(0.62, 0.64, -0.08), Vec3(0.07, 0.24, 0.05), axis_angle(Vec3(1.0, 0.0, 1.0).normalized(), -0.5)},
      {Vec3(-0.52, 0.05, 0.0), Vec3(0.10, 0.10, 0.10), Mat3::Identity()},
      {Vec3(0.30, -0.36, 0.18), Vec3(0.16, 0.07, 0.09), Mat3::Identity()},
      {Vec3(-0.22, -0.34, 0.20), Vec3(0.22, 0.08, 0.12), Mat3::Identity()},
      {Vec3(-0.22, -0.34, -0.20), Vec3(0.22, 0.08, 0.12), Mat3::Identity()},
  };
  auto covered = [&](const Vec3& p, std::size_t self) {
    for (std::size_t q = 0; q < parts.size(); ++q) {
      if (q == self) continue;
      const Vec3 local = parts[q].axes.transpose() * (p - parts[q].center);
      if ((local.array() / parts[q].radii.array()).matrix().squaredNorm() < 1.0) return true;
    }
    return false;
  };
  std::vector<double> weights;
  for (const auto& e : parts) weights.push_back(surface_weight(e.radii));

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> gauss(0.0, 1.0);
  Points pts(3, static_cast<Eigen::Index>(n));
  Eigen::Index got = 0;
  while (got < pts.cols()) {
    const std::size_t q = pick(rng);
    const Vec3 dir = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
    const Vec3 p = parts[q].center + parts[q].axes * (parts[q].radii.asDiagonal() * dir);
    // Keep the outer surface only.
    if (!covered(p, q)) pts.col(got++) = p;
  }
  const Vec3 center = pts.rowwise().mean();
  pts.colwise() -= center;
  pts /= bounding_box_diameter(pts);
  return pts;
}

}  // namespace jrmpc
