#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "jrmpc/errors.hpp"
#include "jrmpc/init.hpp"
#include "test_helpers.hpp"

using namespace jrmpc;

namespace {

std::vector<PointSet> sets_with_sizes(std::mt19937_64& rng, std::initializer_list<Eigen::Index> sizes) {
  std::vector<PointSet> out;
  for (Eigen::Index n : sizes) out.emplace_back(out.size(), testgen::random_points(rng, n));
  return out;
}

}  // namespace

TEST_CASE("translated copies share a centroid after initialization") {
  std::mt19937_64 rng(1);
  const Points p = testgen::random_points(rng, 50);
  const std::vector<PointSet> sets{PointSet(0, p), PointSet(1, p.colwise() + Vec3(4.0, -2.0, 7.5))};
  const auto t = init_transforms(sets, InitConfig{});
  const Vec3 c0 = t[0].apply(sets[0].points).rowwise().mean();
  const Vec3 c1 = t[1].apply(sets[1].points).rowwise().mean();
  CHECK((c0 - c1).norm() < 1e-12);
  CHECK(t[1].rotation() == Mat3::Identity());
}

TEST_CASE("single set: identity rotation, translation is minus the centroid") {
  std::mt19937_64 rng(2);
  const PointSet set(0, testgen::random_points(rng, 20).colwise() + Vec3(1.0, 2.0, 3.0));
  const auto t = init_transforms({set}, InitConfig{});
  CHECK(t[0].rotation() == Mat3::Identity());
  CHECK((t[0].translation() + set.centroid()).norm() < 1e-15);
}

TEST_CASE("median translation resists planted far outliers") {
  std::mt19937_64 rng(3);
  const Points clean = testgen::random_points(rng, 200, 0.1);
  const Vec3 shift(1.0, -0.5, 0.25);
  Points dirty = clean.colwise() + shift;
  for (Eigen::Index i = 0; i < 20; ++i) dirty.col(i) = Vec3(40.0, 35.0, -30.0) + testgen::gaussian_vec(rng);
  const std::vector<PointSet> sets{PointSet(0, clean), PointSet(1, dirty)};
  const Vec3 truth = -shift;

  InitConfig med;
  med.translation_strategy = TranslationStrategy::median;
  const auto tm = init_transforms(sets, med);
  const auto tc = init_transforms(sets, InitConfig{});
  CHECK((tm[1].translation() - tm[0].translation() - truth).norm() < 0.05);
  CHECK((tc[1].translation() - tc[0].translation() - truth).norm() > 0.05);
  CHECK((tm[1].translation() - tm[0].translation() - truth).norm() <
        (tc[1].translation() - tc[0].translation() - truth).norm());
}

TEST_CASE("empty set cannot be initialised") {
  CHECK_THROWS_AS(init_transforms({PointSet(0, Points(3, 0))}, InitConfig{}), ContractViolation);
  CHECK_THROWS_AS(init_transforms({}, InitConfig{}), ContractViolation);
}

TEST_CASE("sphere means all lie on the sphere") {
  std::mt19937_64 rng(4);
  const auto sets = sets_with_sizes(rng, {100, 80});
  const auto t = init_transforms(sets, InitConfig{});
  const Points all = transformed_union(sets, t);
  const Vec3 center = all.rowwise().mean();
  InitConfig cfg;
  const double radius = cfg.sphere_radius_scale * bounding_box_diameter(all);
  for (std::size_t k : {1u, 2u, 7u, 100u}) {
    const Points m = init_means_sphere(sets, t, k, cfg);
    REQUIRE(m.cols() == static_cast<Eigen::Index>(k));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      CHECK(std::abs((m.col(c) - center).norm() - radius) < 1e-12);
    }
  }
  CHECK(radius >= 0.5 * bounding_box_diameter(all));
}

TEST_CASE("lattice of 100 means is close to evenly spread") {
  std::mt19937_64 rng(5);
  const auto sets = sets_with_sizes(rng, {60});
  const auto t = init_transforms(sets, InitConfig{});
  const Points m = init_means_sphere(sets, t, 100, InitConfig{});
  const Vec3 center = transformed_union(sets, t).rowwise().mean();
  double min_angle = std::numbers::pi;
  for (Eigen::Index a = 0; a < m.cols(); ++a) {
    for (Eigen::Index b = a + 1; b < m.cols(); ++b) {
      const Vec3 u = (m.col(a) - center).normalized();
      const Vec3 v = (m.col(b) - center).normalized();
      min_angle = std::min(min_angle, std::atan2(u.cross(v).norm(), u.dot(v)));
    }
  }
  // Hexagonal packing of 100 equal cells on the unit sphere.
  const double ideal = std::sqrt(8.0 * std::numbers::pi / (std::sqrt(3.0) * 100.0));
  CHECK(std::abs(min_angle - ideal) <= 0.2 * ideal);
}

TEST_CASE("sampled means are reproducible and drawn from the data") {
  std::mt19937_64 rng(6);
  const auto sets = sets_with_sizes(rng, {30, 40});
  const std::vector<RigidTransform> t(2);
  InitConfig cfg;
  cfg.mean_strategy = MeanStrategy::sample_aligned;
  cfg.seed = 17;
  const Points a = init_means(sets, t, 25, cfg);
  const Points b = init_means(sets, t, 25, cfg);
  CHECK(a == b);
  const Points all = transformed_union(sets, t);
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    CHECK(((all.colwise() - a.col(c)).colwise().norm().minCoeff()) == 0.0);
  }
  cfg.mean_strategy = MeanStrategy::sample_one_set;
  const Points one = init_means(sets, t, 10, cfg);
  for (Eigen::Index c = 0; c < one.cols(); ++c) {
    CHECK(((sets[0].points.colwise() - one.col(c)).colwise().norm().minCoeff()) == 0.0);
  }
}

TEST_CASE("one point at distance d gives variance d^2") {
  const PointSet set(0, Points(Vec3(3.0, 4.0, 0.0)));
  const Eigen::VectorXd v = init_variances({set}, {RigidTransform{}}, Points(Vec3::Zero()), InitConfig{});
  CHECK(v[0] == doctest::Approx(25.0).epsilon(1e-15));
}

TEST_CASE("median-distance variances match a sort-based oracle") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto sets = sets_with_sizes(rng, {static_cast<Eigen::Index>(testgen::uniform_int(rng, 1, 40)),
                                            static_cast<Eigen::Index>(testgen::uniform_int(rng, 1, 40))});
    const std::vector<RigidTransform> t{testgen::random_transform(rng), testgen::random_transform(rng)};
    const Points means = testgen::random_points(rng, 6);
    InitConfig cfg;
    cfg.sigma_scale = rep % 2 == 0 ? 1.0 : 0.25;
    const Eigen::VectorXd v = init_variances(sets, t, means, cfg);
    const Points all = transformed_union(sets, t);
    for (Eigen::Index k = 0; k < means.cols(); ++k) {
      std::vector<double> d;
      for (Eigen::Index i = 0; i < all.cols(); ++i) d.push_back((all.col(i) - means.col(k)).squaredNorm());
      std::sort(d.begin(), d.end());
      const std::size_t n = d.size();
      const double med = n % 2 == 1 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
      CHECK(std::abs(v[k] - cfg.sigma_scale * med) < 1e-12);
    }
  }
}

TEST_CASE("fixed variance strategy") {
  std::mt19937_64 rng(8);
  const auto sets = sets_with_sizes(rng, {10});
  InitConfig cfg;
  cfg.sigma_strategy = SigmaStrategy::fixed;
  cfg.sigma_fixed = 0.1;
  const Eigen::VectorXd v = init_variances(sets, {RigidTransform{}}, testgen::random_points(rng, 4), cfg);
  CHECK((v.array() == 0.1).all());
}

TEST_CASE("K selection") {
  std::mt19937_64 rng(9);
  InitConfig cfg;
  CHECK(choose_K(sets_with_sizes(rng, {1000, 2000}), cfg).count == 900);
  cfg.k_fraction = 1.0;
  CHECK(choose_K(sets_with_sizes(rng, {300, 300, 300}), cfg).count == 300);
  cfg.k_policy = KPolicy::absolute;
  cfg.k_absolute = 450;
  CHECK(choose_K(sets_with_sizes(rng, {10}), cfg).count == 450);
  cfg.k_policy = KPolicy::fraction;
  cfg.k_fraction = 0.1;
  const KChoice small = choose_K(sets_with_sizes(rng, {10, 12}), cfg);
  CHECK(small.count == 3);
  CHECK(small.clamped);
}

TEST_CASE("full initialization") {
  std::mt19937_64 rng(10);
  const auto sets = sets_with_sizes(rng, {50, 70});
  InitConfig cfg;
  const InitialEstimate est = initialize(sets, cfg, 0.2, sphere_volume(0.5), 1e-3);
  CHECK(est.model.size() == 36);
  CHECK(est.model.gamma == 0.2);
  CHECK(est.model.priors.size() == 37);
  CHECK(((est.model.priors.array() - 1.0 / 37.0).abs() < 1e-15).all());
  est.model.validate();

  const std::vector<RigidTransform> given{testgen::random_transform(rng), testgen::random_transform(rng)};
  const InitialEstimate with = initialize(sets, cfg, 0.2, sphere_volume(0.5), 1e-3, given);
  CHECK(with.transforms[1].translation() == given[1].translation());

  InitConfig aligned;
  aligned.mean_strategy = MeanStrategy::sample_aligned;
  CHECK_THROWS_AS(initialize(sets, aligned, 0.2, 1.0, 1e-3), ContractViolation);
  InitConfig bad;
  bad.sigma_scale = 0.0;
  CHECK_THROWS_AS(initialize(sets, bad, 0.2, 1.0, 1e-3), ContractViolation);
}
