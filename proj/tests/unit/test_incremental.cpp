#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "jrmpc/batch.hpp"
#include "jrmpc/errors.hpp"
#include "jrmpc/incremental.hpp"
#include "jrmpc/init.hpp"
#include "jrmpc/kernels.hpp"
#include "test_helpers.hpp"

using namespace jrmpc;

namespace {

struct History {
  std::vector<PointSet> sets;
  std::vector<RigidTransform> transforms;
  std::vector<ResponsibilityMatrix> resp;
  MixtureModel base;
};

History random_history(std::mt19937_64& rng, std::size_t m, std::size_t k, double gamma) {
  History h;
  for (std::size_t j = 0; j < m; ++j) {
    const auto n = testgen::uniform_int(rng, 3, 50);
    h.sets.emplace_back(j, testgen::random_points(rng, static_cast<Eigen::Index>(n)));
    h.transforms.push_back(testgen::random_transform(rng));
    h.resp.push_back(testgen::random_responsibilities(rng, n, k, j));
  }
  h.base = testgen::random_model(rng, k, gamma);
  return h;
}

void check_prior_invariant(const IncrementalState& s) {
  const auto k = static_cast<Eigen::Index>(s.model.size());
  for (Eigen::Index c = 0; c < k; ++c) {
    CHECK(s.model.priors[c] * s.stats.eta == doctest::Approx(s.stats.mass[c]).epsilon(1e-12));
  }
}

Points anisotropic_cloud(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Points p(3, n);
  for (Eigen::Index i = 0; i < n; ++i) p.col(i) = Vec3(g(rng), 0.6 * g(rng), 0.3 * g(rng));
  return p;
}

}  // namespace

TEST_CASE("folding in one set equals the batch update over all sets") {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 60; ++rep) {
    const auto k = testgen::uniform_int(rng, 1, 8);
    const auto m = testgen::uniform_int(rng, 2, 5);
    const double gamma = testgen::uniform_real(rng, 0.0, 1.5);
    const History h = random_history(rng, m, k, gamma);
    const std::vector<PointSet> old_sets(h.sets.begin(), h.sets.end() - 1);
    const std::vector<RigidTransform> old_t(h.transforms.begin(), h.transforms.end() - 1);
    const std::vector<ResponsibilityMatrix> old_r(h.resp.begin(), h.resp.end() - 1);

    const IncrementalState state = IncrementalState::from_history(old_sets, old_t, old_r, h.base);
    const IncrementalState next =
        m_gmm_update(state, h.sets.back(), h.transforms.back(), h.resp.back());

    BatchConfig cfg;
    cfg.gamma = gamma;
    cfg.update_priors = true;
    const MixtureModel batch = m_gmm_step(h.sets, h.transforms, h.resp, h.base, cfg);
    CHECK(testgen::max_abs(next.model.means - batch.means) < 1e-9);
    CHECK(testgen::max_abs(next.model.variances - batch.variances) < 1e-9);
    CHECK(testgen::max_abs(next.model.priors - batch.priors) < 1e-9);

    double n = 0.0;
    double outliers = 0.0;
    for (const auto& r : h.resp) {
      n += static_cast<double>(r.alpha.rows());
      outliers += r.alpha.col(static_cast<Eigen::Index>(k)).sum();
    }
    CHECK(next.stats.eta == doctest::Approx((gamma + 1.0) * (n - outliers)).epsilon(1e-12));
    check_prior_invariant(next);
  }
}

TEST_CASE("history state satisfies the prior invariant") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const History h = random_history(rng, testgen::uniform_int(rng, 1, 4), testgen::uniform_int(rng, 1, 9),
                                     testgen::uniform_real(rng, 0.0, 2.0));
    check_prior_invariant(IncrementalState::from_history(h.sets, h.transforms, h.resp, h.base));
  }
}

TEST_CASE("a component the new set does not touch keeps mean and variance") {
  std::mt19937_64 rng(3);
  History h = random_history(rng, 3, 5, 0.3);
  auto& last = h.resp.back();
  last.alpha.col(2).setZero();
  for (Eigen::Index i = 0; i < last.alpha.rows(); ++i) last.alpha.row(i) /= last.alpha.row(i).sum();
  const IncrementalState state =
      IncrementalState::from_history({h.sets[0], h.sets[1]}, {h.transforms[0], h.transforms[1]},
                                     {h.resp[0], h.resp[1]}, h.base);
  for (UpdateForm form : {UpdateForm::moments, UpdateForm::printed}) {
    const IncrementalState next = m_gmm_update(state, h.sets[2], h.transforms[2], last, form);
    CHECK(testgen::max_abs(next.model.means.col(2) - state.model.means.col(2)) == 0.0);
    CHECK(next.model.variances[2] == state.model.variances[2]);
    CHECK(std::find(next.last_update.skipped.begin(), next.last_update.skipped.end(), 2u) !=
          next.last_update.skipped.end());
  }
}

TEST_CASE("printed recurrences reproduce the mean update") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto k = testgen::uniform_int(rng, 1, 6);
    const History h = random_history(rng, 3, k, 0.2);
    const IncrementalState state =
        IncrementalState::from_history({h.sets[0], h.sets[1]}, {h.transforms[0], h.transforms[1]},
                                       {h.resp[0], h.resp[1]}, h.base);
    const auto exact = m_gmm_update(state, h.sets[2], h.transforms[2], h.resp[2], UpdateForm::moments);
    const auto printed = m_gmm_update(state, h.sets[2], h.transforms[2], h.resp[2], UpdateForm::printed);
    CHECK(testgen::max_abs(exact.model.means - printed.model.means) < 1e-9);
    CHECK((printed.model.variances.array() >= state.model.variance_floor()).all());
  }
}

TEST_CASE("a set far from every component leaves the mixture unchanged") {
  std::mt19937_64 rng(5);
  const History h = random_history(rng, 2, 6, 10.0);
  const IncrementalState state = IncrementalState::from_history(h.sets, h.transforms, h.resp, h.base);
  const PointSet far(9, testgen::random_points(rng, 40).array() + 1e3);
  IntegrateOptions opt;
  opt.iterations = 3;
  opt.recycle = false;
  const IntegrationResult res = integrate_set(state, far, RigidTransform{}, opt);
  CHECK(res.record.rigid_step_skipped);
  CHECK(testgen::max_abs(res.state.model.means - state.model.means) < 1e-12);
  CHECK(testgen::max_abs(res.state.model.variances - state.model.variances) < 1e-12);
}

TEST_CASE("recycling re-seeds degenerate components first and keeps the invariant") {
  std::mt19937_64 rng(6);
  History h = random_history(rng, 2, 10, 0.2);
  for (auto& r : h.resp) {
    r.alpha.col(4).setZero();
    for (Eigen::Index i = 0; i < r.alpha.rows(); ++i) r.alpha.row(i) /= r.alpha.row(i).sum();
  }
  const IncrementalState state =
      IncrementalState::from_history(h.sets, h.transforms, h.resp, h.base, 0.3, 42);
  REQUIRE(state.model.is_degenerate(4));
  const PointSet next(5, testgen::random_points(rng, 60));
  IntegrateOptions opt;
  opt.iterations = 2;
  const IntegrationResult res = integrate_set(state, next, RigidTransform{}, opt);
  CHECK(res.record.recycled.size() == 3);
  CHECK(std::find(res.record.recycled.begin(), res.record.recycled.end(), 4u) != res.record.recycled.end());
  check_prior_invariant(res.state);
  for (std::size_t id : res.record.recycled) {
    const Vec3 mu = res.state.model.means.col(static_cast<Eigen::Index>(id));
    double nearest = 1e300;
    for (Eigen::Index i = 0; i < next.points.cols(); ++i) {
      nearest = std::min(nearest, (res.transform.apply(Vec3(next.points.col(i))) - mu).norm());
    }
    CHECK(nearest < 1e-12);
  }
}

TEST_CASE("recycling is reproducible for a fixed seed") {
  std::mt19937_64 rng(7);
  const History h = random_history(rng, 2, 12, 0.2);
  const PointSet next(5, testgen::random_points(rng, 60));
  auto run = [&] {
    const IncrementalState s = IncrementalState::from_history(h.sets, h.transforms, h.resp, h.base, 0.25, 9);
    return integrate_set(s, next, RigidTransform{}).record.recycled;
  };
  CHECK(run() == run());
}

TEST_CASE("integration recovers a rotated copy of the registered object") {
  std::mt19937_64 rng(8);
  const Points cloud = anisotropic_cloud(rng, 300);
  std::vector<PointSet> sets;
  for (std::size_t j = 0; j < 2; ++j) {
    Points p = cloud;
    for (Eigen::Index i = 0; i < p.cols(); ++i) p.col(i) += testgen::gaussian_vec(rng, 0.02);
    sets.emplace_back(j, p);
  }
  InitConfig ic;
  ic.k_policy = KPolicy::absolute;
  ic.k_absolute = 40;
  ic.mean_strategy = MeanStrategy::sample_aligned;
  ic.translation_strategy = TranslationStrategy::provided;
  const InitialEstimate est = initialize(sets, ic, 0.05, sphere_volume(0.5), 1e-3,
                                         std::vector<RigidTransform>(2));
  BatchConfig bc;
  bc.gamma = 0.05;
  bc.update_priors = true;
  bc.fix_variance_iters = 0;
  const BatchResult reg = run_batch(sets, est.transforms, est.model, bc);
  const IncrementalState state =
      IncrementalState::from_history(sets, reg.transforms, reg.responsibilities, reg.model);

  const Mat3 truth = axis_angle(Vec3(0.2, 1.0, 0.1).normalized(), 0.25);
  Points moved = truth.transpose() * cloud;
  for (Eigen::Index i = 0; i < moved.cols(); ++i) moved.col(i) += testgen::gaussian_vec(rng, 0.02);
  IntegrateOptions opt;
  opt.iterations = 60;
  opt.recycle = false;
  const IntegrationResult res = integrate_set(state, PointSet(2, moved), reg.transforms[0], opt);
  const Mat3 rel = reg.transforms[0].rotation().transpose() * res.transform.rotation();
  CHECK(rotation_angle(rel.transpose() * truth) < 0.02);
}

TEST_CASE("incremental update rejects a mismatched K") {
  std::mt19937_64 rng(9);
  const History h = random_history(rng, 2, 4, 0.1);
  const IncrementalState state = IncrementalState::from_history(h.sets, h.transforms, h.resp, h.base);
  const auto wrong = testgen::random_responsibilities(rng, h.sets[0].size(), 5);
  CHECK_THROWS_AS(m_gmm_update(state, h.sets[0], RigidTransform{}, wrong), ContractViolation);
  IntegrateOptions opt;
  opt.iterations = 0;
  CHECK_THROWS_AS(integrate_set(state, h.sets[0], RigidTransform{}, opt), ContractViolation);
}
