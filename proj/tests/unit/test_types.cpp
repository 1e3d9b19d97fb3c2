#include <doctest.h>

#include <limits>

#include "jrmpc/errors.hpp"
#include "jrmpc/types.hpp"
#include "test_helpers.hpp"

using namespace jrmpc;

TEST_CASE("point set rejects non-finite coordinates") {
  Points p = Points::Zero(3, 4);
  CHECK_NOTHROW(PointSet(0, p));
  p(1, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(PointSet(0, p), DomainError);
  p(1, 2) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(PointSet(0, p), DomainError);
}

TEST_CASE("centroid and total point count") {
  Points p(3, 2);
  p << 0, 2, 0, 4, 0, 6;
  const PointSet s(3, p);
  CHECK(s.centroid().isApprox(Vec3(1, 2, 3)));
  CHECK(total_points({s, s, PointSet(1, Points(3, 0))}) == 4);
  CHECK_THROWS_AS(PointSet(0, Points(3, 0)).centroid(), ContractViolation);
}

TEST_CASE("rigid transform validation") {
  std::mt19937_64 rng(1);
  CHECK_NOTHROW(RigidTransform(testgen::random_rotation(rng), Vec3(1, 2, 3)));
  Mat3 mirror = Mat3::Identity();
  mirror(2, 2) = -1.0;
  CHECK_THROWS_AS(RigidTransform(mirror, Vec3::Zero()), DomainError);
  CHECK_THROWS_AS(RigidTransform(2.0 * Mat3::Identity(), Vec3::Zero()), DomainError);
  CHECK_THROWS_AS(RigidTransform(Mat3::Identity(), Vec3(0, std::nan(""), 0)), DomainError);
}

TEST_CASE("composition and inverse agree with pointwise application") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const RigidTransform a = testgen::random_transform(rng);
    const RigidTransform b = testgen::random_transform(rng);
    const Vec3 x = testgen::gaussian_vec(rng);
    CHECK((a * b).apply(x).isApprox(a.apply(b.apply(x)), 1e-12));
    CHECK((a.inverse().apply(a.apply(x)) - x).norm() < 1e-12);
    CHECK(RigidTransform::is_rotation((a * b).rotation()));
  }
}

TEST_CASE("rotation angle of axis-angle rotations") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const double angle = testgen::uniform_real(rng, 0.0, 3.14159);
    const Mat3 r = axis_angle(testgen::gaussian_vec(rng).normalized(), angle);
    CHECK(rotation_angle(r) == doctest::Approx(angle).epsilon(1e-9));
  }
  CHECK(rotation_angle(axis_angle(Vec3(0, 0, 1), 1e-9)) == doctest::Approx(1e-9).epsilon(1e-6));
  CHECK(rotation_angle(Mat3::Identity()) == 0.0);
}

TEST_CASE("mixture validation") {
  MixtureModel m = MixtureModel::with_uniform_priors(Points::Zero(3, 3), Eigen::Vector3d(1, 1, 1),
                                                     0.1, 1.0, 1e-3);
  CHECK(m.priors.size() == 4);
  CHECK(m.priors[0] == doctest::Approx(0.25));
  CHECK_NOTHROW(m.validate());
  MixtureModel bad = m;
  bad.variances[1] = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = m;
  bad.priors[0] += 1e-6;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = m;
  bad.h = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = m;
  bad.priors.resize(3);
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
}

TEST_CASE("degenerate components sit at the variance floor") {
  MixtureModel m = MixtureModel::with_uniform_priors(Points::Zero(3, 3), Eigen::Vector3d(1e-6, 0.5, 1e-6),
                                                     0.0, 1.0, 1e-3);
  CHECK(m.is_degenerate(0));
  CHECK_FALSE(m.is_degenerate(1));
  CHECK(m.degenerate_components() == std::vector<std::size_t>{0, 2});
}

TEST_CASE("sphere volume") {
  CHECK(sphere_volume(0.5) == doctest::Approx(3.14159265358979 / 6.0).epsilon(1e-12));
}

TEST_CASE("median of odd and even counts") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(median({7.0}) == 7.0);
  CHECK_THROWS_AS(median({}), ContractViolation);
}

TEST_CASE("component statistics map moments through the transform") {
  std::mt19937_64 rng(4);
  const Points pts = testgen::random_points(rng, 20);
  const RigidTransform t = testgen::random_transform(rng);
  const auto resp = testgen::random_responsibilities(rng, 20, 3);
  SetMoments m;
  m.mass = resp.alpha.leftCols(3).colwise().sum().transpose();
  m.weighted_sum = pts * resp.alpha.leftCols(3);
  m.weighted_sq_norm = pts.colwise().squaredNorm() * resp.alpha.leftCols(3);
  m.outlier_mass = resp.alpha.col(3).sum();
  m.point_count = 20;
  const ComponentStats s = ComponentStats::from_moments(m, t, 0.5);
  const Points moved = t.apply(pts);
  for (Eigen::Index k = 0; k < 3; ++k) {
    Vec3 first = Vec3::Zero();
    double second = 0.0;
    for (Eigen::Index i = 0; i < 20; ++i) {
      first += resp.alpha(i, k) * moved.col(i);
      second += resp.alpha(i, k) * moved.col(i).squaredNorm();
    }
    CHECK((s.first_moment.col(k) - first).norm() < 1e-12);
    CHECK(s.second_moment[k] == doctest::Approx(second).epsilon(1e-12));
  }
  CHECK(s.eta == doctest::Approx(1.5 * (20.0 - m.outlier_mass)).epsilon(1e-12));
}
