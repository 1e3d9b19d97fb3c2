#include "jrmpc/metrics.hpp"

#include <numbers>

#include "jrmpc/errors.hpp"

namespace jrmpc {

namespace {

void check(const std::vector<RigidTransform>& estimated, const std::vector<RigidTransform>& truth,
           std::size_t minimum) {
  if (estimated.size() != truth.size()) {
    throw ContractViolation("metrics: estimated and true transform counts differ");
  }
  if (estimated.size() < minimum) {
    throw ContractViolation("metrics: need at least " + std::to_string(minimum) + " sets");
  }
}

Mat3 relative(const std::vector<RigidTransform>& ts, std::size_t a, std::size_t b) {
  return ts[a].rotation().transpose() * ts[b].rotation();
}

}  // namespace

RotationErrorReport rotation_rmse(const std::vector<RigidTransform>& estimated,
                                  const std::vector<RigidTransform>& truth) {
  check(estimated, truth, 2);
  RotationErrorReport r;
  for (std::size_t j = 1; j < estimated.size(); ++j) {
    r.per_view.push_back((relative(estimated, 0, j) - relative(truth, 0, j)).norm());
    r.mean += r.per_view.back();
  }
  r.mean /= static_cast<double>(r.per_view.size());
  return r;
}

double pair_rotation_error(const std::vector<RigidTransform>& estimated,
                           const std::vector<RigidTransform>& truth, std::size_t a, std::size_t b) {
  check(estimated, truth, 2);
  if (a >= estimated.size() || b >= estimated.size()) throw ContractViolation("metrics: set index out of range");
  return (relative(estimated, a, b) - relative(truth, a, b)).norm();
}

double mean_composition_angle(const std::vector<RigidTransform>& estimated,
                              const std::vector<RigidTransform>& truth) {
  check(estimated, truth, 1);
  double sum = 0.0;
  for (std::size_t j = 0; j < estimated.size(); ++j) {
    sum += rotation_angle(relative(estimated, 0, j).transpose() * relative(truth, 0, j));
  }
  return sum / static_cast<double>(estimated.size()) * 180.0 / std::numbers::pi;
}

double relative_rotation_error_deg(const std::vector<RigidTransform>& estimated,
                                   const std::vector<RigidTransform>& truth, std::size_t a,
                                   std::size_t b) {
  check(estimated, truth, 2);
  return rotation_angle(relative(estimated, a, b).transpose() * relative(truth, a, b)) * 180.0 /
         std::numbers::pi;
}

}  // namespace jrmpc
