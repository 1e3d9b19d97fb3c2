#include "jrmpc/icp.hpp"

#include <cmath>
#include <limits>

#include "jrmpc/errors.hpp"
#include "jrmpc/kdtree.hpp"
#include "jrmpc/procrustes.hpp"

namespace jrmpc {

IcpResult pairwise_icp(const PointSet& data, const PointSet& model, const IcpOptions& options) {
  if (data.empty() || model.empty()) throw ContractViolation("pairwise_icp: empty point set");
  const KdTree tree(model.points);
  const auto n = data.points.cols();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Points matched(3, n);

  IcpResult best;
  best.transform = options.init;
  double best_err = std::numeric_limits<double>::infinity();
  double prev_err = std::numeric_limits<double>::infinity();
  int rising = 0;
  RigidTransform current = options.init;

  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto hit = tree.nearest(current.apply(Vec3(data.points.col(i))));
      matched.col(i) = model.points.col(hit.index);
      err += hit.sq_distance;
    }
    err /= static_cast<double>(n);
    best.iterations = it;
    if (err < best_err) {
      best_err = err;
      best.transform = current;
      best.rmse = std::sqrt(err);
    }
    if (err > prev_err) {
      if (++rising >= 3) {
        best.diverged = true;
        return best;
      }
    } else {
      rising = 0;
    }
    if (std::abs(prev_err - err) < options.tolerance) break;
    prev_err = err;
    current = weighted_procrustes(data.points, matched, ones);
  }
  return best;
}

std::vector<RigidTransform> one_vs_all_icp(const std::vector<PointSet>& sets, std::size_t iterations) {
  if (sets.empty()) throw ContractViolation("one_vs_all_icp: no sets");
  std::vector<RigidTransform> out{RigidTransform::identity()};
  const Vec3 c0 = sets.front().centroid();
  for (std::size_t j = 1; j < sets.size(); ++j) {
    IcpOptions opt;
    opt.max_iterations = iterations;
    opt.init = RigidTransform(Mat3::Identity(), c0 - sets[j].centroid());
    out.push_back(pairwise_icp(sets[j], sets.front(), opt).transform);
  }
  return out;
}

std::vector<RigidTransform> sequential_icp(const std::vector<PointSet>& sets, std::size_t iterations,
                                           const std::optional<std::vector<RigidTransform>>& provided) {
  if (sets.empty()) throw ContractViolation("sequential_icp: no sets");
  if (provided && provided->size() != sets.size()) {
    throw ContractViolation("sequential_icp: one provided transform per set");
  }
  std::vector<RigidTransform> out{provided ? provided->front() : RigidTransform::identity()};
  for (std::size_t j = 1; j < sets.size(); ++j) {
    IcpOptions opt;
    opt.max_iterations = iterations;
    opt.init = provided ? (*provided)[j - 1].inverse() * (*provided)[j]
                        : RigidTransform(Mat3::Identity(), sets[j - 1].centroid() - sets[j].centroid());
    out.push_back(out.back() * pairwise_icp(sets[j], sets[j - 1], opt).transform);
  }
  return out;
}

}  // namespace jrmpc
