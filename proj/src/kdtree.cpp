#include "jrmpc/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "jrmpc/errors.hpp"

namespace jrmpc {

KdTree::KdTree(Points points) : points_(std::move(points)) {
  if (points_.cols() == 0) throw ContractViolation("kd-tree over an empty point set");
  order_.resize(static_cast<std::size_t>(points_.cols()));
  std::iota(order_.begin(), order_.end(), Eigen::Index{0});
  nodes_.reserve(2 * order_.size() / kLeafSize + 1);
  build(0, order_.size());
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({});
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_.col(order_[i]));
    hi = hi.cwiseMax(points_.col(order_[i]));
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::size_t mid = begin + (end - begin) / 2;
  const auto first = order_.begin() + static_cast<std::ptrdiff_t>(begin);
  std::nth_element(first, order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](Eigen::Index a, Eigen::Index b) { return points_(axis, a) < points_(axis, b); });
  const double split = points_(axis, order_[mid]);
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::size_t id, const Vec3& q, Hit& best) const {
  const Node& node = nodes_[id];
  if (node.axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const double d = (points_.col(order_[i]) - q).squaredNorm();
      if (d < best.sq_distance) best = {order_[i], d};
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::size_t near = diff < 0.0 ? node.left : node.right;
  const std::size_t far = diff < 0.0 ? node.right : node.left;
  search(near, q, best);
  if (diff * diff < best.sq_distance) search(far, q, best);
}

KdTree::Hit KdTree::nearest(const Vec3& query) const {
  Hit best{-1, std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

}  // namespace jrmpc
