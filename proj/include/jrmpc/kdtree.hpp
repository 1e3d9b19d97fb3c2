#pragma once

#include <cstddef>
#include <vector>

#include "jrmpc/types.hpp"

namespace jrmpc {

/// Static 3-D kd-tree over a point matrix for exact nearest-neighbour queries.
/// Holds a copy of the points.
class KdTree {
 public:
  explicit KdTree(Points points);

  struct Hit {
    Eigen::Index index = -1;
    double sq_distance = 0.0;
  };

  Hit nearest(const Vec3& query) const;
  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.cols()); }

 private:
  struct Node {
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::size_t begin = 0, end = 0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  void search(std::size_t node, const Vec3& q, Hit& best) const;

  static constexpr std::size_t kLeafSize = 8;
  Points points_;
  std::vector<Eigen::Index> order_;
  std::vector<Node> nodes_;
};

}  // namespace jrmpc
