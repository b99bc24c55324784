#pragma once

#include "prim/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace prim {

// Static 3D kd-tree over a borrowed point array. Nearest-neighbour ties resolve
// to the lowest point index, which keeps queries deterministic.
template <typename Scalar>
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3<Scalar>>& points) : points_(&points) {
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!order_.empty()) root_ = build(0, static_cast<int>(order_.size()), 0);
  }

  bool empty() const { return order_.empty(); }

  struct Hit {
    int index = -1;
    Scalar squared_distance = std::numeric_limits<Scalar>::infinity();
  };

  Hit nearest(const Vec3<Scalar>& q, int exclude = -1) const {
    Hit best;
    if (root_ >= 0) nearest(root_, q, exclude, best);
    return best;
  }

  // Indices within `radius` of q (inclusive), unsorted.
  void radius(const Vec3<Scalar>& q, Scalar radius, std::vector<int>& out) const {
    out.clear();
    if (root_ >= 0) collect(root_, q, radius * radius, out);
  }

 private:
  struct Node {
    int begin, end;  // range in order_ for leaves
    int axis = -1;
    Scalar split = 0;
    int left = -1, right = -1;
  };
  static constexpr int kLeafSize = 12;

  int build(int begin, int end, int depth) {
    Node node{begin, end};
    if (end - begin > kLeafSize) {
      Aabb3<Scalar> box;
      box.setEmpty();
      for (int i = begin; i < end; ++i) box.extend((*points_)[order_[i]]);
      int axis = 0;
      box.sizes().maxCoeff(&axis);
      const int mid = (begin + end) / 2;
      std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                       [&](int a, int b) { return (*points_)[a][axis] < (*points_)[b][axis]; });
      node.axis = axis;
      node.split = (*points_)[order_[mid]][axis];
      const int id = static_cast<int>(nodes_.size());
      nodes_.push_back(node);
      const int l = build(begin, mid, depth + 1);
      const int r = build(mid, end, depth + 1);
      nodes_[id].left = l;
      nodes_[id].right = r;
      return id;
    }
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  void nearest(int id, const Vec3<Scalar>& q, int exclude, Hit& best) const {
    const Node& n = nodes_[id];
    if (n.axis < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const int idx = order_[i];
        if (idx == exclude) continue;
        const Scalar d = ((*points_)[idx] - q).squaredNorm();
        if (d < best.squared_distance || (d == best.squared_distance && idx < best.index)) {
          best.squared_distance = d;
          best.index = idx;
        }
      }
      return;
    }
    const Scalar diff = q[n.axis] - n.split;
    const int first = diff < 0 ? n.left : n.right;
    const int second = diff < 0 ? n.right : n.left;
    nearest(first, q, exclude, best);
    if (diff * diff <= best.squared_distance) nearest(second, q, exclude, best);
  }

  void collect(int id, const Vec3<Scalar>& q, Scalar r2, std::vector<int>& out) const {
    const Node& n = nodes_[id];
    if (n.axis < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        const int idx = order_[i];
        if (((*points_)[idx] - q).squaredNorm() <= r2) out.push_back(idx);
      }
      return;
    }
    const Scalar diff = q[n.axis] - n.split;
    if (diff <= 0 || diff * diff <= r2) collect(n.left, q, r2, out);
    if (diff >= 0 || diff * diff <= r2) collect(n.right, q, r2, out);
  }

  const std::vector<Vec3<Scalar>>* points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace prim
