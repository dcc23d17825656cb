#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "elio/errors.hpp"
#include "elio/manifold.hpp"

namespace elio {

struct Neighbor {
  Vec3 point;
  double dist2 = 0.0;
};

/// Strict ordering used for kNN results: distance first, then lexicographic
/// coordinates so that equidistant points resolve deterministically.
inline bool neighbor_less(double d2a, const Vec3& a, double d2b, const Vec3& b) {
  if (d2a != d2b) return d2a < d2b;
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

/// Incremental k-d tree with scapegoat-style partial rebuilds. A subtree is
/// rebuilt once its larger child holds more than `balance` of its points.
class KdTree {
 public:
  explicit KdTree(double balance = 0.7, double dedup_radius = 1e-6)
      : balance_(balance), dedup2_(dedup_radius * dedup_radius) {}

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::size_t rebuild_count() const { return rebuilds_; }

  /// Returns false when the point duplicates a stored one.
  bool insert(const Vec3& p) {
    if (root_ >= 0) {
      auto nn = nearest(p, 1);
      if (nn.front().dist2 <= dedup2_) return false;
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{p, -1, -1, 1, 0});
    if (root_ < 0) {
      root_ = id;
      return true;
    }
    path_.clear();
    int cur = root_;
    while (true) {
      path_.push_back(cur);
      Node& n = nodes_[cur];
      ++n.size;
      int& child = p[n.axis] < n.point[n.axis] ? n.left : n.right;
      if (child < 0) {
        child = id;
        nodes_[id].axis = static_cast<std::uint8_t>((n.axis + 1) % 3);
        break;
      }
      cur = child;
    }
    // Rebuild the highest unbalanced ancestor.
    for (std::size_t i = 0; i < path_.size(); ++i) {
      const Node& n = nodes_[path_[i]];
      const int big = std::max(subtree_size(n.left), subtree_size(n.right));
      if (n.size >= kMinRebuild && big > balance_ * n.size) {
        const int parent = i == 0 ? -1 : path_[i - 1];
        rebuild(path_[i], parent);
        break;
      }
    }
    return true;
  }

  std::size_t insert(std::span<const Vec3> points) {
    std::size_t added = 0;
    for (const auto& p : points) added += insert(p) ? 1 : 0;
    return added;
  }

  /// Exact k nearest neighbours sorted by (distance, coordinates).
  std::vector<Neighbor> nearest(const Vec3& q, std::size_t k) const {
    if (k == 0 || size() < k) {
      throw Error(ErrorKind::InsufficientPoints,
                  "kNN needs " + std::to_string(k) + " points, map holds " + std::to_string(size()));
    }
    std::vector<Neighbor> heap;
    heap.reserve(k + 1);
    search(root_, q, k, heap);
    std::sort_heap(heap.begin(), heap.end(), heap_less);
    return heap;
  }

  std::vector<Vec3> points() const {
    std::vector<Vec3> out;
    out.reserve(nodes_.size());
    for (const auto& n : nodes_) out.push_back(n.point);
    return out;
  }

  int depth() const { return depth_of(root_); }

 private:
  struct Node {
    Vec3 point;
    int left;
    int right;
    int size;
    std::uint8_t axis;
  };

  static constexpr int kMinRebuild = 16;

  static bool heap_less(const Neighbor& a, const Neighbor& b) {
    return neighbor_less(a.dist2, a.point, b.dist2, b.point);
  }

  int subtree_size(int id) const { return id < 0 ? 0 : nodes_[id].size; }

  int depth_of(int id) const {
    if (id < 0) return 0;
    return 1 + std::max(depth_of(nodes_[id].left), depth_of(nodes_[id].right));
  }

  void search(int id, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap) const {
    if (id < 0) return;
    const Node& n = nodes_[id];
    const double d2 = (n.point - q).squaredNorm();
    if (heap.size() < k) {
      heap.push_back({n.point, d2});
      std::push_heap(heap.begin(), heap.end(), heap_less);
    } else if (neighbor_less(d2, n.point, heap.front().dist2, heap.front().point)) {
      std::pop_heap(heap.begin(), heap.end(), heap_less);
      heap.back() = {n.point, d2};
      std::push_heap(heap.begin(), heap.end(), heap_less);
    }
    const double diff = q[n.axis] - n.point[n.axis];
    const int near = diff < 0.0 ? n.left : n.right;
    const int far = diff < 0.0 ? n.right : n.left;
    search(near, q, k, heap);
    // Equal distances must still be visited for the lexicographic tie-break.
    if (heap.size() < k || diff * diff <= heap.front().dist2) search(far, q, k, heap);
  }

  void collect(int id, std::vector<int>& out) const {
    if (id < 0) return;
    out.push_back(id);
    collect(nodes_[id].left, out);
    collect(nodes_[id].right, out);
  }

  int build(std::vector<int>::iterator first, std::vector<int>::iterator last) {
    if (first == last) return -1;
    Vec3 lo = nodes_[*first].point, hi = lo;
    for (auto it = first; it != last; ++it) {
      lo = lo.cwiseMin(nodes_[*it].point);
      hi = hi.cwiseMax(nodes_[*it].point);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    auto mid = first + (last - first) / 2;
    auto key = [&](int i) { return nodes_[i].point[axis]; };
    std::nth_element(first, mid, last, [&](int a, int b) { return key(a) < key(b); });
    // Points equal to the median on the split axis must go right.
    const double split = key(*mid);
    mid = std::partition(first, mid, [&](int i) { return key(i) < split; });
    auto pivot = std::find_if(mid, last, [&](int i) { return key(i) == split; });
    std::iter_swap(mid, pivot);
    const int id = *mid;
    Node& n = nodes_[id];
    n.axis = static_cast<std::uint8_t>(axis);
    n.size = static_cast<int>(last - first);
    const int left = build(first, mid);
    const int right = build(mid + 1, last);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void rebuild(int id, int parent) {
    std::vector<int> ids;
    ids.reserve(nodes_[id].size);
    collect(id, ids);
    const int new_root = build(ids.begin(), ids.end());
    if (parent < 0) {
      root_ = new_root;
    } else {
      Node& p = nodes_[parent];
      (p.left == id ? p.left : p.right) = new_root;
    }
    ++rebuilds_;
  }

  std::vector<Node> nodes_;
  std::vector<int> path_;
  int root_ = -1;
  double balance_;
  double dedup2_;
  std::size_t rebuilds_ = 0;
};

}  // namespace elio
