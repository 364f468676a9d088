#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "advtest/error.hpp"

namespace advtest::sampling {

/**
 * k-d tree over points of fixed dimension with one payload per point.
 *
 * The tree is balanced at build time (median split on the axis of largest
 * spread). Points inserted afterwards go to a small staging buffer that is
 * scanned linearly; the tree is rebuilt once the buffer outgrows
 * max(32, size/4). Nearest-neighbour queries are exact; among points at equal
 * distance the one inserted first wins.
 */
template <class Payload = double>
class KdTree {
 public:
  struct Hit {
    std::size_t index;
    double distance;
  };

  explicit KdTree(std::size_t dims = 0) : dims_(dims) {}

  std::size_t dimension() const { return dims_; }
  std::size_t size() const { return payloads_.size(); }
  bool empty() const { return payloads_.empty(); }

  void insert(const std::vector<double>& point, Payload payload) {
    if (dims_ == 0 && empty()) dims_ = point.size();
    if (point.size() != dims_) throw Error("kd-tree point dimension mismatch");
    coords_.insert(coords_.end(), point.begin(), point.end());
    payloads_.push_back(std::move(payload));
    staged_.push_back(size() - 1);
    if (staged_.size() > std::max<std::size_t>(32, size() / 4)) rebuild();
  }

  /// Bulk load and build in one pass.
  void assign(const std::vector<std::vector<double>>& points, std::vector<Payload> payloads) {
    if (points.size() != payloads.size()) throw Error("kd-tree payload count mismatch");
    coords_.clear();
    payloads_ = std::move(payloads);
    staged_.clear();
    if (!points.empty()) dims_ = points.front().size();
    for (const auto& p : points) {
      if (p.size() != dims_) throw Error("kd-tree point dimension mismatch");
      coords_.insert(coords_.end(), p.begin(), p.end());
    }
    rebuild();
  }

  std::vector<double> point(std::size_t i) const {
    return {coords_.begin() + static_cast<std::ptrdiff_t>(i * dims_),
            coords_.begin() + static_cast<std::ptrdiff_t>((i + 1) * dims_)};
  }
  const Payload& payload(std::size_t i) const { return payloads_[i]; }

  Hit nearest(const std::vector<double>& query) const {
    if (empty()) throw Error("nearest-neighbour query on an empty kd-tree");
    if (query.size() != dims_) throw Error("kd-tree query dimension mismatch");
    Best best;
    if (!nodes_.empty()) search(0, query.data(), best);
    for (std::size_t i : staged_) consider(i, query.data(), best);
    return {best.index, std::sqrt(best.d2)};
  }

  /// Squared Euclidean distance, summed in coordinate order.
  double squared_distance(std::size_t i, const double* q) const {
    const double* p = &coords_[i * dims_];
    double s = 0;
    for (std::size_t k = 0; k < dims_; ++k) {
      const double d = p[k] - q[k];
      s += d * d;
    }
    return s;
  }

 private:
  struct Node {
    std::size_t point;
    std::size_t axis;
    double split;
    std::ptrdiff_t left = -1;
    std::ptrdiff_t right = -1;
  };

  struct Best {
    std::size_t index = std::numeric_limits<std::size_t>::max();
    double d2 = std::numeric_limits<double>::infinity();
  };

  void consider(std::size_t i, const double* q, Best& best) const {
    const double d2 = squared_distance(i, q);
    if (d2 < best.d2 || (d2 == best.d2 && i < best.index)) {
      best.d2 = d2;
      best.index = i;
    }
  }

  void rebuild() {
    nodes_.clear();
    staged_.clear();
    std::vector<std::size_t> idx(size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    nodes_.reserve(idx.size());
    if (!idx.empty()) build(idx.begin(), idx.end());
  }

  using It = std::vector<std::size_t>::iterator;

  std::ptrdiff_t build(It first, It last) {
    if (first == last) return -1;
    std::size_t axis = 0;
    double widest = -1;
    for (std::size_t k = 0; k < dims_; ++k) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (It it = first; it != last; ++it) {
        const double v = coords_[*it * dims_ + k];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        axis = k;
      }
    }
    It mid = first + (last - first) / 2;
    std::nth_element(first, mid, last, [&](std::size_t a, std::size_t b) {
      const double va = coords_[a * dims_ + axis], vb = coords_[b * dims_ + axis];
      return va < vb || (va == vb && a < b);
    });
    const auto self = static_cast<std::ptrdiff_t>(nodes_.size());
    nodes_.push_back({*mid, axis, coords_[*mid * dims_ + axis]});
    const auto l = build(first, mid);
    const auto r = build(mid + 1, last);
    nodes_[static_cast<std::size_t>(self)].left = l;
    nodes_[static_cast<std::size_t>(self)].right = r;
    return self;
  }

  void search(std::ptrdiff_t n, const double* q, Best& best) const {
    if (n < 0) return;
    const Node& node = nodes_[static_cast<std::size_t>(n)];
    consider(node.point, q, best);
    const double diff = q[node.axis] - node.split;
    const auto near = diff < 0 ? node.left : node.right;
    const auto far = diff < 0 ? node.right : node.left;
    search(near, q, best);
    // <= keeps equal-distance candidates reachable for the index tie-break.
    if (diff * diff <= best.d2) search(far, q, best);
  }

  std::size_t dims_;
  std::vector<double> coords_;
  std::vector<Payload> payloads_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> staged_;
};

}  // namespace advtest::sampling
