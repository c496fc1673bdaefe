#include "voronoigram/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace voronoigram {
namespace {

constexpr std::int32_t kLeafSize = 12;

using Candidate = std::pair<double, std::int32_t>;  // (d2, index), lexicographic

}  // namespace

KdTree::KdTree(std::span<const Point2> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<std::int32_t>(points_.size()));
  }
}

std::int32_t KdTree::build(std::int32_t lo, std::int32_t hi) {
  Node node{lo, hi, -1, -1, 0, 0.0, 0, 0, 0, 0};
  node.min_x = node.min_y = std::numeric_limits<double>::infinity();
  node.max_x = node.max_y = -std::numeric_limits<double>::infinity();
  for (std::int32_t k = lo; k < hi; ++k) {
    const Point2& p = points_[order_[k]];
    node.min_x = std::min(node.min_x, p.x);
    node.max_x = std::max(node.max_x, p.x);
    node.min_y = std::min(node.min_y, p.y);
    node.max_y = std::max(node.max_y, p.y);
  }
  const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (hi - lo <= kLeafSize) return id;

  const std::int32_t axis = (node.max_x - node.min_x >= node.max_y - node.min_y) ? 0 : 1;
  const std::int32_t mid = lo + (hi - lo) / 2;
  auto coord = [&](std::int32_t i) { return axis == 0 ? points_[i].x : points_[i].y; };
  std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                   [&](std::int32_t a, std::int32_t b) {
                     const double ca = coord(a), cb = coord(b);
                     return ca < cb || (ca == cb && a < b);
                   });
  const std::int32_t left = build(lo, mid);
  const std::int32_t right = build(mid, hi);
  nodes_[id].left = left;
  nodes_[id].right = right;
  nodes_[id].axis = axis;
  nodes_[id].split = coord(order_[mid]);
  return id;
}

double KdTree::box_distance2(const Node& node, const Point2& q) {
  const double dx = q.x < node.min_x ? node.min_x - q.x : (q.x > node.max_x ? q.x - node.max_x : 0.0);
  const double dy = q.y < node.min_y ? node.min_y - q.y : (q.y > node.max_y ? q.y - node.max_y : 0.0);
  return dx * dx + dy * dy;
}

std::int32_t KdTree::nearest(const Point2& q) const {
  const auto best = knn(q, 1);
  return best.empty() ? -1 : best.front().second;
}

std::vector<std::pair<double, std::int32_t>> KdTree::knn(const Point2& q, std::size_t k,
                                                         std::int32_t exclude) const {
  std::vector<Candidate> heap;  // max-heap on (d2, index)
  if (k == 0 || nodes_.empty()) return heap;
  heap.reserve(k + 1);
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    const double bound = heap.size() < k ? std::numeric_limits<double>::infinity() : heap.front().first;
    if (box_distance2(node, q) > bound) continue;
    if (node.left < 0) {
      for (std::int32_t t = node.lo; t < node.hi; ++t) {
        const std::int32_t i = order_[t];
        if (i == exclude) continue;
        const Candidate c{squared_distance(points_[i], q), i};
        if (heap.size() < k) {
          heap.push_back(c);
          std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = c;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      continue;
    }
    const double diff = (node.axis == 0 ? q.x : q.y) - node.split;
    // Push the far child first so the near one is explored first.
    if (diff < 0) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::sort_heap(heap.begin(), heap.end());
  return heap;
}

std::vector<std::int32_t> KdTree::within(const Point2& q, double r2) const {
  std::vector<std::int32_t> out;
  if (nodes_.empty()) return out;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (box_distance2(node, q) > r2) continue;
    if (node.left < 0) {
      for (std::int32_t t = node.lo; t < node.hi; ++t) {
        const std::int32_t i = order_[t];
        if (squared_distance(points_[i], q) <= r2) out.push_back(i);
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace voronoigram
