#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "voronoigram/geometry.hpp"

namespace voronoigram {

/// Static 2-d tree over a point set. Distance ties are always broken by the
/// smaller point index, so every query is deterministic.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Point2> points);

  std::size_t size() const { return points_.size(); }
  std::span<const Point2> points() const { return points_; }

  /// Index of the nearest point to q.
  std::int32_t nearest(const Point2& q) const;

  /// The k nearest points to q ordered by (squared distance, index), skipping
  /// `exclude` (pass -1 to keep every point).
  std::vector<std::pair<double, std::int32_t>> knn(const Point2& q, std::size_t k,
                                                   std::int32_t exclude = -1) const;

  /// Every index with squared distance <= r2, sorted by index.
  std::vector<std::int32_t> within(const Point2& q, double r2) const;

 private:
  struct Node {
    std::int32_t lo, hi;        // range in order_
    std::int32_t left, right;   // children, -1 for leaves
    std::int32_t axis;
    double split;
    double min_x, min_y, max_x, max_y;
  };

  std::int32_t build(std::int32_t lo, std::int32_t hi);
  static double box_distance2(const Node& node, const Point2& q);

  std::vector<Point2> points_;
  std::vector<std::int32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace voronoigram
