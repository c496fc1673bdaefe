#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace voronoigram {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0), count_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::int32_t find(std::int32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    --count_;
  }

  std::size_t count() const { return count_; }

  /// Labels 0..count-1 assigned in order of each component's lowest node.
  std::vector<std::int32_t> labels() {
    std::vector<std::int32_t> root_label(parent_.size(), -1);
    std::vector<std::int32_t> out(parent_.size());
    std::int32_t next = 0;
    for (std::size_t i = 0; i < parent_.size(); ++i) {
      const std::int32_t r = find(static_cast<std::int32_t>(i));
      if (root_label[r] < 0) root_label[r] = next++;
      out[i] = root_label[r];
    }
    return out;
  }

 private:
  std::vector<std::int32_t> parent_;
  std::vector<std::int32_t> rank_;
  std::size_t count_;
};

}  // namespace voronoigram
