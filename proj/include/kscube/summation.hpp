#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace kscube {

/// Pairwise summation of a contiguous range (recursive halving down to a
/// block of 32 naive additions). Error grows as O(log N) rather than O(N).
inline double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 32) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

/// Streaming form of pairwise summation. Values are folded into blocks of
/// 64, and block totals are merged like a binary counter, so the summation
/// tree is a deterministic function of the insertion order only.
class CascadeSum {
 public:
  void add(double v) {
    block_ += v;
    if (++in_block_ == kBlock) flush_block();
  }

  /// Adds a whole block summed naively by the caller in insertion order;
  /// equivalent to kBlock calls to add() when no partial block is pending.
  void add_block(double block_total) {
    if (in_block_ != 0) throw std::logic_error("add_block with a partial block pending");
    block_ = block_total;
    flush_block();
  }

  static constexpr std::size_t block_size() { return kBlock; }

  double total() const {
    double s = block_;
    for (std::size_t level = 0; level < levels_.size(); ++level) {
      if (occupied_[level]) s += levels_[level];
    }
    return s;
  }

 private:
  static constexpr std::size_t kBlock = 64;

  void flush_block() {
    double carry = block_;
    block_ = 0.0;
    in_block_ = 0;
    for (std::size_t level = 0;; ++level) {
      if (level == levels_.size()) {
        levels_.push_back(0.0);
        occupied_.push_back(false);
      }
      if (!occupied_[level]) {
        levels_[level] = carry;
        occupied_[level] = true;
        return;
      }
      carry += levels_[level];
      occupied_[level] = false;
    }
  }

  double block_ = 0.0;
  std::size_t in_block_ = 0;
  std::vector<double> levels_;
  std::vector<bool> occupied_;
};

}  // namespace kscube
