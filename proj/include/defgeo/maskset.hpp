#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

namespace defgeo {

// Set of 64-bit relation masks over a point space of `points` bits: a flat
// bit array when the space of masks is small enough to index directly, a
// hash set otherwise.  The flat path is the hot loop of every closure
// fixpoint, so it works on raw words.
class MaskSet {
public:
  explicit MaskSet(std::uint64_t points) {
    if (points <= 24) {
      flat_.assign((1ull << points) / 64 + 1, 0);
      use_flat_ = true;
    }
  }

  bool insert(std::uint64_t mask) {
    if (use_flat_) {
      std::uint64_t& word = flat_[mask >> 6];
      std::uint64_t bit = 1ull << (mask & 63);
      if ((word & bit) != 0) return false;
      word |= bit;
      ++size_;
      return true;
    }
    bool fresh = set_.insert(mask).second;
    if (fresh) ++size_;
    return fresh;
  }

  bool contains(std::uint64_t mask) const {
    if (use_flat_) return (flat_[mask >> 6] >> (mask & 63)) & 1;
    return set_.count(mask) != 0;
  }

  std::uint64_t size() const { return size_; }

private:
  bool use_flat_ = false;
  std::uint64_t size_ = 0;
  std::vector<std::uint64_t> flat_;
  std::unordered_set<std::uint64_t> set_;
};

}  // namespace defgeo
