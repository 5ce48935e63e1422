#ifndef DSF_INDEX_SPACE_HPP
#define DSF_INDEX_SPACE_HPP

#include <cstddef>
#include <vector>

#include "dsf/core.hpp"

namespace dsf {

/// Mixed-radix index space: a product of finite factors flattened to
/// [0, total). The first factor varies slowest, so the codec is a plain
/// positional number system and deterministic across runs.
class IndexSpace {
 public:
  IndexSpace() = default;
  explicit IndexSpace(std::vector<int> factor_sizes);

  std::size_t total() const { return total_; }
  std::size_t num_factors() const { return sizes_.size(); }
  int factor_size(std::size_t i) const { return sizes_[i]; }
  const std::vector<int>& factor_sizes() const { return sizes_; }

  std::size_t encode(const std::vector<int>& digits) const;
  std::vector<int> decode(std::size_t index) const;

  bool operator==(const IndexSpace& other) const {
    return sizes_ == other.sizes_;
  }

 private:
  std::vector<int> sizes_;
  std::size_t total_ = 1;
};

}  // namespace dsf

#endif  // DSF_INDEX_SPACE_HPP
