#include "dsf/index_space.hpp"

#include <limits>

namespace dsf {

IndexSpace::IndexSpace(std::vector<int> factor_sizes)
    : sizes_(std::move(factor_sizes)) {
  total_ = 1;
  for (int s : sizes_) {
    if (s < 1) throw DomainError("index space factor size must be >= 1");
    if (total_ > std::numeric_limits<std::size_t>::max() /
                     static_cast<std::size_t>(s))
      throw DomainError("index space overflow");
    total_ *= static_cast<std::size_t>(s);
  }
}

std::size_t IndexSpace::encode(const std::vector<int>& digits) const {
  if (digits.size() != sizes_.size())
    throw DomainError("encode: digit count mismatch");
  std::size_t index = 0;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (digits[i] < 0 || digits[i] >= sizes_[i])
      throw DomainError("encode: digit out of range");
    index = index * static_cast<std::size_t>(sizes_[i]) +
            static_cast<std::size_t>(digits[i]);
  }
  return index;
}

std::vector<int> IndexSpace::decode(std::size_t index) const {
  if (index >= total_) throw DomainError("decode: index out of range");
  std::vector<int> digits(sizes_.size());
  for (std::size_t i = sizes_.size(); i-- > 0;) {
    digits[i] = static_cast<int>(index % static_cast<std::size_t>(sizes_[i]));
    index /= static_cast<std::size_t>(sizes_[i]);
  }
  return digits;
}

}  // namespace dsf
