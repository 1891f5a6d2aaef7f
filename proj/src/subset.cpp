#include "adfsa/subset.hpp"

#include <stdexcept>

namespace adfsa {

FeatureSubset::FeatureSubset(std::size_t n_features, bool value)
    : size_(n_features), words_((n_features + 63) / 64, 0) {
  if (value) {
    for (std::size_t i = 0; i < n_features; ++i) set(i);
  }
}

FeatureSubset FeatureSubset::from_indices(std::size_t n_features, const std::vector<std::size_t>& indices) {
  FeatureSubset s(n_features);
  for (std::size_t i : indices) {
    if (i >= n_features) throw std::out_of_range("feature index " + std::to_string(i) + " out of range");
    s.set(i);
  }
  return s;
}

FeatureSubset FeatureSubset::from_string(const std::string& bits) {
  FeatureSubset s(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      s.set(i);
    } else if (bits[i] != '0') {
      throw std::invalid_argument("subset string may only contain 0 and 1");
    }
  }
  return s;
}

void FeatureSubset::set(std::size_t i, bool value) {
  const std::uint64_t mask = std::uint64_t{1} << (i & 63);
  if (value) {
    words_[i >> 6] |= mask;
  } else {
    words_[i >> 6] &= ~mask;
  }
}

std::size_t FeatureSubset::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<std::size_t> FeatureSubset::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size_; ++i) {
    if (test(i)) out.push_back(i);
  }
  return out;
}

std::string FeatureSubset::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (test(i)) s[i] = '1';
  }
  return s;
}

std::strong_ordering FeatureSubset::operator<=>(const FeatureSubset& other) const {
  if (auto c = size_ <=> other.size_; c != 0) return c;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    const std::uint64_t diff = words_[w] ^ other.words_[w];
    if (diff == 0) continue;
    // Lowest differing bit decides, matching string order of to_string().
    const int bit = std::countr_zero(diff);
    return ((words_[w] >> bit) & 1u) ? std::strong_ordering::greater : std::strong_ordering::less;
  }
  return std::strong_ordering::equal;
}

std::size_t FeatureSubset::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ size_;
  for (auto w : words_) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

}  // namespace adfsa
