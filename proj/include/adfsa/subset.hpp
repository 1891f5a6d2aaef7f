#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace adfsa {

/// Fixed-length bit vector over feature indices. Two subsets are equal iff
/// their bits are identical; ordering is lexicographic from bit 0.
class FeatureSubset {
 public:
  FeatureSubset() = default;
  explicit FeatureSubset(std::size_t n_features, bool value = false);

  static FeatureSubset from_indices(std::size_t n_features, const std::vector<std::size_t>& indices);
  /// Parses "0101..." (bit 0 first).
  static FeatureSubset from_string(const std::string& bits);

  std::size_t size() const { return size_; }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool value = true);
  void flip(std::size_t i) { words_[i >> 6] ^= (std::uint64_t{1} << (i & 63)); }
  std::size_t count() const;
  bool none() const { return count() == 0; }

  std::vector<std::size_t> indices() const;
  std::string to_string() const;

  bool operator==(const FeatureSubset& other) const = default;
  std::strong_ordering operator<=>(const FeatureSubset& other) const;

  std::size_t hash() const;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace adfsa

template <>
struct std::hash<adfsa::FeatureSubset> {
  std::size_t operator()(const adfsa::FeatureSubset& s) const noexcept { return s.hash(); }
};
