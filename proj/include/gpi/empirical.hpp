#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gpi/rng.hpp"

namespace gpi {

/// Non-empty vector of finite reals. Construction validates.
class Sample {
 public:
  explicit Sample(std::vector<double> values);

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// Fraction of sample points <= x.
[[nodiscard]] double ecdf(const Sample& s, double x) noexcept;

/// 1-based rank k of the order statistic returned by the inf-definition
/// quantile: the smallest k with k/m >= alpha (same floating comparison as
/// ecdf, so quantile and ecdf never disagree at a boundary).
/// Throws AlphaOutOfRange unless 0 < alpha <= 1.
[[nodiscard]] std::size_t quantile_rank(std::size_t m, double alpha);

/// inf{x : ecdf(s, x) >= alpha}; always a sample point, never interpolated.
[[nodiscard]] double quantile(const Sample& s, double alpha);

/// Same as quantile() on a range that is already sorted ascending.
[[nodiscard]] double quantile_sorted(std::span<const double> sorted, double alpha);

/// count i.i.d. draws with replacement.
[[nodiscard]] Sample resample(const Sample& s, std::size_t count, RngStream& rng);

}  // namespace gpi
