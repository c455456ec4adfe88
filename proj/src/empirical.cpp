#include "gpi/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpi/errors.hpp"

namespace gpi {

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorKind::InvalidArgument, "sample must be non-empty");
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "sample contains a non-finite value");
  }
}

double ecdf(const Sample& s, double x) noexcept {
  const auto v = s.values();
  const auto count = std::count_if(v.begin(), v.end(), [x](double e) { return e <= x; });
  return static_cast<double>(count) / static_cast<double>(v.size());
}

std::size_t quantile_rank(std::size_t m, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::AlphaOutOfRange, "quantile level must lie in (0, 1], got " + std::to_string(alpha));
  }
  const double md = static_cast<double>(m);
  auto k = static_cast<std::size_t>(std::ceil(md * alpha));
  k = std::clamp<std::size_t>(k, 1, m);
  while (k > 1 && static_cast<double>(k - 1) / md >= alpha) --k;
  while (k < m && static_cast<double>(k) / md < alpha) ++k;
  return k;
}

double quantile(const Sample& s, double alpha) {
  const std::size_t k = quantile_rank(s.size(), alpha);
  std::vector<double> work(s.values().begin(), s.values().end());
  auto nth = work.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(work.begin(), nth, work.end());
  return *nth;
}

double quantile_sorted(std::span<const double> sorted, double alpha) {
  if (sorted.empty()) throw Error(ErrorKind::InvalidArgument, "quantile of an empty range");
  return sorted[quantile_rank(sorted.size(), alpha) - 1];
}

Sample resample(const Sample& s, std::size_t count, RngStream& rng) {
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "resample count must be >= 1");
  std::vector<double> out(count);
  const auto v = s.values();
  for (auto& o : out) o = v[rng.uniform_index(v.size())];
  return Sample(std::move(out));
}

}  // namespace gpi
