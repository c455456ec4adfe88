#include "gpi/distributions.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gpi/errors.hpp"

namespace gpi {

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) noexcept { return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::AlphaOutOfRange, "normal quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

ErrorDistribution ErrorDistribution::normal(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorKind::InvalidArgument, "normal sigma must be > 0");
  return ErrorDistribution(NormalErrors{sigma});
}

ErrorDistribution ErrorDistribution::laplace(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorKind::InvalidArgument, "laplace scale must be > 0");
  return ErrorDistribution(LaplaceErrors{scale});
}

ErrorDistribution ErrorDistribution::empirical(const Sample& sample) {
  std::vector<double> v(sample.values().begin(), sample.values().end());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double scale = 0.0;
  for (double e : v) scale = std::max(scale, std::abs(e));
  if (std::abs(mean) > 1e-8 * (1.0 + scale)) {
    throw Error(ErrorKind::InvalidArgument, "empirical error law must be centered");
  }
  std::stable_sort(v.begin(), v.end());
  return ErrorDistribution(EmpiricalErrors{std::move(v)});
}

bool ErrorDistribution::is_analytic() const noexcept { return !std::holds_alternative<EmpiricalErrors>(kind_); }

std::string ErrorDistribution::kind_name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NormalErrors>) return "normal";
        else if constexpr (std::is_same_v<K, LaplaceErrors>) return "laplace";
        else return "empirical";
      },
      kind_);
}

namespace {

[[noreturn]] void no_density() {
  throw Error(ErrorKind::InvalidArgument, "density is unavailable for an empirical error law");
}

}  // namespace

double ErrorDistribution::cdf(double x) const {
  return std::visit(
      [x](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NormalErrors>) {
          return normal_cdf(x / k.sigma);
        } else if constexpr (std::is_same_v<K, LaplaceErrors>) {
          return x < 0.0 ? 0.5 * std::exp(x / k.scale) : 1.0 - 0.5 * std::exp(-x / k.scale);
        } else {
          const auto it = std::upper_bound(k.sorted.begin(), k.sorted.end(), x);
          return static_cast<double>(it - k.sorted.begin()) / static_cast<double>(k.sorted.size());
        }
      },
      kind_);
}

double ErrorDistribution::pdf(double x) const {
  return std::visit(
      [x](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NormalErrors>) {
          return normal_pdf(x / k.sigma) / k.sigma;
        } else if constexpr (std::is_same_v<K, LaplaceErrors>) {
          return std::exp(-std::abs(x) / k.scale) / (2.0 * k.scale);
        } else {
          no_density();
        }
      },
      kind_);
}

double ErrorDistribution::pdf_derivative(double x) const {
  return std::visit(
      [x](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NormalErrors>) {
          const double z = x / k.sigma;
          return -z * normal_pdf(z) / (k.sigma * k.sigma);
        } else if constexpr (std::is_same_v<K, LaplaceErrors>) {
          // One-sided at 0; the kink is a null set.
          const double sign = x > 0.0 ? -1.0 : (x < 0.0 ? 1.0 : 0.0);
          return sign * std::exp(-std::abs(x) / k.scale) / (2.0 * k.scale * k.scale);
        } else {
          no_density();
        }
      },
      kind_);
}

double ErrorDistribution::variance() const {
  return std::visit(
      [](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NormalErrors>) {
          return k.sigma * k.sigma;
        } else if constexpr (std::is_same_v<K, LaplaceErrors>) {
          return 2.0 * k.scale * k.scale;
        } else {
          double s = 0.0;
          for (double e : k.sorted) s += e * e;
          return s / static_cast<double>(k.sorted.size());
        }
      },
      kind_);
}

double ErrorDistribution::h(double x) const {
  return std::visit(
      [x](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NormalErrors>) {
          if (std::isinf(x)) return 0.0;
          return -k.sigma * normal_pdf(x / k.sigma);
        } else if constexpr (std::is_same_v<K, LaplaceErrors>) {
          if (std::isinf(x)) return 0.0;
          const double b = k.scale;
          return x <= 0.0 ? 0.5 * std::exp(x / b) * (x - b) : -0.5 * std::exp(-x / b) * (x + b);
        } else {
          double s = 0.0;
          for (double e : k.sorted) {
            if (e > x) break;
            s += e;
          }
          return s / static_cast<double>(k.sorted.size());
        }
      },
      kind_);
}

double ErrorDistribution::draw(RngStream& rng) const {
  return std::visit(
      [&rng](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, NormalErrors>) {
          boost::random::normal_distribution<double> dist(0.0, k.sigma);
          return dist(rng);
        } else if constexpr (std::is_same_v<K, LaplaceErrors>) {
          // Inverse cdf with u strictly inside (0, 1).
          const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
          return u < 0.5 ? k.scale * std::log(2.0 * u) : -k.scale * std::log(2.0 * (1.0 - u));
        } else {
          return k.sorted[rng.uniform_index(k.sorted.size())];
        }
      },
      kind_);
}

void ErrorDistribution::fill(RngStream& rng, std::span<double> out) const {
  if (const auto* k = std::get_if<NormalErrors>(&kind_)) {
    boost::random::normal_distribution<double> dist(0.0, k->sigma);
    for (auto& o : out) o = dist(rng);
    return;
  }
  for (auto& o : out) o = draw(rng);
}

}  // namespace gpi
