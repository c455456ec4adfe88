#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gpi/empirical.hpp"
#include "gpi/rng.hpp"

namespace gpi {

struct NormalErrors {
  double sigma = 1.0;
};

/// Laplace(0, scale); variance 2 * scale^2.
struct LaplaceErrors {
  double scale = 1.0;
};

/// Plug-in law of a centered sample. F and H only; no density.
struct EmpiricalErrors {
  std::vector<double> sorted;
};

/// Zero-mean error law with finite variance.
///
/// Normal and Laplace kinds expose the analytic F, F', F'' used by the
/// theory module. The empirical kind supports cdf(), h() and sampling; its
/// density accessors throw InvalidArgument.
class ErrorDistribution {
 public:
  [[nodiscard]] static ErrorDistribution normal(double sigma);
  [[nodiscard]] static ErrorDistribution laplace(double scale);
  /// Throws InvalidArgument if the sample is not centered.
  [[nodiscard]] static ErrorDistribution empirical(const Sample& sample);

  [[nodiscard]] bool is_analytic() const noexcept;
  [[nodiscard]] std::string kind_name() const;
  [[nodiscard]] const std::variant<NormalErrors, LaplaceErrors, EmpiricalErrors>& kind() const noexcept { return kind_; }

  [[nodiscard]] double cdf(double x) const;
  [[nodiscard]] double pdf(double x) const;
  [[nodiscard]] double pdf_derivative(double x) const;
  [[nodiscard]] double variance() const;
  /// H(x) = E[eps 1{eps <= x}].
  [[nodiscard]] double h(double x) const;

  [[nodiscard]] double draw(RngStream& rng) const;
  void fill(RngStream& rng, std::span<double> out) const;

 private:
  explicit ErrorDistribution(std::variant<NormalErrors, LaplaceErrors, EmpiricalErrors> kind) : kind_(std::move(kind)) {}

  std::variant<NormalErrors, LaplaceErrors, EmpiricalErrors> kind_;
};

/// Standard normal helpers.
[[nodiscard]] double normal_cdf(double x) noexcept;
[[nodiscard]] double normal_pdf(double x) noexcept;
[[nodiscard]] double normal_quantile(double p);

}  // namespace gpi
