#pragma once

#include <Eigen/Dense>
#include <span>

#include "gpi/distributions.hpp"
#include "gpi/intervals.hpp"
#include "gpi/model_core.hpp"
#include "gpi/rng.hpp"

namespace gpi {

/// Error law plus the design limits (A, b, x_f) the covariance formulas need.
struct TheoryContext {
  ErrorDistribution dist;
  DesignSummary summary;
};

/// H(x) = E[eps 1{eps <= x}]; zero at both infinities.
[[nodiscard]] double h_function(const ErrorDistribution& dist, double x);

/// Covariance kernel V(x, z) of the limit process. Requires an analytic law.
[[nodiscard]] double variance_v(const TheoryContext& ctx, double x, double z);

/// U(x) = V(x,x) + V(-x,-x) - 2 V(x,-x), the limiting variance of S(x).
/// Values in [-1e-10, 0] are returned as 0; anything more negative throws
/// NonPositiveU.
[[nodiscard]] double u_function(const TheoryContext& ctx, double x);

[[nodiscard]] double chi_square1_cdf(double t) noexcept;
[[nodiscard]] double chi_square1_quantile(double p);

// Known-sigma Gaussian illustration -------------------------------------------

/// Guarantee level of the textbook interval: P(chi2_1 <= phi(d) d / -phi'(d))
/// with d = z_{1-alpha/2}. The argument is identically 1, so ~0.6827.
[[nodiscard]] double gaussian_naive_guarantee(double alpha);

/// Correction c_{1-gamma} added to the standard-normal quantile; quad_aa / n
/// plays x_f^T (X^T X)^{-1} x_f.
[[nodiscard]] double gaussian_correction(double alpha, double gamma, double quad_aa, Eigen::Index n);

/// x_f^T beta_hat +- sigma * z_{1-alpha/2} * sqrt(1 + x_f^T (X^T X)^{-1} x_f).
[[nodiscard]] PredictionInterval gaussian_naive_interval(double alpha, double sigma, const DesignSummary& summary,
                                                         double beta_hat_xf);

/// x_f^T beta_hat +- sigma * (z_{1-alpha/2} + c_{1-gamma}).
[[nodiscard]] PredictionInterval gaussian_corrected_interval(double alpha, double gamma, double sigma,
                                                             const DesignSummary& summary, double beta_hat_xf);

// Process samplers -------------------------------------------------------------

struct ErrorProcessOptions {
  std::size_t nested_replicates = 2000;
  Execution exec = Execution::Parallel;
};

/// Draws of S(x) = sqrt(n) (P*(|y_f - x_f'beta_hat| <= x) - G*(x)) on a grid.
///
/// Each draw simulates eps from ctx.dist on design x, fits, and evaluates the
/// true conditional coverage in closed form. G*(x) comes from a nested
/// residual bootstrap of options.nested_replicates prediction roots; for each
/// nested replicate the single future residual is integrated out exactly
/// against the sorted residual pool, which leaves only the x_f'beta* noise.
/// Draw d uses rng.substream(d). Rows are draws, columns grid points.
[[nodiscard]] Eigen::MatrixXd sample_error_process(const TheoryContext& ctx, const Eigen::MatrixXd& x,
                                                   std::size_t n_draws, std::span<const double> x_grid,
                                                   const RngStream& rng, const ErrorProcessOptions& options = {});

/// Draws of the finite-n Gaussian-limit process
///   M(x) = sqrt(n) F'(x) (w'eps - mean(eps)) - n^{-1/2} sum(1{eps_i <= x} - F(x)),
/// whose covariance is V. Test oracle for variance_v.
[[nodiscard]] Eigen::MatrixXd sample_limit_process(const TheoryContext& ctx, const Eigen::MatrixXd& x,
                                                   std::size_t n_draws, std::span<const double> x_grid,
                                                   const RngStream& rng, Execution exec = Execution::Parallel);

/// sup_y |ECDF(draws)(y) - Phi(y / sqrt(variance))|.
[[nodiscard]] double ks_distance_normal(std::span<const double> draws, double variance);

}  // namespace gpi
