#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gpi/model_core.hpp"
#include "gpi/rng.hpp"

namespace gpi {

enum class ResidualType { Fitted, Predictive };
enum class Method {
  RB,
  MFMB,
  RBUG,
  PRBUG,
  // Known-sigma Gaussian reference intervals; never produced by resampling.
  GaussianNaive,
  GaussianCorrected,
};
enum class Execution { Serial, Parallel };

[[nodiscard]] std::string_view to_string(Method m) noexcept;
[[nodiscard]] std::optional<Method> parse_method(std::string_view name) noexcept;
[[nodiscard]] ResidualType residual_type_of(Method m) noexcept;
[[nodiscard]] bool is_guaranteed(Method m) noexcept;

struct BootstrapConfig {
  std::size_t b_roots = 2500;   // B
  std::size_t b_adjust = 2500;  // outer adjustment replicates
  std::size_t b_mc = 2500;      // Monte Carlo integration draws per outer replicate
  double alpha = 0.05;
  double gamma = 0.15;
  ResidualType residual_type = ResidualType::Fitted;
  std::uint64_t seed = 0;

  static constexpr std::size_t kMinReplicates = 100;

  /// Throws InvalidConfig.
  void validate() const;
};

struct PredictionInterval {
  double center = 0.0;
  double half_width = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double nominal_alpha = 0.0;
  std::optional<double> nominal_gamma;
  double adjusted_level = 0.0;
  Method method = Method::RB;
  std::optional<double> d_hat;
  bool level_clipped = false;
};

// Sub-stream tags. rb_interval and rbug_interval draw their roots from the
// same child, so with one rng they share root vectors.
inline constexpr std::uint64_t kRootsStreamTag = 1;
inline constexpr std::uint64_t kAdjustStreamTag = 2;
inline constexpr std::uint64_t kAdjustOuterTag = 1;
inline constexpr std::uint64_t kAdjustMonteCarloTag = 2;

/// Everything a bootstrap replicate needs, flattened for the hot loops.
///
/// x_f^T beta* = x_f^T beta_hat + w^T eps*, with w the projection weights of
/// the design, so a prediction root is eps*_f - w^T eps* and a replicate costs
/// O(n) instead of a refit.
struct ResamplingPlan {
  std::vector<double> pool;
  std::vector<double> weights;
  double center = 0.0;

  [[nodiscard]] static ResamplingPlan make(const FittedModel& model, const Eigen::VectorXd& xf, ResidualType type);
  [[nodiscard]] std::size_t n() const noexcept { return pool.size(); }
};

namespace kernels {

/// delta*_b for b in [0, out.size()); replicate b draws from base.substream(b).
void prediction_roots(const ResamplingPlan& plan, const RngStream& base, std::span<double> out, Execution exec);

/// p*_{b1} for b1 in [0, out.size()). Replicate b1 draws e* from
/// outer.substream(b1) and its Monte Carlo block from mc.substream(b1).
void adjustment_statistics(const ResamplingPlan& plan, double c_hat, std::size_t b_mc, const RngStream& outer,
                           const RngStream& mc, std::span<double> out, Execution exec);

}  // namespace kernels

/// sqrt(n) * (#{|e*_i| <= c}/n - #{|zeta_j| <= c}/B2), evaluated literally.
[[nodiscard]] double adjustment_statistic(std::span<const double> e_star, std::span<const double> zeta, double c_hat);

/// Prediction roots delta*_1..delta*_B.
[[nodiscard]] std::vector<double> bootstrap_roots(const FittedModel& model, const Eigen::VectorXd& xf,
                                                  const BootstrapConfig& cfg, const RngStream& rng,
                                                  Execution exec = Execution::Parallel);

/// |delta*| sorted ascending; quantiles are read off by rank.
[[nodiscard]] std::vector<double> sorted_abs(std::span<const double> roots);

/// The b_adjust samples p*_{b1}.
[[nodiscard]] std::vector<double> adjustment_samples(const FittedModel& model, const Eigen::VectorXd& xf,
                                                     double c_hat, const BootstrapConfig& cfg, const RngStream& rng,
                                                     Execution exec = Execution::Parallel);

/// d*_{1-gamma}: the 1-gamma inf-quantile of adjustment_samples().
[[nodiscard]] double guarantee_adjustment(const FittedModel& model, const Eigen::VectorXd& xf, double c_hat,
                                          const BootstrapConfig& cfg, const RngStream& rng,
                                          Execution exec = Execution::Parallel);

/// clip(1 - alpha + d_hat / sqrt(n), 1/B, 1); second member reports clipping.
[[nodiscard]] std::pair<double, bool> adjusted_level(double alpha, double d_hat, std::size_t n, std::size_t b_roots);

/// Algorithm-1 interval (RB for fitted residuals, MF/MB for predictive).
[[nodiscard]] PredictionInterval rb_interval(const FittedModel& model, const Eigen::VectorXd& xf,
                                             const BootstrapConfig& cfg, const RngStream& rng,
                                             Execution exec = Execution::Parallel);

/// Interval with adjusted quantile level (RBUG for fitted, PRBUG for predictive).
[[nodiscard]] PredictionInterval rbug_interval(const FittedModel& model, const Eigen::VectorXd& xf,
                                               const BootstrapConfig& cfg, const RngStream& rng,
                                               Execution exec = Execution::Parallel);

/// Both intervals built from one root vector. unadjusted equals rb_interval()
/// and adjusted (when requested) equals rbug_interval() for the same rng.
struct IntervalPair {
  PredictionInterval unadjusted;
  std::optional<PredictionInterval> adjusted;
};

[[nodiscard]] IntervalPair bootstrap_interval_pair(const FittedModel& model, const Eigen::VectorXd& xf,
                                                   const BootstrapConfig& cfg, const RngStream& rng, bool with_adjusted,
                                                   Execution exec = Execution::Parallel);

/// Dispatch on method; rng is RngStream(cfg.seed, 0).
[[nodiscard]] PredictionInterval predict_interval(const FittedModel& model, const Eigen::VectorXd& xf, Method method,
                                                  BootstrapConfig cfg, Execution exec = Execution::Parallel);

}  // namespace gpi
