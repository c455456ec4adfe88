#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpi/distributions.hpp"
#include "gpi/intervals.hpp"

namespace gpi {

struct DesignSpec {
  enum class Kind { StandardNormalIID, FromFile };
  Kind kind = Kind::StandardNormalIID;
  std::uint64_t seed = 0;
  std::filesystem::path path;
  /// Replace column 0 by ones (StandardNormalIID only).
  bool intercept_column = false;
};

struct SimConfig {
  Eigen::Index n = 0;
  Eigen::VectorXd beta;
  DesignSpec design;
  Eigen::VectorXd xf;
  ErrorDistribution dist = ErrorDistribution::normal(1.0);
  std::vector<Method> methods;
  double alpha = 0.05;
  double gamma = 0.15;
  std::size_t replications = 0;
  BootstrapConfig bootstrap;
  std::vector<double> coverage_quantile_probs{0.25, 0.45, 0.65, 0.85};
  std::uint64_t master_seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
};

/// The 15-coefficient benchmark: beta = (1, 0.5, -1, -0.5, 0, ...),
/// x_f,i = 0.1 i, Gaussian design drawn once from design_seed.
[[nodiscard]] SimConfig experiment_model(Eigen::Index n, ErrorDistribution dist, std::uint64_t design_seed);
[[nodiscard]] Eigen::VectorXd experiment_beta();
[[nodiscard]] Eigen::VectorXd experiment_xf();

struct MethodReport {
  Method method = Method::RB;
  std::vector<double> coverage_quantiles;
  double guarantee_level = 0.0;
  double mean_half_width = 0.0;
  std::vector<double> coverages;  // indexed by replication
  std::optional<double> mean_d_hat;
  std::size_t level_clipped_count = 0;
  std::optional<std::string> failure;
};

struct SimulationReport {
  SimConfig config;
  std::vector<MethodReport> methods;
  std::string generator;
  double wall_time_seconds = 0.0;

  [[nodiscard]] const MethodReport* find(Method m) const noexcept;
};

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
};

/// P(|eps - delta| <= c) = F(delta + c) - F(delta - c).
[[nodiscard]] double conditional_coverage(const ErrorDistribution& dist, double delta, double c);

/// n x p i.i.d. N(0,1) matrix, deterministic in seed.
[[nodiscard]] Eigen::MatrixXd generate_experiment_design(Eigen::Index p, Eigen::Index n, std::uint64_t seed,
                                                         bool intercept_column = false);

/// Inf-definition quantile of coverages at each prob.
[[nodiscard]] std::vector<double> coverage_quantiles(std::span<const double> coverages, std::span<const double> probs);

/// Fraction of coverages >= 1 - alpha.
[[nodiscard]] double guarantee_level(std::span<const double> coverages, double alpha);

/// Equal-width bins over [0, 1]; 1.0 lands in the last bin.
[[nodiscard]] std::vector<HistogramBin> coverage_histogram(std::span<const double> coverages, double bin_width = 0.0025);

/// Runs cfg.replications independent replications on one fixed design.
/// Replication r draws from RngStream(master_seed, 0).substream(r), so the
/// report does not depend on exec or the thread count.
[[nodiscard]] SimulationReport run_experiment(const SimConfig& cfg, Execution exec = Execution::Parallel);

}  // namespace gpi
