#include "gpi/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpi/empirical.hpp"
#include "gpi/errors.hpp"

namespace gpi {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::RB: return "RB";
    case Method::MFMB: return "MFMB";
    case Method::RBUG: return "RBUG";
    case Method::PRBUG: return "PRBUG";
    case Method::GaussianNaive: return "GAUSSIAN_P1";
    case Method::GaussianCorrected: return "GAUSSIAN_P2";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "rb") return Method::RB;
  if (lower == "mfmb" || lower == "mf/mb") return Method::MFMB;
  if (lower == "rbug") return Method::RBUG;
  if (lower == "prbug") return Method::PRBUG;
  return std::nullopt;
}

ResidualType residual_type_of(Method m) noexcept {
  return (m == Method::MFMB || m == Method::PRBUG) ? ResidualType::Predictive : ResidualType::Fitted;
}

bool is_guaranteed(Method m) noexcept { return m == Method::RBUG || m == Method::PRBUG; }

void BootstrapConfig::validate() const {
  if (b_roots < kMinReplicates || b_adjust < kMinReplicates || b_mc < kMinReplicates) {
    throw Error(ErrorKind::InvalidConfig, "B, B1 and B2 must each be >= " + std::to_string(kMinReplicates));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidConfig, "alpha must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::InvalidConfig, "gamma must lie in (0, 1)");
}

ResamplingPlan ResamplingPlan::make(const FittedModel& model, const Eigen::VectorXd& xf, ResidualType type) {
  ResamplingPlan plan;
  const Eigen::VectorXd pool = type == ResidualType::Fitted ? model.centered_residuals : predictive_residuals(model);
  const Eigen::VectorXd w = model.design->projection_weights(xf);
  plan.pool.assign(pool.data(), pool.data() + pool.size());
  plan.weights.assign(w.data(), w.data() + w.size());
  plan.center = xf.dot(model.beta_hat);
  return plan;
}

namespace kernels {
namespace {

template <typename Body>
void for_each_replicate(std::size_t count, Execution exec, Body&& body) {
  if (exec == Execution::Serial) {
    for (std::size_t b = 0; b < count; ++b) body(b);
    return;
  }
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < n; ++b) body(static_cast<std::size_t>(b));
}

}  // namespace

void prediction_roots(const ResamplingPlan& plan, const RngStream& base, std::span<double> out, Execution exec) {
  const std::size_t n = plan.n();
  const double* pool = plan.pool.data();
  const double* w = plan.weights.data();
  for_each_replicate(out.size(), exec, [&](std::size_t b) {
    RngStream rng = base.substream(b);
    double shift = 0.0;
    for (std::size_t i = 0; i < n; ++i) shift += w[i] * pool[rng.uniform_index(n)];
    const double future = pool[rng.uniform_index(n)];
    out[b] = future - shift;
  });
}

void adjustment_statistics(const ResamplingPlan& plan, double c_hat, std::size_t b_mc, const RngStream& outer,
                           const RngStream& mc, std::span<double> out, Execution exec) {
  const std::size_t n = plan.n();
  const double* pool = plan.pool.data();
  const double* w = plan.weights.data();
  const double nd = static_cast<double>(n);
  const double root_n = std::sqrt(nd);
  const double mc_count = static_cast<double>(b_mc);
  for_each_replicate(out.size(), exec, [&](std::size_t b1) {
    RngStream rng = outer.substream(b1);
    double projected = 0.0;
    double total = 0.0;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = pool[rng.uniform_index(n)];
      projected += w[i] * e;
      total += e;
      inside += std::abs(e) <= c_hat ? 1U : 0U;
    }
    // zeta = x_f'beta + eps - x_f'beta_dagger + mean(e*) = eps + shift
    const double shift = total / nd - projected;
    RngStream mc_rng = mc.substream(b1);
    std::size_t inside_mc = 0;
    for (std::size_t j = 0; j < b_mc; ++j) {
      const double zeta = pool[mc_rng.uniform_index(n)] + shift;
      inside_mc += std::abs(zeta) <= c_hat ? 1U : 0U;
    }
    out[b1] = root_n * (static_cast<double>(inside) / nd - static_cast<double>(inside_mc) / mc_count);
  });
}

}  // namespace kernels

double adjustment_statistic(std::span<const double> e_star, std::span<const double> zeta, double c_hat) {
  if (e_star.empty() || zeta.empty()) throw Error(ErrorKind::InvalidArgument, "empty adjustment inputs");
  const auto within = [c_hat](double v) { return std::abs(v) <= c_hat; };
  const double n = static_cast<double>(e_star.size());
  const double lhs = static_cast<double>(std::count_if(e_star.begin(), e_star.end(), within)) / n;
  const double rhs = static_cast<double>(std::count_if(zeta.begin(), zeta.end(), within)) / static_cast<double>(zeta.size());
  return std::sqrt(n) * (lhs - rhs);
}

std::vector<double> bootstrap_roots(const FittedModel& model, const Eigen::VectorXd& xf, const BootstrapConfig& cfg,
                                    const RngStream& rng, Execution exec) {
  cfg.validate();
  const auto plan = ResamplingPlan::make(model, xf, cfg.residual_type);
  std::vector<double> roots(cfg.b_roots);
  kernels::prediction_roots(plan, rng, roots, exec);
  return roots;
}

std::vector<double> sorted_abs(std::span<const double> roots) {
  std::vector<double> out(roots.size());
  std::transform(roots.begin(), roots.end(), out.begin(), [](double r) { return std::abs(r); });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> adjustment_samples(const FittedModel& model, const Eigen::VectorXd& xf, double c_hat,
                                       const BootstrapConfig& cfg, const RngStream& rng, Execution exec) {
  cfg.validate();
  const auto plan = ResamplingPlan::make(model, xf, cfg.residual_type);
  std::vector<double> p_star(cfg.b_adjust);
  kernels::adjustment_statistics(plan, c_hat, cfg.b_mc, rng.substream(kAdjustOuterTag),
                                 rng.substream(kAdjustMonteCarloTag), p_star, exec);
  return p_star;
}

double guarantee_adjustment(const FittedModel& model, const Eigen::VectorXd& xf, double c_hat,
                            const BootstrapConfig& cfg, const RngStream& rng, Execution exec) {
  const auto p_star = adjustment_samples(model, xf, c_hat, cfg, rng, exec);
  return quantile(Sample(p_star), 1.0 - cfg.gamma);
}

std::pair<double, bool> adjusted_level(double alpha, double d_hat, std::size_t n, std::size_t b_roots) {
  const double raw = 1.0 - alpha + d_hat / std::sqrt(static_cast<double>(n));
  const double lo = 1.0 / static_cast<double>(b_roots);
  if (raw > 1.0) return {1.0, true};
  if (raw < lo) return {lo, true};
  return {raw, false};
}

namespace {

PredictionInterval symmetric(double center, double half_width) {
  PredictionInterval pi;
  pi.center = center;
  pi.half_width = half_width;
  pi.lower = center - half_width;
  pi.upper = center + half_width;
  return pi;
}

}  // namespace

IntervalPair bootstrap_interval_pair(const FittedModel& model, const Eigen::VectorXd& xf, const BootstrapConfig& cfg,
                                     const RngStream& rng, bool with_adjusted, Execution exec) {
  const auto roots = sorted_abs(bootstrap_roots(model, xf, cfg, rng.substream(kRootsStreamTag), exec));
  const double center = xf.dot(model.beta_hat);
  const bool fitted = cfg.residual_type == ResidualType::Fitted;
  const double c_hat = quantile_sorted(roots, 1.0 - cfg.alpha);

  IntervalPair out{symmetric(center, c_hat), std::nullopt};
  out.unadjusted.nominal_alpha = cfg.alpha;
  out.unadjusted.adjusted_level = 1.0 - cfg.alpha;
  out.unadjusted.method = fitted ? Method::RB : Method::MFMB;
  if (!with_adjusted) return out;

  const double d_hat = guarantee_adjustment(model, xf, c_hat, cfg, rng.substream(kAdjustStreamTag), exec);
  const auto [level, clipped] = adjusted_level(cfg.alpha, d_hat, static_cast<std::size_t>(model.n()), cfg.b_roots);
  auto pi = symmetric(center, quantile_sorted(roots, level));
  pi.nominal_alpha = cfg.alpha;
  pi.nominal_gamma = cfg.gamma;
  pi.adjusted_level = level;
  pi.d_hat = d_hat;
  pi.level_clipped = clipped;
  pi.method = fitted ? Method::RBUG : Method::PRBUG;
  out.adjusted = pi;
  return out;
}

PredictionInterval rb_interval(const FittedModel& model, const Eigen::VectorXd& xf, const BootstrapConfig& cfg,
                               const RngStream& rng, Execution exec) {
  return bootstrap_interval_pair(model, xf, cfg, rng, false, exec).unadjusted;
}

PredictionInterval rbug_interval(const FittedModel& model, const Eigen::VectorXd& xf, const BootstrapConfig& cfg,
                                 const RngStream& rng, Execution exec) {
  return *bootstrap_interval_pair(model, xf, cfg, rng, true, exec).adjusted;
}

PredictionInterval predict_interval(const FittedModel& model, const Eigen::VectorXd& xf, Method method,
                                    BootstrapConfig cfg, Execution exec) {
  cfg.residual_type = residual_type_of(method);
  const RngStream rng(cfg.seed, 0);
  return is_guaranteed(method) ? rbug_interval(model, xf, cfg, rng, exec) : rb_interval(model, xf, cfg, rng, exec);
}

}  // namespace gpi
