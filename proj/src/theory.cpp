#include "gpi/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gpi/errors.hpp"

namespace gpi {
namespace {

void require_analytic(const ErrorDistribution& dist) {
  if (!dist.is_analytic()) {
    throw Error(ErrorKind::InvalidArgument, "this quantity needs an analytic error law (normal or laplace)");
  }
}

void require_level(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw Error(ErrorKind::AlphaOutOfRange, std::string(name) + " must lie in (0, 1)");
}

template <typename Body>
void for_each_draw(std::size_t count, Execution exec, Body&& body) {
  if (exec == Execution::Serial) {
    for (std::size_t d = 0; d < count; ++d) body(d);
    return;
  }
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t d = 0; d < n; ++d) body(static_cast<std::size_t>(d));
}

}  // namespace

double h_function(const ErrorDistribution& dist, double x) { return dist.h(x); }

double variance_v(const TheoryContext& ctx, double x, double z) {
  require_analytic(ctx.dist);
  const auto& d = ctx.dist;
  const double fx = d.pdf(x);
  const double fz = d.pdf(z);
  const double qaa = ctx.summary.quad_aa;
  const double qab = ctx.summary.quad_ab;
  return d.variance() * fx * fz * (qaa + 1.0 - 2.0 * qab) - (fx * d.h(z) + fz * d.h(x)) * (qab - 1.0) +
         d.cdf(std::min(x, z)) - d.cdf(x) * d.cdf(z);
}

double u_function(const TheoryContext& ctx, double x) {
  if (!(x > 0.0)) throw Error(ErrorKind::InvalidArgument, "U(x) is defined for x > 0");
  const double u = variance_v(ctx, x, x) + variance_v(ctx, -x, -x) - 2.0 * variance_v(ctx, x, -x);
  if (u < -1e-10) {
    throw Error(ErrorKind::NonPositiveU, "U(" + std::to_string(x) + ") = " + std::to_string(u) + " < 0");
  }
  return std::max(u, 0.0);
}

double chi_square1_cdf(double t) noexcept {
  if (!(t > 0.0)) return 0.0;
  return std::erf(std::sqrt(0.5 * t));
}

double chi_square1_quantile(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorKind::AlphaOutOfRange, "chi-square quantile needs p in [0, 1)");
  if (p == 0.0) return 0.0;
  const double z = normal_quantile(0.5 + 0.5 * p);
  return z * z;
}

double gaussian_naive_guarantee(double alpha) {
  require_level(alpha, "alpha");
  const double d = normal_quantile(1.0 - alpha / 2.0);
  const double density = normal_pdf(d);
  const double second = -d * density;  // Phi''(d)
  return chi_square1_cdf(density * d / -second);
}

double gaussian_correction(double alpha, double gamma, double quad_aa, Eigen::Index n) {
  require_level(alpha, "alpha");
  require_level(gamma, "gamma");
  if (n <= 0) throw Error(ErrorKind::InvalidArgument, "n must be positive");
  const double d = normal_quantile(1.0 - alpha / 2.0);
  const double density = normal_pdf(d);
  const double second = -d * density;
  const double leverage = quad_aa / static_cast<double>(n);
  return -second * leverage * chi_square1_quantile(1.0 - gamma) / (2.0 * density);
}

PredictionInterval gaussian_naive_interval(double alpha, double sigma, const DesignSummary& summary,
                                           double beta_hat_xf) {
  require_level(alpha, "alpha");
  const double leverage = summary.quad_aa / static_cast<double>(summary.n);
  PredictionInterval pi;
  pi.center = beta_hat_xf;
  pi.half_width = sigma * normal_quantile(1.0 - alpha / 2.0) * std::sqrt(1.0 + leverage);
  pi.lower = pi.center - pi.half_width;
  pi.upper = pi.center + pi.half_width;
  pi.nominal_alpha = alpha;
  pi.adjusted_level = 1.0 - alpha;
  pi.method = Method::GaussianNaive;
  return pi;
}

PredictionInterval gaussian_corrected_interval(double alpha, double gamma, double sigma, const DesignSummary& summary,
                                               double beta_hat_xf) {
  const double c = gaussian_correction(alpha, gamma, summary.quad_aa, summary.n);
  PredictionInterval pi;
  pi.center = beta_hat_xf;
  pi.lower = beta_hat_xf + sigma * (normal_quantile(alpha / 2.0) - c);
  pi.upper = beta_hat_xf + sigma * (normal_quantile(1.0 - alpha / 2.0) + c);
  pi.half_width = 0.5 * (pi.upper - pi.lower);
  pi.nominal_alpha = alpha;
  pi.nominal_gamma = gamma;
  pi.adjusted_level = 1.0 - alpha;
  pi.d_hat = c;
  pi.method = Method::GaussianCorrected;
  return pi;
}

Eigen::MatrixXd sample_error_process(const TheoryContext& ctx, const Eigen::MatrixXd& x, std::size_t n_draws,
                                     std::span<const double> x_grid, const RngStream& rng,
                                     const ErrorProcessOptions& options) {
  require_analytic(ctx.dist);
  if (options.nested_replicates == 0) throw Error(ErrorKind::InvalidArgument, "nested bootstrap size must be >= 1");
  const LinearDesign design(x);
  const Eigen::VectorXd w = design.projection_weights(ctx.summary.xf);
  const auto n = static_cast<std::size_t>(design.n());
  const double nd = static_cast<double>(n);
  const double root_n = std::sqrt(nd);
  const std::size_t grid = x_grid.size();
  const std::size_t inner = options.nested_replicates;

  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_draws), static_cast<Eigen::Index>(grid));
  for_each_draw(n_draws, options.exec, [&](std::size_t d) {
    RngStream draw_rng = rng.substream(d);
    Eigen::VectorXd eps(static_cast<Eigen::Index>(n));
    ctx.dist.fill(draw_rng, std::span<double>(eps.data(), n));

    // beta = 0 without loss of generality: beta_hat - beta = solve(eps).
    const Eigen::VectorXd beta_err = design.solve(eps);
    const double delta = ctx.summary.xf.dot(beta_err);
    Eigen::VectorXd raw = eps - design.x() * beta_err;
    std::vector<double> pool(raw.data(), raw.data() + n);
    const double mean = raw.mean();
    for (auto& v : pool) v -= mean;
    std::sort(pool.begin(), pool.end());

    std::vector<double> g(grid, 0.0);
    for (std::size_t k = 0; k < inner; ++k) {
      double shift = 0.0;
      for (std::size_t i = 0; i < n; ++i) shift += w[static_cast<Eigen::Index>(i)] * pool[draw_rng.uniform_index(n)];
      // |eps_f - shift| <= t  <=>  shift - t <= eps_f <= shift + t
      for (std::size_t j = 0; j < grid; ++j) {
        const double t = x_grid[j];
        const auto lo = std::lower_bound(pool.begin(), pool.end(), shift - t);
        const auto hi = std::upper_bound(pool.begin(), pool.end(), shift + t);
        g[j] += static_cast<double>(hi - lo) / nd;
      }
    }
    for (std::size_t j = 0; j < grid; ++j) {
      const double t = x_grid[j];
      const double truth = ctx.dist.cdf(t + delta) - ctx.dist.cdf(-t + delta);
      out(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) =
          root_n * (truth - g[j] / static_cast<double>(inner));
    }
  });
  return out;
}

Eigen::MatrixXd sample_limit_process(const TheoryContext& ctx, const Eigen::MatrixXd& x, std::size_t n_draws,
                                     std::span<const double> x_grid, const RngStream& rng, Execution exec) {
  require_analytic(ctx.dist);
  const LinearDesign design(x);
  const Eigen::VectorXd w = design.projection_weights(ctx.summary.xf);
  const auto n = static_cast<std::size_t>(design.n());
  const double nd = static_cast<double>(n);
  const double root_n = std::sqrt(nd);
  const std::size_t grid = x_grid.size();

  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_draws), static_cast<Eigen::Index>(grid));
  for_each_draw(n_draws, exec, [&](std::size_t d) {
    RngStream draw_rng = rng.substream(d);
    Eigen::VectorXd eps(static_cast<Eigen::Index>(n));
    ctx.dist.fill(draw_rng, std::span<double>(eps.data(), n));
    const double t = w.dot(eps) - eps.mean();
    for (std::size_t j = 0; j < grid; ++j) {
      const double xj = x_grid[j];
      const double below = static_cast<double>((eps.array() <= xj).count());
      const double empirical = (below - nd * ctx.dist.cdf(xj)) / root_n;
      out(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) = root_n * ctx.dist.pdf(xj) * t - empirical;
    }
  });
  return out;
}

double ks_distance_normal(std::span<const double> draws, double variance) {
  if (draws.empty()) throw Error(ErrorKind::InvalidArgument, "KS distance of an empty sample");
  if (!(variance > 0.0)) throw Error(ErrorKind::InvalidArgument, "KS reference variance must be > 0");
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(variance);
  const double m = static_cast<double>(sorted.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf(sorted[i] / sd);
    dist = std::max({dist, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return dist;
}

}  // namespace gpi
