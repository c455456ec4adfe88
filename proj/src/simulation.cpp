#include "gpi/simulation.hpp"

#include <algorithm>
#include <array>
#include <boost/random/normal_distribution.hpp>
#include <chrono>
#include <cmath>
#include <memory>
#include <string>

#include "gpi/dataset_csv.hpp"
#include "gpi/empirical.hpp"
#include "gpi/errors.hpp"
#include "gpi/model_core.hpp"

namespace gpi {
namespace {

constexpr std::uint64_t kDesignStream = 0x6465'7369'676eULL;  // "design"
constexpr std::uint64_t kErrorsTag = 1;
constexpr std::uint64_t kFittedPoolTag = 2;
constexpr std::uint64_t kPredictivePoolTag = 3;

constexpr std::size_t kMethodSlots = 4;

std::size_t slot(Method m) { return static_cast<std::size_t>(m); }

bool is_bootstrap_method(Method m) {
  return m == Method::RB || m == Method::MFMB || m == Method::RBUG || m == Method::PRBUG;
}

void invalid(const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); }

struct ReplicationResult {
  std::array<double, kMethodSlots> half_width{};
  std::array<double, kMethodSlots> coverage{};
  std::array<double, kMethodSlots> d_hat{};
  std::array<bool, kMethodSlots> clipped{};
  std::array<std::string, kMethodSlots> error;
};

Eigen::MatrixXd build_design(const SimConfig& cfg) {
  if (cfg.design.kind == DesignSpec::Kind::FromFile) {
    Eigen::MatrixXd x = read_design_csv(cfg.design.path);
    if (x.rows() != cfg.n || x.cols() != cfg.beta.size()) {
      invalid("design file " + cfg.design.path.string() + " is " + std::to_string(x.rows()) + "x" +
              std::to_string(x.cols()) + ", config expects " + std::to_string(cfg.n) + "x" +
              std::to_string(cfg.beta.size()));
    }
    return x;
  }
  return generate_experiment_design(cfg.beta.size(), cfg.n, cfg.design.seed, cfg.design.intercept_column);
}

}  // namespace

void SimConfig::validate() const {
  const Eigen::Index p = beta.size();
  if (p < 1) invalid("beta must be non-empty");
  if (n <= p) invalid("need n > p (n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");
  if (xf.size() != p) invalid("xf must have the same length as beta");
  if (!beta.allFinite() || !xf.allFinite()) invalid("beta and xf must be finite");
  if (methods.empty()) invalid("at least one method is required");
  for (Method m : methods) {
    if (!is_bootstrap_method(m)) invalid("unsupported method " + std::string(to_string(m)));
  }
  if (!(alpha > 0.0 && alpha < 1.0)) invalid("alpha must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma < 1.0)) invalid("gamma must lie in (0, 1)");
  if (replications < 1) invalid("replications must be >= 1");
  if (coverage_quantile_probs.empty()) invalid("coverage_quantile_probs must be non-empty");
  for (std::size_t i = 0; i < coverage_quantile_probs.size(); ++i) {
    const double q = coverage_quantile_probs[i];
    if (!(q > 0.0 && q < 1.0)) invalid("coverage quantile probabilities must lie in (0, 1)");
    if (i > 0 && !(q > coverage_quantile_probs[i - 1])) invalid("coverage quantile probabilities must ascend");
  }
  if (!dist.is_analytic()) invalid("simulation needs an analytic error law");
  if (design.kind == DesignSpec::Kind::FromFile && design.path.empty()) invalid("design file path is empty");
  try {
    BootstrapConfig b = bootstrap;
    b.alpha = alpha;
    b.gamma = gamma;
    b.validate();
  } catch (const Error& e) {
    invalid(e.what());
  }
}

Eigen::VectorXd experiment_beta() {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(15);
  beta.head(4) << 1.0, 0.5, -1.0, -0.5;
  return beta;
}

Eigen::VectorXd experiment_xf() {
  Eigen::VectorXd xf(15);
  for (Eigen::Index i = 0; i < xf.size(); ++i) xf(i) = 0.1 * static_cast<double>(i);
  return xf;
}

SimConfig experiment_model(Eigen::Index n, ErrorDistribution dist, std::uint64_t design_seed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.beta = experiment_beta();
  cfg.xf = experiment_xf();
  cfg.design.seed = design_seed;
  cfg.dist = std::move(dist);
  cfg.methods = {Method::RB, Method::MFMB, Method::RBUG, Method::PRBUG};
  return cfg;
}

const MethodReport* SimulationReport::find(Method m) const noexcept {
  for (const auto& r : methods) {
    if (r.method == m) return &r;
  }
  return nullptr;
}

double conditional_coverage(const ErrorDistribution& dist, double delta, double c) {
  if (!(c >= 0.0)) throw Error(ErrorKind::InvalidArgument, "half-width must be >= 0");
  if (c == 0.0) return 0.0;
  return dist.cdf(delta + c) - dist.cdf(delta - c);
}

Eigen::MatrixXd generate_experiment_design(Eigen::Index p, Eigen::Index n, std::uint64_t seed, bool intercept_column) {
  if (p < 1 || n <= p) throw Error(ErrorKind::InvalidArgument, "need n > p >= 1");
  RngStream rng(seed, kDesignStream);
  boost::random::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = normal(rng);
  }
  if (intercept_column) x.col(0).setOnes();
  return x;
}

std::vector<double> coverage_quantiles(std::span<const double> coverages, std::span<const double> probs) {
  if (coverages.empty()) throw Error(ErrorKind::InvalidArgument, "no coverages to summarise");
  std::vector<double> sorted(coverages.begin(), coverages.end());
  std::stable_sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(probs.size());
  for (double q : probs) out.push_back(quantile_sorted(sorted, q));
  return out;
}

double guarantee_level(std::span<const double> coverages, double alpha) {
  if (coverages.empty()) throw Error(ErrorKind::InvalidArgument, "no coverages to summarise");
  const double target = 1.0 - alpha;
  const auto hits = std::count_if(coverages.begin(), coverages.end(), [target](double c) { return c >= target; });
  return static_cast<double>(hits) / static_cast<double>(coverages.size());
}

std::vector<HistogramBin> coverage_histogram(std::span<const double> coverages, double bin_width) {
  if (!(bin_width > 0.0 && bin_width <= 1.0)) throw Error(ErrorKind::InvalidArgument, "bin width must lie in (0, 1]");
  const auto bins = static_cast<std::size_t>(std::llround(1.0 / bin_width));
  const double nb = static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    out[k].low = static_cast<double>(k) / nb;
    out[k].high = static_cast<double>(k + 1) / nb;
  }
  for (double c : coverages) {
    const double clamped = std::clamp(c, 0.0, 1.0);
    const auto k = std::min(static_cast<std::size_t>(clamped * nb), bins - 1);
    ++out[k].count;
  }
  return out;
}

SimulationReport run_experiment(const SimConfig& cfg, Execution exec) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  const auto design = std::make_shared<const LinearDesign>(build_design(cfg));
  const Eigen::VectorXd mean_response = design->x() * cfg.beta;
  const auto n = static_cast<std::size_t>(cfg.n);
  const RngStream master(cfg.master_seed, 0);

  std::array<bool, kMethodSlots> wanted{};
  for (Method m : cfg.methods) wanted[slot(m)] = true;
  const bool fitted_pool = wanted[slot(Method::RB)] || wanted[slot(Method::RBUG)];
  const bool predictive_pool = wanted[slot(Method::MFMB)] || wanted[slot(Method::PRBUG)];

  BootstrapConfig boot = cfg.bootstrap;
  boot.alpha = cfg.alpha;
  boot.gamma = cfg.gamma;

  std::vector<ReplicationResult> results(cfg.replications);

  const auto replicate = [&](std::size_t r) {
    ReplicationResult& out = results[r];
    const RngStream rep = master.substream(r);
    const auto record_pool = [&](const FittedModel& model, double delta, ResidualType type, std::uint64_t tag,
                                 Method plain, Method adjusted) {
      if (!wanted[slot(plain)] && !wanted[slot(adjusted)]) return;
      try {
        BootstrapConfig b = boot;
        b.residual_type = type;
        const auto pair = bootstrap_interval_pair(model, cfg.xf, b, rep.substream(tag), wanted[slot(adjusted)],
                                                  Execution::Serial);
        out.half_width[slot(plain)] = pair.unadjusted.half_width;
        out.coverage[slot(plain)] = conditional_coverage(cfg.dist, delta, pair.unadjusted.half_width);
        if (pair.adjusted) {
          const auto& pi = *pair.adjusted;
          out.half_width[slot(adjusted)] = pi.half_width;
          out.coverage[slot(adjusted)] = conditional_coverage(cfg.dist, delta, pi.half_width);
          out.d_hat[slot(adjusted)] = pi.d_hat.value_or(0.0);
          out.clipped[slot(adjusted)] = pi.level_clipped;
        }
      } catch (const std::exception& e) {
        out.error[slot(plain)] = e.what();
        out.error[slot(adjusted)] = e.what();
      }
    };

    try {
      RngStream err_rng = rep.substream(kErrorsTag);
      Eigen::VectorXd eps(cfg.n);
      cfg.dist.fill(err_rng, std::span<double>(eps.data(), n));
      const FittedModel model = fit_ols(design, mean_response + eps);
      const double delta = cfg.xf.dot(model.beta_hat - cfg.beta);
      if (fitted_pool) record_pool(model, delta, ResidualType::Fitted, kFittedPoolTag, Method::RB, Method::RBUG);
      if (predictive_pool) {
        record_pool(model, delta, ResidualType::Predictive, kPredictivePoolTag, Method::MFMB, Method::PRBUG);
      }
    } catch (const std::exception& e) {
      for (auto& msg : out.error) msg = e.what();
    }
  };

  if (exec == Execution::Serial) {
    for (std::size_t r = 0; r < cfg.replications; ++r) replicate(r);
  } else {
    const auto count = static_cast<std::ptrdiff_t>(cfg.replications);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t r = 0; r < count; ++r) replicate(static_cast<std::size_t>(r));
  }

  SimulationReport report;
  report.config = cfg;
  report.generator = std::string(RngStream::generator_id());

  std::vector<Method> order = cfg.methods;
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  for (Method m : order) {
    MethodReport mr;
    mr.method = m;
    const std::size_t s = slot(m);
    for (std::size_t r = 0; r < cfg.replications; ++r) {
      if (!results[r].error[s].empty()) {
        mr.failure = "replication " + std::to_string(r) + ": " + results[r].error[s];
        break;
      }
    }
    if (!mr.failure) {
      mr.coverages.reserve(cfg.replications);
      double width_sum = 0.0;
      double d_sum = 0.0;
      for (const auto& res : results) {
        mr.coverages.push_back(res.coverage[s]);
        width_sum += res.half_width[s];
        d_sum += res.d_hat[s];
        mr.level_clipped_count += res.clipped[s] ? 1U : 0U;
      }
      const double reps = static_cast<double>(cfg.replications);
      mr.mean_half_width = width_sum / reps;
      if (is_guaranteed(m)) mr.mean_d_hat = d_sum / reps;
      mr.guarantee_level = guarantee_level(mr.coverages, cfg.alpha);
      mr.coverage_quantiles = coverage_quantiles(mr.coverages, cfg.coverage_quantile_probs);
    }
    report.methods.push_back(std::move(mr));
  }

  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace gpi
