// gpi: bootstrap prediction intervals with a controllable guarantee level.
//
// Exit codes: 0 success, 2 usage error, 3 data/config error, 4 numeric error.

#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gpi/dataset_csv.hpp"
#include "gpi/errors.hpp"
#include "gpi/intervals.hpp"
#include "gpi/model_core.hpp"
#include "gpi/report_io.hpp"
#include "gpi/simulation.hpp"
#include "gpi/theory.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(gpi::ErrorKind kind) {
  using gpi::ErrorKind;
  switch (kind) {
    case ErrorKind::RankDeficient:
    case ErrorKind::LeverageOne:
    case ErrorKind::NonPositiveU:
      return kExitNumeric;
    case ErrorKind::AlphaOutOfRange:
    case ErrorKind::InvalidArgument:
      return kExitUsage;
    case ErrorKind::DimensionMismatch:
    case ErrorKind::InvalidConfig:
    case ErrorKind::DataError:
      return kExitData;
  }
  return kExitData;
}

void configure_threads(std::optional<int> flag) {
  int threads = 0;
  if (flag) {
    threads = *flag;
  } else if (const char* env = std::getenv("GUARANTEE_PI_THREADS"); env != nullptr && *env != '\0') {
    try {
      threads = std::stoi(env);
    } catch (const std::exception&) {
      throw UsageError("GUARANTEE_PI_THREADS must be a positive integer");
    }
  }
  if (threads < 0) throw UsageError("thread count must be positive");
  if (threads > 0) omp_set_num_threads(threads);
}

Eigen::VectorXd parse_vector(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": cannot parse '" + cell + "'");
    }
  }
  if (values.empty()) throw UsageError(std::string(what) + " is empty");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void emit(const std::string& text, const std::string& out_path) {
  std::cout << text;
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw gpi::Error(gpi::ErrorKind::DataError, "cannot write " + out_path);
    out << text;
  }
}

void check_level(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw UsageError(std::string(name) + " must lie in (0, 1)");
}

struct FitArgs {
  std::string data;
  bool intercept = false;
  std::string out;
};

struct PredictArgs {
  std::string data;
  std::string xf;
  std::string method = "rbug";
  double alpha = 0.05;
  double gamma = 0.15;
  std::size_t b = 2500;
  std::size_t b1 = 2500;
  std::size_t b2 = 2500;
  std::uint64_t seed = 0;
  std::optional<int> threads;
  bool intercept = false;
  std::string out;
};

struct OracleArgs {
  double alpha = 0.05;
  double gamma = 0.15;
  double sigma = 1.0;
  long n = 100;
  double quad_aa = 1.0;
  bool gaussian = false;
};

struct SimulateArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::optional<int> threads;
};

struct DiagnoseArgs {
  std::uint64_t seed = 0;
  long n = 2000;
  std::size_t draws = 5000;
  std::size_t inner = 2000;
  std::string grid;
  std::string dist = "normal";
  std::string xf = "1,1";
  std::optional<int> threads;
  std::string out;
};

int run_fit(const FitArgs& a) {
  const auto data = gpi::read_dataset_csv(a.data, a.intercept);
  const auto model = gpi::fit_ols(data);
  emit(gpi::dump_canonical(gpi::to_json(model)), a.out);
  return kExitOk;
}

int run_predict(const PredictArgs& a) {
  configure_threads(a.threads);
  const auto method = gpi::parse_method(a.method);
  if (!method) throw UsageError("--method must be one of rb, mfmb, rbug, prbug");
  check_level(a.alpha, "--alpha");
  check_level(a.gamma, "--gamma");

  const auto data = gpi::read_dataset_csv(a.data, a.intercept);
  Eigen::VectorXd xf = parse_vector(a.xf, "--xf");
  if (a.intercept) {
    Eigen::VectorXd full(xf.size() + 1);
    full << 1.0, xf;
    xf = full;
  }
  if (xf.size() != data.p()) {
    throw UsageError("--xf has " + std::to_string(xf.size()) + " entries (after intercept) but the design has p=" +
                     std::to_string(data.p()));
  }

  gpi::BootstrapConfig cfg;
  cfg.b_roots = a.b;
  cfg.b_adjust = a.b1;
  cfg.b_mc = a.b2;
  cfg.alpha = a.alpha;
  cfg.gamma = a.gamma;
  cfg.seed = a.seed;
  try {
    cfg.validate();
  } catch (const gpi::Error& e) {
    throw UsageError(e.what());
  }

  const auto model = gpi::fit_ols(data);
  const auto pi = gpi::predict_interval(model, xf, *method, cfg);
  auto j = gpi::to_json(pi);
  j["seed"] = a.seed;
  j["bootstrap"] = {{"b", a.b}, {"b1", a.b1}, {"b2", a.b2}};
  j["generator"] = std::string(gpi::RngStream::generator_id());
  emit(gpi::dump_canonical(j), a.out);
  return kExitOk;
}

int run_oracle(const OracleArgs& a) {
  if (!a.gaussian) throw UsageError("oracle values assume Gaussian errors with known sigma; pass --assume-gaussian");
  check_level(a.alpha, "--alpha");
  check_level(a.gamma, "--gamma");
  if (!(a.sigma > 0.0)) throw UsageError("--sigma must be > 0");
  if (a.n <= 0) throw UsageError("--n must be positive");
  if (!(a.quad_aa >= 0.0)) throw UsageError("--quad-aa must be >= 0");

  gpi::DesignSummary summary;
  summary.quad_aa = a.quad_aa;
  summary.n = a.n;
  const auto naive = gpi::gaussian_naive_interval(a.alpha, a.sigma, summary, 0.0);
  const auto corrected = gpi::gaussian_corrected_interval(a.alpha, a.gamma, a.sigma, summary, 0.0);

  gpi::json j;
  j["alpha"] = a.alpha;
  j["gamma"] = a.gamma;
  j["sigma"] = a.sigma;
  j["n"] = a.n;
  j["quad_aa"] = a.quad_aa;
  j["naive_guarantee"] = gpi::gaussian_naive_guarantee(a.alpha);
  j["chi2_quantile"] = gpi::chi_square1_quantile(1.0 - a.gamma);
  j["correction"] = gpi::gaussian_correction(a.alpha, a.gamma, a.quad_aa, a.n);
  j["naive_half_width"] = naive.half_width;
  j["corrected_half_width"] = corrected.half_width;
  std::cout << gpi::dump_canonical(j);
  std::fprintf(stderr, "naive guarantee %.4f | correction %.6g | P1 half-width %.4f | P2 half-width %.4f\n",
               j["naive_guarantee"].get<double>(), j["correction"].get<double>(), naive.half_width,
               corrected.half_width);
  return kExitOk;
}

int run_simulate(const SimulateArgs& a) {
  configure_threads(a.threads);
  auto cfg = gpi::read_sim_config(a.config);
  cfg.master_seed = a.seed;
  const auto report = gpi::run_experiment(cfg);
  const auto files = gpi::write_report_files(report, a.out);
  std::cout << gpi::summary_table(report);
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
  return kExitOk;
}

int run_diagnose(const DiagnoseArgs& a) {
  configure_threads(a.threads);
  if (a.n < 3) throw UsageError("--n must be >= 3");
  if (a.draws < 2 || a.inner < 1) throw UsageError("--draws must be >= 2 and --inner >= 1");

  gpi::ErrorDistribution dist = gpi::ErrorDistribution::normal(1.0);
  if (a.dist == "laplace") {
    dist = gpi::ErrorDistribution::laplace(1.0 / std::sqrt(2.0));
  } else if (a.dist != "normal") {
    throw UsageError("--dist must be normal or laplace");
  }
  std::vector<double> grid;
  if (a.grid.empty()) {
    // P(|eps| <= c) = 0.95
    grid.push_back(a.dist == "normal" ? gpi::normal_quantile(0.975) : -std::log(0.05) / std::sqrt(2.0));
  } else {
    const auto g = parse_vector(a.grid, "--x");
    grid.assign(g.data(), g.data() + g.size());
  }
  const Eigen::VectorXd xf = parse_vector(a.xf, "--xf");
  if (xf.size() != 2) throw UsageError("--xf must have two entries (intercept, slope)");

  // Intercept plus one standard-normal slope column.
  Eigen::MatrixXd x = gpi::generate_experiment_design(2, a.n, a.seed, true);
  gpi::TheoryContext ctx{dist, gpi::design_summary(x, xf)};
  gpi::ErrorProcessOptions opts;
  opts.nested_replicates = a.inner;
  const auto draws = gpi::sample_error_process(ctx, x, a.draws, grid, gpi::RngStream(a.seed, 1), opts);

  gpi::json rows = gpi::json::array();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const Eigen::VectorXd col = draws.col(static_cast<Eigen::Index>(j));
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / static_cast<double>(col.size() - 1);
    const double u = gpi::u_function(ctx, grid[j]);
    rows.push_back({{"x", grid[j]},
                    {"u", u},
                    {"sample_mean", mean},
                    {"sample_variance", var},
                    {"ks_distance", gpi::ks_distance_normal(std::span<const double>(col.data(), col.size()), u)}});
  }
  gpi::json j;
  j["n"] = a.n;
  j["draws"] = a.draws;
  j["nested_replicates"] = a.inner;
  j["dist"] = gpi::to_json(dist);
  j["xf"] = std::vector<double>(xf.data(), xf.data() + xf.size());
  j["quad_aa"] = ctx.summary.quad_aa;
  j["quad_ab"] = ctx.summary.quad_ab;
  j["seed"] = a.seed;
  j["grid"] = rows;
  emit(gpi::dump_canonical(j), a.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bootstrap prediction intervals for linear models with a controllable guarantee level"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit OLS on a CSV dataset and print residual diagnostics as JSON");
  fit->add_option("--data", fit_args.data, "CSV with header; columns x1..xp then y")->required();
  fit->add_flag("--intercept", fit_args.intercept, "Prepend a column of ones");
  fit->add_option("--out", fit_args.out, "Also write the JSON to this file");

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "Bootstrap prediction interval at a new regressor x_f");
  predict->add_option("--data", pa.data, "CSV with header; columns x1..xp then y")->required();
  predict->add_option("--xf", pa.xf, "Comma-separated regressor values (without the intercept)")->required();
  predict->add_option("--method", pa.method, "rb | mfmb | rbug | prbug")->capture_default_str();
  predict->add_option("--alpha", pa.alpha, "1 - nominal coverage")->capture_default_str();
  predict->add_option("--gamma", pa.gamma, "1 - nominal guarantee level")->capture_default_str();
  predict->add_option("--b", pa.b, "Bootstrap roots B")->capture_default_str();
  predict->add_option("--b1", pa.b1, "Adjustment replicates")->capture_default_str();
  predict->add_option("--b2", pa.b2, "Monte Carlo draws per adjustment replicate")->capture_default_str();
  predict->add_option("--seed", pa.seed, "Master seed")->capture_default_str();
  predict->add_option("--threads", pa.threads, "OpenMP threads (default: GUARANTEE_PI_THREADS or all cores)");
  predict->add_flag("--intercept", pa.intercept, "Prepend a column of ones to X and a 1 to x_f");
  predict->add_option("--out", pa.out, "Also write the JSON to this file");

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle", "Closed-form known-sigma Gaussian guarantee and corrected interval");
  oracle->add_option("--alpha", oa.alpha)->capture_default_str();
  oracle->add_option("--gamma", oa.gamma)->capture_default_str();
  oracle->add_option("--sigma", oa.sigma)->capture_default_str();
  oracle->add_option("--n", oa.n)->capture_default_str();
  oracle->add_option("--quad-aa", oa.quad_aa, "x_f' (X'X/n)^{-1} x_f")->capture_default_str();
  oracle->add_flag("--assume-gaussian", oa.gaussian, "Acknowledge the Gaussian known-sigma assumption");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run a seeded Monte Carlo coverage experiment");
  simulate->add_option("--config", sa.config, "Simulation config JSON")->required();
  simulate->add_option("--out", sa.out, "Output directory")->required();
  simulate->add_option("--seed", sa.seed, "Master seed (overrides the config)")->required();
  simulate->add_option("--threads", sa.threads, "OpenMP threads");

  DiagnoseArgs da;
  auto* diagnose = app.add_subcommand("diagnose", "Sample the bootstrap approximation error S(x) against N(0, U(x))");
  diagnose->add_option("--seed", da.seed, "Seed for design and draws")->required();
  diagnose->add_option("--n", da.n)->capture_default_str();
  diagnose->add_option("--draws", da.draws)->capture_default_str();
  diagnose->add_option("--inner", da.inner, "Nested bootstrap size for G*")->capture_default_str();
  diagnose->add_option("--x", da.grid, "Comma-separated grid (default: 0.95 quantile of |eps|)");
  diagnose->add_option("--dist", da.dist, "normal | laplace")->capture_default_str();
  diagnose->add_option("--xf", da.xf, "x_f for the intercept+slope design")->capture_default_str();
  diagnose->add_option("--threads", da.threads, "OpenMP threads");
  diagnose->add_option("--out", da.out, "Also write the JSON to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*fit) return run_fit(fit_args);
    if (*predict) return run_predict(pa);
    if (*oracle) return run_oracle(oa);
    if (*simulate) return run_simulate(sa);
    if (*diagnose) return run_diagnose(da);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const gpi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
