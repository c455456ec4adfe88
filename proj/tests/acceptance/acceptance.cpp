// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Pass criterion numbers as arguments to run a subset.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gpi/distributions.hpp"
#include "gpi/empirical.hpp"
#include "gpi/intervals.hpp"
#include "gpi/model_core.hpp"
#include "gpi/report_io.hpp"
#include "gpi/simulation.hpp"
#include "gpi/theory.hpp"
#include "oracles.hpp"
#include "process.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using gpi::ErrorDistribution;
using gpi::Method;

namespace {

const std::string kCli = GPI_CLI_PATH;

constexpr std::uint64_t kDesignSeed = 1;
constexpr std::uint64_t kMasterSeed = 1;
constexpr std::size_t kReplications = 2000;
constexpr std::size_t kBootstrap = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Known-sigma Gaussian experiment: intercept-only, beta = 0, sigma = 1.
// Returns the conditional coverage of each interval builder per replication.
std::vector<std::vector<double>> gaussian_known_sigma_coverages(
    std::size_t reps, Eigen::Index n, const std::vector<std::function<gpi::PredictionInterval(
                                          const gpi::DesignSummary&, double)>>& builders) {
  const auto dist = ErrorDistribution::normal(1.0);
  const MatrixXd x = MatrixXd::Ones(n, 1);
  const auto design = std::make_shared<const gpi::LinearDesign>(x);
  const auto summary = gpi::design_summary(x, VectorXd::Ones(1));
  const gpi::RngStream master(kMasterSeed, 7);
  std::vector<std::vector<double>> out(builders.size(), std::vector<double>(reps));
  const auto count = static_cast<std::ptrdiff_t>(reps);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    auto rng = master.substream(static_cast<std::uint64_t>(r));
    VectorXd eps(n);
    dist.fill(rng, std::span<double>(eps.data(), static_cast<std::size_t>(n)));
    const auto model = gpi::fit_ols(design, eps);
    const double center = model.beta_hat(0);
    for (std::size_t k = 0; k < builders.size(); ++k) {
      const auto pi = builders[k](summary, center);
      // y_f = eps_f since beta = 0.
      out[k][static_cast<std::size_t>(r)] = dist.cdf(pi.upper) - dist.cdf(pi.lower);
    }
  }
  return out;
}

Outcome criterion1() {
  const auto start = Clock::now();
  const auto cli = proc::run(kCli + " oracle --assume-gaussian --alpha 0.05");
  double analytic = NAN;
  if (cli.exit_code == 0) analytic = json::parse(cli.out).at("naive_guarantee").get<double>();
  const auto cov = gaussian_known_sigma_coverages(
      100000, 100, {[](const gpi::DesignSummary& s, double c) { return gpi::gaussian_naive_interval(0.05, 1.0, s, c); }});
  const double mc = gpi::guarantee_level(cov[0], 0.05);
  const double secs = seconds_since(start);
  const bool pass = std::abs(analytic - 0.6827) <= 1e-4 && std::abs(mc - 0.683) <= 0.01 && secs < 60.0;
  return {pass, fmt("oracle %.6f (target 0.6827 +- 1e-4), Monte Carlo %.4f (target 0.683 +- 0.01), %.1fs (< 60s)",
                    analytic, mc, secs)};
}

Outcome criterion2() {
  const auto start = Clock::now();
  const std::vector<double> gammas{0.10, 0.15, 0.30};
  std::vector<std::function<gpi::PredictionInterval(const gpi::DesignSummary&, double)>> builders;
  for (double g : gammas) {
    builders.push_back(
        [g](const gpi::DesignSummary& s, double c) { return gpi::gaussian_corrected_interval(0.05, g, 1.0, s, c); });
  }
  const auto cov = gaussian_known_sigma_coverages(100000, 100, builders);
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    const double level = gpi::guarantee_level(cov[k], 0.05);
    pass &= std::abs(level - (1.0 - gammas[k])) <= 0.02;
    detail += fmt("gamma=%.2f: %.4f (target %.2f +- 0.02); ", gammas[k], level, 1.0 - gammas[k]);
  }
  const double secs = seconds_since(start);
  pass &= secs < 180.0;
  return {pass, detail + fmt("%.1fs (< 180s)", secs)};
}

struct TableRow {
  const char* dist;
  Eigen::Index n;
  Method method;
  std::array<double, 4> quantiles;  // percent
  double guarantee;                 // percent
};

const std::vector<TableRow> kTable{
    {"normal", 100, Method::RB, {90.9, 92.5, 93.9, 95.4}, 19.3},
    {"normal", 400, Method::RB, {93.6, 94.3, 95.0, 95.8}, 34.4},
    {"normal", 400, Method::MFMB, {94.6, 95.3, 95.9, 96.5}, 64.5},
    {"normal", 400, Method::RBUG, {95.6, 96.2, 96.7, 97.4}, 87.9},
    {"normal", 400, Method::PRBUG, {96.4, 96.9, 97.3, 97.9}, 96.0},
    {"normal", 1600, Method::RB, {94.4, 94.8, 95.2, 95.2}, 44.3},
    {"normal", 1600, Method::MFMB, {94.6, 95.0, 95.4, 95.8}, 55.3},
    {"normal", 1600, Method::RBUG, {95.2, 95.6, 96.0, 96.4}, 84.4},
    {"normal", 1600, Method::PRBUG, {95.4, 95.8, 96.1, 96.5}, 90.2},
    {"laplace", 1600, Method::RB, {94.4, 94.8, 95.2, 95.7}, 47.5},
    {"laplace", 1600, Method::RBUG, {95.2, 95.6, 95.9, 96.4}, 82.4},
};

// Experiment-model reports keyed by "dist/n", computed once and shared by
// criteria 3 and 4.
std::map<std::string, gpi::SimulationReport> g_reports;
std::map<std::string, double> g_report_seconds;

const gpi::SimulationReport& experiment(const std::string& dist_name, Eigen::Index n) {
  const std::string key = dist_name + "/" + std::to_string(n);
  if (auto it = g_reports.find(key); it != g_reports.end()) return it->second;
  const auto dist = dist_name == "normal" ? ErrorDistribution::normal(1.0)
                                          : ErrorDistribution::laplace(1.0 / std::sqrt(2.0));
  auto cfg = gpi::experiment_model(n, dist, kDesignSeed);
  cfg.methods.clear();
  for (const auto& row : kTable) {
    if (row.dist == dist_name && row.n == n) cfg.methods.push_back(row.method);
  }
  cfg.replications = kReplications;
  cfg.bootstrap.b_roots = cfg.bootstrap.b_adjust = cfg.bootstrap.b_mc = kBootstrap;
  cfg.master_seed = kMasterSeed;
  const auto start = Clock::now();
  auto report = gpi::run_experiment(cfg);
  g_report_seconds[key] = seconds_since(start);
  std::cout << "  [" << key << "] " << fmt("%.1fs", g_report_seconds[key]) << "\n" << gpi::summary_table(report);
  return g_reports.emplace(key, std::move(report)).first->second;
}

const gpi::MethodReport& method_report(const TableRow& row) {
  const auto* m = experiment(row.dist, row.n).find(row.method);
  if (!m || m->failure) throw std::runtime_error("method failed: " + std::string(gpi::to_string(row.method)));
  return *m;
}

Outcome criterion3() {
  bool pass = true;
  std::string detail;
  double previous = -1.0;
  double seconds_1600 = 0.0;
  for (const auto& row : kTable) {
    if (row.method != Method::RB || std::string(row.dist) != "normal") continue;
    const double level = 100.0 * method_report(row).guarantee_level;
    pass &= std::abs(level - row.guarantee) <= 5.0;
    pass &= level > previous;
    previous = level;
    detail += fmt("n=%ld: %.1f%% (target %.1f +- 5); ", static_cast<long>(row.n), level, row.guarantee);
    if (row.n == 1600) seconds_1600 = g_report_seconds["normal/1600"];
  }
  pass &= seconds_1600 < 1800.0;
  return {pass, detail + fmt("strictly increasing required; n=1600 run %.1fs (< 1800s)", seconds_1600)};
}

Outcome criterion4() {
  bool pass = true;
  std::string detail;
  for (const auto& row : kTable) {
    if (!gpi::is_guaranteed(row.method)) continue;
    if (std::string(row.dist) == "laplace" && row.method == Method::PRBUG) continue;
    const auto& m = method_report(row);
    const double level = 100.0 * m.guarantee_level;
    bool row_pass = std::abs(level - row.guarantee) <= 5.0;
    std::string q;
    for (std::size_t i = 0; i < 4; ++i) {
      const double v = 100.0 * m.coverage_quantiles[i];
      row_pass &= std::abs(v - row.quantiles[i]) <= 1.0;
      q += fmt("%s%.2f/%.1f", i ? " " : "", v, row.quantiles[i]);
    }
    pass &= row_pass;
    detail += fmt("%s %s n=%ld: guarantee %.1f%% (target %.1f +- 5), quantiles [%s] (+- 1)%s; ", row.dist,
                  std::string(gpi::to_string(row.method)).c_str(), static_cast<long>(row.n), level, row.guarantee,
                  q.c_str(), row_pass ? "" : " MISS");
  }
  return {pass, detail};
}

Outcome criterion5() {
  const auto start = Clock::now();
  const auto r = proc::run(kCli + " diagnose --seed 1 --n 2000 --draws 5000 --inner 2000 --dist normal");
  const double secs = seconds_since(start);
  if (r.exit_code != 0) return {false, fmt("diagnose exited %d", r.exit_code)};
  const json j = json::parse(r.out);
  const auto& g = j.at("grid")[0];
  const double ks = g.at("ks_distance").get<double>();
  const bool pass = ks < 0.05 && secs < 600.0;
  return {pass, fmt("x=%.6f U=%.6f sample variance=%.6f KS=%.4f (< 0.05), %.1fs (< 600s)", g.at("x").get<double>(),
                    g.at("u").get<double>(), g.at("sample_variance").get<double>(), ks, secs)};
}

double h_quadrature(const ErrorDistribution& dist, double x) {
  const auto integrand = [&](double z) { return z * dist.pdf(z); };
  boost::math::quadrature::exp_sinh<double> tail;
  double value = tail.integrate(integrand, -std::numeric_limits<double>::infinity(), std::min(x, 0.0));
  if (x > 0.0) value += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, x, 15, 1e-14);
  return value;
}

Outcome criterion6() {
  const auto start = Clock::now();
  std::mt19937_64 gen(606);
  std::uniform_int_distribution<int> small(8, 30);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::string detail;
  bool pass = true;

  double worst_loo = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const int n = small(gen);
    const int p = 1 + inst % 4;
    const MatrixXd x = oracle::random_matrix(n, p, 1000 + inst);
    const VectorXd y = oracle::random_vector(n, 5000 + inst);
    const auto model = gpi::fit_ols(gpi::Dataset(x, y));
    auto loo = oracle::loo_residuals(oracle::to_rows(x), {y.data(), y.data() + y.size()});
    double mean = 0.0;
    for (double v : loo) mean += v / n;
    const VectorXd got = gpi::predictive_residuals(model);
    double scale = 1.0;
    for (double v : loo) scale = std::max(scale, std::abs(v - mean));
    for (int i = 0; i < n; ++i) worst_loo = std::max(worst_loo, std::abs(got(i) - (loo[i] - mean)) / scale);
  }
  pass &= worst_loo <= 1e-8;
  detail += fmt("leave-one-out max rel diff %.2e (<= 1e-8); ", worst_loo);

  int quantile_mismatch = 0;
  for (int c = 0; c < 1000; ++c) {
    const int m = 1 + static_cast<int>(unif(gen) * 60);
    std::vector<double> v(m);
    // Coarse grid so that ties occur.
    for (auto& e : v) e = std::round(unif(gen) * 20.0) / 4.0;
    const double alpha = c % 10 == 0 ? static_cast<double>(1 + c % m) / m : std::max(1e-9, unif(gen));
    if (gpi::quantile(gpi::Sample(v), alpha) != oracle::scan_quantile(v, alpha)) ++quantile_mismatch;
  }
  pass &= quantile_mismatch == 0;
  detail += fmt("quantile mismatches %d/1000; ", quantile_mismatch);

  const double hand = gpi::adjustment_statistic(std::vector<double>{0.5, -2.0, 0.3, 0.1},
                                                std::vector<double>{0.4, 1.5}, 1.0);
  pass &= hand == 0.5;
  detail += fmt("hand p* %.17g (exact 0.5); ", hand);

  double worst_eig = INFINITY;
  std::uniform_real_distribution<double> grid_point(-4.0, 4.0);
  for (int g = 0; g < 200; ++g) {
    const auto dist = g % 2 ? ErrorDistribution::normal(0.5 + unif(gen)) : ErrorDistribution::laplace(0.3 + unif(gen));
    MatrixXd x = oracle::random_matrix(50, 3, 9000 + g);
    x.col(0).setOnes();
    const gpi::TheoryContext ctx{dist, gpi::design_summary(x, oracle::random_vector(3, 7000 + g))};
    const std::size_t r = 2 + g % 5;
    std::vector<double> t(r);
    for (auto& v : t) v = grid_point(gen);
    oracle::Matrix gram(r, std::vector<double>(r));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) gram[i][j] = gpi::variance_v(ctx, t[i], t[j]);
    worst_eig = std::min(worst_eig, oracle::min_eigenvalue(gram));
  }
  pass &= worst_eig >= -1e-8;
  detail += fmt("Gram min eigenvalue %.2e (>= -1e-8); ", worst_eig);

  double worst_h = 0.0;
  for (const auto& dist : {ErrorDistribution::normal(1.0), ErrorDistribution::normal(0.6),
                           ErrorDistribution::laplace(1.0 / std::sqrt(2.0)), ErrorDistribution::laplace(1.7)}) {
    for (double x = -4.0; x <= 4.0; x += 0.5) worst_h = std::max(worst_h, std::abs(gpi::h_function(dist, x) - h_quadrature(dist, x)));
  }
  pass &= worst_h <= 1e-8;
  detail += fmt("H vs quadrature max diff %.2e (<= 1e-8); ", worst_h);

  const double secs = seconds_since(start);
  pass &= secs < 10.0;
  return {pass, detail + fmt("%.2fs (< 10s)", secs)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// All files in a simulate output directory, with the wall-time field removed
// from report.json.
std::map<std::string, std::string> simulate_outputs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string text = slurp(entry.path());
    if (entry.path().filename() == "report.json") {
      json j = json::parse(text);
      j["metadata"].erase("wall_time_seconds");
      text = j.dump(2);
    }
    out[entry.path().filename().string()] = text;
  }
  return out;
}

Outcome criterion7() {
  const fs::path dir = fs::temp_directory_path() / "gpi_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::mt19937_64 gen(77);
    std::normal_distribution<double> normal;
    std::ofstream csv(dir / "data.csv");
    csv.precision(17);
    csv << "x1,x2,y\n";
    for (int i = 0; i < 300; ++i) {
      const double a = normal(gen);
      const double b = normal(gen);
      csv << a << ',' << b << ',' << 0.5 + a - 2.0 * b + normal(gen) << '\n';
    }
    std::ofstream(dir / "sim.json") << R"({"preset": "experiment", "n": 100,
      "design": {"kind": "standard_normal_iid", "seed": 4},
      "dist": {"kind": "laplace"}, "methods": ["rb", "mfmb", "rbug", "prbug"],
      "replications": 40, "bootstrap": {"b": 300, "b1": 300, "b2": 300}, "master_seed": 0})";
  }
  bool pass = true;
  int compared = 0;
  for (const char* method : {"rb", "mfmb", "rbug", "prbug"}) {
    std::string reference;
    for (int threads : {1, 2, 4, 1}) {
      const auto out = dir / fmt("predict_%s_%d.json", method, threads);
      const auto r = proc::run(kCli + " predict --data " + (dir / "data.csv").string() + " --xf 0.2,-0.4 --intercept" +
                               " --b 400 --b1 300 --b2 300 --seed 12 --method " + method +
                               " --threads " + std::to_string(threads) + " --out " + out.string());
      const std::string text = slurp(out);
      pass &= r.exit_code == 0 && !text.empty() && r.out == text;
      if (reference.empty()) reference = text;
      pass &= text == reference;
      ++compared;
    }
  }
  std::map<std::string, std::string> reference;
  for (int threads : {1, 3, 4, 1}) {
    const auto out = dir / fmt("sim_%d_%d", threads, compared);
    const auto r = proc::run(kCli + " simulate --config " + (dir / "sim.json").string() + " --seed 5 --threads " +
                             std::to_string(threads) + " --out " + out.string());
    pass &= r.exit_code == 0;
    const auto files = simulate_outputs(out);
    pass &= files.size() == 6;
    if (reference.empty()) reference = files;
    pass &= files == reference;
    ++compared;
  }
  fs::remove_all(dir);
  return {pass, fmt("%d invocations across --threads 1/2/3/4 compared byte-for-byte (wall time excluded)", compared)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::pair<int, Outcome (*)()>> criteria{
      {6, criterion6}, {7, criterion7}, {1, criterion1}, {2, criterion2},
      {5, criterion5}, {3, criterion3}, {4, criterion4},
  };
  std::map<int, Outcome> results;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.contains(id)) continue;
    try {
      results[id] = fn();
    } catch (const std::exception& e) {
      results[id] = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "  criterion " << id << " done\n" << std::flush;
  }
  int failures = 0;
  for (const auto& [id, r] : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << r.detail << "\n";
    failures += r.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
