#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <vector>

#include "gpi/intervals.hpp"
#include "gpi/model_core.hpp"
#include "gpi/rng.hpp"
#include "gpi/simulation.hpp"

namespace {

struct Fixture {
  gpi::FittedModel model;
  Eigen::VectorXd xf;
};

Fixture make_fixture(Eigen::Index n) {
  gpi::SimConfig cfg = gpi::experiment_model(n, gpi::ErrorDistribution::normal(1.0), 1);
  Eigen::MatrixXd x = gpi::generate_experiment_design(cfg.beta.size(), n, 1);
  gpi::RngStream rng(7, 0);
  Eigen::VectorXd y = x * cfg.beta;
  for (Eigen::Index i = 0; i < n; ++i) y(i) += cfg.dist.draw(rng);
  return {gpi::fit_ols(gpi::Dataset(x, y)), cfg.xf};
}

gpi::Execution exec_of(const benchmark::State& state) {
  return state.range(1) == 0 ? gpi::Execution::Serial : gpi::Execution::Parallel;
}

void BM_PredictionRoots(benchmark::State& state) {
  const Fixture f = make_fixture(state.range(0));
  const auto plan = gpi::ResamplingPlan::make(f.model, f.xf, gpi::ResidualType::Fitted);
  const gpi::RngStream base(1, 0);
  std::vector<double> out(2500);
  for (auto _ : state) {
    gpi::kernels::prediction_roots(plan, base, out, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

void BM_AdjustmentStatistics(benchmark::State& state) {
  const Fixture f = make_fixture(state.range(0));
  const auto plan = gpi::ResamplingPlan::make(f.model, f.xf, gpi::ResidualType::Fitted);
  const gpi::RngStream outer(1, 1);
  const gpi::RngStream mc(1, 2);
  std::vector<double> out(250);
  for (auto _ : state) {
    gpi::kernels::adjustment_statistics(plan, 1.96, 1000, outer, mc, out, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

void BM_RunExperiment(benchmark::State& state) {
  gpi::SimConfig cfg = gpi::experiment_model(state.range(0), gpi::ErrorDistribution::normal(1.0), 1);
  cfg.methods = {gpi::Method::RB, gpi::Method::RBUG};
  cfg.replications = 8;
  cfg.bootstrap.b_roots = 500;
  cfg.bootstrap.b_adjust = 200;
  cfg.bootstrap.b_mc = 500;
  cfg.master_seed = 1;
  for (auto _ : state) {
    auto report = gpi::run_experiment(cfg, exec_of(state));
    benchmark::DoNotOptimize(report.methods.data());
  }
}

}  // namespace

BENCHMARK(BM_PredictionRoots)->ArgsProduct({{100, 400, 1600}, {0, 1}})->ArgNames({"n", "parallel"});
BENCHMARK(BM_AdjustmentStatistics)->ArgsProduct({{100, 400, 1600}, {0, 1}})->ArgNames({"n", "parallel"});
BENCHMARK(BM_RunExperiment)->ArgsProduct({{400}, {0, 1}})->ArgNames({"n", "parallel"})->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
