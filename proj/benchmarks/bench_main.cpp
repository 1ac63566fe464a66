#include <benchmark/benchmark.h>

#include "nbp/experiment.hpp"
#include "nbp/gibbs_mcem.hpp"
#include "nbp/linalg_sampler.hpp"
#include "nbp/rand_dist.hpp"
#include "nbp/specfun.hpp"
#include "nbp/var_em.hpp"

namespace {

void BM_LogBesselK(benchmark::State& state) {
  double order = 0.3, x = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nbp::specfun::log_bessel_k(order, x));
    order = order > 5 ? 0.3 : order + 0.37;
    x = x > 50 ? 0.01 : x * 1.7;
  }
}
BENCHMARK(BM_LogBesselK);

void BM_SampleGig(benchmark::State& state) {
  nbp::RngStream rng(1);
  const nbp::GigParams params{0.5, 2.0, static_cast<double>(state.range(0)) / 10.0 - 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(nbp::sample_gig(params, rng));
}
BENCHMARK(BM_SampleGig)->Arg(1)->Arg(5)->Arg(25);

nbp::SimulatedData bench_data(int n, int p) {
  nbp::ExperimentSpec s;
  s.n = n;
  s.p = p;
  s.n_active = 8;
  return nbp::gen_experiment(s, 0);
}

void beta_draw(benchmark::State& state, nbp::BetaRoute route) {
  const auto sd = bench_data(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const nbp::BetaSampler sampler(sd.data.x, sd.data.y);
  const nbp::DiagScale d(Eigen::VectorXd::Constant(sd.data.p(), 0.5));
  nbp::RngStream rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.draw(d, 1.0, rng, route));
}

void BM_BetaDrawDirect(benchmark::State& state) { beta_draw(state, nbp::BetaRoute::direct); }
void BM_BetaDrawFast(benchmark::State& state) { beta_draw(state, nbp::BetaRoute::fast); }
BENCHMARK(BM_BetaDrawDirect)->Args({60, 100})->Args({100, 500})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BetaDrawFast)->Args({60, 100})->Args({100, 500})->Unit(benchmark::kMicrosecond);

void BM_GibbsSweep(benchmark::State& state) {
  const auto sd = bench_data(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const nbp::GibbsSampler sampler(sd.data);
  nbp::NbpHyperparams hyper;
  nbp::LatentState s = nbp::initial_state(sd.data);
  nbp::RngStream rng(3);
  for (auto _ : state) s = sampler.sweep(s, hyper, rng);
}
BENCHMARK(BM_GibbsSweep)->Args({60, 100})->Args({100, 500})->Unit(benchmark::kMicrosecond);

void BM_CaviStep(benchmark::State& state) {
  const auto sd = bench_data(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  nbp::NbpHyperparams hyper;
  nbp::VariationalParams q = nbp::initial_variational_params(sd.data, hyper, 1.0, 1.0, 1.0);
  for (auto _ : state) q = nbp::cavi_step(q, sd.data, hyper);
}
BENCHMARK(BM_CaviStep)->Args({60, 100})->Args({100, 500})->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
