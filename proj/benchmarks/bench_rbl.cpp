#include <benchmark/benchmark.h>

#include "rbl/gabp.hpp"
#include "rbl/harness.hpp"
#include "rbl/linsys.hpp"
#include "rbl/position_estimator.hpp"

namespace {

rbl::ParamSystem cube_system(double sigma) {
  const rbl::Scenario sc = rbl::default_scenario();
  rbl::Rng rng(1);
  const auto [ang, t] = rbl::sample_transform(sc.prior, rng);
  const rbl::GroundTruth g = rbl::make_ground_truth(ang, t, sc.conformation, sc.generator_mode);
  const rbl::RangeMeasurements r = rbl::simulate_ranges(g.S, sc.anchors, sigma, rng);
  return rbl::build_param_system(r, sc.anchors, sc.conformation,
                                 g.S.colwise().squaredNorm().transpose());
}

void BM_BivariateIteration(benchmark::State& state) {
  const rbl::ParamSystem sys = cube_system(0.1);
  const rbl::GabpConfig cfg = rbl::GabpConfig::from_prior({});
  rbl::GabpState s = rbl::init_state(sys, cfg);
  for (auto _ : state) {
    s = rbl::bivariate_iteration(std::move(s), sys, cfg);
    benchmark::DoNotOptimize(s.replica.data());
  }
}
BENCHMARK(BM_BivariateIteration);

void BM_DoubleGabp(benchmark::State& state) {
  const rbl::ParamSystem sys = cube_system(0.1);
  const rbl::GabpConfig cfg = rbl::GabpConfig::from_prior({});
  for (auto _ : state) benchmark::DoNotOptimize(rbl::run_double_gabp(sys, cfg));
}
BENCHMARK(BM_DoubleGabp);

void BM_TwoStagePosition(benchmark::State& state) {
  const rbl::Scenario sc = rbl::default_scenario();
  rbl::Rng rng(2);
  const rbl::RangeMeasurements r =
      rbl::simulate_ranges(sc.conformation, sc.anchors, 0.1, rng);
  const rbl::PositionSystem sys = rbl::build_position_system(r, sc.anchors, 0);
  const rbl::CompositeNoiseStats noise = rbl::composite_noise_for_sensor(r, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rbl::estimate_position_two_stage(sys, noise));
}
BENCHMARK(BM_TwoStagePosition);

void BM_FullTrial(benchmark::State& state) {
  rbl::ExperimentConfig cfg;
  cfg.sigmas = {0.1};
  std::size_t j = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rbl::run_trial(cfg, 0, j++));
}
BENCHMARK(BM_FullTrial);

}  // namespace

BENCHMARK_MAIN();
