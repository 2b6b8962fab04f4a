#include <benchmark/benchmark.h>

#include "neurodream/encoding.hpp"
#include "neurodream/policy.hpp"
#include "neurodream/substrate.hpp"
#include "neurodream/trainer.hpp"

namespace nd = neurodream;

namespace {

std::vector<nd::encoding::SpikeTrain> typical_window(nd::Rng& rng) {
  const nd::encoding::PopulationCodeConfig enc;
  return nd::encoding::rates_to_trains(nd::encoding::encode_state({0.3, 0.6, 0.5, 0.2}, enc), enc,
                                       rng);
}

// The hot loop: 100 steps of 510 neurons per frame.
void BM_RunWindow(benchmark::State& state) {
  nd::substrate::SubstrateConfig cfg;
  cfg.base.core_efficacy = 1.0;
  nd::substrate::Substrate s(cfg, 1);
  nd::Rng rng(2);
  const auto trains = typical_window(rng);
  for (auto _ : state) {
    auto counts = s.run_window(trains, 10000);
    benchmark::DoNotOptimize(counts);
  }
  state.SetItemsProcessed(state.iterations() * 100 * 510);
}
BENCHMARK(BM_RunWindow);

void BM_ReferenceRunWindow(benchmark::State& state) {
  nd::substrate::SubstrateConfig cfg;
  cfg.base.core_efficacy = 1.0;
  nd::substrate::Substrate s(cfg, 1);
  nd::Rng rng(2);
  const auto trains = typical_window(rng);
  for (auto _ : state) {
    auto counts = s.reference_run_window(trains, 10000, 10);
    benchmark::DoNotOptimize(counts);
  }
}
BENCHMARK(BM_ReferenceRunWindow)->Unit(benchmark::kMillisecond);

void BM_EncodeState(benchmark::State& state) {
  nd::Rng rng(3);
  for (auto _ : state) {
    auto trains = typical_window(rng);
    benchmark::DoNotOptimize(trains);
  }
}
BENCHMARK(BM_EncodeState);

void BM_PolicyForwardAndAccumulate(benchmark::State& state) {
  auto readout = nd::policy::init_policy(1, 510, 4e-3);
  nd::policy::EligibilityAccumulator acc(510, 0.998);
  std::vector<double> sbar(510);
  for (std::size_t i = 0; i < sbar.size(); ++i) sbar[i] = static_cast<double>(i % 4);
  for (auto _ : state) {
    const auto pi = nd::policy::policy_forward(sbar, readout);
    acc.accumulate(sbar, pi, nd::pong::Action::kUp, 0.0);
    benchmark::DoNotOptimize(acc.delta().flat().data());
  }
}
BENCHMARK(BM_PolicyForwardAndAccumulate);

void BM_DreamingIteration(benchmark::State& state) {
  nd::TrainConfig cfg;
  cfg.mode = nd::Mode::kDreaming;
  nd::Trainer trainer(cfg, 0);
  for (auto _ : state) {
    auto rec = trainer.play_iteration();
    benchmark::DoNotOptimize(rec);
  }
}
BENCHMARK(BM_DreamingIteration)->Unit(benchmark::kMillisecond);

void BM_BaselineIteration(benchmark::State& state) {
  nd::TrainConfig cfg;
  cfg.mode = nd::Mode::kBaseline;
  nd::Trainer trainer(cfg, 0);
  for (auto _ : state) {
    auto rec = trainer.play_iteration();
    benchmark::DoNotOptimize(rec);
  }
}
BENCHMARK(BM_BaselineIteration)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
