// Microbenchmarks: scan throughput over both operators, element
// construction, and the end-to-end parallel filters on the pooled backend.

#include <benchmark/benchmark.h>

#include "parascan/backend.hpp"
#include "parascan/kalman_par.hpp"
#include "parascan/kalman_seq.hpp"
#include "parascan/model_gen.hpp"
#include "parascan/scan.hpp"

using namespace parascan;

namespace {

ScanAlg alg_of(int idx) {
  static const ScanAlg algs[] = {ScanAlg::Sequential, ScanAlg::HillisSteele,
                                 ScanAlg::Blelloch, ScanAlg::InplaceLaFi,
                                 ScanAlg::SenguptaA, ScanAlg::SenguptaB};
  return algs[idx];
}

void BM_ScanInt64(benchmark::State& state) {
  const ScanAlg alg = alg_of(int(state.range(0)));
  const std::size_t t = std::size_t(state.range(1));
  SerialBackend be;
  Int64Elems in(t);
  for (std::size_t i = 0; i < t; ++i) in[i] = std::int64_t(i * 31 % 997);
  for (auto _ : state) {
    Int64Elems e = in;
    scan_forward(ScanSpec{alg, 16}, e, be);
    benchmark::DoNotOptimize(e[t - 1]);
  }
  state.SetLabel(to_string(alg));
  state.SetItemsProcessed(std::int64_t(state.iterations()) * std::int64_t(t));
}
BENCHMARK(BM_ScanInt64)
    ->ArgsProduct({{0, 1, 2, 3, 4, 5}, {1 << 10, 1 << 14, 1 << 18}});

void BM_ScanMatMul(benchmark::State& state) {
  const ScanAlg alg = alg_of(int(state.range(0)));
  const std::size_t t = std::size_t(state.range(1));
  SerialBackend be;
  MatMulElems<double> in(t, 4);
  gen_detail::GaussianStream g(5);
  for (std::size_t i = 0; i < t; ++i) {
    g.fill(in.at(i));
    for (int k = 0; k < 16; ++k) in.at(i).d[k] *= 0.45;
  }
  for (auto _ : state) {
    auto e = in;
    scan_forward(ScanSpec{alg, 16}, e, be);
    benchmark::DoNotOptimize(e.at(t - 1).d[0]);
  }
  state.SetLabel(to_string(alg));
  state.SetItemsProcessed(std::int64_t(state.iterations()) * std::int64_t(t));
}
BENCHMARK(BM_ScanMatMul)->ArgsProduct({{0, 1, 2, 3, 4, 5}, {1 << 10, 1 << 14}});

void BM_FilterElementInit(benchmark::State& state) {
  const std::size_t t = std::size_t(state.range(0));
  const auto m = gen_model(1, 4, 2, t);
  const auto ys = simulate_data(m, 2);
  SerialBackend be;
  for (auto _ : state) {
    auto elems = build_filter_elems(m, ys, next_pow2(t), be);
    benchmark::DoNotOptimize(elems.b(0).d);
  }
  state.SetItemsProcessed(std::int64_t(state.iterations()) * std::int64_t(t));
}
BENCHMARK(BM_FilterElementInit)->Arg(1 << 10)->Arg(1 << 14);

void BM_SequentialKF(benchmark::State& state) {
  const std::size_t t = std::size_t(state.range(0));
  const auto m = convert_model<float>(gen_model(1, 4, 2, t));
  const auto ys = convert_measurements<float>(
      simulate_data(gen_model(1, 4, 2, t), 2));
  for (auto _ : state) {
    auto out = kf_run(m, ys);
    benchmark::DoNotOptimize(out.back().mean[0]);
  }
  state.SetItemsProcessed(std::int64_t(state.iterations()) * std::int64_t(t));
}
BENCHMARK(BM_SequentialKF)->Arg(1 << 10)->Arg(1 << 14);

void BM_PkfPooled(benchmark::State& state) {
  const std::size_t t = std::size_t(state.range(0));
  const unsigned threads = unsigned(state.range(1));
  const auto md = gen_model(1, 4, 2, t);
  const auto m = convert_model<float>(md);
  const auto ys = convert_measurements<float>(simulate_data(md, 2));
  PoolBackend pool(threads);
  for (auto _ : state) {
    auto out = pkf_run(m, ys, ScanSpec{ScanAlg::InplaceLaFi, 16}, pool);
    benchmark::DoNotOptimize(out.back().mean[0]);
  }
  state.SetItemsProcessed(std::int64_t(state.iterations()) * std::int64_t(t));
}
BENCHMARK(BM_PkfPooled)->ArgsProduct({{1 << 10, 1 << 14}, {1, 2, 4}});

}  // namespace

BENCHMARK_MAIN();
