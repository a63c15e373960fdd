#include <benchmark/benchmark.h>

#include "binlab/analysis.hpp"
#include "binlab/binarize.hpp"
#include "binlab/bitkernel.hpp"
#include "binlab/rng.hpp"
#include "binlab/tensor.hpp"

using namespace binlab;

namespace {

Tensor random_signs(Rng& rng, std::size_t n) {
  Tensor t({n});
  for (auto& v : t.data()) v = rng.sign();
  return t;
}

void BM_XnorDot(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const PackedBits a = pack(random_signs(rng, n)), b = pack(random_signs(rng, n));
  for (auto _ : state) benchmark::DoNotOptimize(xnor_dot(a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_FloatDot(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_signs(rng, n), b = random_signs(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(dot(a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Matmul(benchmark::State& state) {
  Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  Tensor a({n, n}), b({n, n});
  for (auto& v : a.data()) v = rng.normal();
  for (auto& v : b.data()) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
}

void BM_BinaryMatvec(benchmark::State& state) {
  Rng rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  Tensor w({n, n});
  for (auto& v : w.data()) v = rng.sign();
  const PackedMatrix pw(w);
  const Tensor x = random_signs(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(binary_matvec(pw, 0.5, x));
}

void BM_BinarizeLab(benchmark::State& state) {
  Rng rng(4);
  const auto n = static_cast<std::size_t>(state.range(0));
  Tensor w({n}), d({n});
  for (auto& v : w.data()) v = rng.normal();
  for (auto& v : d.data()) v = rng.uniform(0.01, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(binarize_lab(w, d));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_XnorDot)->Arg(64)->Arg(1024)->Arg(4096);
BENCHMARK(BM_FloatDot)->Arg(64)->Arg(1024)->Arg(4096);
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);
BENCHMARK(BM_BinaryMatvec)->Arg(256)->Arg(1024);
BENCHMARK(BM_BinarizeLab)->Arg(1024)->Arg(65536);
BENCHMARK_MAIN();
