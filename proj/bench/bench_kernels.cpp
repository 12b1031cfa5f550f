// Serial reference vs OpenMP kernel on pipeline-shaped inputs. Sizes follow
// one 60 s, 32-channel session at 500 Hz and a per-user SVM training set.

#include <benchmark/benchmark.h>

#include <vector>

#include "neuroauth/dsp.hpp"
#include "neuroauth/kernels.hpp"
#include "neuroauth/random.hpp"

using namespace neuroauth;

namespace {

constexpr std::size_t kChannels = 32;
constexpr std::size_t kSessionSamples = 30000;

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

Matrix noise_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  Rng rng(seed);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.uniform();
  }
  return m;
}

template <bool Parallel>
void BM_sos_filter(benchmark::State& state) {
  const FilterRealization f = design_bandpass(BandpassSpec{});
  const auto in = noise(kSessionSamples * kChannels, 1);
  std::vector<double> out(in.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::sos_filter(f.sections, in, kChannels, out);
    } else {
      kernels::serial::sos_filter(f.sections, in, kChannels, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(in.size()));
}

template <bool Parallel>
void BM_window_features(benchmark::State& state) {
  const auto in = noise(kSessionSamples * kChannels, 2);
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + 125 <= kSessionSamples; s += 63) starts.push_back(s);
  Matrix out;
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::window_features(in, kChannels, starts, 125, KurtosisConvention::kExcess, out);
    } else {
      kernels::serial::window_features(in, kChannels, starts, 125, KurtosisConvention::kExcess, out);
    }
    benchmark::DoNotOptimize(out.row(0).data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(starts.size()));
}

template <bool Parallel>
void BM_gram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = noise_matrix(n, 60, 3);
  std::vector<float> out(n * n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::gram(x, GramKind::kSquaredDistance, out);
    } else {
      kernels::serial::gram(x, GramKind::kSquaredDistance, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}

template <bool Parallel>
void BM_rbf_decision(benchmark::State& state) {
  const Matrix sv = noise_matrix(2000, 60, 4);
  const Matrix q = noise_matrix(4000, 60, 5);
  const auto coef = noise(sv.rows(), 6);
  std::vector<double> out(q.rows());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::rbf_decision(sv, coef, 0.5, 0.1, q, out);
    } else {
      kernels::serial::rbf_decision(sv, coef, 0.5, 0.1, q, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(sv.rows() * q.rows()));
}

template <bool Parallel>
void BM_distance_table(benchmark::State& state) {
  const Matrix train = noise_matrix(3000, 60, 7);
  const Matrix q = noise_matrix(500, 60, 8);
  std::vector<double> out(train.rows() * q.rows());
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::distance_table(train, q, false, out);
    } else {
      kernels::serial::distance_table(train, q, false, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(out.size()));
}

}  // namespace

BENCHMARK(BM_sos_filter<false>)->Name("sos_filter/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sos_filter<true>)->Name("sos_filter/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_window_features<false>)->Name("window_features/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_window_features<true>)->Name("window_features/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_gram<false>)->Name("gram/serial")->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gram<true>)->Name("gram/parallel")->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_rbf_decision<false>)->Name("rbf_decision/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rbf_decision<true>)->Name("rbf_decision/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_distance_table<false>)->Name("distance_table/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_distance_table<true>)->Name("distance_table/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
