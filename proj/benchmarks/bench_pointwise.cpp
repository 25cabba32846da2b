#include <benchmark/benchmark.h>

#include <vector>

#include "qobs/potentials.hpp"
#include "qobs/qtensor.hpp"
#include "qobs/regularize.hpp"
#include "qobs/sampling.hpp"

namespace {

std::vector<qobs::QTensor> sample_interior(std::size_t count) {
  qobs::Rng rng(5);
  std::vector<qobs::QTensor> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(qobs::random_interior(rng));
  return out;
}

std::vector<qobs::QTensor> sample_tensors(std::size_t count, double scale) {
  qobs::Rng rng(7);
  std::vector<qobs::QTensor> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(qobs::random_traceless(rng, scale));
  return out;
}

void BM_Eigen(benchmark::State& state) {
  const auto qs = sample_tensors(1024, 0.5);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qobs::eigen(qs[i++ & 1023]));
  }
}
BENCHMARK(BM_Eigen);

void BM_Distance(benchmark::State& state) {
  const auto qs = sample_interior(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qobs::distance(qs[i++ & 1023]));
  }
}
BENCHMARK(BM_Distance);

void BM_NearestPoint(benchmark::State& state) {
  const auto qs = sample_interior(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qobs::nearest_obstacle_point(qs[i++ & 1023]));
  }
}
BENCHMARK(BM_NearestPoint);

void BM_PotentialGradient(benchmark::State& state) {
  qobs::PotentialSpec spec;
  spec.family = qobs::InversePower{1.0, 1.0};
  const auto qs = sample_interior(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qobs::gradient(spec, qs[i++ & 1023]));
  }
}
BENCHMARK(BM_PotentialGradient);

// arg 0: tangent, 1: Moreau
void BM_Regularized(benchmark::State& state) {
  qobs::PotentialSpec spec;
  spec.family = qobs::InversePower{1.0, 1.0};
  const auto method = state.range(0) == 0 ? qobs::EnvelopeMethod::Tangent : qobs::EnvelopeMethod::Moreau;
  const qobs::RegularizedPotential reg(spec, 0.01, method);
  const auto qs = sample_interior(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(reg.evaluate(qs[i++ & 1023]));
  }
}
BENCHMARK(BM_Regularized)->Arg(0)->Arg(1);

}  // namespace
