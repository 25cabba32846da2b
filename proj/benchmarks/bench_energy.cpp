#include <benchmark/benchmark.h>

#include "qobs/field.hpp"
#include "qobs/solver.hpp"

namespace {

qobs::QField twist_field(int n) {
  qobs::BoundaryData data;
  data.S = 0.4;
  data.director = qobs::BoundaryData::Director::Twist;
  data.n = qobs::Vec3::UnitX();
  return qobs::QField::make(qobs::Grid(n), data, qobs::InitKind::Random, 3, 0.05);
}

qobs::BulkModel bulk() {
  qobs::BulkModel b;
  b.spec.family = qobs::InversePower{1.0, 0.2};
  b.epsilon = 0.01;
  return b;
}

void BM_EnergyGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const qobs::QField f = twist_field(n);
  const qobs::Objective obj(f.grid(), qobs::ElasticModel::reduced(0.5), bulk(), 1);
  qobs::QField grad(f.grid());
  for (auto _ : state) {
    benchmark::DoNotOptimize(obj.evaluate(f, &grad));
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_EnergyGradient)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_EnergyOnly(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const qobs::QField f = twist_field(n);
  const qobs::Objective obj(f.grid(), qobs::ElasticModel::reduced(0.5), bulk(), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(obj.energy(f));
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_EnergyOnly)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
