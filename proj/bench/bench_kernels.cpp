#include <benchmark/benchmark.h>

#include <random>

#include "nanomag/hamiltonian.hpp"
#include "nanomag/models.hpp"

using namespace nanomag;
namespace ks = nanomag::kernels;

namespace {

// Mn6-type ring with s_A = 3/2 in M = 3: 4904 states, about 2.1e5 nonzeros.
struct Fixture {
  SpinModel model = build_mn6_family(HalfInt{3});
  BasisPtr basis = SectorBasis::enumerate(model.cluster, HalfInt{6});
  BasisPtr up = SectorBasis::enumerate(model.cluster, HalfInt{8});
  SparseOperator H = build_exchange_hamiltonian(model, basis);
  CVec x;
  CVec y;

  Fixture() {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    x.resize(basis->dimension());
    for (auto& v : x) v = cplx(g(rng), g(rng));
    y.resize(basis->dimension());
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

template <bool Parallel>
void BM_csr_matvec(benchmark::State& st) {
  auto& f = fixture();
  for (auto _ : st) {
    if constexpr (Parallel) {
      ks::omp::csr_matvec(f.H.view(), f.x, f.y);
    } else {
      ks::serial::csr_matvec(f.H.view(), f.x, f.y);
    }
    benchmark::DoNotOptimize(f.y.data());
  }
  st.counters["nnz"] = static_cast<double>(f.H.nnz());
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * f.H.nnz()));
}

template <bool Parallel>
void BM_apply_ladder(benchmark::State& st) {
  auto& f = fixture();
  CVec out(f.up->dimension());
  for (auto _ : st) {
    for (std::size_t site = 0; site < f.model.cluster->size(); ++site) {
      if constexpr (Parallel) {
        ks::omp::apply_ladder(*f.basis, *f.up, site, +1, f.x, out);
      } else {
        ks::serial::apply_ladder(*f.basis, *f.up, site, +1, f.x, out);
      }
    }
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_dot(benchmark::State& st) {
  auto& f = fixture();
  for (auto _ : st) {
    cplx d = Parallel ? ks::omp::dot(f.x, f.x) : ks::serial::dot(f.x, f.x);
    benchmark::DoNotOptimize(d);
  }
}

}  // namespace

BENCHMARK(BM_csr_matvec<false>)->Name("csr_matvec/serial");
BENCHMARK(BM_csr_matvec<true>)->Name("csr_matvec/omp");
BENCHMARK(BM_apply_ladder<false>)->Name("apply_ladder/serial");
BENCHMARK(BM_apply_ladder<true>)->Name("apply_ladder/omp");
BENCHMARK(BM_dot<false>)->Name("dot/serial");
BENCHMARK(BM_dot<true>)->Name("dot/omp");

BENCHMARK_MAIN();
