#include <benchmark/benchmark.h>

#include "bispectral/baker.hpp"
#include "bispectral/gaudin.hpp"

using namespace bispectral;

namespace {

Scalar q(long v) { return Scalar::exact(v); }

MasterSpec golden() { return MasterSpec({q(0), q(1)}, {q(0), q(1)}, {1, 1}, {1, 1}); }

// <1, (x^2 - 3x + 3) e^x>: Wronskian x (x - 1) e^x.
SpecialSpace exact_space() {
    const Polynomial p({q(3), q(-3), q(1)}, Backend::Exact);
    const FunctionSpace v({QuasiPolynomial::exponential(q(0)), QuasiPolynomial::term(RationalFunction(p), q(1), 'x')});
    return classify_special(v, {q(0), q(1)});
}

void BM_SpecialTransformExact(benchmark::State& state) {
    const SpecialSpace v = exact_space();
    for (auto _ : state) benchmark::DoNotOptimize(special_bispectral_dual(v));
}
BENCHMARK(BM_SpecialTransformExact)->Unit(benchmark::kMillisecond);

void BM_SpecialTransformApprox(benchmark::State& state) {
    const MasterSpec spec = golden();
    const SpecialSpace v = space_from_critical_point(spec, solve_bethe(spec).points.front());
    for (auto _ : state) benchmark::DoNotOptimize(special_bispectral_dual(v));
}
BENCHMARK(BM_SpecialTransformApprox)->Unit(benchmark::kMillisecond);

void BM_BetheSolve(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const MasterSpec spec({q(0), q(1)}, {q(0), q(1)}, {d, d}, {d, d});
    for (auto _ : state) benchmark::DoNotOptimize(solve_bethe(spec));
}
BENCHMARK(BM_BetheSolve)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_HamiltoniansExact(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    const std::vector<int> w(3, k);
    const WeightBasis basis = build_weight_basis(3, 3, w, w);
    state.counters["dim"] = static_cast<double>(basis.size());
    for (auto _ : state) {
        const HamiltonianSet hs = hamiltonians(basis, {q(0), q(1), q(2)}, {q(0), q(1), q(2)});
        benchmark::DoNotOptimize(max_commutator(hs));
    }
}
BENCHMARK(BM_HamiltoniansExact)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_DualityReport2x2(benchmark::State& state) {
    const MasterSpec spec({q(0), q(1)}, {q(0), q(1)}, {2, 2}, {2, 2});
    const SpecialSpace v = space_from_critical_point(spec, solve_bethe(spec).points.front());
    for (auto _ : state) benchmark::DoNotOptimize(duality_report_2x2(v));
}
BENCHMARK(BM_DualityReport2x2)->Unit(benchmark::kMillisecond);

void BM_BakerInvolution(benchmark::State& state) {
    const SpecialSpace v = exact_space();
    const FunctionSpace u = special_bispectral_dual(v).dual_space;
    BakerGrid grid;
    grid.size = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(verify_involution(v.space, u, grid));
}
BENCHMARK(BM_BakerInvolution)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
