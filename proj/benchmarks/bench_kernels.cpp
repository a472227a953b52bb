#include <benchmark/benchmark.h>

#include "descon/fixtures.hpp"
#include "descon/matrix_kernels.hpp"
#include "descon/rng.hpp"

namespace {

using namespace descon;

void BM_CoreNilpotent(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    RandomSystemOptions opts;
    opts.min_n = n;
    opts.max_n = n;
    opts.verdict_diversity = false;
    const RandomSystem rs = random_regular_system(17, opts);
    const RegularityCertificate reg = is_regular(rs.sys);
    const Matrix S = reg.witness_shift * rs.sys.E - rs.sys.A;
    const Matrix d = S.partialPivLu().solve(rs.sys.E);
    for (auto _ : state) {
        benchmark::DoNotOptimize(core_nilpotent(d));
    }
}
BENCHMARK(BM_CoreNilpotent)->Arg(4)->Arg(6);

void BM_FiniteSpectrum(benchmark::State& state) {
    const DescriptorSystem sys = circuit_fixture();
    const Matrix S = 0.5 * sys.E - sys.A;
    const Matrix d = S.partialPivLu().solve(sys.E);
    for (auto _ : state) {
        benchmark::DoNotOptimize(finite_generalized_eigenvalues(d, 0.5));
    }
}
BENCHMARK(BM_FiniteSpectrum);

}  // namespace
