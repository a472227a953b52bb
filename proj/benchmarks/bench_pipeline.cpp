#include <benchmark/benchmark.h>

#include "descon/analysis.hpp"
#include "descon/fixtures.hpp"
#include "descon/stabilization.hpp"

namespace {

using namespace descon;

void BM_CircuitExperiments(benchmark::State& state) {
    const DescriptorSystem sys = circuit_fixture();
    for (auto _ : state) {
        SimulatorAdapter plant(sys, 0.5, 1, 0.0);
        ExperimentConfig config;
        const Experiment1Data e1 = run_experiment1(plant, config);
        const Experiment2Data e2 = run_experiment2(plant, config);
        benchmark::DoNotOptimize(assemble_data_matrices(e1, e2));
    }
}
BENCHMARK(BM_CircuitExperiments);

void BM_CircuitStabilize(benchmark::State& state) {
    const DescriptorSystem sys = circuit_fixture();
    SimulatorAdapter plant(sys, 0.5, 1, 0.0);
    ExperimentConfig config;
    const Experiment1Data e1 = run_experiment1(plant, config);
    const Experiment2Data e2 = run_experiment2(plant, config);
    const DataMatrices d = assemble_data_matrices(e1, e2);
    const Experiment3Data e3 = run_experiment3(plant, config);
    for (auto _ : state) {
        const SlowDataset sd = data_decompose(d, e3);
        const Matrix phi = solve_stabilizing_lmi(sd);
        benchmark::DoNotOptimize(assemble_gain(sd, phi));
    }
}
BENCHMARK(BM_CircuitStabilize);

}  // namespace
