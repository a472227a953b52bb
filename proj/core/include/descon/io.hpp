#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "descon/stabilization.hpp"

namespace descon::io {

// System files: JSON object {"E": [[...]], "A": [[...]], "B": [[...]]},
// row-major, full double precision.
DescriptorSystem load_system(const std::filesystem::path& file);
void save_system(const DescriptorSystem& sys, const std::filesystem::path& file);

// Trajectory files: CSV with header k,u_1..u_m,x_1..x_n, one row per step;
// the final row (k = L) has empty input cells.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& file);
Trajectory read_trajectory_csv(const std::filesystem::path& file);

// Experiment bundles: a directory holding config.json, per-sub-experiment
// trajectory CSVs, and matrices.json with M, N, V, W, R0, R1, D_E, D_A, D_B
// and the condition numbers.
struct ExperimentBundle {
    ExperimentConfig config;
    std::optional<Experiment1Data> e1;
    std::optional<Experiment2Data> e2;
    std::optional<Experiment3Data> e3;
    std::optional<DataMatrices> matrices;
};

void save_bundle(const ExperimentBundle& bundle, const std::filesystem::path& dir);
ExperimentBundle load_bundle(const std::filesystem::path& dir);

// JSON fragments for report assembly (strings so that the JSON library
// stays out of the installed interface).
std::string to_json(const TypeVerdict& v);
std::string to_json(const RankCheck& check);
std::string to_json(const ControllabilityReport& report);
std::string to_json(const StabilizationResult& result);
std::string to_json(const ClosedLoopCertificate& cert);
std::string matrix_to_json(const Matrix& m);

// gains.json per the stabilize interface.
void save_gains(const StabilizationResult& result, const std::filesystem::path& file);

}  // namespace descon::io
