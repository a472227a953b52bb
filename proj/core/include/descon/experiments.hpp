#pragma once

#include <cstdint>
#include <vector>

#include "descon/model.hpp"

namespace descon {

struct ExperimentConfig {
    double s0 = 0.5;
    int l = 4;            // steps per sub-experiment
    int T = 80;           // Experiment-3 window
    std::uint64_t seed = 1;
    double noise_scale = 0.0;
    int resample_cap = 8;
    double condition_cap = 1.0e8;  // resample when cond(N) or cond(W) exceeds this

    // l >= 1 and T >= (m+1)n + m, which covers the slow-split excitation
    // bound for any n1 <= n.
    void validate(Eigen::Index n, Eigen::Index m) const;
};

// The experiments speak to the plant through this interface only: apply an
// input sequence, observe states from a fresh consistent initial state.
// Recorded data from a real plant can stand in for the simulator behind it.
class PlantAdapter {
   public:
    virtual ~PlantAdapter() = default;
    virtual Eigen::Index state_dim() const = 0;
    virtual Eigen::Index input_dim() const = 0;
    // inputs is m x L; returns a trajectory with states x_0..x_L.
    virtual Trajectory run(const Matrix& inputs) = 0;
};

// Model-backed plant. Each run() draws a fresh slow initial state uniform in
// [-1, 1]^n1 from a per-call derived stream, so repeated experiments are
// independent yet bit-reproducible given the constructor seed.
class SimulatorAdapter : public PlantAdapter {
   public:
    SimulatorAdapter(DescriptorSystem sys, double s0, std::uint64_t seed, double noise_scale);

    Eigen::Index state_dim() const override { return sys_.n(); }
    Eigen::Index input_dim() const override { return sys_.m(); }
    Trajectory run(const Matrix& inputs) override;

    const DescriptorSystem& system() const { return sys_; }
    const SlowFastForm& form() const { return sf_; }

   private:
    DescriptorSystem sys_;
    SlowFastForm sf_;
    std::uint64_t seed_;
    double noise_scale_;
    std::uint64_t calls_ = 0;
};

struct Experiment1Data {
    Matrix M, N, V, W;  // n x n data matrices
    double s0 = 0.0;
    double cond_N = 0.0;
    double cond_W = 0.0;
    std::vector<Trajectory> trajectories;
};

struct Experiment2Data {
    Matrix R0, R1;  // n x m states at steps l and l+1 under unit inputs
    std::vector<Trajectory> trajectories;
};

// D_E = M N^-1, D_A = V W^-1, D_B = D_E R1 - D_A R0: everything the
// data-driven side ever knows about the plant.
struct DataMatrices {
    Matrix D_E, D_A, D_B;
    double s0 = 0.0;
    double cond_N = 0.0;
    double cond_W = 0.0;

    double scale() const;  // max sigma_1 over the three blocks
};

struct Experiment3Data {
    Matrix U_minus;  // m x T
    Matrix X_minus;  // n x T
    Matrix X_plus;   // n x T
};

// n groups of zero-sum input sequences: u_0..u_{l-2} i.i.d. uniform [-1, 1],
// u_{l-1} = -sum of the rest (all-zero when l = 1).
std::vector<Matrix> design_exp1_inputs(const ExperimentConfig& config, Eigen::Index n,
                                       Eigen::Index m);

Experiment1Data run_experiment1(PlantAdapter& plant, const ExperimentConfig& config);
Experiment2Data run_experiment2(PlantAdapter& plant, const ExperimentConfig& config);
DataMatrices assemble_data_matrices(const Experiment1Data& e1, const Experiment2Data& e2);
Experiment3Data run_experiment3(PlantAdapter& plant, const ExperimentConfig& config);

}  // namespace descon
