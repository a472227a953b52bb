#include "descon/experiments.hpp"

#include <Eigen/Dense>
#include <string>

#include "descon/rng.hpp"

namespace descon {

namespace {

// Stream tags keep the input draws of the three experiments and the
// adapter's initial-state draws on disjoint substreams of one seed.
constexpr std::uint64_t kExp1Stream = 0x0E1;
constexpr std::uint64_t kExp3Stream = 0x0E3;
constexpr std::uint64_t kAdapterStream = 0xAD0;

double condition_of(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

void ExperimentConfig::validate(Eigen::Index n, Eigen::Index m) const {
    if (l < 1) throw InvalidMatrix("ExperimentConfig: l must be >= 1");
    const Eigen::Index t_min = (m + 1) * n + m;
    if (T < t_min) {
        throw InvalidMatrix("ExperimentConfig: T must be >= (m+1)n + m = " +
                            std::to_string(t_min));
    }
    if (noise_scale < 0.0) throw InvalidMatrix("ExperimentConfig: noise_scale must be >= 0");
    if (resample_cap < 1) throw InvalidMatrix("ExperimentConfig: resample_cap must be >= 1");
}

SimulatorAdapter::SimulatorAdapter(DescriptorSystem sys, double s0, std::uint64_t seed,
                                   double noise_scale)
    : sys_(std::move(sys)), seed_(seed), noise_scale_(noise_scale) {
    sys_.validate();
    const RegularityCertificate cert = is_regular(sys_);
    if (!cert.regular) {
        throw NotRegular("SimulatorAdapter: plant pencil appears irregular");
    }
    sf_ = slow_fast_decompose(sys_, s0);
}

Trajectory SimulatorAdapter::run(const Matrix& inputs) {
    const std::uint64_t call_seed = Rng::derive(seed_, kAdapterStream + calls_);
    ++calls_;
    Rng rng(call_seed);
    const Vector x0_slow = rng.uniform_vector(sf_.n1, -1.0, 1.0);
    return simulate(sys_, sf_, x0_slow, inputs, noise_scale_, rng.raw());
}

std::vector<Matrix> design_exp1_inputs(const ExperimentConfig& config, Eigen::Index n,
                                       Eigen::Index m) {
    std::vector<Matrix> groups;
    groups.reserve(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Rng rng(Rng::derive(config.seed, kExp1Stream * 1000 + i));
        Matrix u = Matrix::Zero(m, config.l);
        if (config.l > 1) {
            u.leftCols(config.l - 1) = rng.uniform_matrix(m, config.l - 1, -1.0, 1.0);
            u.col(config.l - 1) = -u.leftCols(config.l - 1).rowwise().sum();
        }
        groups.push_back(std::move(u));
    }
    return groups;
}

Experiment1Data run_experiment1(PlantAdapter& plant, const ExperimentConfig& config) {
    const Eigen::Index n = plant.state_dim();
    const Eigen::Index m = plant.input_dim();
    if (config.l < 1) throw InvalidMatrix("run_experiment1: l must be >= 1");

    Experiment1Data data;
    data.s0 = config.s0;
    const double s0 = config.s0;

    ExperimentConfig attempt_config = config;
    for (int attempt = 0; attempt < config.resample_cap; ++attempt) {
        // Fresh input draws per attempt; the adapter refreshes initial
        // states on every run by construction.
        attempt_config.seed = Rng::derive(config.seed, 0xA77 + attempt);
        const std::vector<Matrix> inputs = design_exp1_inputs(attempt_config, n, m);

        Matrix M(n, n), N(n, n), V(n, n), W(n, n);
        std::vector<Trajectory> trajectories;
        trajectories.reserve(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            Trajectory traj = plant.run(inputs[i]);
            const Eigen::Index l = traj.steps();
            const Matrix& x = traj.states;
            const Vector sum_lo = x.leftCols(l).rowwise().sum();       // x_0..x_{l-1}
            const Vector sum_hi = x.rightCols(l).rowwise().sum();      // x_1..x_l
            M.col(i) = sum_lo;
            N.col(i) = (s0 - 1.0) * sum_lo + x.col(0) - x.col(l);
            V.col(i) = sum_hi;
            W.col(i) = (s0 - 1.0) * sum_hi + s0 * (x.col(0) - x.col(l));
            trajectories.push_back(std::move(traj));
        }
        const double cond_n = condition_of(N);
        const double cond_w = condition_of(W);
        if (cond_n <= config.condition_cap && cond_w <= config.condition_cap) {
            data.M = std::move(M);
            data.N = std::move(N);
            data.V = std::move(V);
            data.W = std::move(W);
            data.cond_N = cond_n;
            data.cond_W = cond_w;
            data.trajectories = std::move(trajectories);
            return data;
        }
    }
    throw DegenerateData("run_experiment1: N or W stayed ill-conditioned after " +
                         std::to_string(config.resample_cap) + " resamples");
}

Experiment2Data run_experiment2(PlantAdapter& plant, const ExperimentConfig& config) {
    const Eigen::Index n = plant.state_dim();
    const Eigen::Index m = plant.input_dim();
    if (config.l < 1) throw InvalidMatrix("run_experiment2: l must be >= 1");

    Experiment2Data data;
    data.R0 = Matrix(n, m);
    data.R1 = Matrix(n, m);
    data.trajectories.reserve(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        Matrix u = Matrix::Zero(m, config.l + 1);
        u.row(i).setOnes();
        Trajectory traj = plant.run(u);
        data.R0.col(i) = traj.states.col(config.l);
        data.R1.col(i) = traj.states.col(config.l + 1);
        data.trajectories.push_back(std::move(traj));
    }
    return data;
}

DataMatrices assemble_data_matrices(const Experiment1Data& e1, const Experiment2Data& e2) {
    ensure_finite(e1.N, "assemble_data_matrices.N");
    ensure_finite(e1.W, "assemble_data_matrices.W");
    const Eigen::Index n = e1.N.rows();

    const auto invertible = [&](const Matrix& mtx, const char* name) {
        Eigen::JacobiSVD<Matrix> svd(mtx);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) <= auto_rank_tolerance(n, n, sv(0))) {
            throw DegenerateData(std::string("assemble_data_matrices: singular ") + name);
        }
    };
    invertible(e1.N, "N");
    invertible(e1.W, "W");

    DataMatrices d;
    d.s0 = e1.s0;
    d.cond_N = e1.cond_N;
    d.cond_W = e1.cond_W;
    // D_E = M N^-1 computed as a solve against N^T on the transposed system.
    d.D_E = e1.N.transpose().partialPivLu().solve(e1.M.transpose()).transpose();
    d.D_A = e1.W.transpose().partialPivLu().solve(e1.V.transpose()).transpose();
    d.D_B = d.D_E * e2.R1 - d.D_A * e2.R0;
    return d;
}

double DataMatrices::scale() const {
    const auto s1 = [](const Matrix& m) {
        return m.size() ? Eigen::JacobiSVD<Matrix>(m).singularValues()(0) : 0.0;
    };
    return std::max({s1(D_E), s1(D_A), s1(D_B)});
}

Experiment3Data run_experiment3(PlantAdapter& plant, const ExperimentConfig& config) {
    const Eigen::Index m = plant.input_dim();
    if (config.T < 1) throw InvalidMatrix("run_experiment3: T must be >= 1");

    Rng rng(Rng::derive(config.seed, kExp3Stream));
    const Matrix u = rng.uniform_matrix(m, config.T, -1.0, 1.0);
    Trajectory traj = plant.run(u);

    Experiment3Data data;
    data.U_minus = traj.inputs;
    data.X_minus = traj.states.leftCols(config.T);
    data.X_plus = traj.states.rightCols(config.T);
    return data;
}

}  // namespace descon
