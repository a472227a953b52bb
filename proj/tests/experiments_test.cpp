#include "descon/experiments.hpp"

#include <doctest.h>

#include "descon/fixtures.hpp"
#include "descon/rng.hpp"
#include "support.hpp"

using namespace descon;

namespace {

ExperimentConfig circuit_config(std::uint64_t seed = 1, double noise = 0.0, int l = 4) {
    ExperimentConfig c;
    c.s0 = 0.5;
    c.l = l;
    c.T = 80;
    c.seed = seed;
    c.noise_scale = noise;
    return c;
}

// Adapter that always starts from a zero slow state (for closed-form cases).
class ZeroStartAdapter : public PlantAdapter {
   public:
    ZeroStartAdapter(DescriptorSystem sys, double s0)
        : sys_(std::move(sys)), sf_(slow_fast_decompose(sys_, s0)) {}
    Eigen::Index state_dim() const override { return sys_.n(); }
    Eigen::Index input_dim() const override { return sys_.m(); }
    Trajectory run(const Matrix& inputs) override {
        return simulate(sys_, sf_, Vector::Zero(sf_.n1), inputs, 0.0, 4242);
    }

   private:
    DescriptorSystem sys_;
    SlowFastForm sf_;
};

}  // namespace

TEST_CASE("exp1 input design is zero-sum") {
    ExperimentConfig c = circuit_config(7);
    SUBCASE("l = 1 forces all-zero inputs") {
        c.l = 1;
        for (const Matrix& u : design_exp1_inputs(c, 4, 2)) {
            CHECK(u.cols() == 1);
            CHECK(u.norm() == 0.0);
        }
    }
    SUBCASE("l = 4 sums to zero componentwise") {
        const auto groups = design_exp1_inputs(c, 4, 3);
        REQUIRE(groups.size() == 4);
        for (const Matrix& u : groups) {
            CHECK(u.rows() == 3);
            CHECK(u.cols() == 4);
            CHECK(u.rowwise().sum().norm() < 1e-14);
        }
    }
    SUBCASE("circuit shape: 4 sub-experiments of 4 steps") {
        const auto groups = design_exp1_inputs(c, 4, 1);
        CHECK(groups.size() == 4);
        CHECK(groups[0].cols() == 4);
    }
}

TEST_CASE("hand recursion oracle: identity plant with zero A and B") {
    // E = I, A = 0, B = 0: x_k = 0 for k >= 1, so M = [x0(i)] and the
    // defining sums reduce to N = s0*M.
    const double s0 = 0.7;
    DescriptorSystem sys{Matrix::Identity(2, 2), Matrix::Zero(2, 2), Matrix::Zero(2, 1)};
    SimulatorAdapter plant(sys, s0, 5, 0.0);
    ExperimentConfig c;
    c.s0 = s0;
    c.l = 3;
    c.T = 10;
    c.seed = 5;
    const Experiment1Data e1 = run_experiment1(plant, c);
    CHECK((e1.N - s0 * e1.M).norm() < 1e-12);
    for (const Trajectory& traj : e1.trajectories) {
        for (Eigen::Index k = 1; k <= traj.steps(); ++k) {
            CHECK(traj.states.col(k).norm() < 1e-12);
        }
    }
}

TEST_CASE("circuit experiment 1 has rank-2 M and well-conditioned N") {
    const DescriptorSystem sys = circuit_fixture();
    SimulatorAdapter plant(sys, 0.5, 1, 0.0);
    const Experiment1Data e1 = run_experiment1(plant, circuit_config(1));
    CHECK(rank_with_tolerance(e1.M).rank == 2);
    CHECK(e1.cond_N < 1e6);
    CHECK(e1.cond_W < 1e6);

    // Defining identities: E N = (s0 E - A) M and (s0 E - A) V = A W.
    const Matrix S = 0.5 * sys.E - sys.A;
    const double scale = std::max(1.0, e1.M.norm());
    CHECK((sys.E * e1.N - S * e1.M).norm() < 1e-8 * scale);
    CHECK((S * e1.V - sys.A * e1.W).norm() < 1e-8 * scale);
}

TEST_CASE("data matrices reproduce the model quantities") {
    RandomSystemOptions opts;
    opts.verdict_diversity = false;
    for (std::uint64_t seed = 100; seed < 112; ++seed) {
        const RandomSystem rs = random_regular_system(seed, opts);
        const RegularityCertificate reg = is_regular(rs.sys, 32, seed);
        REQUIRE(reg.regular);
        const double s0 = reg.witness_shift;
        SimulatorAdapter plant(rs.sys, s0, seed, 0.0);
        ExperimentConfig c;
        c.s0 = s0;
        c.l = 6;
        c.T = static_cast<int>((rs.sys.m() + 1) * rs.sys.n() + rs.sys.m() + 5);
        c.seed = seed;
        const Experiment1Data e1 = run_experiment1(plant, c);
        const Experiment2Data e2 = run_experiment2(plant, c);
        const DataMatrices d = assemble_data_matrices(e1, e2);

        Eigen::PartialPivLU<Matrix> lu(s0 * rs.sys.E - rs.sys.A);
        const Matrix de_true = lu.solve(rs.sys.E);
        const Matrix da_true = lu.solve(rs.sys.A);
        const Matrix db_true = lu.solve(rs.sys.B);
        const double scale = std::max(1.0, de_true.norm());
        CHECK((d.D_E - de_true).norm() < 1e-8 * scale);
        CHECK((d.D_A - da_true).norm() < 1e-8 * scale);
        CHECK((d.D_B - db_true).norm() < 1e-8 * std::max(1.0, db_true.norm()));

        // Algebraic identity D_A = s0 D_E - I.
        const Eigen::Index n = rs.sys.n();
        CHECK((d.D_A - (s0 * d.D_E - Matrix::Identity(n, n))).norm() < 1e-8 * scale);

        // Type premise: rank(M) equals rank(E).
        CHECK(rank_with_tolerance(e1.M).rank == rank_with_tolerance(rs.sys.E).rank);
    }
}

TEST_CASE("experiment 2 under zero B gives zero R0, R1") {
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << 0.4, -0.3;
    DescriptorSystem sys{Matrix::Identity(2, 2), a, Matrix::Zero(2, 1)};
    ZeroStartAdapter plant(sys, 0.5);
    ExperimentConfig c;
    c.l = 4;
    c.T = 10;
    const Experiment2Data e2 = run_experiment2(plant, c);
    CHECK(e2.R0.norm() < 1e-14);
    CHECK(e2.R1.norm() < 1e-14);
}

TEST_CASE("experiment 2 uses exactly the unit input per sub-experiment") {
    RandomSystemOptions opts;
    opts.verdict_diversity = false;
    opts.max_m = 2;
    RandomSystem rs = random_regular_system(3, opts);
    const RegularityCertificate reg = is_regular(rs.sys);
    SimulatorAdapter plant(rs.sys, reg.witness_shift, 3, 0.0);
    ExperimentConfig c;
    c.s0 = reg.witness_shift;
    c.l = 3;
    c.T = 40;
    const Experiment2Data e2 = run_experiment2(plant, c);
    REQUIRE(static_cast<Eigen::Index>(e2.trajectories.size()) == rs.sys.m());
    for (Eigen::Index i = 0; i < rs.sys.m(); ++i) {
        const Matrix& u = e2.trajectories[i].inputs;
        CHECK(u.cols() == c.l + 1);
        Matrix expected = Matrix::Zero(rs.sys.m(), c.l + 1);
        expected.row(i).setOnes();
        CHECK((u - expected).norm() == 0.0);
    }
}

TEST_CASE("experiment 2 identity E R1 = A R0 + B") {
    const DescriptorSystem sys = circuit_fixture();
    SimulatorAdapter plant(sys, 0.5, 2, 0.0);
    const Experiment2Data e2 = run_experiment2(plant, circuit_config(2));
    CHECK((sys.E * e2.R1 - sys.A * e2.R0 - sys.B).norm() < 1e-10);
}

TEST_CASE("experiment 3 minimal window shapes") {
    const DescriptorSystem sys = circuit_fixture();
    SimulatorAdapter plant(sys, 0.5, 9, 0.0);
    ExperimentConfig c = circuit_config(9);
    c.T = 1;
    const Experiment3Data e3 = run_experiment3(plant, c);
    CHECK(e3.U_minus.rows() == 1);
    CHECK(e3.U_minus.cols() == 1);
    CHECK(e3.X_minus.cols() == 1);
    CHECK(e3.X_plus.cols() == 1);
}

TEST_CASE("experiment 3 shapes and stepwise consistency") {
    const DescriptorSystem sys = circuit_fixture();
    SimulatorAdapter plant(sys, 0.5, 3, 0.0);
    const ExperimentConfig c = circuit_config(3);
    const Experiment3Data e3 = run_experiment3(plant, c);
    CHECK(e3.U_minus.cols() == 80);
    CHECK(e3.X_minus.cols() == 80);
    CHECK(e3.X_plus.cols() == 80);
    for (Eigen::Index j = 0; j < e3.U_minus.cols(); ++j) {
        const Vector r = sys.E * e3.X_plus.col(j) - sys.A * e3.X_minus.col(j) -
                         sys.B * e3.U_minus.col(j);
        CHECK(r.norm() < 1e-10);
    }
}

TEST_CASE("experiments are reproducible bit for bit") {
    const DescriptorSystem sys = circuit_fixture();
    SimulatorAdapter plant_a(sys, 0.5, 11, 0.01);
    SimulatorAdapter plant_b(sys, 0.5, 11, 0.01);
    const ExperimentConfig c = circuit_config(11, 0.01);
    const Experiment1Data a = run_experiment1(plant_a, c);
    const Experiment1Data b = run_experiment1(plant_b, c);
    CHECK((a.M - b.M).norm() == 0.0);
    CHECK((a.N - b.N).norm() == 0.0);
    CHECK((a.V - b.V).norm() == 0.0);
    CHECK((a.W - b.W).norm() == 0.0);
}

TEST_CASE("scaling the plant input map scales the data but not the verdict ranks") {
    const DescriptorSystem sys = circuit_fixture();
    DescriptorSystem scaled = sys;
    scaled.B *= 5.0;
    SimulatorAdapter plant(scaled, 0.5, 4, 0.0);
    const Experiment1Data e1 = run_experiment1(plant, circuit_config(4));
    CHECK(rank_with_tolerance(e1.M).rank == 2);
}

TEST_CASE("degenerate data is reported after the resample cap") {
    const DescriptorSystem sys = circuit_fixture();
    SimulatorAdapter plant(sys, 0.5, 1, 0.0);
    ExperimentConfig c = circuit_config(1);
    c.condition_cap = 1.0;  // unreachable: every draw gets resampled
    c.resample_cap = 3;
    CHECK_THROWS_AS(run_experiment1(plant, c), DegenerateData);
}

TEST_CASE("config validation") {
    ExperimentConfig c;
    c.l = 0;
    CHECK_THROWS_AS(c.validate(4, 1), InvalidMatrix);
    c.l = 4;
    c.T = 3;
    CHECK_THROWS_AS(c.validate(4, 1), InvalidMatrix);
    c.T = 9;
    CHECK_NOTHROW(c.validate(4, 1));
}
