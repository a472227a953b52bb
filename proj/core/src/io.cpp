#include "descon/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace descon::io {

namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json complex_vector_json(const ComplexVector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back({{"re", v(i).real()}, {"im", v(i).imag()}});
    }
    return out;
}

Matrix matrix_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw InvalidMatrix(std::string(what) + ": expected an array of arrays");
    }
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j[i].size()) != cols) {
            throw InvalidMatrix(std::string(what) + ": ragged rows");
        }
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

json load_json_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    json j;
    in >> j;
    return j;
}

void write_json_file(const json& j, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    out << j.dump(2) << '\n';
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

DescriptorSystem load_system(const std::filesystem::path& file) {
    const json j = load_json_file(file);
    DescriptorSystem sys;
    sys.E = matrix_from_json(j.at("E"), "system.E");
    sys.A = matrix_from_json(j.at("A"), "system.A");
    sys.B = matrix_from_json(j.at("B"), "system.B");
    sys.validate();
    return sys;
}

void save_system(const DescriptorSystem& sys, const std::filesystem::path& file) {
    write_json_file({{"E", matrix_json(sys.E)}, {"A", matrix_json(sys.A)}, {"B", matrix_json(sys.B)}},
                    file);
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write " + file.string());
    const Eigen::Index m = traj.inputs.rows();
    const Eigen::Index n = traj.states.rows();
    out << 'k';
    for (Eigen::Index i = 0; i < m; ++i) out << ",u_" << (i + 1);
    for (Eigen::Index i = 0; i < n; ++i) out << ",x_" << (i + 1);
    out << '\n';
    for (Eigen::Index k = 0; k <= traj.steps(); ++k) {
        out << k;
        for (Eigen::Index i = 0; i < m; ++i) {
            out << ',';
            if (k < traj.steps()) out << format_double(traj.inputs(i, k));
        }
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(traj.states(i, k));
        out << '\n';
    }
}

Trajectory read_trajectory_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw Error("empty trajectory file " + file.string());

    Eigen::Index m = 0, n = 0;
    {
        std::stringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) {
            if (cell.rfind("u_", 0) == 0) ++m;
            if (cell.rfind("x_", 0) == 0) ++n;
        }
    }
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        cells.resize(1 + m + n);
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw Error("trajectory file has no data rows: " + file.string());
    const Eigen::Index L = static_cast<Eigen::Index>(rows.size()) - 1;

    Trajectory traj;
    traj.inputs = Matrix::Zero(m, L);
    traj.states = Matrix::Zero(n, L + 1);
    for (Eigen::Index k = 0; k <= L; ++k) {
        for (Eigen::Index i = 0; i < m; ++i) {
            const std::string& cell = rows[k][1 + i];
            if (k < L) traj.inputs(i, k) = std::stod(cell);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            traj.states(i, k) = std::stod(rows[k][1 + m + i]);
        }
    }
    return traj;
}

void save_bundle(const ExperimentBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const ExperimentConfig& c = bundle.config;
    write_json_file(json{{"s0", c.s0},
                         {"l", c.l},
                         {"T", c.T},
                         {"seed", c.seed},
                         {"noise_scale", c.noise_scale},
                         {"resample_cap", c.resample_cap},
                         {"condition_cap", c.condition_cap}},
                    dir / "config.json");

    if (bundle.e1) {
        for (std::size_t i = 0; i < bundle.e1->trajectories.size(); ++i) {
            char name[48];
            std::snprintf(name, sizeof(name), "exp1_sub_%03zu.csv", i + 1);
            write_trajectory_csv(bundle.e1->trajectories[i], dir / name);
        }
    }
    if (bundle.e2) {
        for (std::size_t i = 0; i < bundle.e2->trajectories.size(); ++i) {
            char name[48];
            std::snprintf(name, sizeof(name), "exp2_sub_%03zu.csv", i + 1);
            write_trajectory_csv(bundle.e2->trajectories[i], dir / name);
        }
    }
    if (bundle.e3) {
        Trajectory traj;
        traj.inputs = bundle.e3->U_minus;
        traj.states = Matrix(bundle.e3->X_minus.rows(), bundle.e3->X_minus.cols() + 1);
        traj.states.leftCols(bundle.e3->X_minus.cols()) = bundle.e3->X_minus;
        traj.states.rightCols(1) = bundle.e3->X_plus.rightCols(1);
        write_trajectory_csv(traj, dir / "exp3.csv");
    }

    json matrices;
    if (bundle.e1) {
        matrices["M"] = matrix_json(bundle.e1->M);
        matrices["N"] = matrix_json(bundle.e1->N);
        matrices["V"] = matrix_json(bundle.e1->V);
        matrices["W"] = matrix_json(bundle.e1->W);
        matrices["cond_N"] = bundle.e1->cond_N;
        matrices["cond_W"] = bundle.e1->cond_W;
    }
    if (bundle.e2) {
        matrices["R0"] = matrix_json(bundle.e2->R0);
        matrices["R1"] = matrix_json(bundle.e2->R1);
    }
    if (bundle.matrices) {
        matrices["D_E"] = matrix_json(bundle.matrices->D_E);
        matrices["D_A"] = matrix_json(bundle.matrices->D_A);
        matrices["D_B"] = matrix_json(bundle.matrices->D_B);
        matrices["s0"] = bundle.matrices->s0;
    }
    write_json_file(matrices, dir / "matrices.json");
}

ExperimentBundle load_bundle(const std::filesystem::path& dir) {
    ExperimentBundle bundle;
    const json cfg = load_json_file(dir / "config.json");
    bundle.config.s0 = cfg.at("s0").get<double>();
    bundle.config.l = cfg.at("l").get<int>();
    bundle.config.T = cfg.at("T").get<int>();
    bundle.config.seed = cfg.at("seed").get<std::uint64_t>();
    bundle.config.noise_scale = cfg.at("noise_scale").get<double>();
    bundle.config.resample_cap = cfg.value("resample_cap", 8);
    bundle.config.condition_cap = cfg.value("condition_cap", 1.0e8);

    if (!std::filesystem::exists(dir / "matrices.json")) return bundle;
    const json matrices = load_json_file(dir / "matrices.json");
    if (matrices.contains("M")) {
        Experiment1Data e1;
        e1.M = matrix_from_json(matrices.at("M"), "bundle.M");
        e1.N = matrix_from_json(matrices.at("N"), "bundle.N");
        e1.V = matrix_from_json(matrices.at("V"), "bundle.V");
        e1.W = matrix_from_json(matrices.at("W"), "bundle.W");
        e1.cond_N = matrices.value("cond_N", 0.0);
        e1.cond_W = matrices.value("cond_W", 0.0);
        e1.s0 = bundle.config.s0;
        bundle.e1 = std::move(e1);
    }
    if (matrices.contains("R0")) {
        Experiment2Data e2;
        e2.R0 = matrix_from_json(matrices.at("R0"), "bundle.R0");
        e2.R1 = matrix_from_json(matrices.at("R1"), "bundle.R1");
        bundle.e2 = std::move(e2);
    }
    if (matrices.contains("D_E")) {
        DataMatrices d;
        d.D_E = matrix_from_json(matrices.at("D_E"), "bundle.D_E");
        d.D_A = matrix_from_json(matrices.at("D_A"), "bundle.D_A");
        d.D_B = matrix_from_json(matrices.at("D_B"), "bundle.D_B");
        d.s0 = matrices.value("s0", bundle.config.s0);
        if (bundle.e1) {
            d.cond_N = bundle.e1->cond_N;
            d.cond_W = bundle.e1->cond_W;
        }
        bundle.matrices = std::move(d);
    }
    if (std::filesystem::exists(dir / "exp3.csv")) {
        const Trajectory traj = read_trajectory_csv(dir / "exp3.csv");
        Experiment3Data e3;
        const Eigen::Index T = traj.steps();
        e3.U_minus = traj.inputs;
        e3.X_minus = traj.states.leftCols(T);
        e3.X_plus = traj.states.rightCols(T);
        bundle.e3 = std::move(e3);
    }
    return bundle;
}

std::string matrix_to_json(const Matrix& m) { return matrix_json(m).dump(); }

std::string to_json(const TypeVerdict& v) {
    json j{{"kind", v.kind == TypeKind::Normal ? "normal" : "descriptor"},
           {"rank_E_estimate", v.rank_E_estimate},
           {"singular_values", vector_json(v.singular_values)},
           {"delta_used", v.delta_used},
           {"method", v.method == RankMethod::ExactRank ? "exact_rank" : "svd_threshold"}};
    return j.dump();
}

std::string to_json(const RankCheck& check) {
    json j{{"ok", check.ok},
           {"rank", check.decision.rank},
           {"expected", check.expected},
           {"singular_values", vector_json(check.decision.singular_values)},
           {"tolerance", check.decision.tolerance_used}};
    return j.dump();
}

std::string to_json(const ControllabilityReport& report) {
    json j{{"n", report.n},
           {"rank_E", report.rank_E},
           {"c_controllable", json::parse(to_json(report.c_controllable))},
           {"causal", json::parse(to_json(report.causal))},
           {"y_controllable", json::parse(to_json(report.y_controllable))},
           {"r_controllable", json::parse(to_json(report.r_controllable))},
           {"rel_tolerance", report.rel_tolerance}};
    return j.dump();
}

std::string to_json(const StabilizationResult& result) {
    json j{{"K_s", matrix_json(result.K_s)},
           {"K", matrix_json(result.K)},
           {"P", matrix_json(result.P)},
           {"n1", result.n1},
           {"n2", result.n2},
           {"lmi_min_eig", result.lmi_min_eig},
           {"sym_residual", result.sym_residual},
           {"spectral_radius", result.spectral_radius},
           {"closed_loop_eigs", complex_vector_json(result.closed_loop_eigs)}};
    return j.dump();
}

std::string to_json(const ClosedLoopCertificate& cert) {
    json j{{"pencil_eigs", complex_vector_json(cert.pencil_eigs)},
           {"max_modulus", cert.max_modulus},
           {"stable", cert.stable},
           {"decay_ratio", cert.decay_ratio},
           {"witness_shift", cert.witness_shift}};
    return j.dump();
}

void save_gains(const StabilizationResult& result, const std::filesystem::path& file) {
    write_json_file(json::parse(to_json(result)), file);
}

}  // namespace descon::io
