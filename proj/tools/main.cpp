// Command-line front end for the descriptor-system data-driven pipeline:
// simulate a plant, run the three data experiments, identify the system
// type, test controllability, synthesize a stabilizing gain, and verify
// data verdicts against the model-based oracle.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "descon/analysis.hpp"
#include "descon/experiments.hpp"
#include "descon/fixtures.hpp"
#include "descon/io.hpp"
#include "descon/model.hpp"
#include "descon/rng.hpp"
#include "descon/stabilization.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace descon;

// Exit codes: 0 ok, 1 usage, 2 numeric refusal, 3 infeasible, 4 internal.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRefused = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInternal = 4;

struct RunConfig {
    std::string system_file;
    std::string bundle_dir;
    std::string config_file;
    std::string output_dir;
    double s0 = 0.5;
    int l = 4;
    int T = 80;
    std::uint64_t seed = 1;
    double noise_scale = 0.0;
    std::string delta = "auto";
    double rank_tol = kAnalysisRankRel;
    double sym_tol = 1.0e-8;
    double eps_pd = 1.0e-6;
    int steps = 200;
    int count = 100;  // campaign size

    fs::path out() const {
        if (!output_dir.empty()) return output_dir;
        if (const char* env = std::getenv("DESCON_OUTPUT_DIR")) return env;
        return ".";
    }

    ExperimentConfig experiment() const {
        ExperimentConfig c;
        c.s0 = s0;
        c.l = l;
        c.T = T;
        c.seed = seed;
        c.noise_scale = noise_scale;
        return c;
    }

    json echo() const {
        return json{{"system_file", system_file}, {"bundle_dir", bundle_dir},
                    {"s0", s0},                   {"l", l},
                    {"T", T},                     {"seed", seed},
                    {"noise_scale", noise_scale}, {"delta", delta},
                    {"rank_tol", rank_tol},       {"sym_tol", sym_tol},
                    {"eps_pd", eps_pd},           {"steps", steps}};
    }
};

// Config-file values become defaults; explicit flags win.
void apply_config_file(RunConfig& cfg) {
    if (cfg.config_file.empty()) return;
    std::ifstream in(cfg.config_file);
    if (!in) throw Error("cannot open config file " + cfg.config_file);
    json j;
    in >> j;
    if (j.contains("system_file") && cfg.system_file.empty())
        cfg.system_file = j["system_file"].get<std::string>();
    if (j.contains("bundle_dir") && cfg.bundle_dir.empty())
        cfg.bundle_dir = j["bundle_dir"].get<std::string>();
    if (j.contains("output_dir") && cfg.output_dir.empty())
        cfg.output_dir = j["output_dir"].get<std::string>();
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

// The persisted report must be byte-identical across reruns with the same
// config and seed, so wall-clock fields stay on stdout only.
void emit_report(json report, const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out());
    json persisted = report;
    persisted.erase("elapsed_seconds");
    std::ofstream out(cfg.out() / name);
    out << persisted.dump(2) << '\n';
    std::cout << report.dump(2) << '\n';
}

DescriptorSystem require_system(const RunConfig& cfg) {
    if (cfg.system_file.empty()) {
        throw CLI::ValidationError("--system", "this subcommand needs a system file");
    }
    return io::load_system(cfg.system_file);
}

struct PipelineData {
    DataMatrices d;
    Experiment1Data e1;
    Experiment2Data e2;
    std::optional<Experiment3Data> e3;
};

// Runs experiments against the simulator, or ingests a recorded bundle.
PipelineData acquire_data(const RunConfig& cfg, bool need_exp3) {
    PipelineData out;
    if (!cfg.bundle_dir.empty()) {
        io::ExperimentBundle bundle = io::load_bundle(cfg.bundle_dir);
        if (!bundle.e1 || !bundle.e2 || !bundle.matrices) {
            throw Error("bundle is missing experiment data: " + cfg.bundle_dir);
        }
        if (need_exp3 && !bundle.e3) throw Error("bundle has no exp3.csv: " + cfg.bundle_dir);
        out.e1 = std::move(*bundle.e1);
        out.e2 = std::move(*bundle.e2);
        out.e3 = std::move(bundle.e3);
        out.d = std::move(*bundle.matrices);
        return out;
    }
    const DescriptorSystem sys = require_system(cfg);
    SimulatorAdapter plant(sys, cfg.s0, cfg.seed, cfg.noise_scale);
    const ExperimentConfig ec = cfg.experiment();
    out.e1 = run_experiment1(plant, ec);
    out.e2 = run_experiment2(plant, ec);
    out.d = assemble_data_matrices(out.e1, out.e2);
    if (need_exp3) out.e3 = run_experiment3(plant, ec);
    return out;
}

TypeVerdict run_identify(const RunConfig& cfg, const PipelineData& data) {
    const Eigen::Index n = data.e1.M.rows();
    if (cfg.delta == "auto" && cfg.noise_scale == 0.0) {
        return identify_type(data.e1.M, n);
    }
    const double delta = cfg.delta == "auto" ? kAutoDelta : std::stod(cfg.delta);
    return identify_type_threshold(data.e1.M, n, delta);
}

int cmd_simulate(const RunConfig& cfg) {
    Timer timer;
    const DescriptorSystem sys = require_system(cfg);
    const RegularityCertificate cert = is_regular(sys);
    if (!cert.regular) throw NotRegular("system pencil appears irregular");
    const SlowFastForm sf = slow_fast_decompose(sys, cfg.s0);
    Rng rng(Rng::derive(cfg.seed, 0x51));
    const Vector x0_slow = rng.uniform_vector(sf.n1, -1.0, 1.0);
    const Matrix inputs = rng.uniform_matrix(sys.m(), cfg.steps, -1.0, 1.0);
    const Trajectory traj = simulate(sys, sf, x0_slow, inputs, cfg.noise_scale, rng.raw());
    fs::create_directories(cfg.out());
    io::write_trajectory_csv(traj, cfg.out() / "trajectory.csv");
    json report{{"command", "simulate"},
                {"steps", cfg.steps},
                {"residual", step_residual(sys, traj)},
                {"trajectory", (cfg.out() / "trajectory.csv").string()},
                {"elapsed_seconds", timer.seconds()},
                {"config", cfg.echo()}};
    emit_report(report, cfg, "report.json");
    return kExitOk;
}

// Each expN writes its slice into the bundle directory, merging with what
// is already there; the data matrices appear once experiments 1 and 2 are
// both present.
int cmd_experiments(const RunConfig& cfg, int which) {
    Timer timer;
    const DescriptorSystem sys = require_system(cfg);
    SimulatorAdapter plant(sys, cfg.s0, cfg.seed, cfg.noise_scale);
    const ExperimentConfig ec = cfg.experiment();

    io::ExperimentBundle bundle;
    if (fs::exists(cfg.out() / "config.json")) bundle = io::load_bundle(cfg.out());
    bundle.config = ec;
    if (which == 1) bundle.e1 = run_experiment1(plant, ec);
    if (which == 2) bundle.e2 = run_experiment2(plant, ec);
    if (which == 3) bundle.e3 = run_experiment3(plant, ec);
    if (bundle.e1 && bundle.e2) {
        bundle.matrices = assemble_data_matrices(*bundle.e1, *bundle.e2);
    }
    io::save_bundle(bundle, cfg.out());

    json report{{"command", "exp" + std::to_string(which)},
                {"bundle", cfg.out().string()},
                {"elapsed_seconds", timer.seconds()},
                {"config", cfg.echo()}};
    if (bundle.e1) {
        report["cond_N"] = bundle.e1->cond_N;
        report["cond_W"] = bundle.e1->cond_W;
    }
    emit_report(report, cfg, "report.json");
    return kExitOk;
}

int cmd_identify(const RunConfig& cfg) {
    Timer timer;
    const PipelineData data = acquire_data(cfg, /*need_exp3=*/false);
    const TypeVerdict verdict = run_identify(cfg, data);
    json report{{"command", "identify"},
                {"type", json::parse(io::to_json(verdict))},
                {"elapsed_seconds", timer.seconds()},
                {"config", cfg.echo()}};
    emit_report(report, cfg, "report.json");
    std::cout << (verdict.kind == TypeKind::Normal ? "normal" : "descriptor")
              << " system (rank estimate " << verdict.rank_E_estimate << ")\n";
    return kExitOk;
}

int cmd_controllability(const RunConfig& cfg) {
    Timer timer;
    const PipelineData data = acquire_data(cfg, /*need_exp3=*/false);
    const Eigen::Index n = data.e1.M.rows();
    const TypeVerdict verdict = run_identify(cfg, data);
    const ControllabilityReport rep =
        analyze_controllability(data.d, n, verdict.rank_E_estimate, cfg.rank_tol);
    json report{{"command", "controllability"},
                {"type", json::parse(io::to_json(verdict))},
                {"controllability", json::parse(io::to_json(rep))},
                {"elapsed_seconds", timer.seconds()},
                {"config", cfg.echo()}};
    emit_report(report, cfg, "report.json");
    std::cout << "C: " << (rep.c_controllable.ok ? "yes" : "no")
              << ", causal: " << (rep.causal.ok ? "yes" : "no")
              << ", Y: " << (rep.y_controllable.ok ? "yes" : "no")
              << ", R: " << (rep.r_controllable.ok ? "yes" : "no") << '\n';
    return kExitOk;
}

StabilizationResult run_stabilize(const RunConfig& cfg, const PipelineData& data,
                                  TypeVerdict* verdict_out) {
    const Eigen::Index n = data.e1.M.rows();
    const TypeVerdict verdict = run_identify(cfg, data);
    if (verdict_out) *verdict_out = verdict;

    DataMatrices d = data.d;
    if (verdict.method == RankMethod::SvdThreshold) {
        d.D_E = truncate_to_rank(d.D_E, verdict.rank_E_estimate);
    }
    const SlowDataset sd = data_decompose(d, *data.e3);
    LmiOptions opts;
    opts.eps_pd = cfg.eps_pd;
    opts.sym_tol = cfg.sym_tol;
    const Matrix phi = solve_stabilizing_lmi(sd, opts);
    return assemble_gain(sd, phi, opts);
}

int cmd_stabilize(const RunConfig& cfg) {
    Timer timer;
    const PipelineData data = acquire_data(cfg, /*need_exp3=*/true);
    TypeVerdict verdict;
    const StabilizationResult result = run_stabilize(cfg, data, &verdict);

    fs::create_directories(cfg.out());
    io::save_gains(result, cfg.out() / "gains.json");
    json report{{"command", "stabilize"},
                {"type", json::parse(io::to_json(verdict))},
                {"stabilization", json::parse(io::to_json(result))},
                {"elapsed_seconds", timer.seconds()},
                {"config", cfg.echo()}};

    if (!cfg.system_file.empty()) {
        const DescriptorSystem sys = io::load_system(cfg.system_file);
        const ClosedLoopCertificate cert = certify_closed_loop(sys, result.K, cfg.steps, cfg.seed);
        report["closed_loop"] = json::parse(io::to_json(cert));
        Trajectory traj;
        traj.inputs = Matrix::Zero(1, cert.states.cols() - 1);
        traj.states = cert.states;
        io::write_trajectory_csv(traj, cfg.out() / "closed_loop.csv");
    }
    emit_report(report, cfg, "report.json");
    std::cout << "spectral radius " << result.spectral_radius << ", LMI min eig "
              << result.lmi_min_eig << '\n';
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
    Timer timer;
    const DescriptorSystem sys = require_system(cfg);
    const PipelineData data = acquire_data(cfg, /*need_exp3=*/true);
    const Eigen::Index n = sys.n();

    const TypeVerdict verdict = run_identify(cfg, data);
    const ControllabilityReport data_rep =
        analyze_controllability(data.d, n, verdict.rank_E_estimate, cfg.rank_tol);
    const ControllabilityReport oracle_rep = oracle_report(sys, cfg.s0, cfg.rank_tol);

    TypeVerdict dummy;
    const StabilizationResult result = run_stabilize(cfg, data, &dummy);
    const ClosedLoopCertificate cert = certify_closed_loop(sys, result.K, cfg.steps, cfg.seed);

    // Data-side closed-loop eigenvalues must agree with the pencil spectrum.
    auto sorted_moduli = [](const ComplexVector& v) {
        std::vector<double> out(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = std::abs(v(i));
        std::sort(out.begin(), out.end());
        return out;
    };
    const auto data_eigs = sorted_moduli(result.closed_loop_eigs);
    const auto pencil_eigs = sorted_moduli(cert.pencil_eigs);
    bool eigs_agree = data_eigs.size() == pencil_eigs.size();
    for (std::size_t i = 0; eigs_agree && i < data_eigs.size(); ++i) {
        eigs_agree = std::abs(data_eigs[i] - pencil_eigs[i]) < 1e-6;
    }

    const bool type_agree = (verdict.rank_E_estimate == oracle_rep.rank_E);
    const bool verdicts_agree =
        data_rep.c_controllable.ok == oracle_rep.c_controllable.ok &&
        data_rep.causal.ok == oracle_rep.causal.ok &&
        data_rep.y_controllable.ok == oracle_rep.y_controllable.ok &&
        data_rep.r_controllable.ok == oracle_rep.r_controllable.ok;
    const bool agree = type_agree && verdicts_agree && eigs_agree && cert.stable;

    json report{{"command", "verify"},
                {"type", json::parse(io::to_json(verdict))},
                {"data_report", json::parse(io::to_json(data_rep))},
                {"oracle_report", json::parse(io::to_json(oracle_rep))},
                {"stabilization", json::parse(io::to_json(result))},
                {"closed_loop", json::parse(io::to_json(cert))},
                {"type_agree", type_agree},
                {"verdicts_agree", verdicts_agree},
                {"closed_loop_eigs_agree", eigs_agree},
                {"agreement", agree},
                {"elapsed_seconds", timer.seconds()},
                {"config", cfg.echo()}};
    emit_report(report, cfg, "report.json");
    std::cout << (agree ? "data and oracle agree" : "DISAGREEMENT between data and oracle")
              << '\n';
    return agree ? kExitOk : kExitInternal;
}

int cmd_campaign(const RunConfig& cfg) {
    Timer timer;
    int mismatches = 0;
    for (int i = 1; i <= cfg.count; ++i) {
        const std::uint64_t seed = Rng::derive(cfg.seed, 0xCA0 + i);
        const RandomSystem rand_sys = random_regular_system(seed);
        const RegularityCertificate reg = is_regular(rand_sys.sys, 32, seed);
        if (!reg.regular) continue;
        const double s0 = reg.witness_shift;
        try {
            SimulatorAdapter plant(rand_sys.sys, s0, seed, 0.0);
            ExperimentConfig ec;
            ec.s0 = s0;
            ec.l = 6;
            ec.seed = seed;
            ec.T = static_cast<int>((rand_sys.sys.m() + 1) * rand_sys.sys.n() +
                                    rand_sys.sys.m() + 10);
            const Experiment1Data e1 = run_experiment1(plant, ec);
            const Experiment2Data e2 = run_experiment2(plant, ec);
            const DataMatrices d = assemble_data_matrices(e1, e2);
            const TypeVerdict verdict = identify_type(e1.M, rand_sys.sys.n());
            const ControllabilityReport data_rep =
                analyze_controllability(d, rand_sys.sys.n(), verdict.rank_E_estimate);
            const ControllabilityReport oracle_rep = oracle_report(rand_sys.sys, s0);
            const bool agree = verdict.rank_E_estimate == oracle_rep.rank_E &&
                               data_rep.c_controllable.ok == oracle_rep.c_controllable.ok &&
                               data_rep.causal.ok == oracle_rep.causal.ok &&
                               data_rep.y_controllable.ok == oracle_rep.y_controllable.ok &&
                               data_rep.r_controllable.ok == oracle_rep.r_controllable.ok;
            if (!agree) {
                ++mismatches;
                std::cout << "mismatch at seed index " << i << '\n';
            }
        } catch (const Error& err) {
            ++mismatches;
            std::cout << "error at seed index " << i << ": " << err.what() << '\n';
        }
    }
    json report{{"command", "campaign"},
                {"count", cfg.count},
                {"mismatches", mismatches},
                {"elapsed_seconds", timer.seconds()},
                {"config", cfg.echo()}};
    emit_report(report, cfg, "report.json");
    std::cout << "campaign: " << (cfg.count - mismatches) << "/" << cfg.count << " agree\n";
    return mismatches == 0 ? kExitOk : kExitInternal;
}

void add_common_flags(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--system", cfg.system_file, "system JSON file (E, A, B)");
    cmd->add_option("--bundle", cfg.bundle_dir, "recorded experiment bundle directory");
    cmd->add_option("--config", cfg.config_file, "JSON config file (flags take precedence)");
    cmd->add_option("--out", cfg.output_dir, "output directory (default $DESCON_OUTPUT_DIR or .)");
    cmd->add_option("--s0", cfg.s0, "pencil shift");
    cmd->add_option("--l", cfg.l, "steps per sub-experiment");
    cmd->add_option("--T", cfg.T, "excitation window length");
    cmd->add_option("--seed", cfg.seed, "RNG seed");
    cmd->add_option("--noise-scale", cfg.noise_scale, "system noise amplitude");
    cmd->add_option("--delta", cfg.delta, "noise threshold: 'auto' or a value");
    cmd->add_option("--rank-tol", cfg.rank_tol, "relative rank tolerance");
    cmd->add_option("--sym-tol", cfg.sym_tol, "certificate symmetry tolerance");
    cmd->add_option("--eps-pd", cfg.eps_pd, "certificate positivity margin");
    cmd->add_option("--steps", cfg.steps, "simulation steps");
    cmd->add_option("--count", cfg.count, "campaign size");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data-driven identification, controllability analysis and stabilization "
                 "of linear discrete-time descriptor systems"};
    app.require_subcommand(1);

    RunConfig cfg;
    const std::pair<const char*, const char*> subs[] = {
        {"simulate", "simulate a plant and write a trajectory CSV"},
        {"exp1", "run experiment 1 (zero-sum inputs) into a bundle"},
        {"exp2", "run experiment 2 (unit constant inputs) into a bundle"},
        {"exp3", "run experiment 3 (excitation window) into a bundle"},
        {"identify", "identify normal vs. descriptor type from data"},
        {"controllability", "run data-side controllability tests"},
        {"stabilize", "synthesize a stabilizing state-feedback gain"},
        {"verify", "compare data verdicts against the model-based oracle"},
        {"campaign", "randomized data-vs-oracle equivalence campaign"},
    };
    for (const auto& [name, help] : subs) {
        add_common_flags(app.add_subcommand(name, help), cfg);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        apply_config_file(cfg);
        if (app.got_subcommand("simulate")) return cmd_simulate(cfg);
        if (app.got_subcommand("exp1")) return cmd_experiments(cfg, 1);
        if (app.got_subcommand("exp2")) return cmd_experiments(cfg, 2);
        if (app.got_subcommand("exp3")) return cmd_experiments(cfg, 3);
        if (app.got_subcommand("identify")) return cmd_identify(cfg);
        if (app.got_subcommand("controllability")) return cmd_controllability(cfg);
        if (app.got_subcommand("stabilize")) return cmd_stabilize(cfg);
        if (app.got_subcommand("verify")) return cmd_verify(cfg);
        if (app.got_subcommand("campaign")) return cmd_campaign(cfg);
        return kExitUsage;
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const AmbiguousSpectrum& e) {
        std::cerr << "refused: " << e.what() << '\n';
        return kExitRefused;
    } catch (const DegenerateData& e) {
        std::cerr << "refused: " << e.what() << '\n';
        return kExitRefused;
    } catch (const LmiInfeasible& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    }
}
