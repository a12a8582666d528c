// SPDX-License-Identifier: Apache-2.0
//
// ellopt: verification toolkit for first- and second-order optimality
// conditions of elliptic control problems with the control in the leading
// coefficient.
//
// Subcommands: solve, improve, classify, expand, soc, homogenize,
// decimal-measure, selftest.  Exit codes: 0 success, 2 config error,
// 3 solver failure, 4 optimality-condition violation beyond tolerance.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ellopt/artifacts.hpp"
#include "ellopt/improve.hpp"
#include "ellopt/util.hpp"

namespace {

using namespace ellopt;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitViolation = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<int> mesh;
};

RunConfig effective_config(const CommonArgs& args) {
    RunConfig cfg = args.config_path.empty() ? RunConfig{} : load_config(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed) cfg.seed = *args.seed;
    if (args.threads) cfg.threads = *args.threads;
    if (args.mesh) cfg.mesh_m = *args.mesh;
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON run configuration");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "random seed");
    cmd->add_option("--threads", args.threads, "worker threads");
    cmd->add_option("--mesh", args.mesh, "mesh resolution override");
}

struct PreparedRun {
    RunConfig cfg;
    ProblemBundle bundle;
    ControlField incumbent;
};

PreparedRun prepare(const CommonArgs& args) {
    PreparedRun run;
    run.cfg = effective_config(args);
    run.bundle = build_problem(run.cfg.problem_name, run.cfg.problem_params, run.cfg.mesh_m);
    if (run.cfg.incumbent.kind == "catalog")
        run.incumbent = run.bundle.incumbent;
    else
        run.incumbent = generate_control(run.cfg.incumbent, run.bundle, run.bundle.incumbent,
                                         run.cfg.seed);
    return run;
}

int run_solve(const CommonArgs& args) {
    PreparedRun run = prepare(args);
    RunConfig cfg = run.cfg;
    cfg.candidates.clear();
    cfg.laminate.reset();
    const json manifest = run_pipeline(cfg);
    std::cout << manifest.dump(2) << '\n';
    for (const auto& [stage, status] : manifest["stages"].items())
        if (status.is_string() && status.get<std::string>() != "ok") return kExitSolver;
    return kExitOk;
}

int run_improve(const CommonArgs& args, int max_rounds, double gate) {
    PreparedRun run = prepare(args);
    const ImproveResult res =
        improve_control(run.bundle.problem, run.incumbent, max_rounds, run.cfg.solver, run.cfg.tol_j);
    json out = {{"status", to_string(res.status)},
                {"rounds", res.rounds},
                {"final_violation", res.final_violation},
                {"cost_history", res.cost_history}};
    std::cout << out.dump(2) << '\n';
    if (!run.cfg.out_dir.empty()) {
        std::filesystem::create_directories(run.cfg.out_dir);
        json control = json::array();
        for (int v : res.control) control.push_back(v);
        write_text_file(run.cfg.out_dir + "/improved_control.json",
                        json{{"control", control}}.dump() + "\n");
    }
    return res.final_violation <= gate ? kExitOk : kExitViolation;
}

int run_full(const CommonArgs& args) {
    const RunConfig cfg = effective_config(args);
    const json manifest = run_pipeline(cfg);
    std::cout << manifest.dump(2) << '\n';
    for (const auto& [stage, status] : manifest["stages"].items())
        if (status.is_string() && status.get<std::string>() != "ok") return kExitSolver;
    return kExitOk;
}

int run_classify(const CommonArgs& args) {
    PreparedRun run = prepare(args);
    std::vector<ProbeCandidate> probes;
    for (const CandidateSpec& spec : run.cfg.candidates) {
        ProbeCandidate probe;
        probe.name = spec.name;
        probe.control = generate_control(spec.control, run.bundle, run.incumbent, run.cfg.seed);
        if (spec.direction)
            probe.direction = generate_direction(*spec.direction, run.bundle, run.incumbent,
                                                 probe.control, run.cfg.solver);
        probes.push_back(std::move(probe));
    }
    const SingularityReport report = classify(run.bundle.problem, run.incumbent, probes, run.cfg.solver);
    const json jr = to_json(report);
    validate_schema(singularity_report_schema(), jr);
    std::cout << jr.dump(2) << '\n';
    if (!run.cfg.out_dir.empty()) {
        std::filesystem::create_directories(run.cfg.out_dir);
        write_text_file(run.cfg.out_dir + "/singularity_report.json", jr.dump(2) + "\n");
    }
    return report.max_violation <= 1e-6 ? kExitOk : kExitViolation;
}

int run_probe(const CommonArgs& args, bool expansion_only) {
    PreparedRun run = prepare(args);
    if (run.cfg.candidates.empty()) throw ConfigError("no candidates configured");
    std::filesystem::create_directories(run.cfg.out_dir);

    for (const CandidateSpec& spec : run.cfg.candidates) {
        const ControlField u = generate_control(spec.control, run.bundle, run.incumbent, run.cfg.seed);
        GeneratorSpec dir_spec = spec.direction ? *spec.direction : GeneratorSpec{"select", {}};
        const DirectionField ell =
            generate_direction(dir_spec, run.bundle, run.incumbent, u, run.cfg.solver);

        if (expansion_only) {
            const ExpansionTable table = expansion_probe(run.bundle.problem, run.incumbent, u, ell,
                                                         run.cfg.alphas, run.cfg.solver, run.cfg.threads);
            const std::string csv = expansion_csv(table);
            std::cout << csv;
            write_text_file(run.cfg.out_dir + "/expansion_" + spec.name + ".csv", csv);
        } else {
            const SocReport weak = soc_value(run.bundle.problem, run.incumbent, u, ell, run.cfg.solver);
            json out = {{"candidate", spec.name}, {"weak", to_json(weak)}};
            const SocReport sing = soc_value_singular(run.bundle.problem, run.incumbent, u, run.cfg.solver);
            if (sing.warning.empty()) out["singular"] = to_json(sing);
            std::cout << out.dump(2) << '\n';
            write_text_file(run.cfg.out_dir + "/soc_" + spec.name + ".json", out.dump(2) + "\n");
        }
    }
    return kExitOk;
}

int run_homogenize(const CommonArgs& args) {
    const RunConfig cfg = effective_config(args);
    if (!cfg.laminate) throw ConfigError("homogenize: config has no laminate block");
    if (cfg.epsilons.empty()) throw ConfigError("homogenize: config has no epsilons");
    const Mesh mesh = build_mesh(cfg.mesh_m);
    Laminate lam;
    lam.phase_b = SMat::identity(2) * cfg.laminate->b;
    lam.phase_c = SMat::identity(2) * cfg.laminate->c;
    lam.alpha = cfg.laminate->alpha;
    lam.directions.push_back({cfg.laminate->num, cfg.laminate->den});
    const ElementScalarField g(static_cast<std::size_t>(mesh.element_count()), cfg.laminate->g);
    const auto rows = epsilon_sweep(lam, mesh, g, cfg.epsilons, cfg.solver.cg_rtol, cfg.threads);
    std::vector<std::vector<double>> table;
    for (const SweepRow& r : rows) table.push_back({r.eps, r.l2_error, r.h1_semi_error});
    const std::string csv = csv_table({"eps", "l2_error", "h1_semi_error"}, table);
    std::cout << csv;
    std::filesystem::create_directories(cfg.out_dir);
    write_text_file(cfg.out_dir + "/sweep.csv", csv);
    return kExitOk;
}

int run_decimal_measure(const std::string& nu_str, double alpha, int n) {
    std::vector<long> nu;
    std::string token;
    for (char c : nu_str + ",") {
        if (c == ',') {
            if (!token.empty()) nu.push_back(std::stol(token));
            token.clear();
        } else {
            token.push_back(c);
        }
    }
    const double value = decimal_measure(nu, alpha, n);
    std::cout << format_double(value) << '\n';
    return kExitOk;
}

int run_selftest() {
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::printf("%-40s %s\n", name, ok ? "ok" : "FAIL");
        if (!ok) ++failures;
    };

    check("identity inverse", (spd_inverse(SMat::identity(2)) - SMat::identity(2)).frobenius() < 1e-12);
    check("sqrt diag(4,9)", (spd_sqrt(SMat::diag({4.0, 9.0})) - SMat::diag({2.0, 3.0})).frobenius() < 1e-12);
    check("sphere max aligned",
          std::abs(pair_max_bilinear(Vec{1, 0}, Vec{1, 0}).value - 1.0) < 1e-14);
    check("harmonic identity",
          harmonic_identity_residual(SMat::diag({1.0, 2.0}), SMat::diag({3.0, 1.0}), 0.3) < 1e-12);
    check("decimal measure (1,2)", std::abs(decimal_measure({1, 2}, 0.3, 1000) - 0.3) < 2e-3);

    const Mesh mesh = build_mesh(8);
    check("mesh area", std::abs(integrate(mesh, ElementScalarField(static_cast<std::size_t>(mesh.element_count()), 1.0)) - 1.0) < 1e-12);

    const Problem pb = make_laplace_ms(16, {});
    const ControlField u(static_cast<std::size_t>(pb.mesh.element_count()), 0);
    const StateField y = solve_state(pb, u);
    double err = 0.0;
    for (int e = 0; e < pb.mesh.element_count(); ++e) {
        const auto& c = pb.mesh.centroid[static_cast<std::size_t>(e)];
        const double d = centroid_value(pb.mesh, y, e) - manufactured_solution(c[0], c[1]);
        err += pb.mesh.area[static_cast<std::size_t>(e)] * d * d;
    }
    check("manufactured solve", std::sqrt(err) < 1e-2);
    return failures == 0 ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"elliptic optimal-control optimality-condition toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    int max_rounds = 50;
    double gate = 1e-6;
    std::string nu_str = "1,2";
    double dm_alpha = 0.5;
    int dm_n = 1000;

    auto* solve = app.add_subcommand("solve", "solve state and adjoint, emit fields and heatmaps");
    add_common(solve, args);
    auto* improve = app.add_subcommand("improve", "pointwise control improvement to a Pontryagin point");
    add_common(improve, args);
    improve->add_option("--max-rounds", max_rounds, "improvement round limit");
    improve->add_option("--gate", gate, "violation gate for the exit code");
    auto* classify_cmd = app.add_subcommand("classify", "singularity classification of candidates");
    add_common(classify_cmd, args);
    auto* expand = app.add_subcommand("expand", "relaxed-cost expansion tables");
    add_common(expand, args);
    auto* soc = app.add_subcommand("soc", "second-order condition reports");
    add_common(soc, args);
    auto* hom = app.add_subcommand("homogenize", "laminate epsilon sweep");
    add_common(hom, args);
    auto* dm = app.add_subcommand("decimal-measure", "fractional-part measure estimate");
    dm->add_option("--nu", nu_str, "integer vector, comma separated");
    dm->add_option("--alpha", dm_alpha, "threshold in (0,1)");
    dm->add_option("--n", dm_n, "grid points per axis");
    auto* full = app.add_subcommand("run", "full pipeline from a config");
    add_common(full, args);
    app.add_subcommand("selftest", "quick built-in sanity battery");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return run_solve(args);
        if (improve->parsed()) return run_improve(args, max_rounds, gate);
        if (classify_cmd->parsed()) return run_classify(args);
        if (expand->parsed()) return run_probe(args, true);
        if (soc->parsed()) return run_probe(args, false);
        if (hom->parsed()) return run_homogenize(args);
        if (dm->parsed()) return run_decimal_measure(nu_str, dm_alpha, dm_n);
        if (full->parsed()) return run_full(args);
        return run_selftest();
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& ex) {
        std::cerr << "solver error: " << ex.what() << '\n';
        return kExitSolver;
    }
}
