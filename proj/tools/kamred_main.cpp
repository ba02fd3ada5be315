// kamred: almost-reducibility engine for quasi-periodic cocycles near a
// constant coefficient matrix.
//
//   kamred check  --config cfg.json
//   kamred run    --config cfg.json [--mode M] [--target-eps E]
//                 [--max-steps K] [--seed S] --out DIR
//   kamred verify --run DIR [--T 10] [--h 1e-3] [--grid 32] [--null-conjugacy]
//   kamred report --run DIR
//
// Exit codes: 0 success / all checks pass, 1 validation or verification
// failure, 2 run step failure or missing artifacts.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "kamred/io.hpp"
#include "kamred/verify.hpp"

namespace fs = std::filesystem;
using namespace kamred;

namespace {

int cmd_check(const std::string &config_path) {
    ProblemConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const std::exception &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    bool ok = true;

    const auto dio = diophantine_check(cfg.params.dd, 200);
    std::cout << "diophantine margin (N=200): " << format_g17(dio.margin) << "\n";
    if (!dio.pass()) {
        ok = false;
        const auto &v = dio.violations.front();
        std::cout << "FAIL diophantine: resonance at m = (";
        for (size_t i = 0; i < v.m.doubled.size(); ++i)
            std::cout << (i ? "," : "") << v.m.doubled[i] / 2.0;
        std::cout << "), |<m,omega>| = " << format_g17(v.value) << " < " << format_g17(v.bound)
                  << "\n";
    }

    const auto amem = algebra_membership(cfg.F, cfg.group, 1e-8);
    std::cout << "algebra membership (" << to_string(cfg.group) << "): worst violation "
              << format_g17(amem.violation) << "\n";
    if (!amem.ok) {
        ok = false;
        std::cout << "FAIL algebra: " << amem.detail << "\n";
    }
    const auto amemA = algebra_membership(cfg.A, cfg.group, 1e-8);
    if (!amemA.ok) {
        ok = false;
        std::cout << "FAIL algebra (constant part): " << amemA.detail << "\n";
    }

    bool periodic = true;
    for (const auto &[m, M] : cfg.F.coeffs())
        if (!m.is_integral()) periodic = false;
    std::cout << "periodicity (integer support): " << (periodic ? "pass" : "FAIL") << "\n";
    ok = ok && periodic;

    const double S = gevrey_upper_bound(cfg.F, cfg.r);
    std::cout << "S_r(F) = " << format_g17(S) << " (gate " << format_g17(cfg.params.eps0_gate)
              << ")\n";
    if (cfg.params.mode == KamMode::Practical && S > cfg.params.eps0_gate) {
        ok = false;
        std::cout << "FAIL smallness gate\n";
    }

    std::cout << (ok ? "check: all validations pass\n" : "check: validation failed\n");
    return ok ? 0 : 1;
}

int cmd_run(const std::string &config_path, const std::string &mode, double target_eps,
            int max_steps, const std::string &out_dir, std::uint64_t seed, bool have_seed) {
    ProblemConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const std::exception &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    if (!mode.empty())
        cfg.params.mode = mode == "faithful" ? KamMode::Faithful : KamMode::Practical;
    if (target_eps > 0) cfg.params.target_eps = target_eps;
    if (max_steps >= 0) cfg.params.max_steps = max_steps;
    if (have_seed) cfg.seed = seed;

    fs::create_directories(out_dir);
    if (cfg.params.max_steps == 0) {
        std::cerr << "run: no steps permitted (max-steps 0)\n";
        return 2;
    }

    RunResult res;
    try {
        res = run(cfg.A, cfg.F, cfg.params);
    } catch (const StepFailure &e) {
        std::cerr << e.what() << "\n";
        write_text((fs::path(out_dir) / "forensics.txt").string(), e.what());
        return 2;
    }

    write_text((fs::path(out_dir) / "config_echo.json").string(), config_to_json(cfg).dump(2));
    write_text((fs::path(out_dir) / "report.csv").string(), report_csv(res.rows));
    write_text((fs::path(out_dir) / "report.json").string(), report_json(res, cfg).dump(2));
    write_text((fs::path(out_dir) / "Z.json").string(), torus_fn_file(res.Z).dump(2));
    write_text((fs::path(out_dir) / "Abar.json").string(), torus_fn_file(res.Abar).dump(2));
    write_text((fs::path(out_dir) / "Fbar.json").string(), torus_fn_file(res.Fbar).dump(2));
    write_text((fs::path(out_dir) / "Psi.json").string(), torus_fn_file(res.Psi).dump(2));
    write_text((fs::path(out_dir) / "Aeps.json").string(), matrix_to_json(res.A_eps).dump(2));

    std::cout << res.status << "; steps = " << res.steps
              << ", budget = " << format_g17(res.budget) << "\n";
    return res.reached_target ? 0 : 2;
}

int cmd_verify(const std::string &run_dir, double T, double h, int grid, bool null_conjugacy) {
    ProblemConfig cfg;
    TorusMatFn Z, Abar, Fbar, Psi;
    Mat Aeps;
    double budget = 0.0;
    try {
        cfg = config_from_json(read_json((fs::path(run_dir) / "config_echo.json").string()));
        Z = torus_fn_from_file(read_json((fs::path(run_dir) / "Z.json").string()));
        Abar = torus_fn_from_file(read_json((fs::path(run_dir) / "Abar.json").string()));
        Fbar = torus_fn_from_file(read_json((fs::path(run_dir) / "Fbar.json").string()));
        Psi = torus_fn_from_file(read_json((fs::path(run_dir) / "Psi.json").string()));
        Aeps = matrix_from_json(read_json((fs::path(run_dir) / "Aeps.json").string()));
        budget = read_json((fs::path(run_dir) / "report.json").string()).at("budget").get<double>();
    } catch (const std::exception &e) {
        std::cerr << "verify: missing or unreadable artifacts: " << e.what() << "\n";
        return 2;
    }
    if (null_conjugacy) Z = TorusMatFn::identity(cfg.n, cfg.d);

    RunArtifacts art{cfg.A, cfg.F, Z, Abar, Fbar, Psi, Aeps, budget, cfg.group, cfg.omega};
    VerifyOptions vopts;
    vopts.T = T;
    vopts.h = h;
    vopts.grid = grid;
    const VerifyResult v = verify_artifacts(art, vopts);

    json out{{"conjugacy_residual", v.conjugacy_residual},
             {"budget", budget},
             {"conjugacy_ok", v.conjugacy_ok},
             {"cross_check", v.cross_check},
             {"cross_check_ok", v.cross_check_ok},
             {"group_violation", v.group_violation},
             {"group_ok", v.group_ok},
             {"reducibility_defect", v.reducibility_defect},
             {"reducibility_ok", v.reducibility_ok},
             {"pass", v.pass()}};
    write_text((fs::path(run_dir) / "verify.json").string(), out.dump(2));
    std::cout << out.dump(2) << "\n";
    return v.pass() ? 0 : 1;
}

int cmd_report(const std::string &run_dir) {
    try {
        std::cout << read_json((fs::path(run_dir) / "report.json").string()).dump(2) << "\n";
    } catch (const std::exception &e) {
        std::cerr << "report: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"kamred: KAM almost-reducibility engine for quasi-periodic cocycles"};
    app.set_help_flag("--help", "print help");  // frees -h / --h for the step size
    app.require_subcommand(1);

    std::string config_path, out_dir, run_dir, mode;
    double target_eps = -1.0, T = 10.0, h = 1e-3;
    int max_steps = -1, grid = 32;
    std::uint64_t seed = 0;
    bool null_conjugacy = false;

    auto *check = app.add_subcommand("check", "validate a problem configuration");
    check->add_option("--config", config_path)->required();

    auto *runc = app.add_subcommand("run", "run the almost-reducibility iteration");
    runc->add_option("--config", config_path)->required();
    runc->add_option("--mode", mode, "faithful|practical");
    runc->add_option("--target-eps", target_eps);
    runc->add_option("--max-steps", max_steps);
    auto *seed_opt = runc->add_option("--seed", seed);
    runc->add_option("--out", out_dir)->required();

    auto *ver = app.add_subcommand("verify", "verify stored run artifacts dynamically");
    ver->add_option("--run", run_dir)->required();
    ver->add_option("--T", T);
    ver->add_option("--h", h);
    ver->add_option("--grid", grid);
    ver->add_flag("--null-conjugacy", null_conjugacy,
                  "replace Z by the identity (negative control)");

    auto *rep = app.add_subcommand("report", "print the stored run report");
    rep->add_option("--run", run_dir)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return cmd_check(config_path);
        if (runc->parsed())
            return cmd_run(config_path, mode, target_eps, max_steps, out_dir, seed,
                           seed_opt->count() > 0);
        if (ver->parsed()) return cmd_verify(run_dir, T, h, grid, null_conjugacy);
        if (rep->parsed()) return cmd_report(run_dir);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
