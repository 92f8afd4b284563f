// Batch front end: parse process specs, dispatch checks, emit reports and
// plot-ready tables.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include <CLI11.hpp>

#include "levy/process_spec.hpp"
#include "levy/runner.hpp"
#include "levy/simulate.hpp"

namespace {

levy::SimConfig sim_from_flags(double horizon, double dt, long paths, double delta,
                               std::uint64_t seed, int threads, const std::string& mode) {
    levy::SimConfig cfg;
    cfg.horizon = horizon;
    cfg.dt = dt;
    cfg.paths = paths;
    cfg.delta = delta;
    cfg.seed = seed;
    cfg.threads = threads;
    if (mode == "discard")
        cfg.mode = levy::SmallJumpMode::discard;
    else if (mode == "compensate_drift")
        cfg.mode = levy::SmallJumpMode::compensate_drift;
    else
        cfg.mode = levy::SmallJumpMode::gaussian_approx;
    return cfg;
}

std::string default_out() {
    if (const char* env = std::getenv("LEVYCHECK_OUT")) return env;
    return ".";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Levy process toolkit: exponents, ensembles and theorem checks"};
    app.require_subcommand(1);

    std::string spec_path, plan_path, out_dir = default_out();
    std::uint64_t seed = 1;
    long paths = 10000;
    double dt = 0.0, delta = 0.1, horizon = 1.0;
    int threads = 1;
    std::string mode = "gaussian_approx";

    auto add_sim_flags = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "RNG seed recorded in all outputs");
        sub->add_option("--paths", paths, "Monte Carlo path count");
        sub->add_option("--dt", dt, "grid step (default: horizon / 1024)");
        sub->add_option("--delta", delta, "small-jump cutoff in (0,1]");
        sub->add_option("--horizon", horizon, "time horizon");
        sub->add_option("--threads", threads, "worker threads (results identical)");
        sub->add_option("--mode", mode,
                        "small-jump mode: discard|compensate_drift|gaussian_approx");
        sub->add_option("--out", out_dir, "output directory (env LEVYCHECK_OUT)");
    };

    // psi: tabulate the characteristic exponent over a frequency grid.
    auto* psi_cmd = app.add_subcommand("psi", "evaluate the characteristic exponent");
    psi_cmd->add_option("--spec", spec_path, "process spec JSON")->required();
    double xi_max = 8.0;
    int xi_count = 33;
    psi_cmd->add_option("--xi-max", xi_max, "half-width of the frequency grid");
    psi_cmd->add_option("--xi-count", xi_count, "grid points per axis");
    add_sim_flags(psi_cmd);

    // check: run a plan (or an inline checks list against one spec).
    auto* check_cmd = app.add_subcommand("check", "run verification checks");
    check_cmd->add_option("--plan", plan_path, "plan JSON (spec + checks)");
    check_cmd->add_option("--spec", spec_path, "process spec JSON (with --checks)");
    std::string checks_csv;
    check_cmd->add_option("--checks", checks_csv,
                          "comma-separated checks when using --spec");
    add_sim_flags(check_cmd);

    // simulate: dump a path ensemble.
    auto* sim_cmd = app.add_subcommand("simulate", "sample a path ensemble and dump it");
    sim_cmd->add_option("--spec", spec_path, "process spec JSON")->required();
    add_sim_flags(sim_cmd);

    // lattice / transience single-check conveniences.
    auto* lat_cmd = app.add_subcommand("lattice", "lattice support detection");
    lat_cmd->add_option("--spec", spec_path, "process spec JSON")->required();
    double beta = 2.0 * std::numbers::pi;
    lat_cmd->add_option("--beta", beta, "frequency to test");
    add_sim_flags(lat_cmd);

    auto* tra_cmd = app.add_subcommand("transience", "cumulant-root transience probe");
    tra_cmd->add_option("--spec", spec_path, "process spec JSON")->required();
    double lo = 0.5, hi = 4.0;
    tra_cmd->add_option("--lo", lo, "bracket lower end");
    tra_cmd->add_option("--hi", hi, "bracket upper end");
    add_sim_flags(tra_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (psi_cmd->parsed()) {
            levy::ProcessSpec spec = levy::load_process_spec(spec_path);
            std::filesystem::create_directories(out_dir);
            std::ofstream f(std::filesystem::path(out_dir) / "psi_table.csv");
            f << "axis,xi,re,im\n";
            char buf[160];
            for (int axis = 0; axis < spec.triplet.dim; ++axis)
                for (int i = 0; i < xi_count; ++i) {
                    levy::Vec xi(static_cast<std::size_t>(spec.triplet.dim), 0.0);
                    xi[static_cast<std::size_t>(axis)] =
                        -xi_max + 2.0 * xi_max * i / (xi_count - 1);
                    const levy::Complex p = levy::eval_psi(spec.triplet, xi);
                    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", axis,
                                  xi[static_cast<std::size_t>(axis)], p.real(), p.imag());
                    f << buf;
                }
            std::cout << "psi table written to " << out_dir << "/psi_table.csv\n";
            return 0;
        }

        levy::RunPlan plan;
        if (check_cmd->parsed()) {
            if (!plan_path.empty()) {
                plan = levy::load_plan(plan_path);
                if (plan.out_dir.empty()) plan.out_dir = out_dir;
            } else {
                if (spec_path.empty() || checks_csv.empty())
                    throw levy::SpecError("check: need --plan, or --spec with --checks");
                plan.spec = levy::load_process_spec(spec_path);
                plan.sim = sim_from_flags(horizon, dt, paths, delta, seed, threads, mode);
                plan.out_dir = out_dir;
                std::string item;
                std::stringstream ss(checks_csv);
                while (std::getline(ss, item, ',')) {
                    levy::PlannedCheck c;
                    c.name = item;
                    plan.checks.push_back(c);
                }
                levy::Json names = levy::Json::array();
                for (auto& c : plan.checks) names.push_back(c.name);
                levy::Json j = {{"process", levy::emit_process_spec(plan.spec)},
                                {"checks", names}};
                plan = levy::parse_plan(j);  // validates check names
                plan.spec = levy::load_process_spec(spec_path);
                plan.sim = sim_from_flags(horizon, dt, paths, delta, seed, threads, mode);
                plan.out_dir = out_dir;
            }
            levy::RunResult res = levy::run(plan);
            std::cout << res.summary_csv;
            return res.exit_code;
        }

        if (sim_cmd->parsed()) {
            levy::ProcessSpec spec = levy::load_process_spec(spec_path);
            levy::SimConfig cfg =
                sim_from_flags(horizon, dt, paths, delta, seed, threads, mode);
            levy::PathEnsemble e = levy::sample_paths(spec.triplet, cfg);
            std::filesystem::create_directories(out_dir);
            std::ofstream f(std::filesystem::path(out_dir) / "ensemble.csv");
            levy::dump_ensemble(e, f);
            std::cout << "ensemble written to " << out_dir << "/ensemble.csv (hash "
                      << levy::ensemble_hash(e) << ")\n";
            return 0;
        }

        if (lat_cmd->parsed() || tra_cmd->parsed()) {
            plan.spec = levy::load_process_spec(spec_path);
            plan.sim = sim_from_flags(horizon, dt, paths, delta, seed, threads, mode);
            plan.out_dir = out_dir;
            levy::PlannedCheck c;
            if (lat_cmd->parsed()) {
                c.name = "lattice";
                c.beta = beta;
                c.expect = "any";
            } else {
                c.name = "transience";
                c.lo = lo;
                c.hi = hi;
                c.expect = "any";
            }
            plan.checks.push_back(c);
            levy::RunResult res = levy::run(plan);
            std::cout << res.summary_csv;
            for (const auto& r : res.reports)
                for (const auto& note : r.notes) std::cout << "# " << note << "\n";
            return res.exit_code;
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
