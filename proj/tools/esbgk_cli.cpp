// Benchmark harness: kinetic and fluid runs of the canonical problems with
// CSV moment-profile output.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "esbgk/esbgk.hpp"

namespace {

using namespace esbgk;

struct CommonFlags {
    std::string scheme = "dirk2";
    std::string recon;
    std::string projection = "on";
    std::string out_dir = ".";
    std::string out_name;
};

void add_common(CLI::App* cmd, ProblemConfig& cfg, CommonFlags& fl) {
    cmd->add_option("--epsilon", cfg.epsilon, "Knudsen number");
    cmd->add_option("--nu", cfg.nu, "ES-BGK free parameter");
    cmd->add_option("--nx", cfg.n_x, "spatial cells");
    cmd->add_option("--nv", cfg.n_v, "velocity intervals per axis");
    cmd->add_option("--vmax", cfg.v_max, "velocity domain half-width");
    cmd->add_option("--cfl", cfg.cfl, "CFL number");
    cmd->add_option("--tf", cfg.t_final, "final time");
    cmd->add_option("--sigma", cfg.sigma, "accuracy profile parameter");
    cmd->add_option("--scheme", fl.scheme, "fo|dirk2|dirk3|bdf2|bdf3");
    cmd->add_option("--recon", fl.recon, "linear|qcweno23|qcweno35 (default from scheme)");
    cmd->add_option("--projection", fl.projection, "on|off")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--out-dir", fl.out_dir, "output directory");
    cmd->add_option("--out", fl.out_name, "output CSV name");
}

void apply_common(ProblemConfig& cfg, const CommonFlags& fl) {
    cfg.scheme = nlohmann::json(fl.scheme).get<SchemeKind>();
    cfg.recon = fl.recon.empty() ? default_reconstruction(cfg.scheme)
                                 : nlohmann::json(fl.recon).get<ReconstructionKind>();
    cfg.projection = (fl.projection != "off");
    cfg.out_dir = fl.out_dir;
}

void write_csv(const MomentProfile& prof, const ProblemConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string path = cfg.out_dir + "/" + name;
    std::ofstream os(path);
    if (!os) throw InvalidConfig("cannot open output file " + path);
    emit_profiles(os, prof, cfg);
    std::cout << "wrote " << path << "\n";
}

int run_prepared(ProblemConfig cfg, const std::string& out_name) {
    cfg.validate();
    KineticSolver solver = make_solver(cfg);
    const RunResult res = solver.run(cfg.t_final, cfg.dt());
    const ConservationReport rep = conservation_report(solver.ledger(), solver.scheme());
    std::printf("steps=%d  t=%.6g  drift(m0,m1,m2)=(%.3e, %.3e, %.3e)\n", res.n_steps,
                res.final_time, rep.cumulative_drift[0], rep.cumulative_drift[1],
                rep.cumulative_drift[2]);
    write_csv(moment_profile(solver.field()), cfg, out_name);
    return 0;
}

int run_kinetic(ProblemConfig cfg, const CommonFlags& fl, const std::string& default_name) {
    apply_common(cfg, fl);
    return run_prepared(std::move(cfg), fl.out_name.empty() ? default_name : fl.out_name);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"semi-Lagrangian ES-BGK benchmark harness"};
    app.require_subcommand(1);

    ProblemConfig acc = make_config(ProblemKind::Accuracy);
    ProblemConfig rie = make_config(ProblemKind::Riemann);
    ProblemConfig lax = make_config(ProblemKind::Lax);
    CommonFlags fa, fr, fl_, fn, fc;

    CLI::App* c_acc = app.add_subcommand("accuracy", "smooth accuracy problem");
    add_common(c_acc, acc, fa);
    CLI::App* c_rie = app.add_subcommand("riemann", "Riemann problem (d_v = 2)");
    add_common(c_rie, rie, fr);
    CLI::App* c_lax = app.add_subcommand("lax", "Lax shock tube (d_v = 3)");
    add_common(c_lax, lax, fl_);

    std::string nse_problem = "lax";
    ProblemConfig nse_cfg = lax;
    CLI::App* c_nse = app.add_subcommand("nse", "Navier-Stokes reference run");
    c_nse->add_option("--problem", nse_problem, "riemann|lax")
        ->check(CLI::IsMember({"riemann", "lax"}));
    add_common(c_nse, nse_cfg, fn);

    std::string config_path;
    ProblemConfig cust;
    CLI::App* c_cust = app.add_subcommand("custom", "run from a JSON config file");
    c_cust->add_option("--config", config_path, "JSON config path")->required();
    add_common(c_cust, cust, fc);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_acc->parsed()) return run_kinetic(acc, fa, "accuracy.csv");
        if (c_rie->parsed()) return run_kinetic(rie, fr, "riemann.csv");
        if (c_lax->parsed()) return run_kinetic(lax, fl_, "lax.csv");
        if (c_nse->parsed()) {
            ProblemConfig cfg = make_config(nse_problem == "riemann" ? ProblemKind::Riemann
                                                                     : ProblemKind::Lax);
            // re-apply any overrides given on the nse subcommand
            cfg.epsilon = nse_cfg.epsilon;
            cfg.nu = nse_cfg.nu;
            cfg.n_x = nse_cfg.n_x;
            cfg.cfl = nse_cfg.cfl;
            if (c_nse->count("--tf")) cfg.t_final = nse_cfg.t_final;
            apply_common(cfg, fn);
            FluidState st = make_fluid(cfg);
            nse_run(st, cfg.model_params(), cfg.t_final);
            write_csv(moment_profile(st), cfg,
                      fn.out_name.empty() ? ("nse_" + nse_problem + ".csv") : fn.out_name);
            return 0;
        }
        if (c_cust->parsed()) {
            std::ifstream is(config_path);
            if (!is) throw InvalidConfig("cannot read config " + config_path);
            ProblemConfig file_cfg = nlohmann::json::parse(is).get<ProblemConfig>();
            // command-line flags override file values only when given
            auto pick = [&](const char* flag, auto& dst, const auto& flagged) {
                if (c_cust->count(flag)) dst = flagged;
            };
            pick("--epsilon", file_cfg.epsilon, cust.epsilon);
            pick("--nu", file_cfg.nu, cust.nu);
            pick("--nx", file_cfg.n_x, cust.n_x);
            pick("--nv", file_cfg.n_v, cust.n_v);
            pick("--vmax", file_cfg.v_max, cust.v_max);
            pick("--cfl", file_cfg.cfl, cust.cfl);
            pick("--tf", file_cfg.t_final, cust.t_final);
            pick("--sigma", file_cfg.sigma, cust.sigma);
            if (c_cust->count("--scheme"))
                file_cfg.scheme = nlohmann::json(fc.scheme).get<SchemeKind>();
            if (c_cust->count("--recon"))
                file_cfg.recon = nlohmann::json(fc.recon).get<ReconstructionKind>();
            if (c_cust->count("--projection")) file_cfg.projection = (fc.projection != "off");
            if (c_cust->count("--out-dir")) file_cfg.out_dir = fc.out_dir;
            return run_prepared(std::move(file_cfg),
                                fc.out_name.empty() ? "custom.csv" : fc.out_name);
        }
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
