#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "esbgk/errors.hpp"
#include "esbgk/grid.hpp"
#include "esbgk/moments.hpp"
#include "esbgk/nse.hpp"
#include "esbgk/time_integration.hpp"

namespace esbgk {

enum class ProblemKind { Accuracy, Riemann, Lax, Custom };
enum class SchemeKind { FO, DIRK2, DIRK3, BDF2, BDF3 };

inline ReconstructionKind default_reconstruction(SchemeKind s) {
    switch (s) {
        case SchemeKind::FO: return ReconstructionKind::Linear;
        case SchemeKind::DIRK2:
        case SchemeKind::BDF2: return ReconstructionKind::QCWENO23;
        default: return ReconstructionKind::QCWENO35;
    }
}

NLOHMANN_JSON_SERIALIZE_ENUM(ProblemKind, {{ProblemKind::Accuracy, "accuracy"},
                                           {ProblemKind::Riemann, "riemann"},
                                           {ProblemKind::Lax, "lax"},
                                           {ProblemKind::Custom, "custom"}})
NLOHMANN_JSON_SERIALIZE_ENUM(SchemeKind, {{SchemeKind::FO, "fo"},
                                          {SchemeKind::DIRK2, "dirk2"},
                                          {SchemeKind::DIRK3, "dirk3"},
                                          {SchemeKind::BDF2, "bdf2"},
                                          {SchemeKind::BDF3, "bdf3"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ReconstructionKind, {{ReconstructionKind::Linear, "linear"},
                                                  {ReconstructionKind::QCWENO23, "qcweno23"},
                                                  {ReconstructionKind::QCWENO35, "qcweno35"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TauKind, {{TauKind::Constant, "constant"},
                                       {TauKind::DensityLaw, "density"},
                                       {TauKind::DensitySqrtT, "density_sqrt_t"}})
NLOHMANN_JSON_SERIALIZE_ENUM(BoundaryCondition, {{BoundaryCondition::Periodic, "periodic"},
                                                 {BoundaryCondition::FreeFlow, "free_flow"}})

/// Full description of one benchmark run.
struct ProblemConfig {
    ProblemKind problem = ProblemKind::Custom;
    double epsilon = 1.0;
    double nu = 0.0;
    TauKind tau_kind = TauKind::Constant;
    double tau_coeff = 1.0;
    int n_x = 100;
    int n_v = 32;
    int d_v = 2;
    double v_max = 10.0;
    double x_left = 0.0;
    double x_right = 1.0;
    BoundaryCondition bc = BoundaryCondition::Periodic;
    double cfl = 1.0;
    double t_final = 0.0;
    double sigma = 10.0; // smooth-profile parameter of the accuracy problem
    SchemeKind scheme = SchemeKind::DIRK2;
    ReconstructionKind recon = ReconstructionKind::QCWENO23;
    bool projection = true;
    std::string out_dir = ".";

    bool operator==(const ProblemConfig&) const = default;

    void validate() const {
        ModelParams mp = model_params();
        mp.validate(d_v);
        if (!(cfl > 0.0) || t_final < 0.0 || !(sigma > 0.0))
            throw InvalidConfig("ProblemConfig: cfl/t_final/sigma out of range");
        build_spatial_grid(x_left, x_right, n_x, bc);
        build_velocity_grid(v_max, n_v, d_v);
    }

    ModelParams model_params() const {
        ModelParams mp;
        mp.nu = nu;
        mp.epsilon = epsilon;
        mp.tau_law = TauLaw{tau_kind, tau_coeff};
        return mp;
    }

    SchemeSpec scheme_spec() const {
        switch (scheme) {
            case SchemeKind::FO: return SchemeSpec::first_order();
            case SchemeKind::DIRK2: return SchemeSpec::dirk(2);
            case SchemeKind::DIRK3: return SchemeSpec::dirk(3);
            case SchemeKind::BDF2: return SchemeSpec::bdf_scheme(2);
            default: return SchemeSpec::bdf_scheme(3);
        }
    }

    double dt() const {
        return CflSpec{cfl}.dt(build_spatial_grid(x_left, x_right, n_x, bc),
                               build_velocity_grid(v_max, n_v, d_v));
    }
};

inline void to_json(nlohmann::json& j, const ProblemConfig& c) {
    j = nlohmann::json{{"problem", c.problem},
                       {"epsilon", c.epsilon},
                       {"nu", c.nu},
                       {"tau_kind", c.tau_kind},
                       {"tau_coeff", c.tau_coeff},
                       {"n_x", c.n_x},
                       {"n_v", c.n_v},
                       {"d_v", c.d_v},
                       {"v_max", c.v_max},
                       {"x_left", c.x_left},
                       {"x_right", c.x_right},
                       {"bc", c.bc},
                       {"cfl", c.cfl},
                       {"t_final", c.t_final},
                       {"sigma", c.sigma},
                       {"scheme", c.scheme},
                       {"recon", c.recon},
                       {"projection", c.projection},
                       {"out_dir", c.out_dir}};
}

inline void from_json(const nlohmann::json& j, ProblemConfig& c) {
    ProblemConfig d;
    c.problem = j.value("problem", d.problem);
    c.epsilon = j.value("epsilon", d.epsilon);
    c.nu = j.value("nu", d.nu);
    c.tau_kind = j.value("tau_kind", d.tau_kind);
    c.tau_coeff = j.value("tau_coeff", d.tau_coeff);
    c.n_x = j.value("n_x", d.n_x);
    c.n_v = j.value("n_v", d.n_v);
    c.d_v = j.value("d_v", d.d_v);
    c.v_max = j.value("v_max", d.v_max);
    c.x_left = j.value("x_left", d.x_left);
    c.x_right = j.value("x_right", d.x_right);
    c.bc = j.value("bc", d.bc);
    c.cfl = j.value("cfl", d.cfl);
    c.t_final = j.value("t_final", d.t_final);
    c.sigma = j.value("sigma", d.sigma);
    c.scheme = j.value("scheme", d.scheme);
    c.recon = j.value("recon", d.recon);
    c.projection = j.value("projection", d.projection);
    c.out_dir = j.value("out_dir", d.out_dir);
}

/// Canonical configurations of the three benchmark problems.
inline ProblemConfig make_config(ProblemKind kind) {
    ProblemConfig c;
    c.problem = kind;
    switch (kind) {
        case ProblemKind::Accuracy:
            c.epsilon = 1.0;
            c.nu = -1.0;
            c.tau_kind = TauKind::Constant;
            c.tau_coeff = 1.0;
            c.n_x = 80;
            c.n_v = 32;
            c.d_v = 2;
            c.v_max = 10.0;
            c.x_left = -1.0;
            c.x_right = 1.0;
            c.bc = BoundaryCondition::Periodic;
            c.cfl = 4.0;
            c.t_final = 0.32;
            c.sigma = 10.0;
            break;
        case ProblemKind::Riemann:
            c.epsilon = 0.5;
            c.nu = -1.0;
            c.tau_kind = TauKind::DensityLaw;
            c.tau_coeff = 0.45 * std::numbers::pi; // tau = 0.9 pi rho / 2
            c.n_x = 200;
            c.n_v = 96;
            c.d_v = 2;
            c.v_max = 15.0;
            c.x_left = -1.0;
            c.x_right = 2.0;
            c.bc = BoundaryCondition::FreeFlow;
            c.cfl = 2.0;
            c.t_final = 0.4;
            break;
        case ProblemKind::Lax:
            c.epsilon = 1e-3;
            c.nu = -0.5;
            c.tau_kind = TauKind::DensitySqrtT;
            c.tau_coeff = 2.0 / 3.0;
            c.n_x = 200;
            c.n_v = 40;
            c.d_v = 3;
            c.v_max = 20.0;
            c.x_left = -5.0;
            c.x_right = 5.0;
            c.bc = BoundaryCondition::FreeFlow;
            c.cfl = 2.0;
            c.t_final = 1.3;
            break;
        default: break;
    }
    c.recon = default_reconstruction(c.scheme);
    return c;
}

/// Piecewise-constant macroscopic profile (rho, u1, T) of x.
struct MacroProfile {
    std::function<double(double)> rho, u1, T;
    std::function<double(double)> u2 = nullptr; // optional transverse bulk velocity
};

inline double accuracy_u0(double x, double sigma) {
    const double a = sigma * x - 1.0;
    const double b = sigma * x + 3.0;
    return (std::exp(-a * a) - 2.0 * std::exp(-b * b)) / sigma;
}

inline MacroProfile macro_profile(const ProblemConfig& c) {
    switch (c.problem) {
        case ProblemKind::Accuracy: {
            const double s = c.sigma;
            return {[](double) { return 1.0; }, [s](double x) { return accuracy_u0(x, s); },
                    [](double) { return 1.0; }};
        }
        case ProblemKind::Riemann:
            return {[](double x) { return x <= 0.5 ? 1.0 : 0.125; },
                    [](double x) { return x <= 0.5 ? 2.5 * std::sqrt(2.0) : 0.0; },
                    [](double x) { return x <= 0.5 ? 1.0 : 0.25; }};
        case ProblemKind::Lax:
            return {[](double x) { return x <= 0.0 ? 0.445 : 0.5; },
                    [](double x) { return x <= 0.0 ? 0.698 : 0.0; },
                    [](double x) { return x <= 0.0 ? 3.528 : 0.571; }};
        default: throw InvalidConfig("macro_profile: custom problems supply their own data");
    }
}

/// Local-Maxwellian initial data from a macroscopic profile.
inline void init_maxwellian(KineticSolver& solver, const MacroProfile& mp) {
    PhaseField& f = solver.field();
    for (int i = 0; i < f.spatial.n_cells; ++i) {
        const double x = f.spatial.node(i);
        Vec3 U;
        U[0] = mp.u1(x);
        if (mp.u2) U[1] = mp.u2(x);
        eval_maxwellian(mp.rho(x), U, mp.T(x), f.velocity, f.cell(i));
    }
    f.time = 0.0;
    solver.reset_history();
}

inline KineticSolver make_solver(const ProblemConfig& c) {
    c.validate();
    KineticSolver solver(build_spatial_grid(c.x_left, c.x_right, c.n_x, c.bc),
                         build_velocity_grid(c.v_max, c.n_v, c.d_v), c.model_params(),
                         c.scheme_spec(), c.recon, c.projection);
    if (c.problem != ProblemKind::Custom) init_maxwellian(solver, macro_profile(c));
    return solver;
}

/// Fluid counterpart with identical initial macrostates.
inline FluidState make_fluid(const ProblemConfig& c) {
    FluidState st(build_spatial_grid(c.x_left, c.x_right, c.n_x, c.bc), c.d_v);
    const MacroProfile mp = macro_profile(c);
    for (int i = 0; i < st.grid.n_cells; ++i) {
        const double x = st.grid.node(i);
        const double rho = mp.rho(x), u = mp.u1(x), T = mp.T(x);
        st.rho[i] = rho;
        st.mom[i] = rho * u;
        st.E[i] = 0.5 * c.d_v * rho * T + 0.5 * rho * u * u;
    }
    return st;
}

/// Per-cell macroscopic output of a kinetic run: x, rho, u1, T, Q.
struct MomentProfile {
    std::vector<double> x, rho, u1, T, q;
    std::size_t size() const { return x.size(); }
};

inline MomentProfile moment_profile(const PhaseField& f) {
    MomentProfile p;
    for (int i = 0; i < f.spatial.n_cells; ++i) {
        const MomentSet ms = compute_moments(f.cell(i), f.velocity);
        p.x.push_back(f.spatial.node(i));
        p.rho.push_back(ms.rho);
        p.u1.push_back(ms.U[0]);
        p.T.push_back(ms.T);
        p.q.push_back(ms.q);
    }
    return p;
}

inline MomentProfile moment_profile(const FluidState& st) {
    MomentProfile p;
    for (int i = 0; i < st.grid.n_cells; ++i) {
        const detail::Primitive pr =
            detail::fluid_primitive(st.rho[i], st.mom[i], st.E[i], st.dim, "moment_profile");
        p.x.push_back(st.grid.node(i));
        p.rho.push_back(st.rho[i]);
        p.u1.push_back(pr.u);
        p.T.push_back(pr.T);
        p.q.push_back(0.0);
    }
    return p;
}

/// CSV with 17 significant digits; '#'-prefixed header echoes the config.
inline void emit_profiles(std::ostream& os, const MomentProfile& p, const ProblemConfig& cfg) {
    os << "# config " << nlohmann::json(cfg).dump() << "\n";
    os << "x,rho,u1,T,Q\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf << sep;
    };
    for (std::size_t i = 0; i < p.size(); ++i) {
        put(p.x[i], ',');
        put(p.rho[i], ',');
        put(p.u1[i], ',');
        put(p.T[i], ',');
        put(p.q[i], '\n');
    }
}

inline MomentProfile parse_profiles(std::istream& is, ProblemConfig* cfg_out = nullptr) {
    MomentProfile p;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find('{');
            if (cfg_out && pos != std::string::npos)
                *cfg_out = nlohmann::json::parse(line.substr(pos)).get<ProblemConfig>();
            continue;
        }
        if (line.rfind("x,", 0) == 0) continue;
        std::istringstream ls(line);
        double vals[5];
        char comma;
        for (int k = 0; k < 5; ++k) {
            ls >> vals[k];
            if (k < 4) ls >> comma;
        }
        if (!ls) throw InvalidConfig("parse_profiles: malformed row: " + line);
        p.x.push_back(vals[0]);
        p.rho.push_back(vals[1]);
        p.u1.push_back(vals[2]);
        p.T.push_back(vals[3]);
        p.q.push_back(vals[4]);
    }
    return p;
}

/// Conservation analysis of a solver ledger. Per-step defects use the BDF
/// alpha-combination where the history spacing shows a regular multi-step
/// window, and the plain difference elsewhere (startup, clipped final step).
struct ConservationReport {
    double max_defect[3] = {0.0, 0.0, 0.0};      // absolute, per invariant
    double cumulative_drift[3] = {0.0, 0.0, 0.0}; // relative, final vs initial
};

inline ConservationReport conservation_report(const std::vector<LedgerEntry>& ledger,
                                              const SchemeSpec& scheme) {
    ConservationReport rep;
    if (ledger.size() < 2) return rep;
    auto comp = [](const LedgerEntry& e, int a) {
        return (a == 0) ? e.m0 : (a == 1 ? e.m1[0] : e.m2);
    };
    const int s = (scheme.family == SchemeFamily::Bdf) ? scheme.bdf.steps : 1;
    for (std::size_t n = 1; n < ledger.size(); ++n) {
        const double dt_n = ledger[n].t - ledger[n - 1].t;
        bool combo = (s > 1) && (n >= static_cast<std::size_t>(s));
        if (combo) // require uniform spacing across the window
            for (int k = 1; k <= s; ++k)
                if (std::abs((ledger[n - k + 1].t - ledger[n - k].t) - dt_n) > 1e-10 * dt_n)
                    combo = false;
        for (int a = 0; a < 3; ++a) {
            double ref = 0.0;
            if (combo) {
                for (int k = 1; k <= s; ++k) ref += scheme.bdf.alpha[k - 1] * comp(ledger[n - k], a);
            } else {
                ref = comp(ledger[n - 1], a);
            }
            rep.max_defect[a] = std::max(rep.max_defect[a], std::abs(comp(ledger[n], a) - ref));
        }
    }
    const double scale = std::abs(ledger.front().m0);
    for (int a = 0; a < 3; ++a) {
        const double denom = std::max(std::abs(comp(ledger.front(), a)), scale);
        rep.cumulative_drift[a] = std::abs(comp(ledger.back(), a) - comp(ledger.front(), a)) / denom;
    }
    return rep;
}

namespace detail {

inline int worker_count() {
    if (const char* env = std::getenv("ESBGK_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Runs fn(i) for i in [0, n) on a small worker pool. Exceptions propagate
/// from the first failing index.
inline void run_parallel(int n, const std::function<void(int)>& fn) {
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errs(workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errs[w] = std::current_exception();
                next.store(n);
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

/// Runs a config to t_final and returns the density profile.
inline std::vector<double> run_density(ProblemConfig cfg) {
    KineticSolver solver = make_solver(cfg);
    solver.run(cfg.t_final, cfg.dt());
    std::vector<double> rho;
    for (int i = 0; i < solver.field().spatial.n_cells; ++i)
        rho.push_back(compute_moments(solver.field().cell(i), solver.field().velocity).rho);
    return rho;
}

struct ConvergenceRow {
    int n_coarse = 0;
    double error = 0.0; // relative L1 of rho vs the next-finer grid
    double rate = 0.0;  // log2(err_N / err_2N); 0 for the last row
};

/// Self-convergence of the density on doubling grids (fine solution
/// restricted to coarse nodes). Runs execute on the worker pool.
inline std::vector<ConvergenceRow> convergence_table(const ProblemConfig& base,
                                                     const std::vector<int>& nx_list) {
    if (nx_list.size() < 2) throw InvalidConfig("convergence_table: need at least two grids");
    for (std::size_t k = 1; k < nx_list.size(); ++k)
        if (nx_list[k] != 2 * nx_list[k - 1])
            throw InvalidConfig("convergence_table: grids must double");

    std::vector<std::vector<double>> rho(nx_list.size());
    detail::run_parallel(static_cast<int>(nx_list.size()), [&](int k) {
        ProblemConfig c = base;
        c.n_x = nx_list[k];
        rho[k] = run_density(c);
    });

    std::vector<ConvergenceRow> rows;
    for (std::size_t k = 0; k + 1 < nx_list.size(); ++k) {
        ConvergenceRow r;
        r.n_coarse = nx_list[k];
        double num = 0.0, den = 0.0;
        const bool centers = base.bc == BoundaryCondition::FreeFlow;
        for (int i = 0; i < nx_list[k]; ++i) {
            // Periodic nodes coincide with every second fine node; cell
            // centers are restricted by averaging the two children.
            const double fine = centers ? 0.5 * (rho[k + 1][2 * i] + rho[k + 1][2 * i + 1])
                                        : rho[k + 1][2 * i];
            num += std::abs(rho[k][i] - fine);
            den += std::abs(fine);
        }
        r.error = num / den;
        rows.push_back(r);
    }
    for (std::size_t k = 0; k + 1 < rows.size(); ++k)
        rows[k].rate = std::log2(rows[k].error / rows[k + 1].error);
    return rows;
}

} // namespace esbgk
