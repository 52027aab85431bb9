#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "esbgk/errors.hpp"
#include "esbgk/grid.hpp"
#include "esbgk/moments.hpp"

namespace esbgk {

/// 1D compressible fluid state with a d-dimensional internal energy:
/// E = (d/2) rho T + rho u^2 / 2, p = rho T, gamma_eff = (d+2)/d.
struct FluidState {
    SpatialGrid grid;
    int dim = 3; // velocity dimensionality of the underlying kinetic model
    std::vector<double> rho, mom, E;
    double time = 0.0;

    FluidState() = default;
    FluidState(SpatialGrid g, int d) : grid(std::move(g)), dim(d) {
        rho.assign(grid.n_cells, 0.0);
        mom.assign(grid.n_cells, 0.0);
        E.assign(grid.n_cells, 0.0);
    }
};

/// Navier-Stokes transport coefficients of the ES-BGK closure:
/// mu = p / ((1-nu) tau), kappa = (d+2)/2 * p / tau, both scaled by epsilon
/// in the fluxes.
struct TransportCoefficients {
    double mu = 0.0;
    double kappa = 0.0;
};

inline TransportCoefficients nse_transport(const ModelParams& params, int dim, double rho,
                                           double T) {
    const double p = rho * T;
    const double tau = params.tau_law(rho, T);
    TransportCoefficients tc;
    tc.mu = p / ((1.0 - params.nu) * tau);
    tc.kappa = 0.5 * (dim + 2) * p / tau;
    return tc;
}

namespace detail {

inline double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return (std::abs(a) < std::abs(b)) ? a : b;
}

struct Primitive {
    double u = 0.0;
    double T = 0.0;
    double p = 0.0;
};

inline Primitive fluid_primitive(double rho, double mom, double E, int dim,
                                 const std::string& context) {
    if (!(rho > 0.0)) throw FluidVacuum("nonpositive density (" + context + ")");
    Primitive pr;
    pr.u = mom / rho;
    pr.T = (2.0 / dim) * (E / rho - 0.5 * pr.u * pr.u);
    if (!(pr.T > 0.0)) throw FluidVacuum("nonpositive temperature (" + context + ")");
    pr.p = rho * pr.T;
    return pr;
}

} // namespace detail

/// Right-hand side L(q): MUSCL-minmod interface states, Rusanov flux, central
/// viscous and heat fluxes. Writes d(rho)/dt, d(mom)/dt, dE/dt.
inline void nse_rhs(const FluidState& st, const ModelParams& params, std::span<double> d_rho,
                    std::span<double> d_mom, std::span<double> d_E) {
    const int n = st.grid.n_cells;
    const int d = st.dim;
    const double gamma_eff = static_cast<double>(d + 2) / d;
    const double strain = 2.0 - 2.0 / d;
    const double dx = st.grid.dx;

    const int g = 2;
    auto at = [&](int i) {
        if (st.grid.bc == BoundaryCondition::Periodic) return ((i % n) + n) % n;
        return std::clamp(i, 0, n - 1);
    };
    thread_local std::vector<double> rho, mom, E;
    rho.resize(n + 2 * g);
    mom.resize(n + 2 * g);
    E.resize(n + 2 * g);
    for (int i = -g; i < n + g; ++i) {
        const int s = at(i);
        rho[i + g] = st.rho[s];
        mom[i + g] = st.mom[s];
        E[i + g] = st.E[s];
    }

    // Limited interface states for each conserved variable.
    auto face = [&](const std::vector<double>& q, int i, double& qL, double& qR) {
        const double sL = detail::minmod(q[i + g] - q[i - 1 + g], q[i + 1 + g] - q[i + g]);
        const double sR = detail::minmod(q[i + 1 + g] - q[i + g], q[i + 2 + g] - q[i + 1 + g]);
        qL = q[i + g] + 0.5 * sL;
        qR = q[i + 1 + g] - 0.5 * sR;
    };

    thread_local std::vector<double> flux0, flux1, flux2;
    flux0.resize(n + 1);
    flux1.resize(n + 1);
    flux2.resize(n + 1);
    for (int i = -1; i < n; ++i) {
        double rL, rR, mL, mR, eL, eR;
        face(rho, i, rL, rR);
        face(mom, i, mL, mR);
        face(E, i, eL, eR);
        const detail::Primitive pL = detail::fluid_primitive(rL, mL, eL, d, "face L");
        const detail::Primitive pR = detail::fluid_primitive(rR, mR, eR, d, "face R");
        const double cL = std::sqrt(gamma_eff * pL.p / rL);
        const double cR = std::sqrt(gamma_eff * pR.p / rR);
        const double a = std::max(std::abs(pL.u) + cL, std::abs(pR.u) + cR);

        const double f0L = mL, f0R = mR;
        const double f1L = mL * pL.u + pL.p, f1R = mR * pR.u + pR.p;
        const double f2L = (eL + pL.p) * pL.u, f2R = (eR + pR.p) * pR.u;
        flux0[i + 1] = 0.5 * (f0L + f0R) - 0.5 * a * (rR - rL);
        flux1[i + 1] = 0.5 * (f1L + f1R) - 0.5 * a * (mR - mL);
        flux2[i + 1] = 0.5 * (f2L + f2R) - 0.5 * a * (eR - eL);

        // Viscous and heat flux, central at the interface from cell values.
        const detail::Primitive ci =
            detail::fluid_primitive(rho[i + g], mom[i + g], E[i + g], d, "cell");
        const detail::Primitive cj =
            detail::fluid_primitive(rho[i + 1 + g], mom[i + 1 + g], E[i + 1 + g], d, "cell");
        const TransportCoefficients ti = nse_transport(params, d, rho[i + g], ci.T);
        const TransportCoefficients tj = nse_transport(params, d, rho[i + 1 + g], cj.T);
        const double mu_f = 0.5 * (ti.mu + tj.mu);
        const double ka_f = 0.5 * (ti.kappa + tj.kappa);
        const double du = (cj.u - ci.u) / dx;
        const double dT = (cj.T - ci.T) / dx;
        const double u_f = 0.5 * (ci.u + cj.u);
        const double sigma = params.epsilon * mu_f * strain * du;
        flux1[i + 1] -= sigma;
        flux2[i + 1] -= sigma * u_f + params.epsilon * ka_f * dT;
    }

    for (int i = 0; i < n; ++i) {
        d_rho[i] = -(flux0[i + 1] - flux0[i]) / dx;
        d_mom[i] = -(flux1[i + 1] - flux1[i]) / dx;
        d_E[i] = -(flux2[i + 1] - flux2[i]) / dx;
    }
}

/// One SSP-RK2 step.
inline void nse_step(FluidState& st, const ModelParams& params, double dt) {
    const int n = st.grid.n_cells;
    thread_local std::vector<double> d0, d1, d2;
    d0.resize(n);
    d1.resize(n);
    d2.resize(n);

    FluidState mid = st;
    nse_rhs(st, params, d0, d1, d2);
    for (int i = 0; i < n; ++i) {
        mid.rho[i] = st.rho[i] + dt * d0[i];
        mid.mom[i] = st.mom[i] + dt * d1[i];
        mid.E[i] = st.E[i] + dt * d2[i];
    }
    nse_rhs(mid, params, d0, d1, d2);
    for (int i = 0; i < n; ++i) {
        st.rho[i] = 0.5 * st.rho[i] + 0.5 * (mid.rho[i] + dt * d0[i]);
        st.mom[i] = 0.5 * st.mom[i] + 0.5 * (mid.mom[i] + dt * d1[i]);
        st.E[i] = 0.5 * st.E[i] + 0.5 * (mid.E[i] + dt * d2[i]);
    }
    st.time += dt;
}

/// Stable step size: advective CFL plus the explicit diffusion limit.
inline double nse_stable_dt(const FluidState& st, const ModelParams& params, double cfl) {
    const int d = st.dim;
    const double gamma_eff = static_cast<double>(d + 2) / d;
    const double strain = 2.0 - 2.0 / d;
    double a_max = 0.0, diff_max = 0.0;
    for (int i = 0; i < st.grid.n_cells; ++i) {
        const detail::Primitive pr =
            detail::fluid_primitive(st.rho[i], st.mom[i], st.E[i], d, "nse_stable_dt");
        a_max = std::max(a_max, std::abs(pr.u) + std::sqrt(gamma_eff * pr.p / st.rho[i]));
        const TransportCoefficients tc = nse_transport(params, d, st.rho[i], pr.T);
        const double cv = 0.5 * d;
        diff_max = std::max({diff_max, params.epsilon * tc.mu * strain / st.rho[i],
                             params.epsilon * tc.kappa / (st.rho[i] * cv)});
    }
    const double dt_adv = st.grid.dx / a_max;
    const double dt_diff = (diff_max > 0.0) ? 0.5 * st.grid.dx * st.grid.dx / diff_max
                                            : std::numeric_limits<double>::infinity();
    return cfl * std::min(dt_adv, dt_diff);
}

/// Advances to t_final with adaptive stable steps. The linear stability
/// limit does not guarantee positive internal energy while a discontinuity
/// is still unresolved (the viscous flux sigma*u can drain a cell in one
/// step), so a step that produces a vacuum state is rolled back and retried
/// with half the step size.
inline void nse_run(FluidState& st, const ModelParams& params, double t_final,
                    double cfl = 0.9) {
    if (t_final < st.time - 1e-12) throw InvalidConfig("nse_run: t_final in the past");
    while (st.time < t_final - 1e-12) {
        double dt = std::min(nse_stable_dt(st, params, cfl), t_final - st.time);
        const FluidState save = st;
        for (int halvings = 0;; ++halvings) {
            try {
                nse_step(st, params, dt);
                for (int i = 0; i < st.grid.n_cells; ++i)
                    detail::fluid_primitive(st.rho[i], st.mom[i], st.E[i], st.dim, "nse_run");
                break;
            } catch (const FluidVacuum&) {
                if (halvings >= 60) throw;
                st = save;
                dt *= 0.5;
            }
        }
    }
    st.time = t_final;
}

} // namespace esbgk
