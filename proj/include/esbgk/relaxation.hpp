#pragma once

#include <cmath>
#include <span>
#include <string>

#include "esbgk/errors.hpp"
#include "esbgk/grid.hpp"
#include "esbgk/moments.hpp"
#include "esbgk/projection.hpp"

namespace esbgk {

/// Per-cell context of one implicit stage: the diagonal weight a*dt
/// (a_kk dt for DIRK, beta_s dt for BDF, dt for the first-order scheme).
struct StageContext {
    double a_dt = 0.0;
    double epsilon = 1.0;
    double tau_cell = 1.0;

    void validate() const {
        if (a_dt < 0.0 || !(epsilon > 0.0) || !(tau_cell > 0.0))
            throw InvalidConfig("StageContext: invalid (a_dt, epsilon, tau)");
    }
};

/// Moments of the transported distribution; identical sums to
/// compute_moments, with the temperature positivity check the implicit stage
/// requires.
inline MomentSet transported_moments(std::span<const double> f_tilde, const VelocityGrid& vg) {
    MomentSet ms = compute_moments(f_tilde, vg);
    if (!(ms.T > 0.0))
        throw NonpositiveTemperature("transported_moments: T=" + std::to_string(ms.T));
    return ms;
}

/// nu' = eps*nu / (eps + (1-nu)*tau*a*dt); |nu'| <= |nu| with the same sign,
/// and nu' -> 0 in the fluid limit.
inline double modified_nu(double nu, double epsilon, double tau_cell, double a_dt) {
    return epsilon * nu / (epsilon + (1.0 - nu) * tau_cell * a_dt);
}

/// Effective temperature tensor (1-nu')*T*I + nu'*(Sigma/rho - U(x)U).
inline RelaxationTensor effective_tensor(double T_tilde, double nu_eff, const SymMat3& Sigma,
                                         double rho_tilde, const Vec3& U_tilde) {
    const int d = Sigma.dim;
    const SymMat3 theta_like = (Sigma * (1.0 / rho_tilde)) - SymMat3::outer(U_tilde, d);
    const SymMat3 t =
        SymMat3::scaled_identity(d, (1.0 - nu_eff) * T_tilde) + theta_like * nu_eff;
    return RelaxationTensor::from(t, "effective_tensor T=" + std::to_string(T_tilde));
}

/// Convex stage update f = (eps*f~ + tau*a*dt*G) / (eps + tau*a*dt).
inline void implicit_stage_update(std::span<const double> f_tilde, std::span<const double> g_hat,
                                  const StageContext& ctx, std::span<double> out) {
    ctx.validate();
    const double denom = ctx.epsilon + ctx.tau_cell * ctx.a_dt;
    const double wa = ctx.epsilon / denom;
    const double wb = ctx.tau_cell * ctx.a_dt / denom;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = wa * f_tilde[j] + wb * g_hat[j];
}

/// Q = tau * (G - f).
inline void relaxation_term(std::span<const double> f, std::span<const double> g_hat,
                            double tau_cell, std::span<double> out) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = tau_cell * (g_hat[j] - f[j]);
}

/// Diagnostics of one cell's implicit stage.
struct CellStageInfo {
    MomentSet moments;  // transported moments
    double tau = 0.0;
    double nu_eff = 0.0;
    double tensor_aniso = 0.0; // || T_tensor - T*I ||_inf
    double max_g = 0.0;
};

/// Full Newton-free implicit stage for one spatial cell: transported moments,
/// modified nu, effective tensor, projected Gaussian, convex update.
/// g_buf receives the (projected) Gaussian; f_out the stage solution.
inline CellStageInfo relax_stage_cell(std::span<const double> f_tilde, const VelocityGrid& vg,
                                      const ModelParams& params, double a_dt,
                                      bool projection_on, std::span<double> g_buf,
                                      std::span<double> f_out) {
    CellStageInfo info;
    info.moments = transported_moments(f_tilde, vg);
    const MomentSet& ms = info.moments;
    info.tau = params.tau_law(ms.rho, ms.T);
    info.nu_eff = modified_nu(params.nu, params.epsilon, info.tau, a_dt);
    const RelaxationTensor tensor =
        effective_tensor(ms.T, info.nu_eff, ms.Sigma, ms.rho, ms.U);
    info.tensor_aniso =
        (tensor.tensor - SymMat3::scaled_identity(vg.dim, ms.T)).max_abs();

    eval_gaussian(ms.rho, ms.U, tensor, vg, g_buf);
    if (projection_on) {
        MomentTarget target;
        target.rho = ms.rho;
        target.rho_u = ms.U * ms.rho;
        target.E = ms.E;
        project_maxwell_weight(g_buf, target, vg, ms.T);
    }
    for (double g : g_buf) info.max_g = std::max(info.max_g, g);

    StageContext ctx{a_dt, params.epsilon, info.tau};
    implicit_stage_update(f_tilde, g_buf, ctx, f_out);
    return info;
}

} // namespace esbgk
