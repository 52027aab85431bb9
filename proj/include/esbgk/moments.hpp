#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "esbgk/errors.hpp"
#include "esbgk/grid.hpp"
#include "esbgk/linalg.hpp"

namespace esbgk {

/// Macroscopic state of one spatial cell, all moments taken with plain
/// rectangle weights (dv)^d over the velocity grid.
struct MomentSet {
    double rho = 0.0;    // mass density
    Vec3 U;              // bulk velocity
    double E = 0.0;      // total energy density, sum f |v|^2/2
    double T = 0.0;      // scalar temperature, (2/d)(E - rho|U|^2/2)/rho
    SymMat3 Theta;       // stress tensor, sum f (v-U)(x)(v-U) / rho
    SymMat3 Sigma;       // raw second moment, sum f v(x)v
    double q = 0.0;      // heat flux along x: sum f |v-U|^2/2 (v-U)_1
};

/// SPD temperature tensor with cached inverse and determinant.
struct RelaxationTensor {
    SymMat3 tensor;
    SymMat3 inverse;
    double det = 0.0;

    static RelaxationTensor from(const SymMat3& t, const std::string& context) {
        if (!t.is_spd())
            throw NonSPDTensor("temperature tensor is not SPD (" + context + ")");
        RelaxationTensor r;
        r.tensor = t;
        r.inverse = t.inverse();
        r.det = t.det();
        return r;
    }
};

enum class TauKind { Constant, DensityLaw, DensitySqrtT };

/// Relaxation-time closure tau(rho, T).
struct TauLaw {
    TauKind kind = TauKind::Constant;
    double coeff = 1.0;

    double operator()(double rho, double T) const {
        switch (kind) {
            case TauKind::Constant: return coeff;
            case TauKind::DensityLaw: return coeff * rho;
            default: return coeff * rho * std::sqrt(T);
        }
    }
};

struct ModelParams {
    double nu = 0.0;      // ES-BGK free parameter
    double epsilon = 1.0; // Knudsen number
    TauLaw tau_law;

    void validate(int d_v) const {
        const double nu_min = (d_v == 2) ? -1.0 : -0.5;
        if (nu < nu_min || nu >= 1.0)
            throw InvalidConfig("ModelParams: nu=" + std::to_string(nu) +
                                " outside admissible range for d_v=" + std::to_string(d_v));
        if (!(epsilon > 0.0)) throw InvalidConfig("ModelParams: epsilon must be positive");
    }
};

/// Quadratic-form cutoff for Gaussian evaluation: exp(-q/2) with q/2 above
/// this value is stored as exact zero. Values below exp(-60) ~ 9e-27 are far
/// under the resolution of any moment sum and skipping the exp keeps the far
/// tail rows identically zero, which the transport stage exploits.
inline constexpr double kGaussExpCutoff = 60.0;

/// Discrete moments of one cell slice, rectangle weights.
inline MomentSet compute_moments(std::span<const double> f, const VelocityGrid& vg) {
    const std::size_t m = vg.n_nodes();
    if (f.size() != m) throw InvalidConfig("compute_moments: slice/grid size mismatch");
    const int d = vg.dim;
    const double w = vg.weight();

    MomentSet ms;
    ms.Theta = SymMat3::zero(d);
    ms.Sigma = SymMat3::zero(d);
    double s0 = 0.0, sE = 0.0;
    Vec3 s1;
    SymMat3 s2 = SymMat3::zero(d);
    for (std::size_t j = 0; j < m; ++j) {
        const double fj = f[j];
        const Vec3& v = vg.nodes[j];
        s0 += fj;
        for (int k = 0; k < d; ++k) s1[k] += fj * v[k];
        sE += fj * vg.node_sq[j];
        for (int a = 0; a < d; ++a)
            for (int b = 0; b <= a; ++b) s2.at(a, b) += fj * v[a] * v[b];
    }
    ms.rho = s0 * w;
    if (!(ms.rho > 0.0) || !std::isfinite(ms.rho))
        throw NonpositiveDensity("compute_moments: rho=" + std::to_string(ms.rho));
    for (int k = 0; k < d; ++k) ms.U[k] = s1[k] * w / ms.rho;
    ms.E = 0.5 * sE * w;
    ms.Sigma = s2 * w;
    // Discrete identity: sum f |v-U|^2/2 = E - rho|U|^2/2.
    const double internal = ms.E - 0.5 * ms.rho * ms.U.norm2();
    ms.T = (2.0 / d) * internal / ms.rho;
    ms.Theta = (ms.Sigma - SymMat3::outer(ms.U, d) * ms.rho) * (1.0 / ms.rho);

    // Heat flux along x needs a third moment; separate pass.
    double sq = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const Vec3 c = vg.nodes[j] - ms.U;
        sq += f[j] * 0.5 * c.norm2() * c[0];
    }
    ms.q = sq * w;
    return ms;
}

/// T = nu*Theta + (1-nu)*T*I, with inverse/determinant by cofactor formulas.
inline RelaxationTensor temperature_tensor(double nu, const SymMat3& Theta, double T) {
    if (!(T > 0.0)) throw NonpositiveTemperature("temperature_tensor: T=" + std::to_string(T));
    const SymMat3 t = Theta * nu + SymMat3::scaled_identity(Theta.dim, (1.0 - nu) * T);
    return RelaxationTensor::from(t, "nu=" + std::to_string(nu));
}

/// Anisotropic Gaussian rho/sqrt(det(2 pi T)) exp(-(v-U)' T^-1 (v-U)/2) at
/// every node. Exponents beyond the cutoff produce exact zeros.
inline void eval_gaussian(double rho, const Vec3& U, const RelaxationTensor& tensor,
                          const VelocityGrid& vg, std::span<double> out) {
    const int d = vg.dim;
    double det2pi = tensor.det;
    for (int k = 0; k < d; ++k) det2pi *= 2.0 * std::numbers::pi;
    const double pref = rho / std::sqrt(det2pi);
    const std::size_t m = vg.n_nodes();
    for (std::size_t j = 0; j < m; ++j) {
        const Vec3 c = vg.nodes[j] - U;
        const double h = 0.5 * tensor.inverse.quad_form(c);
        out[j] = (h > kGaussExpCutoff) ? 0.0 : pref * std::exp(-h);
    }
}

inline std::vector<double> eval_gaussian(double rho, const Vec3& U,
                                         const RelaxationTensor& tensor,
                                         const VelocityGrid& vg) {
    std::vector<double> out(vg.n_nodes());
    eval_gaussian(rho, U, tensor, vg, out);
    return out;
}

/// Isotropic Maxwellian: the Gaussian with T = T*I.
inline void eval_maxwellian(double rho, const Vec3& U, double T, const VelocityGrid& vg,
                            std::span<double> out) {
    eval_gaussian(rho, U,
                  RelaxationTensor::from(SymMat3::scaled_identity(vg.dim, T), "maxwellian"),
                  vg, out);
}

inline std::vector<double> eval_maxwellian(double rho, const Vec3& U, double T,
                                           const VelocityGrid& vg) {
    std::vector<double> out(vg.n_nodes());
    eval_maxwellian(rho, U, T, vg, out);
    return out;
}

} // namespace esbgk
