#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "esbgk/errors.hpp"
#include "esbgk/grid.hpp"
#include "esbgk/moments.hpp"

namespace esbgk {

/// Target invariant moments U = (rho, rho U, E), d_v + 2 values.
struct MomentTarget {
    double rho = 0.0;
    Vec3 rho_u;
    double E = 0.0;

    void validate(int dim) const {
        if (!(rho > 0.0)) throw InvalidConfig("MomentTarget: rho must be positive");
        double p2 = 0.0;
        for (int k = 0; k < dim; ++k) p2 += rho_u[k] * rho_u[k];
        if (!(E > 0.5 * p2 / rho))
            throw InvalidConfig("MomentTarget: nonpositive internal energy");
    }

    double component(int a, int dim) const {
        if (a == 0) return rho;
        if (a <= dim) return rho_u[a - 1];
        return E;
    }
    double max_abs(int dim) const {
        double m = std::max(std::abs(rho), std::abs(E));
        for (int k = 0; k < dim; ++k) m = std::max(m, std::abs(rho_u[k]));
        return m;
    }
};

namespace detail {

// collision invariant phi_a(v): 1, v_1..v_d, |v|^2/2
inline double invariant(int a, const Vec3& v, double vsq, int dim) {
    if (a == 0) return 1.0;
    if (a <= dim) return v[a - 1];
    return 0.5 * vsq;
}

template <int NMAX = 5>
struct SmallCholesky {
    std::array<double, NMAX * NMAX> L{};
    int n = 0;

    void factor(const double* gram, int n_, const std::string& context) {
        n = n_;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                double s = gram[i * n + j];
                for (int k = 0; k < j; ++k) s -= L[i * NMAX + k] * L[j * NMAX + k];
                if (i == j) {
                    if (!(s > 0.0))
                        throw SingularGram("Gram matrix not positive definite (" + context + ")");
                    L[i * NMAX + i] = std::sqrt(s);
                } else {
                    L[i * NMAX + j] = s / L[j * NMAX + j];
                }
            }
    }

    void solve(double* x) const {
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < i; ++k) x[i] -= L[i * NMAX + k] * x[k];
            x[i] /= L[i * NMAX + i];
        }
        for (int i = n - 1; i >= 0; --i) {
            for (int k = i + 1; k < n; ++k) x[i] -= L[k * NMAX + i] * x[k];
            x[i] /= L[i * NMAX + i];
        }
    }
};

} // namespace detail

/// Weighted constraint rows C (one per collision invariant, entries
/// omega_j phi_a(v_j) dv^d) together with the Cholesky-factorized Gram CC'.
class ConstraintSystem {
public:
    ConstraintSystem(const VelocityGrid& vgrid, std::vector<double> omega)
        : vgrid_(&vgrid), omega_(std::move(omega)) {
        const std::size_t m = vgrid.n_nodes();
        if (omega_.size() != m) throw InvalidConfig("build_constraints: omega size mismatch");
        for (double w : omega_)
            if (!(w > 0.0)) throw InvalidConfig("build_constraints: omega must be positive");
        n_ = vgrid.dim + 2;
        const double wq = vgrid.weight();
        std::array<double, 25> gram{};
        for (std::size_t j = 0; j < m; ++j) {
            const double w2 = omega_[j] * omega_[j] * wq * wq;
            std::array<double, 5> phi{};
            for (int a = 0; a < n_; ++a)
                phi[a] = detail::invariant(a, vgrid.nodes[j], vgrid.node_sq[j], vgrid.dim);
            for (int a = 0; a < n_; ++a)
                for (int b = 0; b <= a; ++b) gram[a * n_ + b] += w2 * phi[a] * phi[b];
        }
        for (int a = 0; a < n_; ++a)
            for (int b = a + 1; b < n_; ++b) gram[a * n_ + b] = gram[b * n_ + a];
        chol_.factor(gram.data(), n_, "build_constraints");
    }

    int n_constraints() const { return n_; }
    const VelocityGrid& vgrid() const { return *vgrid_; }
    std::span<const double> omega() const { return omega_; }

    /// Entry C[a][j] = omega_j phi_a(v_j) dv^d.
    double row(int a, std::size_t j) const {
        return omega_[j] * detail::invariant(a, vgrid_->nodes[j], vgrid_->node_sq[j], vgrid_->dim) *
               vgrid_->weight();
    }

    /// Discrete invariant moments of a value vector (equals C (g o 1/omega)).
    std::array<double, 5> moments_of(std::span<const double> g) const {
        std::array<double, 5> out{};
        const double wq = vgrid_->weight();
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double fj = g[j];
            out[0] += fj;
            for (int k = 0; k < vgrid_->dim; ++k) out[1 + k] += fj * vgrid_->nodes[j][k];
            out[vgrid_->dim + 1] += fj * 0.5 * vgrid_->node_sq[j];
        }
        for (int a = 0; a < n_; ++a) out[a] *= wq;
        return out;
    }

    void solve_gram(double* x) const { chol_.solve(x); }

private:
    const VelocityGrid* vgrid_;
    std::vector<double> omega_;
    int n_ = 0;
    detail::SmallCholesky<5> chol_;
};

inline ConstraintSystem build_constraints(const VelocityGrid& vgrid, std::vector<double> omega) {
    return ConstraintSystem(vgrid, std::move(omega));
}

/// Closed-form solution of the constrained weighted L2 problem
///   min || G o (1/omega) - g ||_2  s.t.  C g = U,
/// returned as the corrected node values g o omega. The weighted residual
/// never materializes 1/omega: C (G o 1/omega) reduces to the plain discrete
/// moments of G, and the correction carries omega^2.
inline std::vector<double> project(std::span<const double> G, const MomentTarget& target,
                                   const ConstraintSystem& cs) {
    const VelocityGrid& vg = cs.vgrid();
    const int n = cs.n_constraints();
    const int d = vg.dim;
    std::vector<double> out(G.begin(), G.end());
    const double wq = vg.weight();
    const std::span<const double> omega = cs.omega();
    // second pass is iterative refinement: it removes the conditioning-sized
    // residual the single Gram solve leaves behind
    for (int pass = 0; pass < 2; ++pass) {
        std::array<double, 5> mu = cs.moments_of(out);
        for (int a = 0; a < n; ++a) mu[a] = target.component(a, d) - mu[a];
        cs.solve_gram(mu.data());
        for (std::size_t j = 0; j < out.size(); ++j) {
            double corr = 0.0;
            for (int a = 0; a < n; ++a)
                corr += detail::invariant(a, vg.nodes[j], vg.node_sq[j], d) * mu[a];
            out[j] += omega[j] * omega[j] * wq * corr;
        }
    }
    return out;
}

/// Exponent cutoff for the Maxwellian-type weight: omega_j^2 below
/// exp(-138) ~ 1e-60 is treated as exactly zero, so corrections vanish in the
/// far tail instead of underflowing.
inline constexpr double kOmegaSqExpCutoff = 138.0;

/// In-place projection with the solver's weight choice
/// omega_j = exp(-|v_j|^2 / (2 T_ref)), fused for per-cell use. Same math as
/// build_constraints + project, without allocating the weight vector.
inline void project_maxwell_weight(std::span<double> G, const MomentTarget& target,
                                   const VelocityGrid& vg, double T_ref) {
    const int d = vg.dim;
    const int n = d + 2;
    const double wq = vg.weight();
    const double inv_t = 1.0 / T_ref;

    std::array<double, 25> gram{};
    std::array<double, 5> mom{};
    const std::size_t m = vg.n_nodes();
    for (std::size_t j = 0; j < m; ++j) {
        const double vsq = vg.node_sq[j];
        const double fj = G[j];
        const Vec3& v = vg.nodes[j];
        mom[0] += fj;
        for (int k = 0; k < d; ++k) mom[1 + k] += fj * v[k];
        mom[d + 1] += fj * 0.5 * vsq;

        const double h = vsq * inv_t;
        if (h > kOmegaSqExpCutoff) continue;
        const double w2 = std::exp(-h);
        std::array<double, 5> phi{};
        phi[0] = 1.0;
        for (int k = 0; k < d; ++k) phi[1 + k] = v[k];
        phi[d + 1] = 0.5 * vsq;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b <= a; ++b) gram[a * n + b] += w2 * phi[a] * phi[b];
    }
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) gram[a * n + b] = gram[b * n + a];
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) gram[a * n + b] *= wq * wq;

    detail::SmallCholesky<5> chol;
    chol.factor(gram.data(), n, "project_maxwell_weight T_ref=" + std::to_string(T_ref));

    // two passes: solve, correct, then refine once against the achieved moments
    for (int pass = 0; pass < 2; ++pass) {
        std::array<double, 5> mu{};
        for (int a = 0; a < n; ++a) mu[a] = target.component(a, d) - mom[a] * wq;
        chol.solve(mu.data());

        for (std::size_t j = 0; j < m; ++j) {
            const double h = vg.node_sq[j] * inv_t;
            if (h > kOmegaSqExpCutoff) continue;
            const double w2 = std::exp(-h);
            const Vec3& v = vg.nodes[j];
            double corr = mu[0] + 0.5 * vg.node_sq[j] * mu[d + 1];
            for (int k = 0; k < d; ++k) corr += v[k] * mu[1 + k];
            G[j] += w2 * wq * corr;
        }
        if (pass == 1) break;
        mom = {};
        for (std::size_t j = 0; j < m; ++j) {
            const double fj = G[j];
            mom[0] += fj;
            for (int k = 0; k < d; ++k) mom[1 + k] += fj * vg.nodes[j][k];
            mom[d + 1] += fj * 0.5 * vg.node_sq[j];
        }
    }
}

} // namespace esbgk
