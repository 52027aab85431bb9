#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "esbgk/errors.hpp"
#include "esbgk/grid.hpp"

namespace esbgk {

/// Non-oscillatory evaluation of grid functions at uniformly shifted points.
/// Linear is plain two-point interpolation; the QCWENO kinds blend CWENO
/// polynomials (built from the point values treated as cell averages) and
/// evaluate them through a sliding cell average, so that sums over shifted
/// points telescope exactly on periodic data for any shift.
enum class ReconstructionKind { Linear, QCWENO23, QCWENO35 };

inline int stencil_halfwidth(ReconstructionKind kind) {
    switch (kind) {
        case ReconstructionKind::Linear: return 1;
        case ReconstructionKind::QCWENO23: return 2;
        default: return 3;
    }
}

namespace detail {

// Average of xi^n over the unit cell [m-1/2, m+1/2].
inline double cell_avg_monomial(int n, double m) {
    switch (n) {
        case 0: return 1.0;
        case 1: return m;
        case 2: return m * m + 1.0 / 12.0;
        case 3: return m * m * m + m / 4.0;
        default: return ((m * m + 0.5) * m * m) + 1.0 / 80.0;
    }
}

// Inverse of the averages->coefficients map for a contiguous offset window,
// computed once by Gauss-Jordan elimination.
template <int N>
struct RecoveryTable {
    std::array<std::array<double, N>, N> inv{};

    explicit RecoveryTable(int first_offset) {
        std::array<std::array<double, 2 * N>, N> aug{};
        for (int r = 0; r < N; ++r) {
            for (int c = 0; c < N; ++c)
                aug[r][c] = cell_avg_monomial(c, static_cast<double>(first_offset + r));
            aug[r][N + r] = 1.0;
        }
        for (int col = 0; col < N; ++col) {
            int piv = col;
            for (int r = col + 1; r < N; ++r)
                if (std::abs(aug[r][col]) > std::abs(aug[piv][col])) piv = r;
            std::swap(aug[col], aug[piv]);
            const double d = aug[col][col];
            for (int c = 0; c < 2 * N; ++c) aug[col][c] /= d;
            for (int r = 0; r < N; ++r) {
                if (r == col) continue;
                const double m = aug[r][col];
                for (int c = 0; c < 2 * N; ++c) aug[r][c] -= m * aug[col][c];
            }
        }
        for (int r = 0; r < N; ++r)
            for (int c = 0; c < N; ++c) inv[r][c] = aug[r][N + c];
    }

    // coefficients p of the degree-(N-1) polynomial with the given averages
    void recover(const double* avgs, double* p) const {
        for (int r = 0; r < N; ++r) {
            double s = 0.0;
            for (int c = 0; c < N; ++c) s += inv[r][c] * avgs[c];
            p[r] = s;
        }
    }
};

// Jiang-Shu style smoothness of a polynomial in local coordinates:
// sum over derivative orders of the integrated squared derivative.
template <int N>
inline double smoothness(const std::array<double, N>& p) {
    // I[n] = integral of xi^n over [-1/2, 1/2]
    static constexpr std::array<double, 9> I = {
        1.0, 0.0, 1.0 / 12.0, 0.0, 1.0 / 80.0, 0.0, 1.0 / 448.0, 0.0, 1.0 / 2304.0};
    std::array<double, N> q = p;
    int deg = N - 1;
    double beta = 0.0;
    for (int l = 1; l <= N - 1; ++l) {
        // differentiate q
        for (int n = 0; n < deg; ++n) q[n] = (n + 1) * q[n + 1];
        --deg;
        for (int a = 0; a <= deg; ++a)
            for (int b = 0; b <= deg; ++b) beta += q[a] * q[b] * I[a + b];
    }
    return beta;
}

// Antiderivative of the polynomial evaluated at xi.
template <int N>
inline double primitive(const std::array<double, N>& p, double xi) {
    double s = 0.0;
    for (int n = N - 1; n >= 0; --n) s = s * xi + p[n] / (n + 1);
    return s * xi;
}

// CWENO blend on cell k. u points at the value of cell k (neighbors by
// offset). Returns the blended polynomial coefficients (degree 4 storage).
inline std::array<double, 5> cweno23_poly(const double* u, double eps) {
    const double a = u[-1], b = u[0], c = u[1];
    std::array<double, 3> popt{}, pl{}, pr{};
    popt[2] = 0.5 * (a - 2.0 * b + c);
    popt[1] = 0.5 * (c - a);
    popt[0] = b - popt[2] / 12.0;
    pl = {b, b - a, 0.0};
    pr = {b, c - b, 0.0};
    constexpr double cl = 0.25, cr = 0.25, cc = 0.5;
    std::array<double, 3> pc{};
    for (int n = 0; n < 3; ++n) pc[n] = (popt[n] - cl * pl[n] - cr * pr[n]) / cc;

    const double bl = (b - a) * (b - a);
    const double br = (c - b) * (c - b);
    const double bc = (13.0 / 12.0) * (a - 2.0 * b + c) * (a - 2.0 * b + c) +
                      0.25 * (c - a) * (c - a);
    // Fourth undivided difference: vanishes identically on cubic data, so the
    // weights collapse to the ideal ones and quadratics are reproduced exactly.
    const double d4 = u[-2] - 4.0 * a + 6.0 * b - 4.0 * c + u[2];
    const double tau = d4 * d4;

    double al = cl * (1.0 + tau / (bl + eps));
    double ar = cr * (1.0 + tau / (br + eps));
    double ac = cc * (1.0 + tau / (bc + eps));
    const double asum = al + ar + ac;
    al /= asum;
    ar /= asum;
    ac /= asum;

    std::array<double, 5> out{};
    for (int n = 0; n < 3; ++n) out[n] = al * pl[n] + ar * pr[n] + ac * pc[n];
    return out;
}

inline std::array<double, 5> cweno35_poly(const double* u, double eps) {
    static const RecoveryTable<5> quartic(-2);
    static const RecoveryTable<3> quadL(-2), quadC(-1), quadR(0);

    std::array<double, 5> popt{};
    quartic.recover(u - 2, popt.data());
    std::array<double, 3> pl{}, pc3{}, pr{};
    quadL.recover(u - 2, pl.data());
    quadC.recover(u - 1, pc3.data());
    quadR.recover(u, pr.data());

    constexpr double cl = 1.0 / 6.0, cm = 1.0 / 6.0, cr = 1.0 / 6.0, c0 = 0.5;
    std::array<double, 5> p0{};
    for (int n = 0; n < 5; ++n) {
        const double lat = (n < 3) ? cl * pl[n] + cm * pc3[n] + cr * pr[n] : 0.0;
        p0[n] = (popt[n] - lat) / c0;
    }

    const double bl = smoothness<3>(pl);
    const double bm = smoothness<3>(pc3);
    const double br = smoothness<3>(pr);
    const double b0 = smoothness<5>(popt);
    // Sixth undivided difference: zero on quintic data, giving exactness for
    // quartics through ideal weights.
    const double d6 = u[-3] - 6.0 * u[-2] + 15.0 * u[-1] - 20.0 * u[0] + 15.0 * u[1] -
                      6.0 * u[2] + u[3];
    const double tau = d6 * d6;

    double al = cl * (1.0 + tau / (bl + eps));
    double am = cm * (1.0 + tau / (bm + eps));
    double ar = cr * (1.0 + tau / (br + eps));
    double a0 = c0 * (1.0 + tau / (b0 + eps));
    const double asum = al + am + ar + a0;
    al /= asum;
    am /= asum;
    ar /= asum;
    a0 /= asum;

    std::array<double, 5> out{};
    for (int n = 0; n < 5; ++n) {
        const double lat = (n < 3) ? al * pl[n] + am * pc3[n] + ar * pr[n] : 0.0;
        out[n] = lat + a0 * p0[n];
    }
    return out;
}

} // namespace detail

/// Ghost depth needed to evaluate at shift s with the given kind.
inline int required_ghost(ReconstructionKind kind, double s, double dx) {
    const double r = s / dx;
    const int m = static_cast<int>(std::floor(r));
    const int hw = stencil_halfwidth(kind);
    // cells -m-1 .. n-1-m are touched, each with halfwidth hw
    return std::max(m + 1 + hw, hw - m) + 1;
}

/// Core evaluation on pre-ghosted data: writes R(x_i - s) for the n_interior
/// interior nodes. Throws StencilOutOfRange if the ghost margin is too thin.
inline void reconstruct_shifted_into(std::span<const double> ghosted, int n_interior,
                                     int n_ghost, double s, double dx, ReconstructionKind kind,
                                     std::span<double> out) {
    if (static_cast<int>(ghosted.size()) != n_interior + 2 * n_ghost)
        throw InvalidConfig("reconstruct_shifted_into: size mismatch");
    const double r = s / dx;
    int m = static_cast<int>(std::floor(r));
    double theta = r - m;
    if (theta == 1.0) { // can occur from rounding of r just below an integer
        m += 1;
        theta = 0.0;
    }
    const double* u = ghosted.data() + n_ghost; // u[i] valid for i in [-n_ghost, n+n_ghost)

    if (theta == 0.0) { // integer shift: polynomial pieces interpolate node values
        if (m > n_ghost || -m > n_ghost)
            throw StencilOutOfRange("integer shift " + std::to_string(m) +
                                    " exceeds ghost depth " + std::to_string(n_ghost));
        for (int i = 0; i < n_interior; ++i) out[i] = u[i - m];
        return;
    }

    if (kind == ReconstructionKind::Linear) {
        if (m + 1 > n_ghost || -m > n_ghost)
            throw StencilOutOfRange("linear stencil exceeds ghost depth");
        for (int i = 0; i < n_interior; ++i)
            out[i] = theta * u[i - m - 1] + (1.0 - theta) * u[i - m];
        return;
    }

    const int hw = stencil_halfwidth(kind);
    const int k_lo = -m - 1, k_hi = n_interior - 1 - m; // cells entering the sliding window
    if (k_lo - hw < -n_ghost || k_hi + hw >= n_interior + n_ghost)
        throw StencilOutOfRange("WENO stencil exceeds ghost depth " + std::to_string(n_ghost));

    const double eps = 1e-6 * dx * dx;
    const double split = 0.5 - theta;
    // Per cell k: integral of the blend over [split, 1/2] (tail) and
    // [-1/2, split] (head); out[i] = tail[k=i-m-1] + head[k=i-m].
    const int n_cells = k_hi - k_lo + 1;
    thread_local std::vector<double> tail, head;
    tail.resize(n_cells);
    head.resize(n_cells);
    for (int k = k_lo; k <= k_hi; ++k) {
        const std::array<double, 5> p = (kind == ReconstructionKind::QCWENO23)
                                            ? detail::cweno23_poly(u + k, eps)
                                            : detail::cweno35_poly(u + k, eps);
        const double w_lo = detail::primitive<5>(p, -0.5);
        const double w_sp = detail::primitive<5>(p, split);
        const double w_hi = detail::primitive<5>(p, 0.5);
        tail[k - k_lo] = w_hi - w_sp;
        head[k - k_lo] = w_sp - w_lo;
    }
    for (int i = 0; i < n_interior; ++i)
        out[i] = tail[i - m - 1 - k_lo] + head[i - m - k_lo];
}

inline std::vector<double> reconstruct_shifted_ghosted(std::span<const double> ghosted,
                                                       int n_interior, int n_ghost, double s,
                                                       double dx, ReconstructionKind kind) {
    std::vector<double> out(static_cast<std::size_t>(n_interior));
    reconstruct_shifted_into(ghosted, n_interior, n_ghost, s, dx, kind, out);
    return out;
}

/// Convenience wrapper: ghost-extends interior values per the boundary
/// condition, then evaluates at the shifted points.
inline std::vector<double> reconstruct_shifted(std::span<const double> values, double s,
                                               double dx, ReconstructionKind kind,
                                               BoundaryCondition bc) {
    const int n = static_cast<int>(values.size());
    const int g = required_ghost(kind, s, dx);
    const std::vector<double> ext = ghost_extend(values, g, bc);
    return reconstruct_shifted_ghosted(ext, n, g, s, dx, kind);
}

/// First-order transport interpolation: convex combination of the two
/// neighbors of each shifted point, so output is bounded by the local input
/// extremes.
inline std::vector<double> linear_interpolate(std::span<const double> values, double s,
                                              double dx, BoundaryCondition bc) {
    return reconstruct_shifted(values, s, dx, ReconstructionKind::Linear, bc);
}

} // namespace esbgk
