#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "esbgk/errors.hpp"

namespace esbgk {

/// Fixed-capacity velocity-space vector. Only the first `dim` components of a
/// grid's vectors are meaningful; unused entries are kept at zero so that
/// dot products and norms can run over the full array unconditionally.
struct Vec3 {
    std::array<double, 3> c{0.0, 0.0, 0.0};

    double& operator[](std::size_t i) { return c[i]; }
    double operator[](std::size_t i) const { return c[i]; }

    Vec3 operator-(const Vec3& o) const { return {{c[0] - o.c[0], c[1] - o.c[1], c[2] - o.c[2]}}; }
    Vec3 operator+(const Vec3& o) const { return {{c[0] + o.c[0], c[1] + o.c[1], c[2] + o.c[2]}}; }
    Vec3 operator*(double s) const { return {{c[0] * s, c[1] * s, c[2] * s}}; }

    double dot(const Vec3& o) const { return c[0] * o.c[0] + c[1] * o.c[1] + c[2] * o.c[2]; }
    double norm2() const { return dot(*this); }
};

/// Symmetric d x d matrix (d <= 3), stored as the lower triangle
/// [a00, a10, a11, a20, a21, a22]. Entries beyond `dim` are unused.
struct SymMat3 {
    std::array<double, 6> a{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    int dim = 3;

    static SymMat3 identity(int d) {
        SymMat3 m;
        m.dim = d;
        m.a = {1.0, 0.0, 1.0, 0.0, 0.0, 1.0};
        return m;
    }

    static SymMat3 scaled_identity(int d, double s) {
        SymMat3 m;
        m.dim = d;
        m.a = {s, 0.0, s, 0.0, 0.0, s};
        return m;
    }

    static SymMat3 zero(int d) {
        SymMat3 m;
        m.dim = d;
        return m;
    }

    /// Outer product u ⊗ u restricted to d components.
    static SymMat3 outer(const Vec3& u, int d) {
        SymMat3 m;
        m.dim = d;
        m.a = {u[0] * u[0], u[1] * u[0], u[1] * u[1], u[2] * u[0], u[2] * u[1], u[2] * u[2]};
        return m;
    }

    double& at(int i, int j) {
        if (i < j) std::swap(i, j);
        return a[i * (i + 1) / 2 + j];
    }
    double at(int i, int j) const {
        if (i < j) std::swap(i, j);
        return a[i * (i + 1) / 2 + j];
    }

    SymMat3 operator+(const SymMat3& o) const {
        SymMat3 m = *this;
        for (int k = 0; k < 6; ++k) m.a[k] += o.a[k];
        return m;
    }
    SymMat3 operator-(const SymMat3& o) const {
        SymMat3 m = *this;
        for (int k = 0; k < 6; ++k) m.a[k] -= o.a[k];
        return m;
    }
    SymMat3 operator*(double s) const {
        SymMat3 m = *this;
        for (int k = 0; k < 6; ++k) m.a[k] *= s;
        return m;
    }

    double trace() const {
        double t = a[0];
        if (dim > 1) t += a[2];
        if (dim > 2) t += a[5];
        return t;
    }

    /// Cofactor-formula determinant; exact closed form for d <= 3.
    double det() const {
        switch (dim) {
            case 1: return a[0];
            case 2: return a[0] * a[2] - a[1] * a[1];
            default:
                return a[0] * (a[2] * a[5] - a[4] * a[4]) - a[1] * (a[1] * a[5] - a[4] * a[3]) +
                       a[3] * (a[1] * a[4] - a[2] * a[3]);
        }
    }

    /// Sylvester criterion with strict inequalities on the leading minors.
    bool is_spd() const {
        if (a[0] <= 0.0) return false;
        if (dim >= 2 && a[0] * a[2] - a[1] * a[1] <= 0.0) return false;
        if (dim >= 3 && det() <= 0.0) return false;
        return true;
    }

    SymMat3 inverse() const {
        const double d = det();
        SymMat3 m;
        m.dim = dim;
        switch (dim) {
            case 1:
                m.a[0] = 1.0 / a[0];
                break;
            case 2:
                m.a[0] = a[2] / d;
                m.a[1] = -a[1] / d;
                m.a[2] = a[0] / d;
                break;
            default:
                m.a[0] = (a[2] * a[5] - a[4] * a[4]) / d;
                m.a[1] = (a[3] * a[4] - a[1] * a[5]) / d;
                m.a[2] = (a[0] * a[5] - a[3] * a[3]) / d;
                m.a[3] = (a[1] * a[4] - a[2] * a[3]) / d;
                m.a[4] = (a[1] * a[3] - a[0] * a[4]) / d;
                m.a[5] = (a[0] * a[2] - a[1] * a[1]) / d;
                break;
        }
        return m;
    }

    /// xᵀ A x over the first `dim` components.
    double quad_form(const Vec3& x) const {
        double q = a[0] * x[0] * x[0];
        if (dim > 1) q += 2.0 * a[1] * x[0] * x[1] + a[2] * x[1] * x[1];
        if (dim > 2) q += 2.0 * a[3] * x[0] * x[2] + 2.0 * a[4] * x[1] * x[2] + a[5] * x[2] * x[2];
        return q;
    }

    double max_abs() const {
        double m = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j <= i; ++j) m = std::max(m, std::abs(at(i, j)));
        return m;
    }
};

} // namespace esbgk
