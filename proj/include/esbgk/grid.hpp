#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "esbgk/errors.hpp"
#include "esbgk/linalg.hpp"

namespace esbgk {

enum class BoundaryCondition { Periodic, FreeFlow };
enum class NodeLayout { PeriodicNodes, CellCenters };

/// Uniform 1D spatial grid. Periodic runs place nodes at cell left edges
/// (x_L + i*dx), free-flow runs at cell centers (x_L + (i+1/2)*dx).
struct SpatialGrid {
    double x_left = 0.0;
    double x_right = 1.0;
    int n_cells = 0;
    double dx = 0.0;
    NodeLayout layout = NodeLayout::PeriodicNodes;
    BoundaryCondition bc = BoundaryCondition::Periodic;

    double node(int i) const {
        const double off = (layout == NodeLayout::CellCenters) ? 0.5 : 0.0;
        return x_left + (static_cast<double>(i) + off) * dx;
    }
    double length() const { return x_right - x_left; }
};

inline SpatialGrid build_spatial_grid(double x_left, double x_right, int n_cells,
                                      BoundaryCondition bc) {
    if (n_cells < 4)
        throw InvalidConfig("build_spatial_grid: n_cells=" + std::to_string(n_cells) +
                            " is below the minimum of 4");
    if (!(x_right > x_left)) throw InvalidConfig("build_spatial_grid: inverted domain");
    SpatialGrid g;
    g.x_left = x_left;
    g.x_right = x_right;
    g.n_cells = n_cells;
    g.dx = (x_right - x_left) / n_cells;
    g.bc = bc;
    g.layout = (bc == BoundaryCondition::Periodic) ? NodeLayout::PeriodicNodes
                                                   : NodeLayout::CellCenters;
    return g;
}

/// Uniform tensor grid on [-v_max, v_max]^dim with N_v intervals per axis,
/// i.e. (N_v+1)^dim nodes. N_v must be even so that v = 0 is a node and the
/// node set is symmetric under v -> -v.
struct VelocityGrid {
    double v_max = 0.0;
    int n_intervals = 0; // N_v
    int dim = 0;         // d_v
    double dv = 0.0;
    std::vector<Vec3> nodes;       // flattened tensor grid, axis 0 fastest
    std::vector<double> node_sq;   // |v_j|^2 cache

    std::size_t n_nodes() const { return nodes.size(); }
    /// Quadrature weight (rectangle rule): (dv)^dim at every node.
    double weight() const {
        double w = dv;
        for (int k = 1; k < dim; ++k) w *= dv;
        return w;
    }

    /// Toy grid from an explicit node list (used by the moment projection
    /// machinery; dim may be 1 here).
    static VelocityGrid from_nodes(std::vector<Vec3> pts, int dim, double dv) {
        VelocityGrid g;
        g.dim = dim;
        g.dv = dv;
        g.nodes = std::move(pts);
        g.node_sq.resize(g.nodes.size());
        for (std::size_t j = 0; j < g.nodes.size(); ++j) g.node_sq[j] = g.nodes[j].norm2();
        if (!g.nodes.empty()) {
            double vm = 0.0;
            for (const auto& v : g.nodes)
                for (int k = 0; k < dim; ++k) vm = std::max(vm, std::abs(v[k]));
            g.v_max = vm;
        }
        return g;
    }
};

inline VelocityGrid build_velocity_grid(double v_max, int n_intervals, int dim) {
    if (!(v_max > 0.0)) throw InvalidConfig("build_velocity_grid: v_max must be positive");
    if (n_intervals < 2 || n_intervals % 2 != 0)
        throw InvalidConfig("build_velocity_grid: N_v must be even and >= 2, got " +
                            std::to_string(n_intervals));
    if (dim != 2 && dim != 3) throw InvalidConfig("build_velocity_grid: d_v must be 2 or 3");

    VelocityGrid g;
    g.v_max = v_max;
    g.n_intervals = n_intervals;
    g.dim = dim;
    g.dv = 2.0 * v_max / n_intervals;

    const int n1 = n_intervals + 1;
    std::size_t total = 1;
    for (int k = 0; k < dim; ++k) total *= n1;
    g.nodes.resize(total);
    g.node_sq.resize(total);

    std::size_t idx = 0;
    if (dim == 2) {
        for (int j2 = 0; j2 < n1; ++j2)
            for (int j1 = 0; j1 < n1; ++j1) {
                Vec3 v{{-v_max + j1 * g.dv, -v_max + j2 * g.dv, 0.0}};
                g.nodes[idx] = v;
                g.node_sq[idx] = v.norm2();
                ++idx;
            }
    } else {
        for (int j3 = 0; j3 < n1; ++j3)
            for (int j2 = 0; j2 < n1; ++j2)
                for (int j1 = 0; j1 < n1; ++j1) {
                    Vec3 v{{-v_max + j1 * g.dv, -v_max + j2 * g.dv, -v_max + j3 * g.dv}};
                    g.nodes[idx] = v;
                    g.node_sq[idx] = v.norm2();
                    ++idx;
                }
    }
    return g;
}

/// Time step from a CFL number: dt = cfl * dx / v_max.
struct CflSpec {
    double cfl = 1.0;
    double dt(const SpatialGrid& sg, const VelocityGrid& vg) const {
        if (!(cfl > 0.0)) throw InvalidConfig("CflSpec: cfl must be positive");
        return cfl * sg.dx / vg.v_max;
    }
};

/// Discrete distribution f over (cell, velocity node), cell-major layout:
/// values[i * n_nodes + j].
struct PhaseField {
    SpatialGrid spatial;
    VelocityGrid velocity; // shared-value copy; grids are small relative to f
    std::vector<double> values;
    double time = 0.0;

    PhaseField() = default;
    PhaseField(SpatialGrid sg, VelocityGrid vg)
        : spatial(std::move(sg)), velocity(std::move(vg)) {
        values.assign(static_cast<std::size_t>(spatial.n_cells) * velocity.n_nodes(), 0.0);
    }

    std::span<double> cell(int i) {
        return {values.data() + static_cast<std::size_t>(i) * velocity.n_nodes(),
                velocity.n_nodes()};
    }
    std::span<const double> cell(int i) const {
        return {values.data() + static_cast<std::size_t>(i) * velocity.n_nodes(),
                velocity.n_nodes()};
    }
};

/// Extends a per-cell value row with n_ghost cells on each side.
/// Periodic: wrap-around (multiple wraps allowed). FreeFlow: constant
/// extrapolation of the boundary values.
inline std::vector<double> ghost_extend(std::span<const double> values, int n_ghost,
                                        BoundaryCondition bc) {
    if (n_ghost < 0) throw InvalidConfig("ghost_extend: negative ghost count");
    const int n = static_cast<int>(values.size());
    std::vector<double> out(static_cast<std::size_t>(n) + 2 * n_ghost);
    for (int i = -n_ghost; i < n + n_ghost; ++i) {
        int src;
        if (bc == BoundaryCondition::Periodic) {
            src = ((i % n) + n) % n;
        } else {
            src = std::min(std::max(i, 0), n - 1);
        }
        out[static_cast<std::size_t>(i + n_ghost)] = values[static_cast<std::size_t>(src)];
    }
    return out;
}

} // namespace esbgk
