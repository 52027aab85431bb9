#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "esbgk/errors.hpp"
#include "esbgk/grid.hpp"
#include "esbgk/moments.hpp"
#include "esbgk/reconstruction.hpp"
#include "esbgk/relaxation.hpp"

namespace esbgk {

/// Diagonally implicit Runge-Kutta tableau, stiffly accurate (the last row of
/// A are the weights, c_s = 1), so f^{n+1} is the last stage.
struct DirkTableau {
    int stages = 0;
    std::array<std::array<double, 3>, 3> a{};
    std::array<double, 3> c{};
    std::string label;

    void validate() const {
        if (stages < 1 || stages > 3) throw InvalidConfig("DirkTableau: stages out of range");
        for (int k = 0; k < stages; ++k) {
            if (!(a[k][k] > 0.0))
                throw InvalidConfig("DirkTableau (" + label + "): a_kk must be positive");
            double row = 0.0;
            for (int l = 0; l <= k; ++l) row += a[k][l];
            if (std::abs(row - c[k]) > 1e-14)
                throw InvalidConfig("DirkTableau (" + label + "): row sum != c_k");
        }
        if (std::abs(c[stages - 1] - 1.0) > 1e-14)
            throw InvalidConfig("DirkTableau (" + label + "): not stiffly accurate");
    }

    static DirkTableau implicit_euler() {
        DirkTableau t;
        t.stages = 1;
        t.a[0][0] = 1.0;
        t.c[0] = 1.0;
        t.label = "dirk1";
        return t;
    }

    /// Two-stage L-stable SDIRK of order 2, gamma = 1 - sqrt(2)/2.
    static DirkTableau dirk2() {
        const double g = 1.0 - std::sqrt(2.0) / 2.0;
        DirkTableau t;
        t.stages = 2;
        t.a[0][0] = g;
        t.a[1][0] = 1.0 - g;
        t.a[1][1] = g;
        t.c[0] = g;
        t.c[1] = 1.0;
        t.label = "dirk2";
        return t;
    }

    /// Three-stage L-stable SDIRK of order 3; gamma is the middle root of
    /// 6x^3 - 18x^2 + 9x - 1.
    static DirkTableau dirk3() {
        const double g = 0.43586652150845899941601945119356;
        DirkTableau t;
        t.stages = 3;
        t.a[0][0] = g;
        t.a[1][0] = (1.0 - g) / 2.0;
        t.a[1][1] = g;
        t.a[2][0] = -(6.0 * g * g - 16.0 * g + 1.0) / 4.0;
        t.a[2][1] = (6.0 * g * g - 20.0 * g + 5.0) / 4.0;
        t.a[2][2] = g;
        t.c[0] = g;
        t.c[1] = (1.0 + g) / 2.0;
        t.c[2] = 1.0;
        t.label = "dirk3";
        return t;
    }

    static DirkTableau of_order(int p) {
        if (p == 1) return implicit_euler();
        if (p == 2) return dirk2();
        if (p == 3) return dirk3();
        throw InvalidConfig("DirkTableau: no tableau of order " + std::to_string(p));
    }
};

/// Backward differentiation formula written in semi-Lagrangian form:
/// f~ = sum_k alpha_k R(f^{n+1-k}, k v dt), implicit weight beta.
struct BdfScheme {
    int steps = 0;
    std::array<double, 3> alpha{};
    double beta = 0.0;
    std::string label;

    static BdfScheme bdf1() { return {1, {1.0, 0.0, 0.0}, 1.0, "bdf1"}; }
    static BdfScheme bdf2() { return {2, {4.0 / 3.0, -1.0 / 3.0, 0.0}, 2.0 / 3.0, "bdf2"}; }
    static BdfScheme bdf3() {
        return {3, {18.0 / 11.0, -9.0 / 11.0, 2.0 / 11.0}, 6.0 / 11.0, "bdf3"};
    }
    static BdfScheme of_order(int p) {
        if (p == 1) return bdf1();
        if (p == 2) return bdf2();
        if (p == 3) return bdf3();
        throw InvalidConfig("BdfScheme: no scheme of order " + std::to_string(p));
    }
};

enum class SchemeFamily { FirstOrder, Dirk, Bdf };
enum class BdfStartup { DirkSameOrder, Bdf1 };

struct SchemeSpec {
    SchemeFamily family = SchemeFamily::FirstOrder;
    DirkTableau tableau = DirkTableau::implicit_euler();
    BdfScheme bdf = BdfScheme::bdf1();
    BdfStartup startup = BdfStartup::DirkSameOrder;

    static SchemeSpec first_order() { return {}; }
    static SchemeSpec dirk(int order) {
        SchemeSpec s;
        s.family = SchemeFamily::Dirk;
        s.tableau = DirkTableau::of_order(order);
        return s;
    }
    static SchemeSpec bdf_scheme(int order, BdfStartup startup = BdfStartup::DirkSameOrder) {
        SchemeSpec s;
        s.family = SchemeFamily::Bdf;
        s.bdf = BdfScheme::of_order(order);
        s.tableau = DirkTableau::of_order(order);
        s.startup = startup;
        return s;
    }

    std::string label() const {
        if (family == SchemeFamily::FirstOrder) return "first-order";
        if (family == SchemeFamily::Dirk) return tableau.label;
        return bdf.label;
    }
};

/// Invariant totals sum over the whole phase grid, weight dv^d dx.
struct LedgerEntry {
    double t = 0.0;
    double m0 = 0.0;
    Vec3 m1;
    double m2 = 0.0;
};

/// Per-step diagnostics, accumulated over all stages and cells.
struct StepStats {
    double t_new = 0.0;
    double dt = 0.0;
    double max_f_old = 0.0;        // sup of the pre-step solution
    double min_f_new = 0.0;        // inf / sup of the post-step solution
    double max_f_new = 0.0;
    double max_g = 0.0;            // sup over stages of the projected Gaussian
    double max_tensor_aniso = 0.0; // sup_cells || T_tensor - T~ I ||_inf
    double min_rho = std::numeric_limits<double>::infinity();
    double min_T = std::numeric_limits<double>::infinity();
    bool startup_fallback = false; // BDF step replaced by its startup scheme
    std::string scheme;
};

/// dest[i,j] = (or +=) coeff * R_j(src row j)(x_i - v_j1 * t_shift).
/// Rows that are identically zero short-circuit; the far Gaussian tail is
/// exact zero by construction, so those rows never touch the stencil code.
inline void transport_rows(std::span<const double> src, std::span<double> dest,
                           const SpatialGrid& sg, const VelocityGrid& vg, double t_shift,
                           ReconstructionKind kind, double coeff, bool accumulate) {
    const int n = sg.n_cells;
    const std::size_t m = vg.n_nodes();
    thread_local std::vector<double> ext, row;
    row.resize(static_cast<std::size_t>(n));

    for (std::size_t j = 0; j < m; ++j) {
        const double s = vg.nodes[j][0] * t_shift;
        const int g = required_ghost(kind, s, sg.dx);
        ext.resize(static_cast<std::size_t>(n) + 2 * g);
        double* const u = ext.data() + g;
        double amax = 0.0;
        for (int i = 0; i < n; ++i) {
            const double fv = src[static_cast<std::size_t>(i) * m + j];
            u[i] = fv;
            amax = std::max(amax, std::abs(fv));
        }
        if (amax == 0.0) {
            if (!accumulate)
                for (int i = 0; i < n; ++i) dest[static_cast<std::size_t>(i) * m + j] = 0.0;
            continue;
        }
        for (int i = -g; i < 0; ++i)
            u[i] = (sg.bc == BoundaryCondition::Periodic) ? u[((i % n) + n) % n] : u[0];
        for (int i = n; i < n + g; ++i)
            u[i] = (sg.bc == BoundaryCondition::Periodic) ? u[i % n] : u[n - 1];

        reconstruct_shifted_into(ext, n, g, s, sg.dx, kind, row);
        if (accumulate) {
            for (int i = 0; i < n; ++i)
                dest[static_cast<std::size_t>(i) * m + j] += coeff * row[i];
        } else {
            for (int i = 0; i < n; ++i)
                dest[static_cast<std::size_t>(i) * m + j] = coeff * row[i];
        }
    }
}

struct RunResult {
    int n_steps = 0;
    double final_time = 0.0;
};

/// Semi-Lagrangian ES-BGK solver: owns the current state, the BDF history
/// ring, stage workspaces and the conservation ledger.
class KineticSolver {
public:
    using Observer = std::function<void(const StepStats&)>;

    KineticSolver(SpatialGrid sg, VelocityGrid vg, ModelParams params, SchemeSpec scheme,
                  ReconstructionKind recon, bool projection_on = true)
        : field_(std::move(sg), std::move(vg)), params_(params), scheme_(std::move(scheme)),
          recon_(recon), projection_on_(projection_on) {
        params_.validate(field_.velocity.dim);
        scheme_.tableau.validate();
        g_row_.resize(field_.velocity.n_nodes());
    }

    PhaseField& field() { return field_; }
    const PhaseField& field() const { return field_; }
    const std::vector<LedgerEntry>& ledger() const { return ledger_; }
    const SchemeSpec& scheme() const { return scheme_; }
    bool projection_on() const { return projection_on_; }

    /// Fills f(0, x_i, v_j) from a callback and resets history and ledger.
    void set_initial(const std::function<double(double, const Vec3&)>& f0) {
        const std::size_t m = field_.velocity.n_nodes();
        for (int i = 0; i < field_.spatial.n_cells; ++i) {
            const double x = field_.spatial.node(i);
            std::span<double> c = field_.cell(i);
            for (std::size_t j = 0; j < m; ++j) c[j] = f0(x, field_.velocity.nodes[j]);
        }
        field_.time = 0.0;
        reset_history();
    }

    void reset_history() {
        history_.clear();
        last_dt_ = 0.0;
        ledger_.clear();
        ledger_.push_back(totals());
    }

    LedgerEntry totals() const {
        LedgerEntry e;
        e.t = field_.time;
        const std::size_t m = field_.velocity.n_nodes();
        double s0 = 0.0, s2 = 0.0;
        Vec3 s1;
        for (std::size_t idx = 0; idx < field_.values.size(); ++idx) {
            const double fv = field_.values[idx];
            const std::size_t j = idx % m;
            s0 += fv;
            for (int k = 0; k < field_.velocity.dim; ++k)
                s1[k] += fv * field_.velocity.nodes[j][k];
            s2 += fv * 0.5 * field_.velocity.node_sq[j];
        }
        const double w = field_.velocity.weight() * field_.spatial.dx;
        e.m0 = s0 * w;
        e.m1 = s1 * w;
        e.m2 = s2 * w;
        return e;
    }

    /// One step of the configured scheme; BDF steps with insufficient history
    /// fall back to the configured startup scheme.
    StepStats step(double dt) {
        switch (scheme_.family) {
            case SchemeFamily::FirstOrder: return step_first_order(dt);
            case SchemeFamily::Dirk: return step_dirk(scheme_.tableau, dt);
            default: break;
        }
        if (static_cast<int>(history_.size()) < scheme_.bdf.steps - 1) {
            StepStats st = (scheme_.startup == BdfStartup::Bdf1)
                               ? step_bdf(BdfScheme::bdf1(), dt)
                               : step_dirk(scheme_.tableau, dt);
            st.startup_fallback = true;
            return st;
        }
        return step_bdf(scheme_.bdf, dt);
    }

    /// Backward Euler stage with linear interpolation transport.
    StepStats step_first_order(double dt) {
        return step_dirk_impl(DirkTableau::implicit_euler(), dt, ReconstructionKind::Linear,
                              "first-order");
    }

    StepStats step_dirk(const DirkTableau& tab, double dt) {
        return step_dirk_impl(tab, dt, recon_, tab.label);
    }

    StepStats step_bdf(const BdfScheme& scheme, double dt) {
        if (static_cast<int>(history_.size()) < scheme.steps - 1)
            throw InsufficientHistory("step_bdf (" + scheme.label + "): have " +
                                      std::to_string(history_.size()) + " past states");
        if (scheme.steps > 1 && std::abs(dt - last_dt_) > 1e-12 * std::abs(last_dt_))
            throw InvalidConfig("step_bdf: nonuniform dt against stored history");
        check_dt(dt);

        StepStats st = begin_stats(dt, scheme.label);
        ensure_buffer(f_tilde_);
        ensure_buffer(f_stage_);

        transport_rows(field_.values, f_tilde_, field_.spatial, field_.velocity, dt, recon_,
                       scheme.alpha[0], false);
        for (int k = 2; k <= scheme.steps; ++k)
            transport_rows(history_[k - 2], f_tilde_, field_.spatial, field_.velocity, k * dt,
                           recon_, scheme.alpha[k - 1], true);

        const std::size_t m = field_.velocity.n_nodes();
        const double a_dt = scheme.beta * dt;
        for (int i = 0; i < field_.spatial.n_cells; ++i) {
            std::span<const double> ft{f_tilde_.data() + static_cast<std::size_t>(i) * m, m};
            std::span<double> fs{f_stage_.data() + static_cast<std::size_t>(i) * m, m};
            const CellStageInfo info =
                relax_stage_cell(ft, field_.velocity, params_, a_dt, projection_on_, g_row_, fs);
            absorb_cell(st, info);
        }

        const int keep = (scheme_.family == SchemeFamily::Bdf) ? scheme_.bdf.steps - 1
                                                               : scheme.steps - 1;
        commit(st, dt, keep);
        return st;
    }

    /// Advances to t_final with fixed dt. A short final step is clipped; for
    /// BDF schemes the clipped step runs the same-order DIRK so the history
    /// spacing is never violated.
    RunResult run(double t_final, double dt, const Observer& obs = nullptr) {
        if (!(dt > 0.0)) throw InvalidConfig("run: dt must be positive");
        if (t_final < field_.time - 1e-12) throw InvalidConfig("run: t_final in the past");
        RunResult res;
        const double span = t_final - field_.time;
        long n_full = static_cast<long>(std::floor(span / dt + 1e-9));
        double rem = span - static_cast<double>(n_full) * dt;
        if (rem <= 1e-12 * dt) rem = 0.0;

        for (long k = 0; k < n_full; ++k) {
            StepStats st = step(dt);
            ++res.n_steps;
            if (obs) obs(st);
        }
        if (rem > 0.0) {
            StepStats st = (scheme_.family == SchemeFamily::Bdf)
                               ? step_dirk(scheme_.tableau, rem)
                               : step(rem);
            ++res.n_steps;
            if (obs) obs(st);
        }
        res.final_time = field_.time;
        return res;
    }

    /// sup |f - M[f]| / sup |f| over the whole phase grid, with M[f] the
    /// isotropic Maxwellian of each cell's own moments.
    double maxwellian_distance() const {
        const std::size_t m = field_.velocity.n_nodes();
        std::vector<double> maxw(m);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < field_.spatial.n_cells; ++i) {
            std::span<const double> c = field_.cell(i);
            const MomentSet ms = compute_moments(c, field_.velocity);
            eval_maxwellian(ms.rho, ms.U, ms.T, field_.velocity, maxw);
            for (std::size_t j = 0; j < m; ++j) {
                num = std::max(num, std::abs(c[j] - maxw[j]));
                den = std::max(den, std::abs(c[j]));
            }
        }
        return num / den;
    }

private:
    void check_dt(double dt) const {
        if (!(dt > 0.0)) throw InvalidConfig("step: dt must be positive");
    }

    void ensure_buffer(std::vector<double>& buf) const {
        buf.resize(field_.values.size());
    }

    StepStats begin_stats(double dt, std::string label) const {
        StepStats st;
        st.dt = dt;
        st.t_new = field_.time + dt;
        st.scheme = std::move(label);
        for (double fv : field_.values) st.max_f_old = std::max(st.max_f_old, fv);
        return st;
    }

    void absorb_cell(StepStats& st, const CellStageInfo& info) const {
        st.max_g = std::max(st.max_g, info.max_g);
        st.max_tensor_aniso = std::max(st.max_tensor_aniso, info.tensor_aniso);
        st.min_rho = std::min(st.min_rho, info.moments.rho);
        st.min_T = std::min(st.min_T, info.moments.T);
    }

    /// Pushes f^n into the history ring, promotes the staged solution and
    /// records the ledger entry.
    void commit(StepStats& st, double dt, int keep_history) {
        history_.push_front(std::move(field_.values));
        while (static_cast<int>(history_.size()) > std::max(keep_history, 0))
            history_.pop_back();
        field_.values = std::move(f_stage_);
        f_stage_.clear();
        field_.time += dt;
        last_dt_ = dt;

        st.min_f_new = std::numeric_limits<double>::infinity();
        st.max_f_new = -std::numeric_limits<double>::infinity();
        for (double fv : field_.values) {
            st.min_f_new = std::min(st.min_f_new, fv);
            st.max_f_new = std::max(st.max_f_new, fv);
        }
        ledger_.push_back(totals());
    }

    StepStats step_dirk_impl(const DirkTableau& tab, double dt, ReconstructionKind kind,
                             const std::string& label) {
        tab.validate();
        check_dt(dt);
        StepStats st = begin_stats(dt, label);
        ensure_buffer(f_tilde_);
        ensure_buffer(f_stage_);
        q_.resize(static_cast<std::size_t>(std::max(tab.stages - 1, 0)));
        for (auto& q : q_) ensure_buffer(q);

        const std::size_t m = field_.velocity.n_nodes();
        for (int k = 0; k < tab.stages; ++k) {
            transport_rows(field_.values, f_tilde_, field_.spatial, field_.velocity,
                           tab.c[k] * dt, kind, 1.0, false);
            for (int l = 0; l < k; ++l) {
                if (tab.a[k][l] == 0.0) continue;
                transport_rows(q_[l], f_tilde_, field_.spatial, field_.velocity,
                               (tab.c[k] - tab.c[l]) * dt, kind,
                               tab.a[k][l] * dt / params_.epsilon, true);
            }
            const double a_dt = tab.a[k][k] * dt;
            for (int i = 0; i < field_.spatial.n_cells; ++i) {
                std::span<const double> ft{f_tilde_.data() + static_cast<std::size_t>(i) * m, m};
                std::span<double> fs{f_stage_.data() + static_cast<std::size_t>(i) * m, m};
                const CellStageInfo info = relax_stage_cell(ft, field_.velocity, params_, a_dt,
                                                            projection_on_, g_row_, fs);
                absorb_cell(st, info);
                if (k < tab.stages - 1)
                    relaxation_term(fs, g_row_, info.tau,
                                    {q_[k].data() + static_cast<std::size_t>(i) * m, m});
            }
        }

        const int keep = (scheme_.family == SchemeFamily::Bdf) ? scheme_.bdf.steps - 1 : 0;
        commit(st, dt, keep);
        return st;
    }

    PhaseField field_;
    ModelParams params_;
    SchemeSpec scheme_;
    ReconstructionKind recon_;
    bool projection_on_;

    std::deque<std::vector<double>> history_; // past solutions, newest first
    double last_dt_ = 0.0;
    std::vector<LedgerEntry> ledger_;

    std::vector<double> f_tilde_, f_stage_, g_row_;
    std::vector<std::vector<double>> q_;
};

} // namespace esbgk
