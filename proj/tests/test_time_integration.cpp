#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "esbgk/time_integration.hpp"

using namespace esbgk;

namespace {

ModelParams basic_params(double eps = 1.0, double nu = -1.0) {
    ModelParams p;
    p.nu = nu;
    p.epsilon = eps;
    return p;
}

KineticSolver small_solver(SchemeSpec scheme, ReconstructionKind kind, double eps = 1.0,
                           bool projection = true) {
    // N_v = 32 keeps the velocity-quadrature bias of sampled Maxwellians at
    // the 1e-20 level; coarser grids make "fixed point" only quadrature-true
    return KineticSolver(build_spatial_grid(-1.0, 1.0, 20, BoundaryCondition::Periodic),
                         build_velocity_grid(10.0, 32, 2), basic_params(eps), scheme, kind,
                         projection);
}

void set_smooth_initial(KineticSolver& s) {
    s.set_initial([](double x, const Vec3& v) {
        const double ux = 0.1 * std::sin(std::numbers::pi * x);
        const double c0 = v[0] - ux, c1 = v[1];
        return (1.0 + 0.2 * std::cos(std::numbers::pi * x)) / (2.0 * std::numbers::pi) *
               std::exp(-0.5 * (c0 * c0 + c1 * c1));
    });
}

} // namespace

TEST_CASE("tableau invariants") {
    for (int p : {1, 2, 3}) CHECK_NOTHROW(DirkTableau::of_order(p).validate());

    const DirkTableau t2 = DirkTableau::dirk2();
    CHECK(t2.a[0][0] == doctest::Approx(1.0 - std::sqrt(2.0) / 2.0));
    CHECK(t2.a[1][0] + t2.a[1][1] == doctest::Approx(1.0));

    // order conditions for the weights b = last row of A (stiffly accurate)
    const DirkTableau t3 = DirkTableau::dirk3();
    double b_dot_c = 0.0, b_dot_c2 = 0.0, b_A_c = 0.0;
    for (int k = 0; k < 3; ++k) {
        b_dot_c += t3.a[2][k] * t3.c[k];
        b_dot_c2 += t3.a[2][k] * t3.c[k] * t3.c[k];
        for (int l = 0; l < 3; ++l) b_A_c += t3.a[2][k] * t3.a[k][l] * t3.c[l];
    }
    CHECK(b_dot_c == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(b_dot_c2 == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(b_A_c == doctest::Approx(1.0 / 6.0).epsilon(1e-13));

    DirkTableau bad = t2;
    bad.c[1] = 0.9;
    CHECK_THROWS_AS(bad.validate(), InvalidConfig);
}

TEST_CASE("bdf coefficients are consistent") {
    for (int p : {1, 2, 3}) {
        const BdfScheme s = BdfScheme::of_order(p);
        double sum = 0.0;
        for (int k = 0; k < s.steps; ++k) sum += s.alpha[k];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
        // first-order condition of the SL form: sum_k alpha_k k = beta
        // combined with the characteristic shift; for the standard sets this
        // reads sum_k k alpha_k = beta * 1st-derivative weight = ... checked
        // against the classical values instead:
    }
    CHECK(BdfScheme::bdf2().alpha[0] == doctest::Approx(4.0 / 3.0));
    CHECK(BdfScheme::bdf2().beta == doctest::Approx(2.0 / 3.0));
    CHECK(BdfScheme::bdf3().alpha[2] == doctest::Approx(2.0 / 11.0));
    CHECK(BdfScheme::bdf3().beta == doctest::Approx(6.0 / 11.0));
}

TEST_CASE("transport_rows shifts row-wise and conserves") {
    const SpatialGrid sg = build_spatial_grid(0.0, 1.0, 32, BoundaryCondition::Periodic);
    const VelocityGrid vg = build_velocity_grid(2.0, 2, 2);
    const std::size_t m = vg.n_nodes();
    std::vector<double> src(32 * m, 0.0), dst(32 * m, -7.0);
    for (int i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (vg.nodes[j][0] != 0.0) src[i * m + j] = std::sin(2.0 * std::numbers::pi * i / 32.0) + 2.0;

    transport_rows(src, dst, sg, vg, 0.25, ReconstructionKind::QCWENO23, 1.0, false);
    for (std::size_t j = 0; j < m; ++j) {
        double s_in = 0.0, s_out = 0.0;
        for (int i = 0; i < 32; ++i) {
            s_in += src[i * m + j];
            s_out += dst[i * m + j];
        }
        CHECK(s_out == doctest::Approx(s_in).epsilon(1e-13)); // zero rows zeroed, others conserved
    }
}

TEST_CASE("uniform maxwellian is a fixed point of every scheme") {
    for (SchemeSpec spec : {SchemeSpec::first_order(), SchemeSpec::dirk(2), SchemeSpec::dirk(3),
                            SchemeSpec::bdf_scheme(2), SchemeSpec::bdf_scheme(3)}) {
        KineticSolver s = small_solver(spec, ReconstructionKind::QCWENO23);
        s.set_initial([](double, const Vec3& v) {
            return std::exp(-0.5 * v.norm2()) / (2.0 * std::numbers::pi);
        });
        const std::vector<double> f0 = s.field().values;
        for (int n = 0; n < 4; ++n) s.step(0.05);
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < f0.size(); ++i) {
            err = std::max(err, std::abs(s.field().values[i] - f0[i]));
            scale = std::max(scale, f0[i]);
        }
        CHECK(err <= 1e-9 * scale);
    }
}

TEST_CASE("scheme reduction: dirk1 == bdf1 == first-order") {
    auto make = [&](SchemeSpec spec) {
        KineticSolver s = small_solver(spec, ReconstructionKind::Linear, 0.5);
        set_smooth_initial(s);
        for (int n = 0; n < 5; ++n) s.step(0.02);
        return s.field().values;
    };
    const auto fo = make(SchemeSpec::first_order());
    const auto d1 = make(SchemeSpec::dirk(1));
    const auto b1 = make(SchemeSpec::bdf_scheme(1));
    double scale = 0.0;
    for (double v : fo) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < fo.size(); ++i) {
        CHECK(std::abs(d1[i] - fo[i]) <= 1e-14 * scale);
        CHECK(std::abs(b1[i] - fo[i]) <= 1e-14 * scale);
    }
}

TEST_CASE("ledger is appended per accepted step") {
    KineticSolver s = small_solver(SchemeSpec::dirk(2), ReconstructionKind::QCWENO23);
    set_smooth_initial(s);
    CHECK(s.ledger().size() == 1u);
    const RunResult res = s.run(0.1, 0.02);
    CHECK(res.n_steps == 5);
    CHECK(s.ledger().size() == 6u);
    CHECK(s.field().time == doctest::Approx(0.1));

    // periodic run conserves the ledger invariants to rounding
    const LedgerEntry& a = s.ledger().front();
    const LedgerEntry& b = s.ledger().back();
    CHECK(std::abs(b.m0 - a.m0) <= 1e-12 * a.m0);
    CHECK(std::abs(b.m2 - a.m2) <= 1e-12 * a.m2);
}

TEST_CASE("run clips the final step and zero-length runs are no-ops") {
    KineticSolver s = small_solver(SchemeSpec::dirk(2), ReconstructionKind::QCWENO23);
    set_smooth_initial(s);
    const RunResult none = s.run(0.0, 0.02);
    CHECK(none.n_steps == 0);

    const RunResult res = s.run(0.05, 0.02); // 2 full + 1 clipped
    CHECK(res.n_steps == 3);
    CHECK(s.field().time == doctest::Approx(0.05).epsilon(1e-14));
}

TEST_CASE("bdf startup and clipped final step fall back to dirk") {
    KineticSolver s = small_solver(SchemeSpec::bdf_scheme(2), ReconstructionKind::QCWENO23);
    set_smooth_initial(s);
    std::vector<std::string> labels;
    std::vector<bool> startup;
    s.run(0.05, 0.02, [&](const StepStats& st) {
        labels.push_back(st.scheme);
        startup.push_back(st.startup_fallback);
    });
    REQUIRE(labels.size() == 3u);
    CHECK(labels[0] == "dirk2"); // startup
    CHECK(startup[0]);
    CHECK(labels[1] == "bdf2");
    CHECK_FALSE(startup[1]);
    CHECK(labels[2] == "dirk2"); // clipped final step
}

TEST_CASE("bdf1 startup policy") {
    KineticSolver s = small_solver(
        SchemeSpec::bdf_scheme(2, BdfStartup::Bdf1), ReconstructionKind::QCWENO23);
    set_smooth_initial(s);
    const StepStats st = s.step(0.02);
    CHECK(st.scheme == "bdf1");
    CHECK(st.startup_fallback);
    const StepStats st2 = s.step(0.02);
    CHECK(st2.scheme == "bdf2");
}

TEST_CASE("direct bdf stepping guards history") {
    KineticSolver s = small_solver(SchemeSpec::bdf_scheme(2), ReconstructionKind::QCWENO23);
    set_smooth_initial(s);
    CHECK_THROWS_AS(s.step_bdf(BdfScheme::bdf2(), 0.02), InsufficientHistory);
    s.step(0.02);
    CHECK_NOTHROW(s.step_bdf(BdfScheme::bdf2(), 0.02));
    CHECK_THROWS_AS(s.step_bdf(BdfScheme::bdf2(), 0.01), InvalidConfig); // nonuniform dt
}

TEST_CASE("ap limit after one dirk2 step") {
    KineticSolver s = small_solver(SchemeSpec::dirk(2), ReconstructionKind::QCWENO23, 1e-10);
    set_smooth_initial(s);
    const StepStats st = s.step(0.04);
    CHECK(st.max_tensor_aniso <= 1e-8);
    CHECK(s.maxwellian_distance() <= 1e-6);
}

TEST_CASE("first-order steps satisfy the discrete maximum principle") {
    KineticSolver s = small_solver(SchemeSpec::first_order(), ReconstructionKind::Linear, 0.5);
    set_smooth_initial(s);
    for (int n = 0; n < 5; ++n) {
        const StepStats st = s.step(0.05);
        CHECK(st.min_f_new >= 0.0);
        CHECK(st.max_f_new <= std::max(st.max_f_old, st.max_g));
    }
}
