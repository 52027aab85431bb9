#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "esbgk/relaxation.hpp"

using namespace esbgk;

TEST_CASE("modified nu") {
    // nu' = eps nu / (eps + (1-nu) tau a dt)
    CHECK(modified_nu(-1.0, 1.0, 1.0, 0.5) == doctest::Approx(-0.5));
    CHECK(modified_nu(-0.2, 2.0, 0.5, 1.0) == doctest::Approx(-0.4 / 2.6));
    CHECK(modified_nu(0.0, 1.0, 1.0, 1.0) == 0.0);
    // fluid limit: nu' -> 0 as eps -> 0
    CHECK(std::abs(modified_nu(-1.0, 1e-10, 1.0, 0.1)) < 1e-9);
    // free transport limit: a dt -> 0 returns nu
    CHECK(modified_nu(-0.5, 1.0, 2.0, 0.0) == doctest::Approx(-0.5));
    // sign and magnitude: |nu'| <= |nu|
    for (double nu : {-1.0, -0.3, 0.5, 0.9}) {
        const double np = modified_nu(nu, 0.7, 1.3, 0.4);
        CHECK(np * nu >= 0.0);
        CHECK(std::abs(np) <= std::abs(nu) + 1e-15);
    }
}

TEST_CASE("effective tensor") {
    const double rho = 2.0, T = 1.5;
    Vec3 U;
    U[0] = 0.5;
    U[1] = -0.25;
    SymMat3 Sigma = SymMat3::zero(2);
    // Sigma = rho (Theta + U x U) with Theta = diag(1.7, 1.3)
    Sigma.at(0, 0) = rho * (1.7 + U[0] * U[0]);
    Sigma.at(1, 1) = rho * (1.3 + U[1] * U[1]);
    Sigma.at(1, 0) = rho * (0.1 + U[0] * U[1]);

    SUBCASE("nu_eff = 0 gives the isotropic tensor") {
        const RelaxationTensor r = effective_tensor(T, 0.0, Sigma, rho, U);
        CHECK(r.tensor.at(0, 0) == doctest::Approx(T));
        CHECK(r.tensor.at(1, 1) == doctest::Approx(T));
        CHECK(r.tensor.at(1, 0) == doctest::Approx(0.0));
    }
    SUBCASE("generic nu_eff blends toward Theta") {
        const double ne = -0.5;
        const RelaxationTensor r = effective_tensor(T, ne, Sigma, rho, U);
        CHECK(r.tensor.at(0, 0) == doctest::Approx((1.0 - ne) * T + ne * 1.7));
        CHECK(r.tensor.at(1, 1) == doctest::Approx((1.0 - ne) * T + ne * 1.3));
        CHECK(r.tensor.at(1, 0) == doctest::Approx(ne * 0.1));
    }
}

TEST_CASE("implicit stage update is the stated convex combination") {
    const std::vector<double> f = {1.0, 2.0, 3.0};
    const std::vector<double> g = {3.0, 2.0, 1.0};
    std::vector<double> out(3);

    implicit_stage_update(f, g, {1.0, 1.0, 1.0}, out); // weights 1/2, 1/2
    CHECK(out[0] == doctest::Approx(2.0));
    implicit_stage_update(f, g, {0.0, 1.0, 1.0}, out); // a dt = 0: pure transport
    CHECK(out[0] == doctest::Approx(1.0));
    implicit_stage_update(f, g, {1.0, 1e-14, 1.0}, out); // eps -> 0: pure relaxation
    CHECK(out[0] == doctest::Approx(3.0));
    CHECK_THROWS_AS(implicit_stage_update(f, g, {-1.0, 1.0, 1.0}, out), InvalidConfig);

    std::vector<double> q(3);
    relaxation_term(f, g, 2.0, q);
    CHECK(q[0] == doctest::Approx(4.0));
    CHECK(q[2] == doctest::Approx(-4.0));
}

TEST_CASE("maxwellian data is a fixed point of the stage") {
    const VelocityGrid vg = build_velocity_grid(10.0, 32, 2);
    Vec3 U;
    U[0] = 0.4;
    const auto f = eval_maxwellian(1.2, U, 0.9, vg);
    ModelParams params;
    params.nu = -1.0;
    params.epsilon = 1.0;

    std::vector<double> g(vg.n_nodes()), out(vg.n_nodes());
    const CellStageInfo info = relax_stage_cell(f, vg, params, 0.7, true, g, out);
    for (std::size_t j = 0; j < f.size(); ++j)
        CHECK(std::abs(out[j] - f[j]) <= 1e-9 * (1.0 + f[j]));
    CHECK(info.moments.rho == doctest::Approx(1.2).epsilon(1e-10));
    CHECK(info.tau == 1.0);
    // isotropic data: anisotropy of the effective tensor is quadrature noise
    CHECK(info.tensor_aniso < 1e-9);
}

TEST_CASE("stage is homogeneous in f for constant tau") {
    const VelocityGrid vg = build_velocity_grid(8.0, 24, 2);
    Vec3 U;
    U[0] = -0.3;
    auto f = eval_maxwellian(1.0, U, 1.1, vg);
    // perturb away from equilibrium
    for (std::size_t j = 0; j < f.size(); ++j) f[j] *= 1.0 + 0.2 * std::sin(double(j));

    ModelParams params;
    params.nu = -0.5;
    params.epsilon = 0.3;
    std::vector<double> g(vg.n_nodes()), out1(vg.n_nodes()), out2(vg.n_nodes());
    relax_stage_cell(f, vg, params, 0.25, true, g, out1);
    std::vector<double> f3(f);
    for (double& v : f3) v *= 3.0;
    relax_stage_cell(f3, vg, params, 0.25, true, g, out2);
    for (std::size_t j = 0; j < f.size(); ++j)
        CHECK(out2[j] == doctest::Approx(3.0 * out1[j]).epsilon(1e-11));
}

TEST_CASE("projection inside the stage pins the Gaussian moments") {
    const VelocityGrid vg = build_velocity_grid(6.0, 16, 2); // coarse: visible quadrature bias
    Vec3 U;
    U[0] = 0.6;
    auto f = eval_maxwellian(1.0, U, 1.3, vg);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] *= 1.0 + 0.1 * std::cos(double(j));
    const MomentSet before = compute_moments(f, vg);

    ModelParams params;
    params.nu = -1.0;
    params.epsilon = 1.0;
    std::vector<double> g(vg.n_nodes()), out(vg.n_nodes());
    relax_stage_cell(f, vg, params, 0.5, true, g, out);

    // G-hat carries exactly the transported invariants, so the stage output
    // (a convex combination) does too
    const MomentSet after = compute_moments(out, vg);
    CHECK(after.rho == doctest::Approx(before.rho).epsilon(1e-13));
    CHECK(after.U[0] == doctest::Approx(before.U[0]).epsilon(1e-12));
    CHECK(after.E == doctest::Approx(before.E).epsilon(1e-13));

    // without projection the quadrature bias of the Gaussian leaks in
    std::vector<double> out_off(vg.n_nodes());
    relax_stage_cell(f, vg, params, 0.5, false, g, out_off);
    const MomentSet off = compute_moments(out_off, vg);
    CHECK(std::abs(off.rho - before.rho) > std::abs(after.rho - before.rho));
}

TEST_CASE("AP limit of one stage") {
    const VelocityGrid vg = build_velocity_grid(10.0, 32, 2);
    Vec3 U;
    U[0] = 0.2;
    auto f = eval_maxwellian(1.0, U, 1.0, vg);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] *= 1.0 + 0.3 * std::sin(0.1 * double(j));

    ModelParams params;
    params.nu = -1.0;
    params.epsilon = 1e-10;
    std::vector<double> g(vg.n_nodes()), out(vg.n_nodes());
    const CellStageInfo info = relax_stage_cell(f, vg, params, 0.1, true, g, out);
    // nu' ~ eps: the effective tensor collapses to T I
    CHECK(info.tensor_aniso <= 1e-8);
    // stage output collapses onto the (projected) Gaussian
    for (std::size_t j = 0; j < f.size(); ++j)
        CHECK(std::abs(out[j] - g[j]) <= 1e-8 * (1.0 + std::abs(g[j])));
}

TEST_CASE("invalid transported states throw") {
    const VelocityGrid vg = build_velocity_grid(2.0, 4, 2);
    std::vector<double> f(vg.n_nodes(), 0.0);
    CHECK_THROWS_AS(transported_moments(f, vg), NonpositiveDensity);
}
