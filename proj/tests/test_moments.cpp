#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "esbgk/moments.hpp"

using namespace esbgk;

namespace {

// Roomy grid so the rectangle rule resolves Gaussians to near machine
// precision (spectral accuracy for smooth decaying integrands).
VelocityGrid wide_grid_2d() { return build_velocity_grid(10.0, 64, 2); }

} // namespace

TEST_CASE("moments of a sampled Maxwellian recover the parameters") {
    const VelocityGrid vg = wide_grid_2d();
    const double rho = 1.3, T = 0.9;
    Vec3 U;
    U[0] = 0.3;
    U[1] = -0.2;
    const auto f = eval_maxwellian(rho, U, T, vg);
    const MomentSet ms = compute_moments(f, vg);

    CHECK(ms.rho == doctest::Approx(rho).epsilon(1e-12));
    CHECK(ms.U[0] == doctest::Approx(U[0]).epsilon(1e-12));
    CHECK(ms.U[1] == doctest::Approx(U[1]).epsilon(1e-12));
    CHECK(ms.T == doctest::Approx(T).epsilon(1e-11));
    // E = (d/2) rho T + rho |U|^2 / 2
    CHECK(ms.E == doctest::Approx(rho * T + 0.5 * rho * U.norm2()).epsilon(1e-11));
    // isotropic: Theta = T I, zero heat flux
    CHECK(ms.Theta.at(0, 0) == doctest::Approx(T).epsilon(1e-11));
    CHECK(ms.Theta.at(1, 1) == doctest::Approx(T).epsilon(1e-11));
    CHECK(std::abs(ms.Theta.at(1, 0)) < 1e-12);
    CHECK(std::abs(ms.q) < 1e-11);
}

TEST_CASE("heat flux of a bi-Maxwellian mixture matches the closed form") {
    // Mixture of two Maxwellians: q = sum_i rho_i w_{i,1} (|w_i|^2/2 + (d+2) T_i / 2)
    // with w_i = U_i - U_mix. Continuum identity; discrete error is quadrature-level.
    const VelocityGrid vg = wide_grid_2d();
    const double r1 = 1.0, T1 = 1.0, r2 = 0.5, T2 = 0.6;
    Vec3 U1, U2;
    U1[0] = 0.8;
    U2[0] = -0.5;
    U2[1] = 0.3;
    auto f = eval_maxwellian(r1, U1, T1, vg);
    const auto f2 = eval_maxwellian(r2, U2, T2, vg);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] += f2[j];

    const MomentSet ms = compute_moments(f, vg);
    const double rho = r1 + r2;
    Vec3 Um;
    for (int k = 0; k < 2; ++k) Um[k] = (r1 * U1[k] + r2 * U2[k]) / rho;
    const Vec3 w1 = U1 - Um, w2 = U2 - Um;
    const double d = 2.0;
    const double q_exact = r1 * w1[0] * (0.5 * w1.norm2() + 0.5 * (d + 2) * T1) +
                           r2 * w2[0] * (0.5 * w2.norm2() + 0.5 * (d + 2) * T2);
    CHECK(ms.rho == doctest::Approx(rho).epsilon(1e-12));
    CHECK(ms.U[0] == doctest::Approx(Um[0]).epsilon(1e-12));
    CHECK(ms.q == doctest::Approx(q_exact).epsilon(1e-10));
}

TEST_CASE("moments in three velocity dimensions") {
    const VelocityGrid vg = build_velocity_grid(8.0, 32, 3);
    const double rho = 0.445, T = 3.528 / 4.0;
    Vec3 U;
    U[0] = 0.698;
    const auto f = eval_maxwellian(rho, U, T, vg);
    const MomentSet ms = compute_moments(f, vg);
    CHECK(ms.rho == doctest::Approx(rho).epsilon(1e-10));
    CHECK(ms.T == doctest::Approx(T).epsilon(1e-9));
    CHECK(ms.E == doctest::Approx(1.5 * rho * T + 0.5 * rho * U.norm2()).epsilon(1e-9));
}

TEST_CASE("nonpositive density throws") {
    const VelocityGrid vg = build_velocity_grid(1.0, 2, 2);
    std::vector<double> f(vg.n_nodes(), 0.0);
    CHECK_THROWS_AS(compute_moments(f, vg), NonpositiveDensity);
}

TEST_CASE("temperature tensor") {
    SymMat3 theta = SymMat3::zero(2);
    theta.at(0, 0) = 1.2;
    theta.at(1, 1) = 0.8;
    const double T = 1.0;

    SUBCASE("nu = 0 gives the isotropic tensor") {
        const RelaxationTensor r = temperature_tensor(0.0, theta, T);
        CHECK(r.tensor.at(0, 0) == doctest::Approx(T));
        CHECK(r.tensor.at(1, 1) == doctest::Approx(T));
        CHECK(r.det == doctest::Approx(T * T));
    }
    SUBCASE("generic nu blends") {
        const RelaxationTensor r = temperature_tensor(-1.0, theta, T);
        CHECK(r.tensor.at(0, 0) == doctest::Approx(2.0 * T - 1.2));
        CHECK(r.tensor.at(1, 1) == doctest::Approx(2.0 * T - 0.8));
        // inverse consistency
        CHECK(r.inverse.at(0, 0) == doctest::Approx(1.0 / (2.0 * T - 1.2)));
    }
    SUBCASE("loss of positivity is rejected") {
        SymMat3 bad = SymMat3::zero(2);
        bad.at(0, 0) = 3.0; // nu = -1: 2T - 3 < 0
        bad.at(1, 1) = 0.5;
        CHECK_THROWS_AS(temperature_tensor(-1.0, bad, T), NonSPDTensor);
        CHECK_THROWS_AS(temperature_tensor(0.0, bad, -1.0), NonpositiveTemperature);
    }
}

TEST_CASE("gaussian evaluation") {
    const VelocityGrid vg = wide_grid_2d();
    const double rho = 2.0;
    Vec3 U;
    SymMat3 t = SymMat3::zero(2);
    t.at(0, 0) = 1.5;
    t.at(1, 1) = 0.7;
    t.at(1, 0) = 0.2;
    const RelaxationTensor rt = RelaxationTensor::from(t, "test");
    const auto g = eval_gaussian(rho, U, rt, vg);

    // moments of the sampled Gaussian return the generating parameters
    const MomentSet ms = compute_moments(g, vg);
    CHECK(ms.rho == doctest::Approx(rho).epsilon(1e-11));
    CHECK(ms.Theta.at(0, 0) == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(ms.Theta.at(1, 1) == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(ms.Theta.at(1, 0) == doctest::Approx(0.2).epsilon(1e-9));

    // far-tail values are exact zeros (cutoff), peak matches the closed form
    CHECK(g.front() == 0.0);
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, v);
    const double pref = rho / std::sqrt(rt.det * 4.0 * std::numbers::pi * std::numbers::pi);
    CHECK(gmax == doctest::Approx(pref).epsilon(1e-12));
}

TEST_CASE("tau laws") {
    CHECK(TauLaw{TauKind::Constant, 1.0}(5.0, 2.0) == 1.0);
    CHECK(TauLaw{TauKind::DensityLaw, 0.45 * std::numbers::pi}(2.0, 9.0) ==
          doctest::Approx(0.9 * std::numbers::pi));
    CHECK(TauLaw{TauKind::DensitySqrtT, 2.0 / 3.0}(0.5, 4.0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("model parameter validation") {
    ModelParams mp;
    mp.nu = -1.0;
    CHECK_NOTHROW(mp.validate(2));
    CHECK_THROWS_AS(mp.validate(3), InvalidConfig); // d_v=3 requires nu >= -1/2
    mp.nu = 1.0;
    CHECK_THROWS_AS(mp.validate(2), InvalidConfig);
    mp.nu = -0.5;
    CHECK_NOTHROW(mp.validate(3));
    mp.epsilon = 0.0;
    CHECK_THROWS_AS(mp.validate(3), InvalidConfig);
}
