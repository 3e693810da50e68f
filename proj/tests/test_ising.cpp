#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qwork/ising.hpp"

#include <random>

using namespace qwork;

namespace {

IsingParams params(double h, double gamma, double t, int L = 0, int n_k = 512) {
    IsingParams p;
    p.h = h;
    p.gamma = gamma;
    p.t = t;
    p.L = L;
    p.n_k = n_k;
    return p;
}

const double PI = 3.14159265358979323846;

}  // namespace

TEST_CASE("mode_grid: finite chains and continuum self-convergence") {
    auto g4 = mode_grid(params(0.5, 1.0, 0.0, 4));
    REQUIRE(g4.size() == 2);
    CHECK(g4[0].k == doctest::Approx(PI / 4.0));
    CHECK(g4[1].k == doctest::Approx(3.0 * PI / 4.0));
    CHECK(g4[0].weight == doctest::Approx(0.5));

    auto g8 = mode_grid(params(0.5, 1.0, 0.0, 8));
    REQUIRE(g8.size() == 4);
    for (int n = 0; n < 4; ++n)
        CHECK(g8[n].k == doctest::Approx((2.0 * n + 1.0) * PI / 8.0));

    const double w64 = average_work_density(params(0.5, 2.0, 1.0, 0, 64));
    const double w128 = average_work_density(params(0.5, 2.0, 1.0, 0, 128));
    CHECK(std::abs(w64 - w128) < 1e-9);
}

TEST_CASE("mode_coefficients: Hermitian limit and dispersion values") {
    // gamma = 0: the two rotations coincide.
    for (double k : {0.4, 1.3, 2.8}) {
        ModeCoefficients c = mode_coefficients(k, params(0.7, 0.0, 0.0));
        CHECK(std::abs(c.eps_eff - cxd{c.eps_i, 0.0}) < 1e-12);
        CHECK(std::abs(c.Y) < 1e-12);
        CHECK(std::abs(c.alpha) < 1e-12);
        CHECK(std::abs(c.Q) < 1e-12);
        CHECK(std::abs(c.beta_c - cxd{c.eps_i, 0.0}) < 1e-12);
        CHECK(std::abs(c.delta_c) < 1e-12);
        CHECK(std::abs(c.E0_gamma + cxd{c.eps_i, 0.0}) < 1e-12);
    }
    ModeCoefficients c = mode_coefficients(PI / 2.0, params(0.5, 0.0, 0.0));
    CHECK(c.eps_i == doctest::Approx(2.0 * std::sqrt(1.25)).epsilon(1e-12));
}

TEST_CASE("mode_coefficients: frozen bundle at k = pi/3, h = 0.5, gamma = 2") {
    ModeCoefficients c = mode_coefficients(PI / 3.0, params(0.5, 2.0, 0.0));
    CHECK(c.eps_i == doctest::Approx(1.73205080756888).epsilon(1e-13));
    CHECK(c.eps_eff.real() == doctest::Approx(1.41421356237309).epsilon(1e-13));
    CHECK(std::abs(c.eps_eff.imag()) < 1e-12);  // critical mode: Gamma = 0
    CHECK(c.u_i.real() == doctest::Approx(0.707106781186547).epsilon(1e-13));
    CHECK(c.v_i.real() == doctest::Approx(-0.707106781186548).epsilon(1e-13));
    CHECK(c.u_nc.real() == doctest::Approx(0.707106781186547).epsilon(1e-13));
    CHECK(c.v_nc.real() == doctest::Approx(-0.577350269189626).epsilon(1e-12));
    CHECK(c.v_nc.imag() == doctest::Approx(0.408248290463863).epsilon(1e-12));
    CHECK(c.det_Vnc.real() == doctest::Approx(0.666666666666666).epsilon(1e-12));
    CHECK(c.det_Vnc.imag() == doctest::Approx(-0.471404520791032).epsilon(1e-12));
    CHECK(c.X.real() == doctest::Approx(0.908248290463863).epsilon(1e-12));
    CHECK(c.X.imag() == doctest::Approx(-0.288675134594813).epsilon(1e-12));
    CHECK(c.Y.real() == doctest::Approx(0.0917517095361369).epsilon(1e-12));
    CHECK(c.Y.imag() == doctest::Approx(0.288675134594813).epsilon(1e-12));
    CHECK(std::abs(c.alpha - cxd{0.0, 0.317837245195782}) < 1e-12);
    CHECK(c.P == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(c.Q - cxd{0.0, 0.577350269189626}) < 1e-12);
    CHECK(c.D == doctest::Approx(0.666666666666666).epsilon(1e-12));
    CHECK(c.beta_c.real() == doctest::Approx(2.12132034355964).epsilon(1e-12));
    CHECK(std::abs(c.delta_c - cxd{0.0, 1.22474487139159}) < 1e-12);
    CHECK(c.E0_gamma.real() == doctest::Approx(-2.12132034355964).epsilon(1e-12));
    CHECK(c.chi.real() == doctest::Approx(2.82842712474619).epsilon(1e-12));
    CHECK(std::abs(c.xi - cxd{0.0, -2.44948974278318}) < 1e-11);
}

TEST_CASE("mode_coefficients: branch keeps Gamma <= 0 and rotation diagonalizes") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uk(0.1, PI - 0.1), uh(0.1, 1.4), ug(0.1, 5.0);
    for (int i = 0; i < 50; ++i) {
        double k = uk(rng), h = uh(rng), g = ug(rng);
        ModeCoefficients c = mode_coefficients(k, params(h, g, 0.0));
        CHECK(c.Gamma <= 1e-12);
        // V^{-1} A V diagonal for the nc block: A = [[-a_nc, b], [b^*, a_nc]].
        Mat a(2, 2), v(2, 2);
        a << -c.a_nc, c.b_k, std::conj(c.b_k), c.a_nc;
        v << c.u_nc, -I_UNIT * c.v_nc, -I_UNIT * c.v_nc, c.u_nc;
        Mat d = v.inverse() * a * v;
        CHECK(std::abs(d(0, 1)) < 1e-9);
        CHECK(std::abs(d(1, 0)) < 1e-9);
        CHECK(std::abs(std::abs(d(0, 0)) - std::abs(c.eps_eff)) < 1e-9);
    }
}

TEST_CASE("mode_work: frozen values and Hermitian limit") {
    ModeCoefficients c = mode_coefficients(PI / 3.0, params(0.5, 2.0, 1.0));
    ModeWork w = mode_work(c, 1.0);
    CHECK(w.avg == doctest::Approx(0.855365597222037).epsilon(1e-12));
    CHECK(w.var == doctest::Approx(2.23142304195912).epsilon(1e-12));

    for (double k : {0.7, 2.1}) {
        ModeWork w0 = mode_work(mode_coefficients(k, params(0.8, 0.0, 0.0)), 1.7);
        CHECK(std::abs(w0.avg) < 1e-10);
        CHECK(std::abs(w0.var) < 1e-10);
    }
}

TEST_CASE("mode_generating_function: frozen value, normalization, moments") {
    ModeCoefficients c = mode_coefficients(PI / 3.0, params(0.5, 2.0, 1.0));
    cxd g = mode_generating_function(c, 1.0, cxd{0.7, 0.0});
    CHECK(g.real() == doctest::Approx(0.566906467765166).epsilon(1e-12));
    CHECK(g.imag() == doctest::Approx(-0.162207611866709).epsilon(1e-12));
    CHECK(std::abs(mode_generating_function(c, 1.0, cxd{0.0, 0.0}) - cxd{1.0, 0.0}) <
          1e-13);

    // Derivatives at u = 0 reproduce the closed-form moments.
    const double hstep = 1e-5;
    auto gf = [&](double u) { return mode_generating_function(c, 1.0, cxd{u, 0.0}); };
    cxd g1 = (gf(hstep) - gf(-hstep)) / (2.0 * hstep);
    cxd g2 = (gf(hstep) - 2.0 * gf(0.0) + gf(-hstep)) / (hstep * hstep);
    ModeWork w = mode_work(c, 1.0);
    CHECK((I_UNIT * g1).real() == doctest::Approx(w.avg).epsilon(1e-7));
    CHECK((-g2 + g1 * g1).real() == doctest::Approx(w.var).epsilon(1e-5));
}

TEST_CASE("densities: gamma = 0 identically zero; large-t finite; large-h vanishing") {
    for (double h : {0.3, 1.0, 1.6})
        for (double t : {0.5, 3.0}) {
            CHECK(std::abs(average_work_density(params(h, 0.0, t))) < 1e-10);
            CHECK(std::abs(work_variance_density(params(h, 0.0, t))) < 1e-10);
        }

    // t = 5000 evaluations stay finite and close to the stationary limit
    // (guard off: every damped mode has long since underflowed to it).
    auto late = [&](double t) {
        IsingParams p = params(0.6, 2.0, t);
        p.check_quadrature = false;
        return average_work_density(p);
    };
    // Approach to the stationary value is algebraic (band-edge modes damp
    // arbitrarily slowly), hence the modest tolerance.
    const double w5000 = late(5000.0);
    CHECK(std::isfinite(w5000));
    CHECK(w5000 == doctest::Approx(late(2000.0)).epsilon(1e-4));

    // Asymptotic vanishing of the average work at large field.
    double maxw = 0.0;
    for (double h = 0.2; h <= 2.01; h += 0.2)
        maxw = std::max(maxw, average_work_density(params(h, 2.0, 1.0, 0, 1024)));
    CHECK(average_work_density(params(20.0, 2.0, 1.0, 0, 1024)) < 0.05 * maxw);
}

TEST_CASE("finite_chain_generating_function: frozen L = 6 value") {
    IsingParams p = params(0.5, 2.0, 1.0, 6);
    cxd g = finite_chain_generating_function(p, cxd{0.4, 0.0});
    CHECK(g.real() == doctest::Approx(0.453257754694529).epsilon(1e-12));
    CHECK(g.imag() == doctest::Approx(-0.323455888777198).epsilon(1e-12));
}

TEST_CASE("detect_kink and critical gamma formula") {
    CHECK(critical_gamma(0.6) == doctest::Approx(3.2).epsilon(1e-12));
    CHECK(critical_gamma(0.3) == doctest::Approx(3.81575680566778).epsilon(1e-10));
    CHECK(critical_gamma(0.9) == doctest::Approx(1.74355957741627).epsilon(1e-10));

    // Synthetic piecewise-linear data: kink found at the slope break.
    std::vector<double> xs, ys;
    for (int i = 0; i <= 100; ++i) {
        double x = 0.05 * i;
        xs.push_back(x);
        ys.push_back(x < 2.0 ? 0.3 * x : 0.6 + 0.05 * (x - 2.0));
    }
    KinkReport r = detect_kink(xs, ys);
    CHECK(r.gamma_kink == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("long-time kink location matches the critical measurement rate") {
    // Single-h spot check of the Fig. 2 mechanism (the full h sweep lives in
    // the acceptance suite): t = 5000, gamma step 0.02.
    const double h = 0.6;
    std::vector<double> gs, ws;
    for (double g = 2.5; g <= 4.0 + 1e-9; g += 0.02) {
        gs.push_back(g);
        IsingParams p = params(h, g, 5000.0, 0, 256);
        p.check_quadrature = false;
        ws.push_back(average_work_density(p));
    }
    KinkReport r = detect_kink(gs, ws);
    CHECK(std::abs(r.gamma_kink - critical_gamma(h)) <= 0.05 * critical_gamma(h));
}

TEST_CASE("mode_coefficients: invalid momentum raises") {
    CHECK_THROWS_AS(mode_coefficients(0.0, params(0.5, 1.0, 0.0)), invalid_input);
    CHECK_THROWS_AS(mode_coefficients(PI, params(0.5, 1.0, 0.0)), invalid_input);
}
