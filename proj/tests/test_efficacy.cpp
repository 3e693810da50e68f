#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qwork/efficacy.hpp"

#include <random>

using namespace qwork;

namespace {

IsingParams params(double h, double gamma, double t, int L = 0) {
    IsingParams p;
    p.h = h;
    p.gamma = gamma;
    p.t = t;
    p.L = L;
    return p;
}

const double PI = 3.14159265358979323846;

}  // namespace

TEST_CASE("mode_amplitudes: frozen values at h = 0.5, gamma = 2, t = 1") {
    ModeAmplitudes a = mode_amplitudes(PI / 3.0, params(0.5, 2.0, 1.0));
    CHECK(a.C0.real() == doctest::Approx(0.292724671290795).epsilon(1e-11));
    CHECK(a.C0.imag() == doctest::Approx(1.4101622900949).epsilon(1e-11));
    CHECK(a.C1.real() == doctest::Approx(-0.286476315200793).epsilon(1e-11));
    CHECK(a.C1.imag() == doctest::Approx(-1.04556073608882).epsilon(1e-11));
    CHECK(a.mode_efficacy == doctest::Approx(2.95136312812585).epsilon(1e-11));
    CHECK(a.Omega_bar.real() == doctest::Approx(1.4142135623731).epsilon(1e-11));
    CHECK(std::abs(a.Omega_bar.imag()) < 1e-12);

    ModeAmplitudes b = mode_amplitudes(1.1, params(0.5, 2.0, 1.0));
    CHECK(b.C0.real() == doctest::Approx(-1.14269828930707).epsilon(1e-11));
    CHECK(b.C0.imag() == doctest::Approx(2.7394220434828).epsilon(1e-11));
    CHECK(b.C1.real() == doctest::Approx(1.624657022724).epsilon(1e-11));
    CHECK(b.C1.imag() == doctest::Approx(-3.56472059413598).epsilon(1e-11));
    CHECK(b.mode_efficacy == doctest::Approx(2.31154045663709).epsilon(1e-11));
}

TEST_CASE("mode_amplitudes: backward amplitudes conjugate the forward ones") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uk(0.1, PI - 0.1), uh(0.1, 1.3), ug(0.2, 5.0),
        ut(0.1, 3.0);
    for (int i = 0; i < 40; ++i) {
        double k = uk(rng);
        IsingParams p = params(uh(rng), ug(rng), ut(rng));
        ModeAmplitudes a = mode_amplitudes(k, p);
        double scale = std::max({1.0, std::abs(a.C0), std::abs(a.C1)});
        CHECK(std::abs(a.D0 - std::conj(a.C0)) < 1e-10 * scale);
        CHECK(std::abs(a.D1 - std::conj(a.C1)) < 1e-10 * scale);
    }
}

TEST_CASE("mode efficacy: t = 0 and gamma = 0 give exactly 1") {
    for (double k : {0.4, PI / 3.0, 2.7}) {
        CHECK(log_mode_efficacy(mode_coefficients(k, params(0.7, 3.0, 0.0)), 0.0) == 0.0);
        CHECK(mode_efficacy(k, params(0.7, 3.0, 0.0)) == 1.0);
        for (double t : {0.5, 2.0, 10.0})
            CHECK(std::abs(mode_efficacy(k, params(0.7, 0.0, t)) - 1.0) < 1e-12);
    }
}

TEST_CASE("log_mode_efficacy: agrees with direct amplitude assembly at modest t") {
    // Direct (non-log) evaluation of the same per-mode object; valid whenever
    // nothing overflows, which pins down the rescaled algebra in the log path.
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> uk(0.2, PI - 0.2), uh(0.2, 1.2), ug(0.3, 4.0),
        ut(0.2, 2.0);
    for (int i = 0; i < 30; ++i) {
        double k = uk(rng), t = ut(rng);
        IsingParams p = params(uh(rng), ug(rng), t);
        ModeCoefficients c = mode_coefficients(k, p);
        ModeAmplitudes a = mode_amplitudes(k, p);
        double pref = std::exp(-4.0 * (c.Q * c.Q).real() * c.Gamma * t / c.D);
        double den = 1.0 + std::norm(c.alpha) * std::exp(4.0 * c.Gamma * t);
        double direct = pref * (std::norm(a.C0) + std::norm(a.C1)) / den;
        CHECK(log_mode_efficacy(c, t) ==
              doctest::Approx(std::log(direct)).epsilon(1e-10));
    }
}

TEST_CASE("log_mode_efficacy: continuous at small t (series branch)") {
    for (double k : {0.6, 2.0}) {
        ModeCoefficients c = mode_coefficients(k, params(0.5, 2.0, 0.0));
        CHECK(std::abs(log_mode_efficacy(c, 1e-9)) < 1e-6);
        // Slopes on the two sides of the |z| < 1e-8 series/trig switchover
        // must match: log gamma_t is smooth at t = 0.
        double slope_lo = log_mode_efficacy(c, 1e-9) / 1e-9;
        double slope_hi = log_mode_efficacy(c, 1e-7) / 1e-7;
        CHECK(std::abs(slope_hi - slope_lo) < 1e-5);
    }
}

TEST_CASE("total_efficacy: frozen value, gamma = 0, validation, underflow") {
    TotalEfficacy r = total_efficacy(params(0.5, 2.0, 1.0, 48));
    CHECK(r.log_gamma_t == doctest::Approx(-6.58458534468062).epsilon(1e-10));
    CHECK_FALSE(r.underflow);
    CHECK(r.gamma_t == doctest::Approx(std::exp(r.log_gamma_t)).epsilon(1e-13));
    CHECK(r.L_used == 48);

    TotalEfficacy free = total_efficacy(params(0.8, 0.0, 2.5, 64));
    CHECK(std::abs(free.gamma_t - 1.0) < 1e-12);

    CHECK_THROWS_AS(total_efficacy(params(0.5, 2.0, 1.0, 0)), invalid_input);
    CHECK_THROWS_AS(total_efficacy(params(0.5, 2.0, 1.0, 7)), invalid_input);

    TotalEfficacy deep = total_efficacy(params(0.5, 5.0, 60.0, 400));
    CHECK(deep.log_gamma_t < -700.0);
    CHECK(deep.underflow);
    CHECK(deep.gamma_t == 0.0);
}

TEST_CASE("total_efficacy: short-time overshoot at gamma = 2, long-time decay") {
    // The hallmark of the modified fluctuation relation: gamma_t briefly
    // exceeds 1 before decaying.
    double peak = -1.0;
    for (double t = 0.1; t < 1.0; t += 0.1)
        peak = std::max(peak, total_efficacy(params(0.5, 2.0, t, 200)).log_gamma_t);
    CHECK(peak > 0.0);
    CHECK(total_efficacy(params(0.5, 2.0, 6.0, 200)).log_gamma_t < 0.0);
}

TEST_CASE("total_efficacy: monotone decreasing in gamma at h = 0.9, t >= 2") {
    for (double t : {2.0, 3.0, 5.0}) {
        double prev = 1.0;  // log at gamma -> 0+
        for (double g : {1.0, 2.0, 3.0, 4.0, 5.0}) {
            double cur = total_efficacy(params(0.9, g, t, 120)).log_gamma_t;
            CHECK(cur < prev);
            prev = cur;
        }
    }
}
