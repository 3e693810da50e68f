#pragma once

// Mode-resolved efficacy gamma_t for the monitored Ising chain: Pauli-block
// exponentials in the two-dimensional even-parity coefficient space,
// forward/backward amplitudes, per-mode efficacy, and the log-domain product
// over positive momenta.
//
// Conventions (verified against the numeric oracle and required jointly by
// the D = C* conjugacy and the short-time overshoot of the gamma = 2 curve):
//   chi_bar = conj(chi), xi_bar = conj(xi), Omega_bar = sqrt(chi_bar^2 + xi_bar^2)
//   C(t) = e^{i h^dag t} (1, i alpha)^T  with  h^dag = chi_bar I - (chi_bar sz + xi_bar sy)
//   D(t) = (1, -i alpha^*) e^{-i h t}    with  h     = chi I - (chi sz + xi sy)
//   gamma_t^(k) = e^{-4 Q^2 Gamma t / D} (|C0|^2 + |C1|^2) / (1 + |alpha|^2 e^{4 Gamma t})
// with Gamma = Im eps_eff <= 0 and the decaying weight |alpha|^2 e^{4 Gamma t}
// (the same convention as the work-density module).  Q^2 is real and <= 0, so
// the prefactor exponent is non-positive.

#include "qwork/core.hpp"
#include "qwork/ising.hpp"

#include <cmath>
#include <complex>

namespace qwork {

// ---------------------------------------------------------------------------
// Log-domain per-mode efficacy
// ---------------------------------------------------------------------------

// log gamma_t^(k), evaluated in rescaled/log form so that large
// |Im Omega_bar| t never overflows a double.
inline double log_mode_efficacy(const ModeCoefficients& c, double t) {
    if (t == 0.0) return 0.0;  // gamma_t(0) = 1 exactly
    const cxd z = c.Omega_bar() * t;
    const double m = std::abs(z.imag());
    // cos(z) e^{-m} and sin(z) e^{-m}: both half-exponentials have
    // non-positive real exponent part.
    const cxd ep = std::exp(I_UNIT * z - m);   // e^{iz - m}
    const cxd em = std::exp(-I_UNIT * z - m);  // e^{-iz - m}
    const cxd cos_s = 0.5 * (ep + em);
    cxd sinc_s;  // sin(z)/Omega_bar e^{-m}
    if (std::abs(z) < 1e-8) {
        sinc_s = t * (1.0 - z * z / 6.0) * std::exp(-m);
    } else {
        sinc_s = (ep - em) / (2.0 * I_UNIT * c.Omega_bar());
    }
    // C_j(t) = e^{i chi_bar t} A_j with A_j scaled by e^{-m} here.
    const cxd a0 = cos_s - I_UNIT * (c.chi_bar + c.alpha * c.xi_bar) * sinc_s;
    const cxd a1 = I_UNIT * c.alpha * cos_s + (c.xi_bar - c.alpha * c.chi_bar) * sinc_s;
    // |e^{i chi_bar t}|^2 = e^{-2 Im(chi_bar) t}.
    const double log_num =
        -2.0 * c.chi_bar.imag() * t + 2.0 * m + std::log(std::norm(a0) + std::norm(a1));
    const double log_den = std::log1p(std::norm(c.alpha) * std::exp(4.0 * c.Gamma * t));
    const double log_pref = -4.0 * (c.Q * c.Q).real() * c.Gamma * t / c.D;
    const double out = log_pref + log_num - log_den;
    if (!std::isfinite(out))
        throw accuracy_error("log_mode_efficacy: non-finite at k = " + std::to_string(c.k));
    return out;
}

inline double mode_efficacy(double k, const IsingParams& p) {
    return std::exp(log_mode_efficacy(mode_coefficients(k, p), p.t));
}

// ---------------------------------------------------------------------------
// Amplitudes
// ---------------------------------------------------------------------------

struct ModeAmplitudes {
    double k = 0.0;
    cxd Omega, Omega_bar;
    cxd C0, C1;  // forward amplitudes, C(t) = e^{i h^dag t} (1, i alpha)^T
    cxd D0, D1;  // backward amplitudes, D(t) = (1, -i alpha^*) e^{-i h t}
    double mode_efficacy = 0.0;
};

inline ModeAmplitudes mode_amplitudes(double k, const IsingParams& p) {
    const ModeCoefficients c = mode_coefficients(k, p);
    const double t = p.t;
    ModeAmplitudes a;
    a.k = k;
    a.Omega = std::sqrt(c.chi * c.chi + c.xi * c.xi);
    a.Omega_bar = c.Omega_bar();

    // Forward: Pauli-vector exponential identity applied to (1, i alpha)^T.
    {
        const cxd z = a.Omega_bar * t;
        const cxd cb = std::cos(z);
        const cxd sb = (std::abs(z) < 1e-8) ? t * (1.0 - z * z / 6.0)
                                            : std::sin(z) / a.Omega_bar;
        const cxd phase = std::exp(I_UNIT * c.chi_bar * t);
        a.C0 = phase * (cb - I_UNIT * (c.chi_bar + c.alpha * c.xi_bar) * sb);
        a.C1 = phase * (I_UNIT * c.alpha * cb + (c.xi_bar - c.alpha * c.chi_bar) * sb);
    }
    // Backward: row (1, -i alpha^*) times e^{-i h t}, h built from (chi, xi);
    // by construction D_j(t) = C_j(t)^*.
    {
        // h = chi I - (chi sz + xi sy) = [[0, i xi], [-i xi, 2 chi]].
        detail::Mat2 e = {cxd{0.0, 0.0}, -I_UNIT * t * (I_UNIT * c.xi),
                          -I_UNIT * t * (-I_UNIT * c.xi), -I_UNIT * t * (2.0 * c.chi)};
        const detail::Mat2 ex = detail::expm2(e);
        const detail::Vec2 d =
            detail::mat2_apply_left({1.0, -I_UNIT * std::conj(c.alpha)}, ex);
        a.D0 = d[0];
        a.D1 = d[1];
    }
    a.mode_efficacy = std::exp(log_mode_efficacy(c, t));
    return a;
}

// ---------------------------------------------------------------------------
// Totals (log-space product over positive momenta, unconditionally)
// ---------------------------------------------------------------------------

struct TotalEfficacy {
    double log_gamma_t = 0.0;
    double gamma_t = 0.0;    // materialized only when log_gamma_t >= -700
    bool underflow = false;  // true when gamma_t is not representable
    int L_used = 0;          // chain length the extensive sum corresponds to
};

inline TotalEfficacy total_efficacy(const IsingParams& p) {
    TotalEfficacy out;
    if (p.L <= 0)
        throw invalid_input("total_efficacy: extensive product requires L > 0 "
                            "(continuum densities have no total)");
    out.L_used = p.L;
    if (p.n_k > 0 && p.L % 2 != 0)
        throw invalid_input("total_efficacy: L must be even");
    // Finite-L sum over the antiperiodic grid; a continuum rule with the same
    // L would evaluate L * int log gamma^(k) dk / (2 pi), which the finite sum
    // approaches as L grows.
    IsingParams fin = p;
    fin.n_k = 0;
    double s = 0.0;
    for (const GridPoint& g : mode_grid(fin))
        s += log_mode_efficacy(mode_coefficients(g.k, fin), fin.t);
    out.log_gamma_t = s;
    if (s >= -700.0) {
        out.gamma_t = std::exp(s);
    } else {
        out.underflow = true;
        out.gamma_t = 0.0;
    }
    return out;
}

}  // namespace qwork
