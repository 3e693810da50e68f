#pragma once

// Independent brute-force validators:
//  (a) per-mode Fock-space oracle built directly from the quadratic fermion
//      form, bypassing all Bogoliubov algebra, for the closed-form work
//      statistics;
//  (b) a numeric-exponential oracle for the efficacy amplitudes (independent
//      at the exponential/assembly level; it shares only the coefficient
//      bundle with the closed forms);
//  (c) a full dense 2^L spin-chain oracle tying the Ising layer back to the
//      generic no-click machinery.

#include "qwork/core.hpp"
#include "qwork/ising.hpp"
#include "qwork/jump.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <array>
#include <cmath>
#include <vector>

namespace qwork {

// ---------------------------------------------------------------------------
// Eigendecomposition-based exponential (independent of mat_exp)
// ---------------------------------------------------------------------------

inline Mat expm_eig(const Mat& a) {
    Eigen::ComplexEigenSolver<Mat> es(a);
    const Vec w = es.eigenvalues();
    const Mat v = es.eigenvectors();
    Vec ew(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) ew[i] = std::exp(w[i]);
    return v * ew.asDiagonal() * v.inverse();
}

// ---------------------------------------------------------------------------
// Per-mode Fock oracle
// ---------------------------------------------------------------------------

enum class ModeQuantity { avg_work_mode, variance_mode, efficacy_mode, amplitudes };

struct ModeOracleResult {
    double value = 0.0;  // for the three scalar quantities
    cxd c0, c1;          // for amplitudes
};

namespace detail {

struct FockSpace {
    Mat c_k, c_mk;   // annihilation operators of modes k and -k (4x4)
    Mat H_i, H_eff;  // quadratic-form Hamiltonians in the 4-dim Fock space
};

// Explicit 4x4 creation/annihilation matrices on the ordered occupation basis
// |n_k n_-k> = {|00>, |01>, |10>, |11>} via a Jordan-Wigner-style kron chain.
inline FockSpace fock_space(double k, const IsingParams& p) {
    Mat id2 = Mat::Identity(2, 2);
    Mat sm(2, 2), sz(2, 2);
    sm << 0, 1, 0, 0;            // |0><1|
    sz << 1, 0, 0, -1;
    FockSpace f;
    f.c_k = Eigen::kroneckerProduct(sm, id2).eval();
    f.c_mk = Eigen::kroneckerProduct(sz, sm).eval();

    const double a = 2.0 * (p.h - p.J * std::cos(k));
    const cxd b = cxd{0.0, 2.0 * p.J * std::sin(k)};
    const Mat cd_k = f.c_k.adjoint();
    const Mat cd_mk = f.c_mk.adjoint();
    auto quad = [&](cxd aa) {
        // (c_k^dag, c_-k) [[aa, b^*], [b, -aa]] (c_k, c_-k^dag)^T
        return Mat(aa * (cd_k * f.c_k - f.c_mk * cd_mk) + std::conj(b) * cd_k * cd_mk +
                   b * f.c_mk * f.c_k);
    };
    f.H_i = quad(cxd{a, 0.0});
    f.H_eff = quad(a + cxd{0.0, 0.5 * p.gamma});
    return f;
}

// Even-parity 2x2 blocks of the 4x4 Fock Hamiltonians in the basis
// {|00>, |11>} (indices 0 and 3 of the kron basis).
struct EvenBlocks {
    Mat A_i;   // Hermitian
    Mat A_nc;  // non-Hermitian
};

inline EvenBlocks even_blocks(double k, const IsingParams& p) {
    const FockSpace f = fock_space(k, p);
    const std::array<int, 2> even = {0, 3};
    EvenBlocks b;
    b.A_i = Mat(2, 2);
    b.A_nc = Mat(2, 2);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            b.A_i(r, c) = f.H_i(even[r], even[c]);
            b.A_nc(r, c) = f.H_eff(even[r], even[c]);
        }
    return b;
}

}  // namespace detail

// Parity-conservation check: the odd-parity block never mixes in.
inline double fock_parity_leakage(double k, const IsingParams& p, double t) {
    const detail::FockSpace f = detail::fock_space(k, p);
    const Mat u = expm_eig(Mat(cxd{0.0, -t} * f.H_eff));
    double leak = 0.0;
    const std::array<int, 2> even = {0, 3}, odd = {1, 2};
    for (int e : even)
        for (int o : odd)
            leak = std::max({leak, std::abs(u(e, o)), std::abs(u(o, e))});
    return leak;
}

// Brute-force per-mode work statistics / efficacy.  No X/Y/P/Q/beta/delta/
// chi/xi formulas anywhere in the avg/variance path.
inline ModeOracleResult mode_fock_oracle(double k, const IsingParams& p, double t,
                                         ModeQuantity quantity) {
    ModeOracleResult out;
    if (quantity == ModeQuantity::avg_work_mode || quantity == ModeQuantity::variance_mode) {
        const detail::EvenBlocks b = detail::even_blocks(k, p);
        Eigen::SelfAdjointEigenSolver<Mat> es(b.A_i);
        if (es.eigenvalues()[1] - es.eigenvalues()[0] < 1e-12)
            throw degenerate_error("mode_fock_oracle: degenerate ground state at k = " +
                                   std::to_string(k));
        const Vec psi0 = es.eigenvectors().col(0);
        const double e_gs = es.eigenvalues()[0];
        const Vec phi = expm_eig(Mat(cxd{0.0, -t} * b.A_nc)) * psi0;
        const double nrm = phi.squaredNorm();
        const Mat hf = b.A_i;  // H_f = H_i
        const double m1 = ((phi.adjoint() * hf * phi)(0, 0) / nrm).real();
        const double m2 = ((phi.adjoint() * hf * hf * phi)(0, 0) / nrm).real();
        out.value = (quantity == ModeQuantity::avg_work_mode) ? m1 - e_gs : m2 - m1 * m1;
        return out;
    }

    // Efficacy path: numeric exponentials of the coefficient-space blocks.
    const ModeCoefficients c = mode_coefficients(k, p);
    Mat hdag(2, 2), h(2, 2);
    // h^dag = chi_bar I - (chi_bar sz + xi_bar sy); h = chi I - (chi sz + xi sy).
    hdag << 0.0, I_UNIT * c.xi_bar, -I_UNIT * c.xi_bar, 2.0 * c.chi_bar;
    h << 0.0, I_UNIT * c.xi, -I_UNIT * c.xi, 2.0 * c.chi;
    Vec cv(2);
    cv << 1.0, I_UNIT * c.alpha;
    const Vec ct = expm_eig(Mat(cxd{0.0, t} * hdag)) * cv;
    Eigen::RowVectorXcd dv(2);
    dv << 1.0, -I_UNIT * std::conj(c.alpha);
    const Eigen::RowVectorXcd dt = dv * expm_eig(Mat(cxd{0.0, -t} * h));

    if (quantity == ModeQuantity::amplitudes) {
        out.c0 = ct[0];
        out.c1 = ct[1];
        return out;
    }
    // gamma_t^(k) assembled from the numeric amplitudes; D . C is real up to
    // rounding because D = C^* by construction.
    const double num = (dt[0] * ct[0] + dt[1] * ct[1]).real();
    const double pref = std::exp(-4.0 * (c.Q * c.Q).real() * c.Gamma * t / c.D);
    const double den = 1.0 + std::norm(c.alpha) * std::exp(4.0 * c.Gamma * t);
    out.value = pref * num / den;
    return out;
}

// ---------------------------------------------------------------------------
// Dense spin-chain oracle
// ---------------------------------------------------------------------------

namespace detail {

inline Mat pauli_site(const Mat& op, int site, int L) {
    Mat m = Mat::Identity(1, 1);
    const Mat id2 = Mat::Identity(2, 2);
    for (int l = 0; l < L; ++l)
        m = Eigen::kroneckerProduct(m, (l == site) ? op : id2).eval();
    return m;
}

}  // namespace detail

// Periodic monitored Ising chain on 2^L dimensions:
// H[h, gamma] = -J sum sz_j sz_{j+1} - (h + i gamma/4) sum sx_j.
inline Mat spin_chain_hamiltonian(int L, double h, double gamma, double J = 1.0) {
    if (L > 12) throw resource_error("spin_chain_hamiltonian: L > 12");
    Mat sx(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sz << 1, 0, 0, -1;
    const Eigen::Index d = Eigen::Index(1) << L;
    Mat ham = Mat::Zero(d, d);
    for (int j = 0; j < L; ++j) {
        ham -= J * detail::pauli_site(sz, j, L) * detail::pauli_site(sz, (j + 1) % L, L);
        ham -= cxd{h, 0.25 * gamma} * detail::pauli_site(sx, j, L);
    }
    return ham;
}

// G_0(u, t) for the L-site chain with H_i = H_f = H[h, 0] and rho_i the
// ground-state projector, delegated to the generic no-click machinery.
inline cxd spin_chain_oracle(int L, const IsingParams& p, double t, cxd u) {
    if (L > 12) throw resource_error("spin_chain_oracle: L > 12");
    const Mat h_i = spin_chain_hamiltonian(L, p.h, 0.0, p.J);
    const Mat h_eff = spin_chain_hamiltonian(L, p.h, p.gamma, p.J);
    const GroundState g = ground_state(h_i);
    const Mat rho = g.state * g.state.adjoint();
    return noclick_generating_function(h_eff, h_i, h_i, rho, t, u);
}

// Ground-state energy of the gamma = 0 chain (for normalization checks).
inline double spin_chain_ground_energy(int L, double h, double J = 1.0) {
    return ground_state(spin_chain_hamiltonian(L, h, 0.0, J)).energy;
}

// Moments of the chain work variable from numerical u-derivatives of G with
// central differences and one Richardson step.
struct ChainMoments {
    double mean = 0.0;
    double variance = 0.0;
};

template <typename G>
ChainMoments moments_from_generating_function(G&& g, double step = 1e-4) {
    auto d1 = [&](double hh) { return (g(hh) - g(-hh)) / (2.0 * hh); };
    auto d2 = [&](double hh) { return (g(hh) - 2.0 * g(0.0) + g(-hh)) / (hh * hh); };
    const cxd g1 = (4.0 * d1(step / 2.0) - d1(step)) / 3.0;
    const cxd g2 = (4.0 * d2(step / 2.0) - d2(step)) / 3.0;
    ChainMoments m;
    m.mean = (I_UNIT * g1).real();        // <w> = i G'(0)
    m.variance = (-g2 + g1 * g1).real();  // <w^2> - <w>^2 = -G''(0) + G'(0)^2
    return m;
}

}  // namespace qwork
