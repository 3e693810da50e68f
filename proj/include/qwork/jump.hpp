#pragma once

// Quantum-jump Kraus ladder, its no-click continuum limit exp(-i H_eff t),
// the post-selected generating function, the modified Jarzynski relation and
// efficacy, and the simulated Ramsey-ancilla readout.

#include "qwork/core.hpp"
#include "qwork/tpm.hpp"

#include <string>

namespace qwork {

// ---------------------------------------------------------------------------
// Jump models
// ---------------------------------------------------------------------------

struct JumpModel {
    Mat H;  // Hermitian coherent generator
    Mat c;  // jump operator, units of sqrt(rate)

    Mat R() const { return c.adjoint() * c; }
    Mat H_eff() const { return H - cxd{0.0, 0.5} * R(); }
};

inline JumpModel make_jump_model(Mat h, Mat c) {
    if (!is_hermitian(h)) throw invalid_input("JumpModel: H not Hermitian");
    if (c.rows() != h.rows() || c.cols() != h.cols())
        throw dimension_mismatch("JumpModel: c vs H");
    JumpModel m{std::move(h), std::move(c)};
    Eigen::SelfAdjointEigenSolver<Mat> es(m.R());
    if (es.eigenvalues().minCoeff() < -tol().psd)
        throw invalid_input("JumpModel: R = c^dag c not positive semidefinite");
    return m;
}

// ---------------------------------------------------------------------------
// Discretized measurement step
// ---------------------------------------------------------------------------

// {M_0 = I - (R/2 + iH) dt, M_1 = sqrt(dt) c}.  Completeness holds only to
// O(dt^2); the sum-rule tolerance is scaled by ||R/2 + iH||^2 dt^2.
inline KrausSet kraus_step(const JumpModel& m, double dt) {
    if (dt <= 0.0) throw invalid_input("kraus_step: dt must be > 0");
    const Eigen::Index d = m.H.rows();
    const Mat gen = 0.5 * m.R() + I_UNIT * m.H;
    const Mat m0 = Mat::Identity(d, d) - dt * gen;
    const Mat m1 = std::sqrt(dt) * m.c;
    const double gen_norm = gen.operatorNorm();
    const double c_tol = 4.0 * (gen_norm * gen_norm + 1.0) * dt * dt + tol().completeness;
    return make_kraus_set({m0, m1}, {"no-click", "click"}, c_tol);
}

// exp(-i H_eff t), the continuum limit of the no-click ladder.
inline Mat noclick_propagator(const JumpModel& m, double t) {
    if (t < 0.0) throw invalid_input("noclick_propagator: t must be >= 0");
    return mat_exp(m.H_eff(), cxd{0.0, -t});
}

// ---------------------------------------------------------------------------
// Post-selected generating function
// ---------------------------------------------------------------------------

// G_0(u) for an arbitrary (possibly non-Hermitian) effective generator.
inline cxd noclick_generating_function(const Mat& h_eff, const Mat& h_i, const Mat& h_f,
                                       const Mat& rho_i, double t, cxd u) {
    const Mat k = mat_exp(h_eff, cxd{0.0, -t});     // e^{-i H_eff t}
    const Mat kd = k.adjoint();                     // e^{+i H_eff^dag t}
    const cxd den = trace_form(kd, k, rho_i);
    if (std::abs(den) < 1e-300)
        throw degenerate_error("noclick: vanishing no-click probability");
    const Mat ef = mat_exp(h_f, -I_UNIT * u);
    const Mat ei_rho = mat_exp(h_i, I_UNIT * u) * rho_i;
    return trace_form(kd, ef, k, ei_rho) / den;
}

inline cxd noclick_generating_function(const JumpModel& m, const Mat& h_i, const Mat& h_f,
                                       const Mat& rho_i, double t, cxd u) {
    return noclick_generating_function(m.H_eff(), h_i, h_f, rho_i, t, u);
}

// ---------------------------------------------------------------------------
// Post-selected work distribution and the modified Jarzynski relation
// ---------------------------------------------------------------------------

// TPM work distribution conditioned on the no-click record, normalized by the
// no-click probability.  Eigenprojector sums keep degeneracies basis-free.
inline WorkDistribution postselected_work_distribution(const JumpModel& m, const Mat& h_i,
                                                       const Mat& h_f, double beta,
                                                       double t) {
    const ThermalState ts = thermal_state(h_i, beta);
    const Mat k = noclick_propagator(m, t);
    const cxd den = trace_form(Mat(k.adjoint()), k, ts.rho);
    if (std::abs(den) < 1e-300)
        throw degenerate_error("postselected distribution: no-click probability underflow");
    const std::vector<EigenProjector> pi = eigen_projectors(h_i);
    const std::vector<EigenProjector> pf = eigen_projectors(h_f);
    detail::AtomAccumulator acc(tol().work_merge);
    for (const EigenProjector& n : pi) {
        const Mat kn = k * (n.projector * ts.rho);
        for (const EigenProjector& f : pf) {
            const double w = trace_form(f.projector, kn, Mat(k.adjoint())).real();
            acc.add(f.value - n.value, w / den.real());
        }
    }
    return acc.finish();
}

struct ModifiedJarzynski {
    double lhs = 0.0;       // <e^{-beta (W - dF)}> from the post-selected atoms
    double efficacy = 0.0;  // gamma_t, the forward/backward trace ratio
    std::string rho_f_note; // which final-state density was used
};

// lhs = sum_atoms p e^{-beta w} * Z_i/Z_f;
// efficacy = Tr[e^{-i H_eff t} e^{i H_eff^dag t} rho_f] /
//            Tr[e^{i H_eff^dag t} e^{-i H_eff t} rho_i],
// with rho_{i,f} thermal at the same beta.  The two agree identically.
inline ModifiedJarzynski modified_jarzynski(const JumpModel& m, const Mat& h_i,
                                            const Mat& h_f, double beta, double t) {
    const ThermalState tsi = thermal_state(h_i, beta);
    const ThermalState tsf = thermal_state(h_f, beta);
    const WorkDistribution dist = postselected_work_distribution(m, h_i, h_f, beta, t);

    ModifiedJarzynski out;
    double s = 0.0;
    for (const WorkAtom& a : dist.atoms) s += a.p * std::exp(-beta * a.w);
    out.lhs = s * tsi.partition_function / tsf.partition_function;

    const Mat k = noclick_propagator(m, t);
    const Mat kd = k.adjoint();
    const cxd den = trace_form(kd, k, tsi.rho);
    if (std::abs(den) < 1e-300)
        throw degenerate_error("modified_jarzynski: no-click probability underflow");
    out.efficacy = (trace_form(k, kd, tsf.rho) / den).real();
    out.rho_f_note = "rho_f = thermal(H_f, beta=" + std::to_string(beta) + ")";
    return out;
}

// ---------------------------------------------------------------------------
// Ramsey-ancilla readout
// ---------------------------------------------------------------------------

// Simulates the ancilla-system joint state explicitly: the ancilla starts in
// (|0> + |1>)/sqrt(2), both branches ride the no-click evolution, and the |1>
// branch additionally acquires e^{-i H_f u}.  The normalized ancilla coherence
// times the known phase e^{i E_0 u} is the post-selected generating function.
inline cxd ramsey_generating_function(const JumpModel& m, const Mat& h_i, const Mat& h_f,
                                      const Vec& psi0, double t, cxd u) {
    if (std::abs(psi0.norm() - 1.0) > 1e-10)
        throw invalid_input("ramsey: psi0 not normalized");
    const double e0 = (psi0.adjoint() * h_i * psi0)(0, 0).real();
    if ((h_i * psi0 - e0 * psi0).norm() > 1e-8)
        throw invalid_input("ramsey: psi0 is not an eigenstate of H_i; "
                            "post-processing phase undefined");
    const Vec phi = noclick_propagator(m, t) * psi0;
    const double nrm = phi.squaredNorm();
    if (nrm < 1e-300) throw degenerate_error("ramsey: no-click probability underflow");
    // Joint state (2*dim amplitudes): branch 0 = phi/sqrt2, branch 1 = Ef phi/sqrt2.
    const Vec branch0 = phi / std::sqrt(2.0);
    const Vec branch1 = (mat_exp(h_f, -I_UNIT * u) * phi) / std::sqrt(2.0);
    const cxd coherence = (branch0.adjoint() * branch1)(0, 0);  // <0|Tr_sys[..]|1>
    return 2.0 * coherence / nrm * std::exp(I_UNIT * e0 * u);
}

}  // namespace qwork
