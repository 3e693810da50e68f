#pragma once

// Dense complex linear-algebra primitives shared by every other module:
// products, adjoints, traces, matrix exponentials, thermal states.
//
// Conventions: hbar = 1, energies in units of the coupling J = 1.  All
// matrices are dense complex double precision.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qwork {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr cxd I_UNIT{0.0, 1.0};
inline constexpr const char* version = "1.0.0";

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};
struct invalid_input : error {
    explicit invalid_input(const std::string& msg) : error("invalid input: " + msg) {}
};
struct dimension_mismatch : error {
    explicit dimension_mismatch(const std::string& msg) : error("dimension mismatch: " + msg) {}
};
struct resource_error : error {
    explicit resource_error(const std::string& msg) : error("resource limit: " + msg) {}
};
struct degenerate_error : error {
    explicit degenerate_error(const std::string& msg) : error("degenerate: " + msg) {}
};
struct accuracy_error : error {
    explicit accuracy_error(const std::string& msg) : error("accuracy: " + msg) {}
};

// ---------------------------------------------------------------------------
// Tolerances (single source of truth; the model itself never states any)
// ---------------------------------------------------------------------------

struct Tolerances {
    double hermitian = 1e-10;      // max-norm of A - A^dag
    double unitary = 1e-10;        // max-norm of U^dag U - I
    double completeness = 1e-10;   // Kraus sum rule
    double trace_norm = 1e-12;     // Tr rho = 1
    double work_merge = 1e-9;      // merging of degenerate work atoms (energy units)
    double psd = 1e-12;            // positive semidefiniteness slack
};

inline const Tolerances& tol() {
    static const Tolerances t{};
    return t;
}

// ---------------------------------------------------------------------------
// Basic predicates / helpers
// ---------------------------------------------------------------------------

inline bool is_finite(const Mat& a) {
    return a.allFinite();
}

inline bool is_hermitian(const Mat& a, double eps = tol().hermitian) {
    if (a.rows() != a.cols()) return false;
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= eps;
}

inline bool is_unitary(const Mat& u, double eps = tol().unitary) {
    if (u.rows() != u.cols()) return false;
    Mat d = u.adjoint() * u - Mat::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff() <= eps;
}

// Ordered product-then-trace of an arbitrary number of conformable factors.
inline cxd trace_form(const Mat& a) {
    if (a.rows() != a.cols())
        throw dimension_mismatch("trace_form: final product is not square");
    return a.trace();
}

template <typename... Rest>
cxd trace_form(const Mat& a, const Mat& b, const Rest&... rest) {
    if (a.cols() != b.rows())
        throw dimension_mismatch("trace_form: " + std::to_string(a.cols()) + " vs " +
                                 std::to_string(b.rows()));
    return trace_form(Mat(a * b), rest...);
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

// exp(scale * A) for general (non-normal) complex A.  Eigen's MatrixFunctions
// implements scaling-and-squaring with a Pade approximant, which covers the
// non-Hermitian case required by the effective Hamiltonian propagators.
inline Mat mat_exp(const Mat& a, cxd scale = cxd{1.0, 0.0}) {
    if (a.rows() != a.cols())
        throw invalid_input("mat_exp: matrix not square");
    if (a.rows() > 4096)
        throw resource_error("mat_exp: dim > 4096 outside the dense regime");
    if (!is_finite(a) || !std::isfinite(scale.real()) || !std::isfinite(scale.imag()))
        throw invalid_input("mat_exp: non-finite entries");
    Mat scaled = scale * a;
    return scaled.exp();
}

// ---------------------------------------------------------------------------
// Thermal states
// ---------------------------------------------------------------------------

struct ThermalState {
    Mat rho;                    // e^{-beta H} / Z
    double beta = 0.0;          // inverse temperature
    double partition_function = 0.0;
};

inline ThermalState thermal_state(const Mat& h, double beta) {
    if (!is_hermitian(h))
        throw invalid_input("thermal_state: H not Hermitian within tolerance");
    if (beta < 0.0 || !std::isfinite(beta))
        throw invalid_input("thermal_state: beta must be finite and >= 0");
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double emin = ev.minCoeff();
    // Shifted weights for numerical stability; Z carries the true scale.
    Eigen::VectorXd w(ev.size());
    double zs = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        w[i] = std::exp(-beta * (ev[i] - emin));
        zs += w[i];
    }
    ThermalState ts;
    ts.beta = beta;
    ts.partition_function = zs * std::exp(-beta * emin);
    ts.rho = es.eigenvectors() * (w / zs).asDiagonal() * es.eigenvectors().adjoint();
    return ts;
}

// ---------------------------------------------------------------------------
// Spectral helpers
// ---------------------------------------------------------------------------

struct GroundState {
    double energy = 0.0;
    Vec state;
};

inline GroundState ground_state(const Mat& h) {
    if (!is_hermitian(h))
        throw invalid_input("ground_state: H not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    GroundState g;
    g.energy = es.eigenvalues()[0];
    g.state = es.eigenvectors().col(0);
    return g;
}

// Eigenprojectors of a Hermitian matrix, with eigenvalues within merge_eps
// grouped into a single degenerate multiplet (basis-independent).
struct EigenProjector {
    double value = 0.0;
    Mat projector;
};

inline std::vector<EigenProjector> eigen_projectors(const Mat& h,
                                                    double merge_eps = tol().work_merge) {
    if (!is_hermitian(h))
        throw invalid_input("eigen_projectors: H not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const Mat& v = es.eigenvectors();
    std::vector<EigenProjector> out;
    Eigen::Index i = 0;
    while (i < ev.size()) {
        Eigen::Index j = i + 1;
        while (j < ev.size() && std::abs(ev[j] - ev[i]) <= merge_eps) ++j;
        EigenProjector p;
        p.value = ev.segment(i, j - i).mean();
        p.projector = v.middleCols(i, j - i) * v.middleCols(i, j - i).adjoint();
        out.push_back(std::move(p));
        i = j;
    }
    return out;
}

}  // namespace qwork
