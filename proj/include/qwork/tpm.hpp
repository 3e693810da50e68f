#pragma once

// Generic two-point-measurement work statistics for protocols of unitary
// segments interleaved with generalized measurements, by exhaustive record
// enumeration.  This module is the dense ground-truth engine: enumeration is
// exact and exponential in the number of measurement events, capped with an
// explicit error rather than sampled.

#include "qwork/core.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace qwork {

// ---------------------------------------------------------------------------
// Kraus sets
// ---------------------------------------------------------------------------

struct KrausSet {
    std::vector<Mat> operators;       // {M_r}
    std::vector<std::string> labels;  // outcome identifiers
    bool is_unital = false;           // sum_r M_r M_r^dag == I
};

// Validates completeness sum_r M_r^dag M_r = I and computes the unitality flag.
inline KrausSet make_kraus_set(std::vector<Mat> ops,
                               std::vector<std::string> labels = {},
                               double completeness_tol = tol().completeness) {
    if (ops.empty()) throw invalid_input("KrausSet: no operators");
    const Eigen::Index d = ops.front().rows();
    Mat sum_dag_m = Mat::Zero(d, d);
    Mat sum_m_dag = Mat::Zero(d, d);
    for (const Mat& m : ops) {
        if (m.rows() != d || m.cols() != d)
            throw dimension_mismatch("KrausSet: operators of unequal dimension");
        if (!is_finite(m)) throw invalid_input("KrausSet: non-finite operator");
        sum_dag_m += m.adjoint() * m;
        sum_m_dag += m * m.adjoint();
    }
    const Mat id = Mat::Identity(d, d);
    if ((sum_dag_m - id).cwiseAbs().maxCoeff() > completeness_tol)
        throw invalid_input("KrausSet: completeness sum_r M^dag M = I violated");
    KrausSet ks;
    ks.operators = std::move(ops);
    ks.is_unital = (sum_m_dag - id).cwiseAbs().maxCoeff() <= tol().completeness;
    if (labels.empty()) {
        for (std::size_t r = 0; r < ks.operators.size(); ++r)
            labels.push_back(std::to_string(r));
    }
    if (labels.size() != ks.operators.size())
        throw invalid_input("KrausSet: label count mismatch");
    ks.labels = std::move(labels);
    return ks;
}

// Reset channel {|target><r|}: complete but non-unital for dim >= 2.
inline KrausSet reset_channel(int dim, int target = 0) {
    if (dim < 2) throw invalid_input("reset_channel: dim must be >= 2");
    if (target < 0 || target >= dim) throw invalid_input("reset_channel: target out of range");
    std::vector<Mat> ops;
    std::vector<std::string> labels;
    for (int r = 0; r < dim; ++r) {
        Mat m = Mat::Zero(dim, dim);
        m(target, r) = 1.0;
        ops.push_back(std::move(m));
        labels.push_back(std::to_string(r));
    }
    return make_kraus_set(std::move(ops), std::move(labels));
}

// ---------------------------------------------------------------------------
// Protocols
// ---------------------------------------------------------------------------

struct UnitarySegment {
    Mat U;
};

// Piecewise-constant drive segment: U = exp(-i H duration).
inline UnitarySegment segment_from_generator(const Mat& h, double duration) {
    if (!is_hermitian(h)) throw invalid_input("segment_from_generator: H not Hermitian");
    return UnitarySegment{mat_exp(h, cxd{0.0, -duration})};
}

struct MeasurementEvent {
    KrausSet kraus;
    double time = 0.0;
};

using ProtocolSegment = std::variant<UnitarySegment, MeasurementEvent>;

struct TrajectoryProtocol {
    Mat H_i;
    Mat H_f;
    std::vector<ProtocolSegment> segments;  // applied left to right in time
};

inline TrajectoryProtocol make_protocol(Mat h_i, Mat h_f,
                                        std::vector<ProtocolSegment> segments) {
    if (!is_hermitian(h_i)) throw invalid_input("protocol: H_i not Hermitian");
    if (!is_hermitian(h_f)) throw invalid_input("protocol: H_f not Hermitian");
    const Eigen::Index d = h_i.rows();
    if (h_f.rows() != d) throw dimension_mismatch("protocol: H_i vs H_f");
    double last_time = -std::numeric_limits<double>::infinity();
    for (const ProtocolSegment& s : segments) {
        if (const auto* u = std::get_if<UnitarySegment>(&s)) {
            if (u->U.rows() != d) throw dimension_mismatch("protocol: unitary segment dim");
            if (!is_unitary(u->U)) throw invalid_input("protocol: segment not unitary");
        } else {
            const auto& ev = std::get<MeasurementEvent>(s);
            if (ev.kraus.operators.front().rows() != d)
                throw dimension_mismatch("protocol: measurement event dim");
            if (ev.time <= last_time)
                throw invalid_input("protocol: measurement times must strictly increase");
            last_time = ev.time;
        }
    }
    return TrajectoryProtocol{std::move(h_i), std::move(h_f), std::move(segments)};
}

using MeasurementRecord = std::vector<int>;

inline std::vector<std::size_t> event_sizes(const TrajectoryProtocol& p) {
    std::vector<std::size_t> sizes;
    for (const ProtocolSegment& s : p.segments)
        if (const auto* ev = std::get_if<MeasurementEvent>(&s))
            sizes.push_back(ev->kraus.operators.size());
    return sizes;
}

// T({r_j}) as the ordered product of segment unitaries and measurement
// operators, rightmost factor acting first.
inline Mat record_operator(const TrajectoryProtocol& p, const MeasurementRecord& record) {
    const Eigen::Index d = p.H_i.rows();
    Mat t = Mat::Identity(d, d);
    std::size_t next = 0;
    for (const ProtocolSegment& s : p.segments) {
        if (const auto* u = std::get_if<UnitarySegment>(&s)) {
            t = u->U * t;
        } else {
            const auto& ev = std::get<MeasurementEvent>(s);
            if (next >= record.size())
                throw invalid_input("record_operator: record shorter than event list");
            const int r = record[next++];
            if (r < 0 || static_cast<std::size_t>(r) >= ev.kraus.operators.size())
                throw invalid_input("record_operator: outcome label out of range");
            t = ev.kraus.operators[static_cast<std::size_t>(r)] * t;
        }
    }
    if (next != record.size())
        throw invalid_input("record_operator: record longer than event list");
    return t;
}

// Iterate all records in lexicographic order; f(record) is called for each.
template <typename F>
void for_each_record(const TrajectoryProtocol& p, std::uint64_t cap, F&& f) {
    const std::vector<std::size_t> sizes = event_sizes(p);
    std::uint64_t total = 1;
    for (std::size_t s : sizes) {
        total *= s;
        if (total > cap)
            throw resource_error("record enumeration: record count exceeds cap " +
                                 std::to_string(cap));
    }
    MeasurementRecord rec(sizes.size(), 0);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        std::uint64_t rem = idx;
        for (std::size_t j = sizes.size(); j-- > 0;) {
            rec[j] = static_cast<int>(rem % sizes[j]);
            rem /= sizes[j];
        }
        f(static_cast<const MeasurementRecord&>(rec));
    }
}

// ---------------------------------------------------------------------------
// Work distributions
// ---------------------------------------------------------------------------

struct WorkAtom {
    double w = 0.0;
    double p = 0.0;
};

struct WorkDistribution {
    std::vector<WorkAtom> atoms;  // sorted by w, degenerate values merged

    double total() const {
        double s = 0.0;
        for (const WorkAtom& a : atoms) s += a.p;
        return s;
    }
    double mean() const {
        double s = 0.0;
        for (const WorkAtom& a : atoms) s += a.p * a.w;
        return s;
    }
    double second_moment() const {
        double s = 0.0;
        for (const WorkAtom& a : atoms) s += a.p * a.w * a.w;
        return s;
    }
    double variance() const {
        const double m = mean();
        return second_moment() - m * m;
    }
    cxd fourier(cxd u) const {
        cxd s{0.0, 0.0};
        for (const WorkAtom& a : atoms) s += a.p * std::exp(-I_UNIT * a.w * u);
        return s;
    }
};

namespace detail {

// Accumulate (w, p) pairs, merging work values within merge_eps.
class AtomAccumulator {
  public:
    explicit AtomAccumulator(double merge_eps) : eps_(merge_eps) {}

    void add(double w, double p) {
        auto it = atoms_.lower_bound(w - eps_);
        if (it != atoms_.end() && std::abs(it->first - w) <= eps_) {
            it->second += p;
        } else {
            atoms_.emplace(w, p);
        }
    }

    WorkDistribution finish(bool normalized_check = true) const {
        WorkDistribution d;
        for (const auto& [w, p] : atoms_) {
            double q = p;
            if (q < 0.0) {
                if (q < -1e-12)
                    throw accuracy_error("work distribution: negative probability " +
                                         std::to_string(q));
                q = 0.0;
            }
            if (q <= 1e-15) continue;  // prune numerically empty support points
            d.atoms.push_back({w, q});
        }
        if (normalized_check && std::abs(d.total() - 1.0) > 1e-10)
            throw accuracy_error("work distribution: normalization off by " +
                                 std::to_string(d.total() - 1.0));
        return d;
    }

  private:
    double eps_;
    std::map<double, double> atoms_;
};

}  // namespace detail

// P(W) from exhaustive record enumeration; thermal initial state at beta.
// Degenerate eigenspaces are handled through eigenprojectors, so the result
// is basis-independent.
inline WorkDistribution work_distribution(const TrajectoryProtocol& p, double beta,
                                          std::uint64_t record_cap = 1000000) {
    const ThermalState ts = thermal_state(p.H_i, beta);
    const std::vector<EigenProjector> pi = eigen_projectors(p.H_i);
    const std::vector<EigenProjector> pf = eigen_projectors(p.H_f);

    detail::AtomAccumulator acc(tol().work_merge);
    for_each_record(p, record_cap, [&](const MeasurementRecord& rec) {
        const Mat t = record_operator(p, rec);
        for (const EigenProjector& n : pi) {
            // Thermal rho commutes with the projectors of H_i.
            const Mat tn = t * (n.projector * ts.rho);
            for (const EigenProjector& m : pf) {
                const double prob = trace_form(m.projector, tn, Mat(t.adjoint())).real();
                acc.add(m.value - n.value, prob);
            }
        }
    });
    return acc.finish();
}

// G(u) = sum_records Tr[T^dag e^{-i H_f u} T e^{i H_i u} rho_i].
inline cxd generating_function(const TrajectoryProtocol& p, double beta, cxd u,
                               std::uint64_t record_cap = 1000000) {
    const ThermalState ts = thermal_state(p.H_i, beta);
    const Mat ef = mat_exp(p.H_f, -I_UNIT * u);
    const Mat ei_rho = mat_exp(p.H_i, I_UNIT * u) * ts.rho;
    cxd g{0.0, 0.0};
    for_each_record(p, record_cap, [&](const MeasurementRecord& rec) {
        const Mat t = record_operator(p, rec);
        g += trace_form(Mat(t.adjoint()), ef, t, ei_rho);
    });
    return g;
}

// ---------------------------------------------------------------------------
// Jarzynski / unitality report
// ---------------------------------------------------------------------------

struct JarzynskiReport {
    cxd g{0.0, 0.0};                 // G(-i beta)
    double free_energy_ratio = 0.0;  // Z_f / Z_i
    bool unital = false;             // all events unital
    double deviation = 0.0;          // |g - Z_f/Z_i|
};

inline JarzynskiReport jarzynski_report(const TrajectoryProtocol& p, double beta,
                                        std::uint64_t record_cap = 1000000) {
    JarzynskiReport rep;
    rep.g = generating_function(p, beta, cxd{0.0, -beta}, record_cap);
    rep.free_energy_ratio =
        thermal_state(p.H_f, beta).partition_function /
        thermal_state(p.H_i, beta).partition_function;
    rep.unital = true;
    for (const ProtocolSegment& s : p.segments)
        if (const auto* ev = std::get_if<MeasurementEvent>(&s))
            rep.unital = rep.unital && ev->kraus.is_unital;
    rep.deviation = std::abs(rep.g - cxd{rep.free_energy_ratio, 0.0});
    return rep;
}

// ---------------------------------------------------------------------------
// Post-selection on a single record
// ---------------------------------------------------------------------------

// Tr[T^dag e^{-i H_f u} T e^{i H_i u} rho_i] / Tr[T^dag T rho_i].
inline cxd postselect_generating_function(const TrajectoryProtocol& p, double beta,
                                          const MeasurementRecord& record, cxd u) {
    const ThermalState ts = thermal_state(p.H_i, beta);
    const Mat t = record_operator(p, record);
    const cxd den = trace_form(Mat(t.adjoint()), t, ts.rho);
    if (std::abs(den) < 1e-300)
        throw degenerate_error("postselect: record probability below 1e-300");
    const Mat ef = mat_exp(p.H_f, -I_UNIT * u);
    const Mat ei_rho = mat_exp(p.H_i, I_UNIT * u) * ts.rho;
    return trace_form(Mat(t.adjoint()), ef, t, ei_rho) / den;
}

}  // namespace qwork
