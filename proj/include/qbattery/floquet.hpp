#ifndef QBATTERY_FLOQUET_HPP
#define QBATTERY_FLOQUET_HPP

#include <string>
#include <vector>

#include "qbattery/linalg.hpp"
#include "qbattery/model.hpp"
#include "qbattery/spin_core.hpp"

namespace qb {

/// e^{-iHt} via full eigendecomposition (real-symmetric fast path).
inline Mat expm_hermitian(const Mat& h, double t) {
    if (!is_hermitian(h, 1e-10))
        throw std::invalid_argument("expm_hermitian: matrix is not Hermitian");
    if (h.imag().cwiseAbs().maxCoeff() < 1e-14) {
        RVec w;
        RMat v;
        eig_symmetric(h.real(), w, v);
        RMat vc = v * (w.array() * t).cos().matrix().asDiagonal();
        RMat vs = v * (w.array() * t).sin().matrix().asDiagonal();
        return (vc * v.transpose()).cast<cxd>() -
               cxd(0, 1) * (vs * v.transpose()).cast<cxd>();
    }
    HermitianEigen e = eig_hermitian(h);
    Vec phase = (cxd(0, -1) * t * e.values.cast<cxd>().array()).exp().matrix();
    return e.vectors * phase.asDiagonal() * e.vectors.adjoint();
}

inline Mat expm_symmetric(const RMat& h, double t) {
    RVec w;
    RMat v;
    eig_symmetric(h, w, v);
    RMat vc = v * (w.array() * t).cos().matrix().asDiagonal();
    RMat vs = v * (w.array() * t).sin().matrix().asDiagonal();
    return (vc * v.transpose()).cast<cxd>() - cxd(0, 1) * (vs * v.transpose()).cast<cxd>();
}

/// Kick unitary U_cb = prod_i [cos(kt) I + i sin(kt) sx_{s_i} Sx_i] in
/// structured form: each factor is a rotation on one pair of index bits.
struct KickOperator {
    double cos_kt = 1.0;
    double sin_kt = 0.0;
    std::vector<Eigen::Index> masks;  // full-index bit pair per battery qubit

    void apply(Vec& psi) const {
        const cxd is(0.0, sin_kt);
        for (Eigen::Index mask : masks) {
            for (Eigen::Index idx = 0; idx < psi.size(); ++idx) {
                const Eigen::Index j = idx ^ mask;
                if (idx < j) {
                    const cxd a = psi[idx], b = psi[j];
                    psi[idx] = cos_kt * a + is * b;
                    psi[j] = cos_kt * b + is * a;
                }
            }
        }
    }

    /// Left-multiply a dense matrix by U_cb (row mixing).
    void apply_rows(Mat& m) const {
        const cxd is(0.0, sin_kt);
        for (Eigen::Index mask : masks) {
            for (Eigen::Index idx = 0; idx < m.rows(); ++idx) {
                const Eigen::Index j = idx ^ mask;
                if (idx < j) {
                    Vec a = m.row(idx), b = m.row(j);
                    m.row(idx) = cos_kt * a + is * b;
                    m.row(j) = cos_kt * b + is * a;
                }
            }
        }
    }

    Mat dense(Eigen::Index dim) const {
        Mat u = Mat::Identity(dim, dim);
        apply_rows(u);
        return u;
    }
};

inline KickOperator build_kick_unitary(const SystemGeometry& geom,
                                       const ModelParams& params) {
    params.validate(geom);
    KickOperator kick;
    const double kt = params.kappa * params.tau;
    kick.cos_kt = std::cos(kt);
    kick.sin_kt = std::sin(kt);
    for (int i = 1; i <= geom.n_b; ++i)
        kick.masks.push_back(
            (Eigen::Index(1) << geom.bit_of_factor(geom.coupled_site(i))) |
            (Eigen::Index(1) << geom.bit_of_factor(geom.L + i)));
    return kick;
}

/// One-period unitary U = U_cb (U_c x U_b), kept in factorized form; the
/// charger factor is dense on 2^L, the battery factor is diagonal.
struct FloquetOperator {
    SystemGeometry geom;
    ModelParams params;
    double tau;
    Mat u_c;        // 2^L x 2^L
    Vec u_b_diag;   // 2^n_b
    KickOperator kick;

    /// Apply the factorized operator to a full-space vector.
    Vec apply(const Vec& psi) const {
        using RowMat = Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Eigen::Map<const RowMat> m(psi.data(), geom.charger_dim(), geom.battery_dim());
        RowMat w = u_c * m;
        w *= u_b_diag.asDiagonal();
        Vec out = Eigen::Map<Vec>(w.data(), psi.size());
        kick.apply(out);
        return out;
    }

    /// U_c x U_b as a dense full-space matrix.
    Mat dense_uncoupled() const {
        const Eigen::Index nb = geom.battery_dim();
        Mat u = Mat::Zero(geom.dim(), geom.dim());
        for (Eigen::Index rc = 0; rc < geom.charger_dim(); ++rc)
            for (Eigen::Index cc = 0; cc < geom.charger_dim(); ++cc) {
                const cxd v = u_c(rc, cc);
                if (v != cxd(0.0)) {
                    for (Eigen::Index b = 0; b < nb; ++b)
                        u(rc * nb + b, cc * nb + b) = v * u_b_diag[b];
                }
            }
        return u;
    }

    /// Dense one-period unitary U_cb (U_c x U_b).
    Mat dense() const {
        Mat u = dense_uncoupled();
        kick.apply_rows(u);
        return u;
    }
};

inline FloquetOperator build_floquet(const SystemGeometry& geom, const ModelParams& params) {
    params.validate(geom);
    FloquetOperator fop{geom, params, params.tau, {}, {}, build_kick_unitary(geom, params)};
    fop.u_c = expm_symmetric(charger_hamiltonian_compact(geom, params), params.tau);
    RVec hb = battery_hamiltonian_diagonal(geom, params);
    fop.u_b_diag = (cxd(0, -1) * params.tau * hb.cast<cxd>().array()).exp().matrix();
    return fop;
}

/// Real symmetric observable whose first two moments are tracked along a
/// trajectory (diagonal operators skip the matvec).
struct TrackedOperator {
    std::string name;
    bool is_diagonal = false;
    RVec diag;
    RMat dense;
};

inline TrackedOperator track_diagonal(std::string name, RVec diag) {
    return {std::move(name), true, std::move(diag), {}};
}

inline TrackedOperator track_dense(std::string name, RMat m) {
    return {std::move(name), false, {}, std::move(m)};
}

/// Stroboscopic record: battery RDM, stored energy and tracked-operator
/// moments per kick, plus the final full state.  Full states along the way
/// are not kept.
struct Trajectory {
    SystemGeometry geom{1, 0, 1};
    ModelParams params;
    double tau = 0.0;
    std::vector<Mat> rdm;                         // index = kick count n
    std::vector<double> energy;                   // E(n), E(0) = 0
    std::vector<std::vector<double>> op_mean;     // [op][n]
    std::vector<std::vector<double>> op_second;   // [op][n]
    Vec final_state;

    int kicks() const { return static_cast<int>(rdm.size()) - 1; }
};

/// Evolve |psi0> under n_kicks applications of the factorized U.
inline Trajectory evolve(const FloquetOperator& fop, const Vec& psi0, int n_kicks,
                         const std::vector<TrackedOperator>& tracked = {}) {
    if (n_kicks < 0) throw std::invalid_argument("evolve: n_kicks >= 0 required");
    if (psi0.size() != fop.geom.dim())
        throw std::invalid_argument("evolve: state dimension mismatch");
    Trajectory traj;
    traj.geom = fop.geom;
    traj.params = fop.params;
    traj.tau = fop.tau;
    traj.op_mean.resize(tracked.size());
    traj.op_second.resize(tracked.size());

    const RVec hb_full = total_battery_diagonal(fop.geom, fop.params);
    Vec psi = psi0;
    double e0 = 0.0;
    for (int n = 0; n <= n_kicks; ++n) {
        if (n > 0) psi = fop.apply(psi);
        const double norm = psi.norm();
        if (std::abs(norm - 1.0) > 1e-8)
            throw NumericalError("evolve: norm drift " + std::to_string(norm - 1.0));
        traj.rdm.push_back(partial_trace_battery(psi, fop.geom));
        const double e = (hb_full.array() * psi.array().abs2()).sum();
        if (n == 0) e0 = e;
        traj.energy.push_back(e - e0);
        for (size_t k = 0; k < tracked.size(); ++k) {
            const auto& op = tracked[k];
            if (op.is_diagonal) {
                const RVec p = psi.array().abs2();
                traj.op_mean[k].push_back((op.diag.array() * p.array()).sum());
                traj.op_second[k].push_back((op.diag.array().square() * p.array()).sum());
            } else {
                Vec w = op.dense * psi.real();
                w += cxd(0, 1) * (op.dense * psi.imag());
                traj.op_mean[k].push_back(psi.dot(w).real());
                traj.op_second[k].push_back(w.squaredNorm());
            }
        }
    }
    traj.final_state = std::move(psi);
    return traj;
}

/// Closed-form model for h=0, n_b=1: the even-sector dynamics reduces to a
/// 2x2 block iterated n times; f21(n) gives the excited-state amplitude.
struct AnalyticKickModel {
    double kappa, tau, delta;
    double eps;  // delta * tau / 2
    cxd a, b;

    AnalyticKickModel(double kappa_, double tau_, double delta_)
        : kappa(kappa_), tau(tau_), delta(delta_), eps(0.5 * delta_ * tau_) {
        const cxd e2 = std::exp(cxd(0, 2.0 * eps));
        // a as printed drops a parenthesis; (1 + e^{2i eps}) cos(kt) is the
        // trace of the 2x2 block and matches the matrix-power oracle.
        a = (1.0 + e2) * std::cos(kappa * tau);
        b = std::sqrt(a * a - 4.0 * e2);
    }

    /// (F_n)_{21} with the removable b -> 0 singularity handled analytically.
    cxd f21(int n) const {
        if (n == 0) return 0.0;
        const cxd em = std::exp(cxd(0, -eps));
        const cxd pref = cxd(0, 1) * std::exp(cxd(0, 2.0 * eps)) * std::sin(kappa * tau);
        if (std::abs(b) < 1e-8 * std::max(1.0, std::abs(a))) {
            const cxd mu = em * a * 0.5;
            return static_cast<double>(n) * std::pow(mu, n - 1) * em * pref;
        }
        const cxd mp = em * (a + b) * 0.5;
        const cxd mm = em * (a - b) * 0.5;
        return (std::pow(mp, n) - std::pow(mm, n)) / b * pref;
    }

    double population(int n) const { return std::norm(f21(n)); }

    /// The 4x4 one-period unitary in the even/odd cat-state basis.
    Mat matrix4() const {
        const cxd ep = std::exp(cxd(0, eps)), em = std::exp(cxd(0, -eps));
        const double c = std::cos(kappa * tau), s = std::sin(kappa * tau);
        Mat u = Mat::Zero(4, 4);
        Eigen::Matrix2cd blk;
        blk << c * ep, cxd(0, s) * em, cxd(0, s) * ep, c * em;
        u.block<2, 2>(0, 0) = blk;
        u.block<2, 2>(2, 2) = blk;
        return u;
    }
};

struct QuasiEnergies {
    RVec phases;   // ascending in [0, 2pi)
    Mat vectors;
};

inline QuasiEnergies quasienergy_decomposition(const Mat& u_sector) {
    if (!is_unitary(u_sector, 1e-8))
        throw std::invalid_argument("quasienergy_decomposition: input not unitary");
    UnitaryEigen e = unitary_eigensystem(u_sector);
    return {std::move(e.phases), std::move(e.vectors)};
}

}  // namespace qb

#endif  // QBATTERY_FLOQUET_HPP
