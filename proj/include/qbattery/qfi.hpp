#ifndef QBATTERY_QFI_HPP
#define QBATTERY_QFI_HPP

#include <vector>

#include "qbattery/floquet.hpp"
#include "qbattery/spin_core.hpp"

namespace qb {

struct RhoSpectrum {
    RVec values;   // ascending, clipped to >= 0 and renormalized to sum 1
    Mat vectors;
};

/// Spectral decomposition of a battery RDM.  Eigenvalues below -1e-8 signal
/// an invalid state; small negatives from roundoff are clipped and the
/// spectrum renormalized.
inline RhoSpectrum rho_spectral(const Mat& rho) {
    HermitianEigen e = eig_hermitian(rho);
    if (e.values.minCoeff() < -1e-8)
        throw std::invalid_argument("rho_spectral: eigenvalue below -1e-8, not a state");
    RVec w = e.values.cwiseMax(0.0);
    const double sum = w.sum();
    if (sum <= 0.0) throw std::invalid_argument("rho_spectral: zero trace");
    w /= sum;
    return {std::move(w), std::move(e.vectors)};
}

/// Collective spin S^alpha = (1/2) sum_k sigma^alpha_k on the battery space.
inline Mat collective_spin(const SystemGeometry& geom, PauliAxis axis) {
    Mat s = Mat::Zero(geom.battery_dim(), geom.battery_dim());
    for (int k = 1; k <= geom.n_b; ++k) s += battery_pauli(geom, axis, k);
    return 0.5 * s;
}

using GammaMatrix = Eigen::Matrix3d;

/// QFI direction matrix: Gamma_{aa'} = 2 sum_{ij} (li-lj)^2/(li+lj)
/// <li|S^a|lj><lj|S^a'|li>, pairs with li+lj below threshold skipped.
inline GammaMatrix gamma_matrix(const Mat& rho, const SystemGeometry& geom,
                                double threshold = 1e-12) {
    if (rho.rows() != geom.battery_dim())
        throw std::invalid_argument("gamma_matrix: rho is not an n_b-qubit state");
    const RhoSpectrum spec = rho_spectral(rho);
    const auto dim = rho.rows();
    Mat s_eig[3];
    for (int a = 0; a < 3; ++a) {
        const Mat s = collective_spin(geom, static_cast<PauliAxis>(a));
        s_eig[a] = spec.vectors.adjoint() * s * spec.vectors;
    }
    GammaMatrix gamma = GammaMatrix::Zero();
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double li = spec.values[i], lj = spec.values[j];
            if (li + lj < threshold) continue;
            const double weight = 2.0 * (li - lj) * (li - lj) / (li + lj);
            if (weight == 0.0) continue;
            for (int a = 0; a < 3; ++a)
                for (int ap = 0; ap < 3; ++ap)
                    gamma(a, ap) += weight * (s_eig[a](i, j) * s_eig[ap](j, i)).real();
        }
    }
    return 0.5 * (gamma + gamma.transpose());
}

struct QfiWitness {
    double lambda_max = 0.0;
    bool is_multipartite = false;   // true iff lambda_max > n_b
};

inline QfiWitness qfi_witness(const GammaMatrix& gamma, int n_b) {
    Eigen::SelfAdjointEigenSolver<GammaMatrix> es(gamma);
    const double lmax = es.eigenvalues().maxCoeff();
    return {lmax, lmax > static_cast<double>(n_b)};
}

struct QfiSeries {
    std::vector<double> lambda_max;   // per kick
    double max_value = 0.0;
    int argmax_kick = 0;
};

/// lambda_max(Gamma(rho_b^n)) per kick; the window maximum is the Table-style
/// comparand (the evaluation-time convention is not unique, so the full
/// series is kept).
inline QfiSeries qfi_over_trajectory(const Trajectory& traj, const SystemGeometry& geom) {
    QfiSeries out;
    out.lambda_max.reserve(traj.rdm.size());
    for (size_t n = 0; n < traj.rdm.size(); ++n) {
        const double l = qfi_witness(gamma_matrix(traj.rdm[n], geom), geom.n_b).lambda_max;
        out.lambda_max.push_back(l);
        if (l > out.max_value) {
            out.max_value = l;
            out.argmax_kick = static_cast<int>(n);
        }
    }
    return out;
}

}  // namespace qb

#endif  // QBATTERY_QFI_HPP
