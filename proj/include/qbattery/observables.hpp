#ifndef QBATTERY_OBSERVABLES_HPP
#define QBATTERY_OBSERVABLES_HPP

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include "qbattery/floquet.hpp"

namespace qb {

/// E(n) = tr(rho_n H_b) - tr(rho_0 H_b).
inline double stored_energy(const Mat& rho_n, const Mat& rho_0, const Mat& h_b) {
    return ((rho_n - rho_0) * h_b).trace().real();
}

/// E / (n tau).
inline double average_power(double energy, int n, double tau) {
    if (n < 1) throw std::invalid_argument("average_power: n >= 1 required");
    return energy / (n * tau);
}

struct ChargingTime {
    int m = 0;            // kick count of the earliest maximum
    double T = 0.0;       // m * tau
    double e_max = 0.0;
    bool never_charges = false;
};

/// Earliest kick maximizing E(n) over 1..horizon (relative tie tolerance 1e-9).
inline ChargingTime charging_time(const Trajectory& traj, int horizon) {
    if (horizon < 1) throw std::invalid_argument("charging_time: horizon >= 1 required");
    horizon = std::min(horizon, traj.kicks());
    double e_max = 0.0;
    for (int n = 1; n <= horizon; ++n) e_max = std::max(e_max, traj.energy[size_t(n)]);
    ChargingTime out;
    out.e_max = e_max;
    if (e_max <= 1e-12) {
        out.never_charges = true;
        return out;
    }
    for (int n = 1; n <= horizon; ++n) {
        if (traj.energy[size_t(n)] >= e_max * (1.0 - 1e-9)) {
            out.m = n;
            out.T = n * traj.tau;
            break;
        }
    }
    return out;
}

/// Passive counterpart: rho's eigenvalues sorted descending, paired with the
/// Hamiltonian eigenvalues sorted ascending.
inline Mat passive_state(const Mat& rho, const Mat& h_b) {
    if (rho.rows() != h_b.rows())
        throw std::invalid_argument("passive_state: dimension mismatch");
    HermitianEigen er = eig_hermitian(rho);   // values ascending
    HermitianEigen eh = eig_hermitian(h_b);
    const auto n = rho.rows();
    Mat passive = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        // descending rho eigenvalue i pairs with ascending energy i
        const double p = er.values[n - 1 - i];
        passive += p * eh.vectors.col(i) * eh.vectors.col(i).adjoint();
    }
    return passive;
}

/// Maximum unitarily extractable work, tr(rho H) - tr(passive(rho) H) >= 0.
inline double ergotropy(const Mat& rho, const Mat& h_b) {
    if (rho.rows() != h_b.rows())
        throw std::invalid_argument("ergotropy: dimension mismatch");
    HermitianEigen er = eig_hermitian(rho);
    HermitianEigen eh = eig_hermitian(h_b);
    const auto n = rho.rows();
    double passive_energy = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        passive_energy += er.values[n - 1 - i] * eh.values[i];
    return (rho * h_b).trace().real() - passive_energy;
}

// linear_entropy(rho) lives in spin_core.hpp.

/// Mean over samples n = 0..m of <O^2> - <O>^2 for tracked operator k.
inline double time_avg_variance(const Trajectory& traj, size_t op_index, int m) {
    if (op_index >= traj.op_mean.size())
        throw std::invalid_argument("time_avg_variance: no such tracked operator");
    if (m < 0 || m > traj.kicks())
        throw std::invalid_argument("time_avg_variance: window out of range");
    double acc = 0.0;
    for (int n = 0; n <= m; ++n) {
        const double mu = traj.op_mean[op_index][size_t(n)];
        acc += traj.op_second[op_index][size_t(n)] - mu * mu;
    }
    return acc / (m + 1);
}

/// Direct evaluation from explicit states, used as the tests' oracle route.
inline double time_avg_variance(const Mat& op, const std::vector<Vec>& states) {
    if (states.empty()) throw std::invalid_argument("time_avg_variance: no states");
    double acc = 0.0;
    for (const Vec& psi : states) {
        const Vec w = op * psi;
        const double mu = psi.dot(w).real();
        acc += w.squaredNorm() - mu * mu;
    }
    return acc / static_cast<double>(states.size());
}

/// Time-average variance with the 1/T = 1/(m tau) weight used by the power
/// bound: the m+1 stroboscopic samples summed and divided by the elapsed time.
inline double time_avg_variance_rate(const Trajectory& traj, size_t op_index, int m) {
    if (m < 1) throw std::invalid_argument("time_avg_variance_rate: m >= 1 required");
    return time_avg_variance(traj, op_index, m) * double(m + 1) / (m * traj.tau);
}

/// Geometric bound 2 sqrt(var_Hb * var_H) on the average charging power.
inline double power_bound(double var_hb, double var_h) {
    return 2.0 * std::sqrt(std::max(0.0, var_hb) * std::max(0.0, var_h));
}

/// std/mean of {E(n)/n_b : n = from_kick..to_kick}.
inline double stability_metric(const Trajectory& traj, int from_kick, int to_kick) {
    if (to_kick <= from_kick)
        throw std::invalid_argument("stability_metric: to_kick > from_kick required");
    if (to_kick > traj.kicks())
        throw std::invalid_argument("stability_metric: window exceeds trajectory");
    const double nb = std::max(1, traj.geom.n_b);
    double mean = 0.0;
    int count = 0;
    for (int n = from_kick; n <= to_kick; ++n, ++count) mean += traj.energy[size_t(n)] / nb;
    mean /= count;
    double var = 0.0;
    for (int n = from_kick; n <= to_kick; ++n) {
        const double x = traj.energy[size_t(n)] / nb - mean;
        var += x * x;
    }
    var /= count;
    return std::sqrt(var) / mean;
}

/// Figures of merit for one dynamics run.
struct MeritReport {
    int charging_kicks = 0;
    double charging_time = 0.0;
    double e_max = 0.0;
    double power_at_T = 0.0;
    double power_bound_at_T = 0.0;
    double stability = 0.0;   // sigma/mu over the post-charging window
    bool never_charges = false;
    std::vector<double> ergotropy_series;
    std::vector<double> linear_entropy_series;
    std::vector<double> qfi_series;   // filled by the qfi module when requested
};

}  // namespace qb

#endif  // QBATTERY_OBSERVABLES_HPP
