#ifndef QBATTERY_SPECTRAL_HPP
#define QBATTERY_SPECTRAL_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

#include <cblas.h>

#include "qbattery/floquet.hpp"
#include "qbattery/parallel.hpp"

namespace qb {

struct SpectralSample {
    RVec phases;           // sorted quasi-energies in [0, 2pi)
    Eigen::Index sector_dim = 0;
    uint64_t seed = 0;
};

/// V^dag U V with V the parity-sector isometry; since the isometry columns
/// are basis vectors this is plain index subsetting.
inline Mat sector_floquet(const FloquetOperator& fop, ParitySector sector) {
    const auto idxs = parity_sector_indices(fop.geom, sector);
    const Mat u = fop.dense();
    const auto n = static_cast<Eigen::Index>(idxs.size());
    Mat us(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) us(r, c) = u(idxs[size_t(r)], idxs[size_t(c)]);
    return us;
}

inline Mat sector_floquet(const SystemGeometry& geom, const ModelParams& params,
                          ParitySector sector) {
    return sector_floquet(build_floquet(geom, params), sector);
}

/// Raw circular spacings phi_{m+1} - phi_m, plus the wrap-around gap; count
/// equals level count.
inline RVec circular_spacings(const RVec& phases_sorted) {
    const auto n = phases_sorted.size();
    RVec s(n);
    for (Eigen::Index m = 0; m + 1 < n; ++m) s[m] = phases_sorted[m + 1] - phases_sorted[m];
    s[n - 1] = phases_sorted[0] + 2.0 * kPi - phases_sorted[n - 1];
    return s;
}

/// s_m = (D_s / 2pi) (phi_{m+1} - phi_m), including the wrap-around spacing;
/// mean is 1 by construction.
inline RVec unfolded_spacings(const RVec& phases_sorted, Eigen::Index sector_dim) {
    if (phases_sorted.size() != sector_dim)
        throw std::invalid_argument("unfolded_spacings: phase count != sector dim");
    return circular_spacings(phases_sorted) * (sector_dim / (2.0 * kPi));
}

/// <r~> = mean of min(s_m, s_{m-1}) / max(s_m, s_{m-1}) over the circular
/// spacing sequence; unfolding-free.
inline double ratio_statistic(const RVec& phases) {
    RVec sorted = phases;
    std::sort(sorted.data(), sorted.data() + sorted.size());
    const RVec s = circular_spacings(sorted);
    const auto n = s.size();
    double acc = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
        const double a = s[m], b = s[(m + n - 1) % n];
        const double hi = std::max(a, b);
        acc += (hi <= 0.0) ? 1.0 : std::min(a, b) / hi;  // degenerate pair -> 1
    }
    return acc / static_cast<double>(n);
}

/// Wigner-Dyson surmise, normalized with unit mean spacing.
inline double wigner_dyson_pdf(double s) {
    return 0.5 * kPi * s * std::exp(-0.25 * kPi * s * s);
}

/// Poisson reference, normalized with unit mean spacing.
inline double poisson_pdf(double s) { return std::exp(-s); }

// -- random-matrix reference sampling ----------------------------------------

/// Haar-distributed unitary via QR of a complex Ginibre matrix (LAPACK
/// zgeqrf/zungqr) with the R-diagonal phase correction.
inline Mat sample_haar_unitary(Eigen::Index n, Rng& rng) {
    Mat g(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < n; ++r) g(r, c) = cxd(rng.normal(), rng.normal());
    const lapack_int ln = static_cast<lapack_int>(n);
    std::vector<cxd> tau(static_cast<size_t>(n));
    lapack_int info = LAPACKE_zgeqrf(LAPACK_COL_MAJOR, ln, ln, lp(g.data()), ln,
                                     lp(tau.data()));
    if (info != 0) throw NumericalError("zgeqrf failed, info=" + std::to_string(info));
    Vec phases(n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const cxd d = g(c, c);
        phases[c] = (std::abs(d) > 0.0) ? d / std::abs(d) : cxd(1.0);
    }
    info = LAPACKE_zungqr(LAPACK_COL_MAJOR, ln, ln, ln, lp(g.data()), ln, lp(tau.data()));
    if (info != 0) throw NumericalError("zungqr failed, info=" + std::to_string(info));
    for (Eigen::Index c = 0; c < n; ++c) g.col(c) *= phases[c];
    return g;
}

/// COE sample: W^T W with W Haar (symmetric unitary).
inline Mat sample_coe(Eigen::Index n, Rng& rng) {
    Mat w = sample_haar_unitary(n, rng);
    Mat out(n, n);
    const cxd one(1.0), zero(0.0);
    cblas_zgemm(CblasColMajor, CblasTrans, CblasNoTrans, static_cast<int>(n),
                static_cast<int>(n), static_cast<int>(n), &one, w.data(),
                static_cast<int>(n), w.data(), static_cast<int>(n), &zero, out.data(),
                static_cast<int>(n));
    return out;
}

/// n iid uniform phases on [0, 2pi), sorted.
inline RVec sample_poisson_phases(Eigen::Index n, Rng& rng) {
    RVec p(n);
    for (Eigen::Index i = 0; i < n; ++i) p[i] = rng.uniform(0.0, 2.0 * kPi);
    std::sort(p.data(), p.data() + n);
    return p;
}

// -- disorder-averaged ratio scans -------------------------------------------

enum class ScanAxis { H, Kappa };

struct RatioScanRow {
    double scan_value = 0.0;
    double r_mean = 0.0;
    double r_stderr = 0.0;
    Eigen::Index sector_dim = 0;
    int realizations = 0;
};

/// <r~> on the even-sector Floquet spectrum, averaged over disorder
/// realizations.  Seeds derive from (grid index, realization, master seed).
inline std::vector<RatioScanRow> scan_ratio(const SystemGeometry& geom,
                                            const ModelParams& base,
                                            ScanAxis axis,
                                            const std::vector<double>& values,
                                            const DisorderSpec& disorder,
                                            int realizations, int threads = 1) {
    if (realizations < 1)
        throw std::invalid_argument("scan_ratio: realizations >= 1 required");
    if (geom.dim() / 2 < 16)
        throw std::invalid_argument("scan_ratio: sector dimension < 16, too few levels");
    std::vector<RatioScanRow> rows(values.size());
    std::vector<std::vector<double>> ratios(values.size(),
                                            std::vector<double>(size_t(realizations)));
    parallel_for(values.size() * size_t(realizations), threads, [&](size_t item) {
        const size_t g = item / size_t(realizations);
        const size_t rep = item % size_t(realizations);
        ModelParams p = base;
        if (axis == ScanAxis::H)
            p.h = values[g];
        else
            p.kappa = values[g];
        DisorderSpec local(disorder.width, Rng::derive(disorder.seed, g, rep));
        const ModelParams realized = realize_disorder(geom, p, local);
        const Mat us = sector_floquet(geom, realized, ParitySector::Even);
        ratios[g][rep] = ratio_statistic(unitary_eigenphases(us));
    });
    for (size_t g = 0; g < values.size(); ++g) {
        double mean = 0.0;
        for (double r : ratios[g]) mean += r;
        mean /= realizations;
        double var = 0.0;
        for (double r : ratios[g]) var += (r - mean) * (r - mean);
        const double stderr_ =
            (realizations > 1) ? std::sqrt(var / (realizations * (realizations - 1))) : 0.0;
        rows[g] = {values[g], mean, stderr_, geom.dim() / 2, realizations};
    }
    return rows;
}

}  // namespace qb

#endif  // QBATTERY_SPECTRAL_HPP
