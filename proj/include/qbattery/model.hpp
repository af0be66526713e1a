#ifndef QBATTERY_MODEL_HPP
#define QBATTERY_MODEL_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qbattery/linalg.hpp"
#include "qbattery/spin_core.hpp"

namespace qb {

/// Deterministic RNG with platform-independent output (splitmix64 stream);
/// std::uniform_real_distribution is implementation-defined, so it is avoided.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    /// Child seed for work item (i, j); detaches parallel streams.
    static uint64_t derive(uint64_t master, uint64_t i, uint64_t j = 0) {
        Rng r(master ^ (0x9e3779b97f4a7c15ull * (i + 1)) ^
              (0xc2b2ae3d27d4eb4full * (j + 1)));
        return r.next_u64();
    }

private:
    uint64_t state_;
};

struct ModelParams {
    double J = 1.0;       // ferromagnetic Ising coupling, J > 0
    double h = 1.0;       // mean transverse field
    double kappa = 1.0;   // charger-battery coupling
    double delta = 1.0;   // mean battery gap
    double tau = kPi / 4; // kick period
    std::optional<std::vector<double>> h_fields;      // per-site field (length L)
    std::optional<std::vector<double>> delta_fields;  // per-qubit gap (length n_b)

    void validate(const SystemGeometry& geom) const {
        if (J <= 0.0) throw std::invalid_argument("ModelParams: J > 0 required");
        if (tau <= 0.0) throw std::invalid_argument("ModelParams: tau > 0 required");
        if (delta <= 0.0) throw std::invalid_argument("ModelParams: delta > 0 required");
        if (h_fields && static_cast<int>(h_fields->size()) != geom.L)
            throw std::invalid_argument("ModelParams: h_fields length != L");
        if (delta_fields && static_cast<int>(delta_fields->size()) != geom.n_b)
            throw std::invalid_argument("ModelParams: delta_fields length != n_b");
    }

    double h_at(int site) const {  // 1-based
        return h_fields ? (*h_fields)[static_cast<size_t>(site - 1)] : h;
    }
    double delta_at(int qubit) const {  // 1-based
        return delta_fields ? (*delta_fields)[static_cast<size_t>(qubit - 1)] : delta;
    }
};

struct DisorderSpec {
    double width = 0.1;   // relative width w, fields drawn from mean*(1 +- w)
    uint64_t seed = 0;

    DisorderSpec() = default;
    DisorderSpec(double w, uint64_t s) : width(w), seed(s) {
        if (w < 0.0 || w >= 1.0)
            throw std::invalid_argument("DisorderSpec: 0 <= w < 1 required");
    }
};

/// Draw per-site h and per-qubit delta from Uniform[mean(1-w), mean(1+w)].
inline ModelParams realize_disorder(const SystemGeometry& geom, const ModelParams& params,
                                    const DisorderSpec& spec) {
    ModelParams out = params;
    Rng rng(spec.seed);
    std::vector<double> hs(static_cast<size_t>(geom.L));
    for (auto& v : hs) v = rng.uniform(params.h * (1.0 - spec.width),
                                       params.h * (1.0 + spec.width));
    std::vector<double> ds(static_cast<size_t>(geom.n_b));
    for (auto& v : ds) v = rng.uniform(params.delta * (1.0 - spec.width),
                                       params.delta * (1.0 + spec.width));
    out.h_fields = std::move(hs);
    out.delta_fields = std::move(ds);
    return out;
}

// -- compact (subsystem-space) builders --------------------------------------

/// H_c = -sum_i (J sx_i sx_{i+1} + h_i sz_i), periodic, on the 2^L charger
/// space.  Real symmetric; built by direct basis iteration.
inline RMat charger_hamiltonian_compact(const SystemGeometry& geom,
                                        const ModelParams& params) {
    params.validate(geom);
    const Eigen::Index dim = geom.charger_dim();
    RMat hc = RMat::Zero(dim, dim);
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        double diag = 0.0;
        for (int i = 1; i <= geom.L; ++i) {
            const bool one = (idx >> geom.charger_bit(i)) & 1;
            diag += params.h_at(i) * (one ? -1.0 : 1.0);
        }
        hc(idx, idx) -= diag;
        for (int i = 1; i <= geom.L; ++i) {
            const int j = (i % geom.L) + 1;  // periodic neighbor
            const Eigen::Index mask = (Eigen::Index(1) << geom.charger_bit(i)) |
                                      (Eigen::Index(1) << geom.charger_bit(j));
            hc(idx ^ mask, idx) -= params.J;
        }
    }
    return hc;
}

/// Diagonal of H_b = -(1/2) sum_j delta_j Sz_j on the 2^n_b battery space.
inline RVec battery_hamiltonian_diagonal(const SystemGeometry& geom,
                                         const ModelParams& params) {
    params.validate(geom);
    RVec diag = RVec::Zero(geom.battery_dim());
    for (Eigen::Index b = 0; b < geom.battery_dim(); ++b) {
        double e = 0.0;
        for (int j = 1; j <= geom.n_b; ++j) {
            const bool one = (b >> geom.battery_bit(j)) & 1;
            e += params.delta_at(j) * (one ? -1.0 : 1.0);
        }
        diag[b] = -0.5 * e;
    }
    return diag;
}

// -- full-space builders (dense, identity on the untouched factors) ----------

inline Mat build_charger_hamiltonian(const SystemGeometry& geom,
                                     const ModelParams& params) {
    RMat hc = charger_hamiltonian_compact(geom, params);
    const Eigen::Index nb = geom.battery_dim();
    Mat h = Mat::Zero(geom.dim(), geom.dim());
    for (Eigen::Index r = 0; r < hc.rows(); ++r)
        for (Eigen::Index c = 0; c < hc.cols(); ++c)
            if (hc(r, c) != 0.0)
                for (Eigen::Index b = 0; b < nb; ++b)
                    h(r * nb + b, c * nb + b) = hc(r, c);
    return h;
}

inline Mat build_battery_hamiltonian(const SystemGeometry& geom,
                                     const ModelParams& params) {
    RVec hb = battery_hamiltonian_diagonal(geom, params);
    const Eigen::Index nb = geom.battery_dim();
    Vec diag(geom.dim());
    for (Eigen::Index idx = 0; idx < geom.dim(); ++idx) diag[idx] = hb[idx % nb];
    return Mat(diag.asDiagonal());
}

/// V_cb = -kappa sum_i sx_{1+(i-1)d} Sx_i.  The summands act on disjoint
/// factor pairs and therefore commute; this is asserted at build time.
inline Mat build_interaction(const SystemGeometry& geom, const ModelParams& params) {
    params.validate(geom);
    Mat v = Mat::Zero(geom.dim(), geom.dim());
    for (int i = 1; i <= geom.n_b; ++i) {
        const Eigen::Index mask =
            (Eigen::Index(1) << geom.bit_of_factor(geom.coupled_site(i))) |
            (Eigen::Index(1) << geom.bit_of_factor(geom.L + i));
        for (Eigen::Index idx = 0; idx < geom.dim(); ++idx)
            v(idx ^ mask, idx) -= params.kappa;
    }
    for (int i = 1; i < geom.n_b; ++i)
        for (int j = i + 1; j <= geom.n_b; ++j)
            if (geom.coupled_site(i) == geom.coupled_site(j))
                throw std::logic_error("build_interaction: coupled sites collide");
    return v;
}

/// H_b diagonal embedded over the full space (as a vector).
inline RVec total_battery_diagonal(const SystemGeometry& geom, const ModelParams& params) {
    RVec hb = battery_hamiltonian_diagonal(geom, params);
    RVec diag(geom.dim());
    for (Eigen::Index idx = 0; idx < geom.dim(); ++idx)
        diag[idx] = hb[idx % geom.battery_dim()];
    return diag;
}

/// Dense real H = H_c + H_b + V_cb on the full space (variance tracking).
inline RMat total_hamiltonian_dense(const SystemGeometry& geom, const ModelParams& params) {
    RMat hc = charger_hamiltonian_compact(geom, params);
    const Eigen::Index nb = geom.battery_dim();
    RMat h = RMat::Zero(geom.dim(), geom.dim());
    for (Eigen::Index r = 0; r < hc.rows(); ++r)
        for (Eigen::Index c = 0; c < hc.cols(); ++c)
            if (hc(r, c) != 0.0)
                for (Eigen::Index b = 0; b < nb; ++b)
                    h(r * nb + b, c * nb + b) += hc(r, c);
    h.diagonal() += total_battery_diagonal(geom, params);
    for (int i = 1; i <= geom.n_b; ++i) {
        const Eigen::Index mask =
            (Eigen::Index(1) << geom.bit_of_factor(geom.coupled_site(i))) |
            (Eigen::Index(1) << geom.bit_of_factor(geom.L + i));
        for (Eigen::Index idx = 0; idx < geom.dim(); ++idx)
            h(idx ^ mask, idx) -= params.kappa;
    }
    return h;
}

/// Charger ground state on the 2^L space.  At a degenerate ground level the
/// even-parity combination is selected (the h=0 cat state); otherwise the
/// unique lowest eigenvector with its largest-magnitude amplitude made real
/// positive.
inline RVec charger_ground_state(const SystemGeometry& geom, const ModelParams& params) {
    RMat hc = charger_hamiltonian_compact(geom, params);
    RVec w;
    RMat v;
    eig_symmetric(hc, w, v);
    RVec ground;
    if (hc.rows() > 1 && w[1] - w[0] < 1e-10) {
        // Project the two-dimensional ground space onto even charger parity.
        RVec par(hc.rows());
        for (Eigen::Index idx = 0; idx < hc.rows(); ++idx)
            par[idx] = (std::popcount(static_cast<uint64_t>(idx)) % 2 == 0) ? 1.0 : -1.0;
        Eigen::Matrix2d pblock;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                pblock(a, b) = v.col(a).dot(par.asDiagonal() * v.col(b));
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(pblock);
        Eigen::Vector2d coeff = es.eigenvectors().col(1);  // +1 eigenvector
        ground = coeff[0] * v.col(0) + coeff[1] * v.col(1);
    } else {
        ground = v.col(0);
    }
    Eigen::Index imax;
    ground.cwiseAbs().maxCoeff(&imax);
    if (ground[imax] < 0.0) ground = -ground;
    ground /= ground.norm();
    return ground;
}

/// (charger ground state) x |00...0>, as a full-space state vector.
inline Vec initial_state(const SystemGeometry& geom, const ModelParams& params) {
    RVec g = charger_ground_state(geom, params);
    Vec psi = Vec::Zero(geom.dim());
    const Eigen::Index nb = geom.battery_dim();
    for (Eigen::Index c = 0; c < geom.charger_dim(); ++c) psi[c * nb] = g[c];
    return psi;
}

}  // namespace qb

#endif  // QBATTERY_MODEL_HPP
