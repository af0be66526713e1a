#ifndef QBATTERY_SPIN_CORE_HPP
#define QBATTERY_SPIN_CORE_HPP

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbattery/linalg.hpp"

namespace qb {

// Tensor-factor convention (fixed, big-endian): factor k = 1..L+n_b maps to
// bit (L+n_b-k) of the basis-state index, so factor 1 is the most significant
// bit.  Charger sites are factors 1..L (high bits), battery qubits are factors
// L+1..L+n_b (low bits); a full index decomposes as idx = c * 2^n_b + b.
// Bit value 0 encodes |0> with sigma_z = +1, bit value 1 encodes |1>.

enum class PauliAxis { X, Y, Z };

struct SystemGeometry {
    int L;        // charger sites
    int n_b;      // battery qubits
    int d;        // spacing between coupled charger sites

    SystemGeometry(int L_, int n_b_, int d_ = 0) : L(L_), n_b(n_b_), d(d_) {
        if (L < 1 || n_b < 0)
            throw std::invalid_argument("SystemGeometry: L >= 1 and n_b >= 0 required");
        if (d == 0) d = (n_b > 0) ? std::max(1, L / n_b) : 1;
        if (n_b > 0) {
            int last = 1 + (n_b - 1) * d;
            if (d < 1 || last > L)
                throw std::invalid_argument(
                    "SystemGeometry: coupled site 1+(i-1)d exceeds L");
        }
    }

    int factors() const { return L + n_b; }
    Eigen::Index dim() const { return Eigen::Index(1) << factors(); }
    Eigen::Index charger_dim() const { return Eigen::Index(1) << L; }
    Eigen::Index battery_dim() const { return Eigen::Index(1) << n_b; }

    /// Charger site coupled to battery qubit i (1-based).
    int coupled_site(int i) const { return 1 + (i - 1) * d; }

    /// Bit position of tensor factor k within the full index.
    int bit_of_factor(int k) const { return factors() - k; }
    /// Bit position of battery qubit j within the battery index.
    int battery_bit(int j) const { return n_b - j; }
    /// Bit position of charger site i within the charger index.
    int charger_bit(int i) const { return L - i; }
};

namespace detail {

/// Apply a single-factor Pauli into a dense matrix acting on a 2^n space,
/// where the factor occupies bit `bit` of the index.
inline Mat pauli_on_bit(Eigen::Index dim, int bit, PauliAxis axis) {
    Mat op = Mat::Zero(dim, dim);
    const Eigen::Index mask = Eigen::Index(1) << bit;
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        const bool one = (idx & mask) != 0;
        switch (axis) {
            case PauliAxis::X:
                op(idx ^ mask, idx) = 1.0;
                break;
            case PauliAxis::Y:
                // <1|sy|0> = i, <0|sy|1> = -i
                op(idx ^ mask, idx) = one ? cxd(0, -1) : cxd(0, 1);
                break;
            case PauliAxis::Z:
                op(idx, idx) = one ? -1.0 : 1.0;
                break;
        }
    }
    return op;
}

}  // namespace detail

/// Pauli on one tensor factor of the full charger+battery space, identity
/// elsewhere.  factor_index is 1-based over 1..L+n_b.
inline Mat embed_pauli(const SystemGeometry& geom, PauliAxis axis, int factor_index) {
    if (factor_index < 1 || factor_index > geom.factors())
        throw std::invalid_argument("embed_pauli: factor index out of range");
    return detail::pauli_on_bit(geom.dim(), geom.bit_of_factor(factor_index), axis);
}

/// Pauli acting on the charger space alone (dimension 2^L), site 1..L.
inline Mat charger_pauli(const SystemGeometry& geom, PauliAxis axis, int site) {
    if (site < 1 || site > geom.L)
        throw std::invalid_argument("charger_pauli: site out of range");
    return detail::pauli_on_bit(geom.charger_dim(), geom.charger_bit(site), axis);
}

/// Pauli acting on the battery space alone (dimension 2^n_b), qubit 1..n_b.
inline Mat battery_pauli(const SystemGeometry& geom, PauliAxis axis, int qubit) {
    if (qubit < 1 || qubit > geom.n_b)
        throw std::invalid_argument("battery_pauli: qubit out of range");
    return detail::pauli_on_bit(geom.battery_dim(), geom.battery_bit(qubit), axis);
}

/// Reduced density matrix of the battery, tracing out the charger.
inline Mat partial_trace_battery(const Vec& psi, const SystemGeometry& geom) {
    if (psi.size() != geom.dim())
        throw std::invalid_argument("partial_trace_battery: dimension mismatch");
    const Eigen::Index nb = geom.battery_dim();
    // Row c of M holds the battery amplitudes for charger index c.
    Eigen::Map<const Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        m(psi.data(), geom.charger_dim(), nb);
    Mat rho = m.transpose() * m.conjugate();
    return rho;
}

inline Mat partial_trace_battery(const Mat& rho_full, const SystemGeometry& geom) {
    if (rho_full.rows() != geom.dim() || rho_full.cols() != geom.dim())
        throw std::invalid_argument("partial_trace_battery: dimension mismatch");
    const Eigen::Index nb = geom.battery_dim();
    Mat rho = Mat::Zero(nb, nb);
    for (Eigen::Index c = 0; c < geom.charger_dim(); ++c)
        rho += rho_full.block(c * nb, c * nb, nb, nb);
    return rho;
}

/// Reduced density matrix of the charger, tracing out the battery.
inline Mat partial_trace_charger(const Vec& psi, const SystemGeometry& geom) {
    if (psi.size() != geom.dim())
        throw std::invalid_argument("partial_trace_charger: dimension mismatch");
    Eigen::Map<const Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        m(psi.data(), geom.charger_dim(), geom.battery_dim());
    return m * m.adjoint();
}

/// Diagonal of the total parity operator P = prod sigma_z x prod Sigma_z.
inline RVec parity_diagonal(const SystemGeometry& geom) {
    RVec diag(geom.dim());
    for (Eigen::Index idx = 0; idx < geom.dim(); ++idx)
        diag[idx] = (std::popcount(static_cast<uint64_t>(idx)) % 2 == 0) ? 1.0 : -1.0;
    return diag;
}

inline Mat parity_operator(const SystemGeometry& geom) {
    return parity_diagonal(geom).cast<cxd>().asDiagonal();
}

enum class ParitySector { Even, Odd };

/// Basis indices spanning the requested parity eigenspace.
inline std::vector<Eigen::Index> parity_sector_indices(const SystemGeometry& geom,
                                                       ParitySector sector) {
    std::vector<Eigen::Index> idxs;
    idxs.reserve(static_cast<size_t>(geom.dim() / 2));
    const int want = (sector == ParitySector::Even) ? 0 : 1;
    for (Eigen::Index idx = 0; idx < geom.dim(); ++idx)
        if (std::popcount(static_cast<uint64_t>(idx)) % 2 == want)
            idxs.push_back(idx);
    return idxs;
}

/// Isometry whose columns are the computational basis vectors of the sector.
inline Mat parity_sector_isometry(const SystemGeometry& geom, ParitySector sector) {
    auto idxs = parity_sector_indices(geom, sector);
    Mat v = Mat::Zero(geom.dim(), static_cast<Eigen::Index>(idxs.size()));
    for (size_t c = 0; c < idxs.size(); ++c) v(idxs[c], static_cast<Eigen::Index>(c)) = 1.0;
    return v;
}

// -- state / operator validity helpers ---------------------------------------

inline bool is_normalized(const Vec& psi, double tol = 1e-12) {
    return std::abs(psi.norm() - 1.0) <= tol;
}

inline bool is_density_matrix(const Mat& rho, double herm_tol = 1e-12,
                              double trace_tol = 1e-12, double eig_tol = 1e-10) {
    if (!is_hermitian(rho, herm_tol)) return false;
    if (std::abs(rho.trace().real() - 1.0) > trace_tol ||
        std::abs(rho.trace().imag()) > trace_tol)
        return false;
    RVec w = eigvals_hermitian(rho);
    return w.minCoeff() >= -eig_tol;
}

inline double linear_entropy(const Mat& rho) {
    return 1.0 - (rho * rho).trace().real();
}

}  // namespace qb

#endif  // QBATTERY_SPIN_CORE_HPP
