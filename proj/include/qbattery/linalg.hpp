#ifndef QBATTERY_LINALG_HPP
#define QBATTERY_LINALG_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>
#include <cmath>

#include <lapacke.h>

namespace qb {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;

/// Thrown when an eigen/linear solve fails or a numerical invariant breaks.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline lapack_complex_double* lp(cxd* p) {
    return reinterpret_cast<lapack_complex_double*>(p);
}

struct HermitianEigen {
    RVec values;   // ascending
    Mat vectors;   // columns
};

/// Eigendecomposition of a real symmetric matrix (LAPACK dsyevd).
inline void eig_symmetric(const RMat& a, RVec& values, RMat& vectors) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    vectors = a;
    values.resize(n);
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                     vectors.data(), n, values.data());
    if (info != 0)
        throw NumericalError("dsyevd failed, info=" + std::to_string(info));
}

/// Eigendecomposition of a complex Hermitian matrix. Matrices that are
/// numerically real take the dsyevd fast path.
inline HermitianEigen eig_hermitian(const Mat& a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    HermitianEigen out;
    if (a.imag().cwiseAbs().maxCoeff() < 1e-14) {
        RVec w;
        RMat v;
        eig_symmetric(a.real(), w, v);
        out.values = std::move(w);
        out.vectors = v.cast<cxd>();
        return out;
    }
    Mat work = a;
    out.values.resize(n);
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                     lp(work.data()), n, out.values.data());
    if (info != 0)
        throw NumericalError("zheevd failed, info=" + std::to_string(info));
    out.vectors = std::move(work);
    return out;
}

/// Eigenvalues only of a complex Hermitian matrix.
inline RVec eigvals_hermitian(Mat a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    RVec w(n);
    lapack_int info =
        LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, lp(a.data()), n, w.data());
    if (info != 0)
        throw NumericalError("zheevd failed, info=" + std::to_string(info));
    return w;
}

/// Solve A X = B in place (LAPACK zgesv). B is overwritten with X.
inline void solve_inplace(Mat& a, Mat& b) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    const lapack_int nrhs = static_cast<lapack_int>(b.cols());
    std::vector<lapack_int> ipiv(n);
    lapack_int info = LAPACKE_zgesv(LAPACK_COL_MAJOR, n, nrhs, lp(a.data()), n,
                                    ipiv.data(), lp(b.data()), n);
    if (info != 0)
        throw NumericalError("zgesv failed, info=" + std::to_string(info));
}

namespace detail {

// C = i (I - U') (I + U')^{-1} with U' = e^{-i theta} U.  For unitary U this
// Cayley transform is Hermitian with eigenvalues tan(phi'/2), phi' in (-pi,pi),
// sharing the eigenvectors of U.  Phase recovery: phi = 2 atan(c) + theta.
inline Mat cayley(const Mat& u, double theta) {
    const auto n = u.rows();
    Mat up = std::exp(cxd(0.0, -theta)) * u;
    Mat a = Mat::Identity(n, n) + up;
    Mat b = cxd(0.0, 1.0) * (Mat::Identity(n, n) - up);
    solve_inplace(a, b);
    return 0.5 * (b + b.adjoint());  // symmetrize rounding noise
}

inline double wrap_2pi(double phi) {
    phi = std::fmod(phi, 2.0 * kPi);
    if (phi < 0.0) phi += 2.0 * kPi;
    if (phi >= 2.0 * kPi) phi = 0.0;
    return phi;
}

// Midpoint of the largest circular gap in a sorted phase list; the branch
// point pi + theta is moved there before the definitive solve.
inline double safest_theta(const RVec& phases_sorted) {
    const auto n = phases_sorted.size();
    if (n == 0) return 0.0;
    double best_gap = -1.0, best_mid = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double lo = phases_sorted[i];
        double hi = (i + 1 < n) ? phases_sorted[i + 1] : phases_sorted[0] + 2.0 * kPi;
        if (hi - lo > best_gap) {
            best_gap = hi - lo;
            best_mid = 0.5 * (lo + hi);
        }
    }
    return wrap_2pi(best_mid + kPi);  // phi = pi + theta at the gap midpoint
}

}  // namespace detail

/// Quasi-energy phases of a unitary matrix, sorted ascending in [0, 2pi).
/// Two-pass Cayley transform: a first values-only solve locates the spectrum,
/// the branch point is then moved into the largest spectral gap.
inline RVec unitary_eigenphases(const Mat& u) {
    const auto n = u.rows();
    double theta = 0.5772156649;  // arbitrary first guess
    RVec c = eigvals_hermitian(detail::cayley(u, theta));
    RVec phases(n);
    for (Eigen::Index i = 0; i < n; ++i)
        phases[i] = detail::wrap_2pi(2.0 * std::atan(c[i]) + theta);
    std::sort(phases.data(), phases.data() + n);
    if (c.cwiseAbs().maxCoeff() > 1e6) {  // spectrum too close to the branch point
        theta = detail::safest_theta(phases);
        c = eigvals_hermitian(detail::cayley(u, theta));
        for (Eigen::Index i = 0; i < n; ++i)
            phases[i] = detail::wrap_2pi(2.0 * std::atan(c[i]) + theta);
        std::sort(phases.data(), phases.data() + n);
    }
    return phases;
}

struct UnitaryEigen {
    RVec phases;   // ascending, in [0, 2pi)
    Mat vectors;   // matching columns, orthonormal
};

/// Phases and eigenvectors of a unitary matrix.
inline UnitaryEigen unitary_eigensystem(const Mat& u) {
    RVec probe = unitary_eigenphases(u);
    double theta = detail::safest_theta(probe);
    HermitianEigen he = eig_hermitian(detail::cayley(u, theta));
    const auto n = u.rows();
    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    RVec phases(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        phases[i] = detail::wrap_2pi(2.0 * std::atan(he.values[i]) + theta);
        order[static_cast<size_t>(i)] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return phases[a] < phases[b]; });
    UnitaryEigen out;
    out.phases.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.phases[i] = phases[order[static_cast<size_t>(i)]];
        out.vectors.col(i) = he.vectors.col(order[static_cast<size_t>(i)]);
    }
    return out;
}

inline bool is_hermitian(const Mat& a, double tol = 1e-12) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary(const Mat& u, double tol = 1e-10) {
    Mat g = u.adjoint() * u;
    return (g - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace qb

#endif  // QBATTERY_LINALG_HPP
