#include <catch_amalgamated.hpp>

#include "qbattery/qfi.hpp"
#include "qbattery/observables.hpp"

using namespace qb;

namespace {

Vec random_state(Eigen::Index dim, Rng& rng) {
    Vec psi(dim);
    for (Eigen::Index i = 0; i < dim; ++i) psi[i] = cxd(rng.normal(), rng.normal());
    psi /= psi.norm();
    return psi;
}

// Independent pure-state oracle: 4x the symmetrized covariance matrix of the
// collective spin components; its top eigenvalue is the direction-optimized
// quantum Fisher information.
GammaMatrix pure_state_gamma(const Vec& psi, const SystemGeometry& geom) {
    Mat s[3];
    for (int a = 0; a < 3; ++a) s[a] = collective_spin(geom, static_cast<PauliAxis>(a));
    GammaMatrix cov;
    for (int a = 0; a < 3; ++a) {
        const Vec sa = s[a] * psi;
        for (int b = 0; b < 3; ++b) {
            const Vec sb = s[b] * psi;
            const double mean_ab = sa.dot(sb).real();  // Re<psi|S^a S^b|psi>
            cov(a, b) = mean_ab - psi.dot(sa).real() * psi.dot(sb).real();
        }
    }
    return 4.0 * 0.5 * (cov + cov.transpose());
}

// Secondary oracle: brute-force maximization of 4 var(S . n) over a sphere grid.
double sphere_grid_max_variance(const Vec& psi, const SystemGeometry& geom, int grid) {
    Mat s[3];
    for (int a = 0; a < 3; ++a) s[a] = collective_spin(geom, static_cast<PauliAxis>(a));
    double best = 0.0;
    for (int it = 0; it <= grid; ++it) {
        const double theta = kPi * it / grid;
        for (int ip = 0; ip < 2 * grid; ++ip) {
            const double phi = kPi * ip / grid;
            Mat sn = std::sin(theta) * std::cos(phi) * s[0] +
                     std::sin(theta) * std::sin(phi) * s[1] + std::cos(theta) * s[2];
            const Vec w = sn * psi;
            const double mu = psi.dot(w).real();
            best = std::max(best, 4.0 * (w.squaredNorm() - mu * mu));
        }
    }
    return best;
}

Vec ghz_state(const SystemGeometry& geom) {
    Vec psi = Vec::Zero(geom.battery_dim());
    psi[0] = 1.0 / std::sqrt(2.0);
    psi[geom.battery_dim() - 1] = 1.0 / std::sqrt(2.0);
    return psi;
}

}  // namespace

TEST_CASE("rho_spectral") {
    SECTION("valid mixed state decomposes and renormalizes") {
        Mat rho = Mat::Zero(2, 2);
        rho(0, 0) = 0.75;
        rho(1, 1) = 0.25;
        RhoSpectrum s = rho_spectral(rho);
        REQUIRE(std::abs(s.values.sum() - 1.0) < 1e-14);
        REQUIRE(std::abs(s.values[1] - 0.75) < 1e-14);
    }
    SECTION("roundoff negatives are clipped with tiny trace change") {
        Mat rho = Mat::Zero(2, 2);
        rho(0, 0) = 1.0 + 1e-12;
        rho(1, 1) = -1e-12;
        RhoSpectrum s = rho_spectral(rho);
        REQUIRE(s.values.minCoeff() >= 0.0);
        REQUIRE(std::abs(s.values.sum() - 1.0) < 1e-9);
    }
    SECTION("genuinely negative spectrum rejected") {
        Mat rho = Mat::Zero(2, 2);
        rho(0, 0) = 1.1;
        rho(1, 1) = -0.1;
        REQUIRE_THROWS_AS(rho_spectral(rho), std::invalid_argument);
    }
}

TEST_CASE("collective spin algebra") {
    SystemGeometry geom(3, 3, 1);
    Mat sx = collective_spin(geom, PauliAxis::X);
    Mat sy = collective_spin(geom, PauliAxis::Y);
    Mat sz = collective_spin(geom, PauliAxis::Z);
    REQUIRE((sx * sy - sy * sx - cxd(0, 1) * sz).cwiseAbs().maxCoeff() < 1e-13);
    REQUIRE(is_hermitian(sx, 1e-14));
    // all-|0> is the top S^z eigenstate with eigenvalue n_b/2
    Vec e0 = Vec::Zero(geom.battery_dim());
    e0[0] = 1.0;
    REQUIRE((sz * e0 - 0.5 * geom.n_b * e0).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("known states") {
    for (int nb : {2, 3, 4}) {
        SystemGeometry geom(nb, nb, 1);
        SECTION("GHZ reaches n_b^2 for n_b = " + std::to_string(nb)) {
            Vec psi = ghz_state(geom);
            Mat rho = psi * psi.adjoint();
            GammaMatrix g = gamma_matrix(rho, geom);
            QfiWitness w = qfi_witness(g, nb);
            REQUIRE(std::abs(w.lambda_max - double(nb) * nb) < 1e-8);
            REQUIRE(w.is_multipartite);
            // oracle agreement, matrix-wise and via the sphere grid
            GammaMatrix oracle = pure_state_gamma(psi, geom);
            REQUIRE((g - oracle).cwiseAbs().maxCoeff() < 1e-8);
            REQUIRE(sphere_grid_max_variance(psi, geom, 60) <= w.lambda_max + 1e-8);
        }
        SECTION("product state sits at n_b for n_b = " + std::to_string(nb)) {
            Vec psi = Vec::Zero(geom.battery_dim());
            psi[0] = 1.0;
            GammaMatrix g = gamma_matrix(Mat(psi * psi.adjoint()), geom);
            QfiWitness w = qfi_witness(g, nb);
            REQUIRE(std::abs(w.lambda_max - double(nb)) < 1e-8);
            REQUIRE_FALSE(w.is_multipartite);
            REQUIRE((g - pure_state_gamma(psi, geom)).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("random pure states match the covariance oracle") {
    Rng rng(19);
    SystemGeometry geom(3, 3, 1);
    for (int iter = 0; iter < 50; ++iter) {
        Vec psi = random_state(geom.battery_dim(), rng);
        GammaMatrix g = gamma_matrix(Mat(psi * psi.adjoint()), geom);
        GammaMatrix oracle = pure_state_gamma(psi, geom);
        REQUIRE((g - oracle).cwiseAbs().maxCoeff() < 1e-8);
        const double grid = sphere_grid_max_variance(psi, geom, 40);
        const double lmax = qfi_witness(g, geom.n_b).lambda_max;
        REQUIRE(grid <= lmax + 1e-8);
        REQUIRE(grid > 0.9 * lmax);  // the coarse grid comes close to the top
    }
}

TEST_CASE("maximally mixed state carries no information") {
    SystemGeometry geom(2, 2, 1);
    Mat rho = 0.25 * Mat::Identity(4, 4);
    GammaMatrix g = gamma_matrix(rho, geom);
    REQUIRE(g.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("separable mixtures stay below the witness") {
    Rng rng(53);
    SystemGeometry geom(3, 3, 1);
    for (int iter = 0; iter < 200; ++iter) {
        // mixture of random product states over the three battery qubits
        Mat rho = Mat::Zero(geom.battery_dim(), geom.battery_dim());
        const int terms = 1 + int(rng.uniform() * 4);
        RVec weights(terms);
        for (int t = 0; t < terms; ++t) weights[t] = rng.uniform();
        weights /= weights.sum();
        for (int t = 0; t < terms; ++t) {
            Vec prod = Vec::Ones(1);
            for (int q = 0; q < geom.n_b; ++q) {
                Vec one = random_state(2, rng);
                Vec next(prod.size() * 2);
                for (Eigen::Index i = 0; i < prod.size(); ++i) {
                    next[2 * i] = prod[i] * one[0];
                    next[2 * i + 1] = prod[i] * one[1];
                }
                prod = next;
            }
            rho += weights[t] * (prod * prod.adjoint());
        }
        QfiWitness w = qfi_witness(gamma_matrix(rho, geom), geom.n_b);
        REQUIRE(w.lambda_max <= geom.n_b + 1e-8);
        REQUIRE_FALSE(w.is_multipartite);
    }
}

TEST_CASE("simulation RDMs give PSD Gamma within physical bounds") {
    SystemGeometry geom(4, 2, 2);
    ModelParams p;
    p.h = 0.6;
    p.kappa = 1.4;
    p.delta = 1.0;
    p.tau = 0.7;
    FloquetOperator fop = build_floquet(geom, p);
    Trajectory traj = evolve(fop, initial_state(geom, p), 40);
    QfiSeries series = qfi_over_trajectory(traj, geom);
    REQUIRE(series.lambda_max.size() == 41);
    for (size_t n = 0; n < traj.rdm.size(); ++n) {
        GammaMatrix g = gamma_matrix(traj.rdm[n], geom);
        Eigen::SelfAdjointEigenSolver<GammaMatrix> es(g);
        REQUIRE(es.eigenvalues().minCoeff() > -1e-10);
        REQUIRE(series.lambda_max[n] >= -1e-10);
        REQUIRE(series.lambda_max[n] <= double(geom.n_b) * geom.n_b + 1e-8);
    }
    REQUIRE(series.max_value ==
            *std::max_element(series.lambda_max.begin(), series.lambda_max.end()));
    REQUIRE(series.lambda_max[size_t(series.argmax_kick)] == series.max_value);
}

TEST_CASE("gamma_matrix validates dimensions") {
    SystemGeometry geom(2, 2, 1);
    Mat wrong = 0.5 * Mat::Identity(2, 2);
    REQUIRE_THROWS_AS(gamma_matrix(wrong, geom), std::invalid_argument);
}
