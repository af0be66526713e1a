// Acceptance suite: one pass/fail line per criterion, pinned tolerances.
// Returns the number of failed criteria as the exit code.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qbattery/experiments.hpp"

using namespace qb;

namespace {

int g_failures = 0;

class Criterion {
public:
    Criterion(int number, std::string title)
        : number_(number), title_(std::move(title)), start_(clock_t::now()) {}

    void detail(const std::string& line) { details_.push_back(line); }

    void finish(bool ok, const std::string& reason = "") {
        const double secs =
            std::chrono::duration<double>(clock_t::now() - start_).count();
        std::printf("[%s] criterion %d: %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL",
                    number_, title_.c_str(), secs, reason.empty() ? "" : " -- ",
                    reason.c_str());
        for (const auto& d : details_) std::printf("       %s\n", d.c_str());
        std::fflush(stdout);
        if (!ok) ++g_failures;
    }

private:
    using clock_t = std::chrono::steady_clock;
    int number_;
    std::string title_;
    clock_t::time_point start_;
    std::vector<std::string> details_;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), f, a, b, c);
    return buf;
}

Vec random_state(Eigen::Index dim, Rng& rng) {
    Vec psi(dim);
    for (Eigen::Index i = 0; i < dim; ++i) psi[i] = cxd(rng.normal(), rng.normal());
    psi /= psi.norm();
    return psi;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// -- criterion 1: closed-form equivalence at h=0 ------------------------------

void criterion1() {
    Criterion c(1, "closed-form equivalence for h=0, n_b=1 (1e-9, n <= 100)");
    bool ok = true;
    double worst = 0.0;
    for (int L : {2, 4, 6}) {
        for (double kt : {kPi / 20, kPi / 8, kPi / 4, kPi / 2 - 0.1}) {
            SystemGeometry geom(L, 1);
            ModelParams p;
            p.h = 0.0;
            p.kappa = 1.0;
            p.tau = kt;
            const DynamicsResult res = dynamics_run(geom, p, 100, false);
            for (int n = 0; n <= 100; ++n) {
                worst = std::max(worst, std::abs(res.traj.energy[size_t(n)] -
                                                 res.e_analytic[size_t(n)]));
                worst = std::max(
                    worst, std::abs(res.report.ergotropy_series[size_t(n)] -
                                    res.xi_analytic[size_t(n)]));
                worst = std::max(
                    worst, std::abs(res.report.linear_entropy_series[size_t(n)] -
                                    res.sl_analytic[size_t(n)]));
            }
        }
    }
    ok = worst < 1e-9;
    c.detail(fmt("max |simulated - closed form| over E, ergotropy, S_L: %.2e", worst));
    c.finish(ok);
}

// -- criterion 2: weak-field agreement and near-full charging -----------------

void criterion2() {
    Criterion c(2, "weak-field dynamics tracks the closed form within 0.05 delta");
    SystemGeometry geom(6, 1);
    ModelParams p;
    p.h = 0.1;
    p.kappa = 6.0;
    p.tau = kPi / 20;
    const DynamicsResult res = dynamics_run(geom, p, 100, false);
    double worst = 0.0, best_e = 0.0, xi_at_best = 0.0;
    bool peak_ok = false;
    for (int n = 0; n <= 100; ++n) {
        worst = std::max(worst,
                         std::abs(res.traj.energy[size_t(n)] - res.e_analytic[size_t(n)]));
        const double e = res.traj.energy[size_t(n)];
        if (e > best_e) {
            best_e = e;
            xi_at_best = res.report.ergotropy_series[size_t(n)];
        }
        if (e >= 0.95 * p.delta && res.report.ergotropy_series[size_t(n)] >= 0.9 * p.delta)
            peak_ok = true;
    }
    c.detail(fmt("max deviation %.4f (tolerance 0.05); peak E %.4f with ergotropy %.4f",
                 worst, best_e, xi_at_best));
    c.finish(worst < 0.05 * p.delta && best_e >= 0.95 * p.delta && peak_ok);
}

// -- criterion 3: random-matrix limits ----------------------------------------

void criterion3() {
    Criterion c(3, "RMT limits: COE 0.53, Poisson 0.386, model scan chaotic/regular");
    Rng rng(2024);
    const double r_coe = ratio_statistic(unitary_eigenphases(sample_coe(4096, rng)));
    double r_poisson = 0.0;
    for (int k = 0; k < 4; ++k)
        r_poisson += ratio_statistic(sample_poisson_phases(4096, rng));
    r_poisson /= 4.0;

    SystemGeometry geom(8, 3, 0);
    ModelParams p;
    p.J = 1.0;
    p.h = 1.0;
    p.kappa = 1.0;
    p.delta = 1.0;
    p.tau = kPi / 4;
    const auto rows = scan_ratio(geom, p, ScanAxis::H, {0.05, 1.0},
                                 DisorderSpec(0.1, 424242), 20, 1);
    const double r_regular = rows[0].r_mean, r_chaotic = rows[1].r_mean;
    c.detail(fmt("COE 4096: %.4f (0.53 +- 0.01)", r_coe));
    c.detail(fmt("Poisson 4096: %.4f (0.386 +- 0.01)", r_poisson));
    c.detail(fmt("model scan, 20 realizations: h=1 -> %.4f (in [0.50, 0.56]), "
                 "h=0.05 -> %.4f (<= 0.45)",
                 r_chaotic, r_regular));
    c.finish(std::abs(r_coe - 0.53) <= 0.01 && std::abs(r_poisson - 0.386) <= 0.01 &&
             r_chaotic >= 0.50 && r_chaotic <= 0.56 && r_regular <= 0.45);
}

// -- criterion 4: decoupling dip at kappa = 2 ---------------------------------

void criterion4() {
    Criterion c(4, "spacing-ratio dip at kappa = 2");
    SystemGeometry geom(8, 3, 0);
    ModelParams p;
    p.J = 1.0;
    p.h = 1.0;
    p.kappa = 1.0;
    p.delta = 1.0;
    p.tau = kPi / 4;
    const auto rows = scan_ratio(geom, p, ScanAxis::Kappa, {1.6, 2.0, 2.4},
                                 DisorderSpec(0.1, 31337), 20, 1);
    const double left = rows[0].r_mean, dip = rows[1].r_mean, right = rows[2].r_mean;
    c.detail(fmt("kappa 1.6 -> %.4f, 2.0 -> %.4f, 2.4 -> %.4f", left, dip, right));
    c.finish(dip <= left - 0.05 && dip <= right - 0.05);
}

// -- criterion 5: stability table ---------------------------------------------

void criterion5() {
    Criterion c(5, "stability sigma/mu table for L + n_b = 13");
    const double targets[] = {0.07, 0.07, 0.05, 0.04, 0.03, 0.03};
    bool ok = true;
    for (int nb = 1; nb <= 6; ++nb) {
        SystemGeometry geom(13 - nb, nb, 0);
        ModelParams p;
        p.J = 1.0;
        p.h = 1.0;
        p.kappa = 1.0;
        p.delta = 1.0;
        p.tau = kPi / 4;
        const DynamicsResult res = dynamics_run(geom, p, 250, false);
        const double s = res.report.stability;
        const bool here = !res.report.never_charges && std::abs(s - targets[nb - 1]) <= 0.02;
        ok = ok && here;
        c.detail(fmt("n_b=%.0f: sigma/mu = %.4f (target %.2f +- 0.02)", double(nb), s,
                     targets[nb - 1]));
    }
    c.finish(ok);
}

// -- criterion 6: charging time and power advantage ---------------------------

void criterion6() {
    Criterion c(6, "charging time monotonicity and superlinear power at L = 6");
    std::vector<int> kicks;
    std::vector<double> p_over_nb, pbo_over_nb;
    bool bound_ok = true;
    for (int nb = 1; nb <= 6; ++nb) {
        SystemGeometry geom(6, nb, 0);
        ModelParams p;
        p.J = 1.0;
        p.h = 1.0;
        p.kappa = 1.0;
        p.delta = 1.0;
        p.tau = kPi / 4;
        const DynamicsResult res = dynamics_run(geom, p, 250, true);
        kicks.push_back(res.report.charging_kicks);
        p_over_nb.push_back(res.report.power_at_T / nb);
        pbo_over_nb.push_back(res.report.power_bound_at_T / nb);
        if (res.report.power_at_T > res.report.power_bound_at_T) bound_ok = false;
        // diagnostic: earliest kick within 5% of the window peak, to separate a
        // broad early plateau from a marginally higher late fluctuation peak
        double e_peak = 0.0;
        for (int n = 1; n <= 250; ++n)
            e_peak = std::max(e_peak, res.traj.energy[size_t(n)]);
        int m95 = 0;
        for (int n = 1; n <= 250; ++n)
            if (res.traj.energy[size_t(n)] >= 0.95 * e_peak) { m95 = n; break; }
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "n_b=%d: m=%d (m at 95%% of peak: %d), P/n_b = %.4f, P_bo/n_b = %.4f",
                      nb, res.report.charging_kicks, m95, res.report.power_at_T / nb,
                      res.report.power_bound_at_T / nb);
        c.detail(buf);
    }
    bool monotone = true;
    for (int i = 1; i < 4; ++i)
        if (kicks[size_t(i)] > kicks[size_t(i - 1)]) monotone = false;
    const bool superlinear = p_over_nb[3] > p_over_nb[0];
    double mean_bo = 0.0;
    for (double v : pbo_over_nb) mean_bo += v;
    mean_bo /= pbo_over_nb.size();
    bool bo_flat = true;
    for (double v : pbo_over_nb)
        if (std::abs(v - mean_bo) > 0.2 * mean_bo) bo_flat = false;
    c.detail(std::string("charging kicks non-increasing over n_b 1..4: ") +
             (monotone ? "yes" : "no") + "; P/n_b(4) > P/n_b(1): " +
             (superlinear ? "yes" : "no"));
    c.detail(std::string("P <= P_bo at every n_b: ") + (bound_ok ? "yes" : "no") +
             "; P_bo/n_b constant within 20%: " + (bo_flat ? "yes" : "no"));
    c.finish(monotone && superlinear && bound_ok && bo_flat);
}

// -- criterion 7: QFI witness over the Table-style grid -----------------------

void criterion7() {
    Criterion c(7, "QFI witness stays below n_b on all 20 configurations");
    // reference values quoted per (n_b, panel, tau) for the side-by-side report
    const double reference[5][4] = {{0.287, 0.047, 0.219, 0.191},
                                    {0.205, 0.082, 0.187, 0.410},
                                    {1.395, 0.278, 0.262, 1.202},
                                    {0.664, 2.942, 1.220, 0.587},
                                    {2.260, 4.655, 1.099, 1.531}};
    bool ok = true;

    // pure-state oracle checks
    for (int nb : {2, 3, 4}) {
        SystemGeometry geom(nb, nb, 1);
        Vec ghz = Vec::Zero(geom.battery_dim());
        ghz[0] = ghz[geom.battery_dim() - 1] = 1.0 / std::sqrt(2.0);
        const double l_ghz =
            qfi_witness(gamma_matrix(Mat(ghz * ghz.adjoint()), geom), nb).lambda_max;
        Vec prod = Vec::Zero(geom.battery_dim());
        prod[0] = 1.0;
        const double l_prod =
            qfi_witness(gamma_matrix(Mat(prod * prod.adjoint()), geom), nb).lambda_max;
        if (std::abs(l_ghz - double(nb) * nb) > 1e-8 || std::abs(l_prod - nb) > 1e-8)
            ok = false;
    }
    c.detail("GHZ -> n_b^2 and product -> n_b oracles at 1e-8: checked for n_b = 2..4");

    for (int nb = 2; nb <= 6; ++nb) {
        std::string line = "n_b=" + std::to_string(nb) + ":";
        int col = 0;
        for (int panel = 0; panel < 2; ++panel) {
            const int L = (panel == 0) ? 6 : 13 - nb;
            for (double tau : {kPi / 4, kPi / 4 + 0.1}) {
                SystemGeometry geom(L, nb, 0);
                ModelParams p;
                p.J = 1.0;
                p.h = 1.0;
                p.kappa = 1.0;
                p.delta = 1.0;
                p.tau = tau;
                const FloquetOperator fop = build_floquet(geom, p);
                const Trajectory traj = evolve(fop, initial_state(geom, p), 250);
                const QfiSeries q = qfi_over_trajectory(traj, geom);
                if (q.max_value >= double(nb)) ok = false;
                // the kick-0 product state sits exactly at the separable bound
                // n_b, so also report the post-kick maximum and where it occurs
                double max_post = 0.0;
                int arg_post = 0;
                for (size_t n = 1; n < q.lambda_max.size(); ++n)
                    if (q.lambda_max[n] > max_post) {
                        max_post = q.lambda_max[n];
                        arg_post = static_cast<int>(n);
                    }
                line += fmt("  %.3f@n%.0f (ref %.3f)", max_post, double(arg_post),
                            reference[nb - 2][col]);
                ++col;
            }
        }
        c.detail(line);
    }
    c.detail("columns: (L=6, pi/4), (L=6, pi/4+0.1), (L=13-n_b, pi/4), "
             "(L=13-n_b, pi/4+0.1); reference match is best-effort");
    c.detail("pass requires max over the full 0..250 window < n_b; entries show "
             "the post-kick maximum and its kick");
    c.finish(ok);
}

// -- criterion 8: randomized property suites ----------------------------------

void criterion8() {
    Criterion c(8, "randomized invariant suites (1000 instances each)");
    Rng rng(777);
    bool ok = true;

    // partial-trace invariants
    SystemGeometry pt_geom(3, 2);
    for (int i = 0; i < 1000 && ok; ++i) {
        Mat rho = partial_trace_battery(random_state(pt_geom.dim(), rng), pt_geom);
        if (std::abs(rho.trace().real() - 1.0) > 1e-12 || !is_hermitian(rho, 1e-12) ||
            eigvals_hermitian(rho).minCoeff() < -1e-12)
            ok = false;
    }
    c.detail(std::string("partial-trace trace/hermiticity/positivity: ") +
             (ok ? "pass" : "fail"));

    // Floquet unitarity and parity commutation on random parameter draws
    bool floq_ok = true;
    for (int i = 0; i < 1000 && floq_ok; ++i) {
        const int L = 2 + int(rng.uniform() * 3);
        const int nb = 1 + int(rng.uniform() * 2);
        SystemGeometry geom(L, std::min(nb, L), 0);
        ModelParams p;
        p.J = 0.5 + rng.uniform();
        p.h = rng.uniform();
        p.kappa = 2.0 * rng.uniform();
        p.delta = 0.5 + rng.uniform();
        p.tau = 0.1 + rng.uniform();
        const Mat u = build_floquet(geom, p).dense();
        const Mat par = parity_operator(geom);
        if (!is_unitary(u, 1e-10) ||
            (u * par - par * u).cwiseAbs().maxCoeff() > 1e-10)
            floq_ok = false;
    }
    c.detail(std::string("Floquet unitarity and [U, P] = 0: ") +
             (floq_ok ? "pass" : "fail"));

    // ergotropy non-negativity and passivity characterization
    bool erg_ok = true;
    for (int nq : {1, 2}) {
        const Eigen::Index dim = 1 << nq;
        Mat hb = Mat::Zero(dim, dim);
        for (Eigen::Index b = 0; b < dim; ++b)
            hb(b, b) = 0.5 * std::popcount(static_cast<unsigned>(b));
        SystemGeometry tg(nq, nq, 1);
        for (int i = 0; i < 1000 && erg_ok; ++i) {
            Mat rho = partial_trace_charger(random_state(dim * dim, rng), tg);
            const double xi = ergotropy(rho, hb);
            if (xi < -1e-12) erg_ok = false;
            if (std::abs(ergotropy(passive_state(rho, hb), hb)) > 1e-10) erg_ok = false;
        }
    }
    c.detail(std::string("ergotropy >= 0 and passive-state fixed point: ") +
             (erg_ok ? "pass" : "fail"));
    c.finish(ok && floq_ok && erg_ok);
}

// -- criterion 9: byte-identical reruns ---------------------------------------

void criterion9() {
    Criterion c(9, "byte-identical CSVs across reruns with the same config");
    const fs::path base = fs::temp_directory_path() / "qbattery_acceptance";
    fs::remove_all(base);
    bool ok = true;

    for (int run = 0; run < 2; ++run) {
        KeyValueConfig kv;
        kv.set("L", "4");
        kv.set("horizon", "40");
        kv.set("seed", "12345");
        kv.set("out", (base / ("dyn" + std::to_string(run))).string());
        run_scenario(make_config("dynamics", kv));
        KeyValueConfig kv2;
        kv2.set("L_total", "8");
        kv2.set("nb_values", "2");
        kv2.set("h_values", "0.3 1.0");
        kv2.set("kappa_values", "");
        kv2.set("realizations", "3");
        kv2.set("seed", "99");
        kv2.set("out", (base / ("scan" + std::to_string(run))).string());
        run_scenario(make_config("rmt-scan", kv2));
    }
    ok = ok && slurp(base / "dyn0" / "dynamics.csv") == slurp(base / "dyn1" / "dynamics.csv");
    ok = ok && !slurp(base / "dyn0" / "dynamics.csv").empty();
    ok = ok &&
         slurp(base / "scan0" / "rmt_h_nb2.csv") == slurp(base / "scan1" / "rmt_h_nb2.csv");
    ok = ok && !slurp(base / "scan0" / "rmt_h_nb2.csv").empty();
    fs::remove_all(base);
    c.detail("dynamics and rmt-scan rerun byte comparison");
    c.finish(ok);
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    std::printf("%d of 9 criteria failed\n", g_failures);
    return g_failures;
}
