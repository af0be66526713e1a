#ifndef QBATTERY_EXPERIMENTS_HPP
#define QBATTERY_EXPERIMENTS_HPP

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbattery/io.hpp"
#include "qbattery/observables.hpp"
#include "qbattery/parallel.hpp"
#include "qbattery/qfi.hpp"
#include "qbattery/spectral.hpp"

namespace qb {

namespace fs = std::filesystem;

inline constexpr const char* kCodeVersion = "1.0.0";

struct ExperimentConfig {
    std::string scenario;
    int L = 6;
    int n_b = 1;
    int d = 0;                 // 0 = default spacing floor(L/n_b)
    int L_total = 13;          // used by fixed-total-size scenarios
    ModelParams params;
    int horizon = 250;
    uint64_t seed = 1;
    int realizations = 10;
    double disorder_w = 0.1;
    int threads = 1;
    fs::path out_dir = "out";
    std::vector<double> h_values;
    std::vector<double> kappa_values;
    std::vector<double> tau_values;
    std::vector<long long> nb_values;

    SystemGeometry geometry() const { return SystemGeometry(L, n_b, d); }
    SystemGeometry geometry(int nb_override) const {
        return SystemGeometry(L, nb_override, 0);
    }

    /// Canonical flat key=value form; hashing and the run manifest use this.
    KeyValueConfig canonical() const {
        KeyValueConfig kv;
        auto num = [](double v) { return format_number(v); };
        kv.set("scenario", scenario);
        kv.set("L", std::to_string(L));
        kv.set("n_b", std::to_string(n_b));
        kv.set("d", std::to_string(d));
        kv.set("L_total", std::to_string(L_total));
        kv.set("J", num(params.J));
        kv.set("h", num(params.h));
        kv.set("kappa", num(params.kappa));
        kv.set("delta", num(params.delta));
        kv.set("tau", num(params.tau));
        kv.set("horizon", std::to_string(horizon));
        kv.set("seed", std::to_string(seed));
        kv.set("realizations", std::to_string(realizations));
        kv.set("disorder_w", num(disorder_w));
        auto join_d = [&](const std::vector<double>& v) {
            std::string s;
            for (double x : v) s += (s.empty() ? "" : " ") + format_number(x);
            return s;
        };
        std::string nbs;
        for (long long x : nb_values) nbs += (nbs.empty() ? "" : " ") + std::to_string(x);
        kv.set("h_values", join_d(h_values));
        kv.set("kappa_values", join_d(kappa_values));
        kv.set("tau_values", join_d(tau_values));
        kv.set("nb_values", nbs);
        return kv;
    }

    uint64_t hash() const { return fnv1a(canonical().serialize()); }
};

inline std::vector<long long> to_int_list(const std::vector<double>& v) {
    std::vector<long long> out;
    for (double x : v) out.push_back(static_cast<long long>(x));
    return out;
}

/// Build a config from key=value text plus per-scenario defaults.
inline ExperimentConfig make_config(const std::string& scenario, const KeyValueConfig& kv) {
    ExperimentConfig cfg;
    cfg.scenario = scenario;
    // scenario defaults first, file/CLI keys override
    if (scenario == "dynamics") {
        cfg.L = 6; cfg.n_b = 1;
        cfg.params = {1.0, 0.1, 6.0, 1.0, kPi / 20, {}, {}};
        cfg.horizon = 100;
    } else if (scenario == "rmt-scan") {
        cfg.L_total = 11;
        cfg.params = {1.0, 1.0, 1.0, 1.0, kPi / 4, {}, {}};
        cfg.nb_values = {2, 3, 4};
        cfg.h_values = {0.05, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2};
        cfg.kappa_values = {0.2, 0.6, 1.0, 1.6, 2.0, 2.4, 3.0};
        cfg.realizations = 10;
    } else if (scenario == "stability") {
        cfg.L_total = 13;
        cfg.params = {1.0, 1.0, 1.0, 1.0, kPi / 4, {}, {}};
        cfg.nb_values = {1, 2, 3, 4, 5, 6};
        cfg.horizon = 250;
    } else if (scenario == "charging-time") {
        cfg.L = 6; cfg.L_total = 13;
        cfg.params = {1.0, 1.0, 1.0, 1.0, kPi / 4, {}, {}};
        cfg.nb_values = {1, 2, 3, 4, 5, 6};
        cfg.tau_values = {kPi / 4, kPi / 4 + 0.1};
        cfg.horizon = 250;
    } else if (scenario == "power-scaling") {
        cfg.L = 6;
        cfg.params = {1.0, 1.0, 1.0, 1.0, kPi / 4, {}, {}};
        cfg.nb_values = {1, 2, 3, 4, 5, 6};
        cfg.horizon = 250;
    } else if (scenario == "qfi-table") {
        cfg.L = 6; cfg.L_total = 13;
        cfg.params = {1.0, 1.0, 1.0, 1.0, kPi / 4, {}, {}};
        cfg.nb_values = {2, 3, 4, 5, 6};
        cfg.tau_values = {kPi / 4, kPi / 4 + 0.1};
        cfg.horizon = 250;
    } else {
        throw ConfigError("unknown scenario: " + scenario);
    }

    cfg.L = static_cast<int>(kv.get_int("L", cfg.L));
    cfg.n_b = static_cast<int>(kv.get_int("n_b", cfg.n_b));
    cfg.d = static_cast<int>(kv.get_int("d", cfg.d));
    cfg.L_total = static_cast<int>(kv.get_int("L_total", cfg.L_total));
    cfg.params.J = kv.get_double("J", cfg.params.J);
    cfg.params.h = kv.get_double("h", cfg.params.h);
    cfg.params.kappa = kv.get_double("kappa", cfg.params.kappa);
    cfg.params.delta = kv.get_double("delta", cfg.params.delta);
    cfg.params.tau = kv.get_double("tau", cfg.params.tau);
    cfg.horizon = static_cast<int>(kv.get_int("horizon", cfg.horizon));
    cfg.seed = static_cast<uint64_t>(kv.get_int("seed", static_cast<long long>(cfg.seed)));
    cfg.realizations = static_cast<int>(kv.get_int("realizations", cfg.realizations));
    cfg.disorder_w = kv.get_double("disorder_w", cfg.disorder_w);
    cfg.threads = static_cast<int>(kv.get_int("threads", cfg.threads));
    cfg.out_dir = kv.get_string("out", cfg.out_dir.string());
    cfg.h_values = kv.get_list("h_values", cfg.h_values);
    cfg.kappa_values = kv.get_list("kappa_values", cfg.kappa_values);
    cfg.tau_values = kv.get_list("tau_values", cfg.tau_values);
    if (kv.has("nb_values")) cfg.nb_values = to_int_list(kv.get_list("nb_values", {}));

    if (cfg.horizon < 0) throw ConfigError("horizon must be >= 0");
    if (cfg.disorder_w < 0.0 || cfg.disorder_w >= 1.0)
        throw ConfigError("disorder_w must be in [0, 1)");
    try {
        cfg.params.validate(SystemGeometry(cfg.L, cfg.n_b, cfg.d));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

/// Collects output files and writes the run manifest on finalize.
class RunContext {
public:
    RunContext(const ExperimentConfig& cfg) : cfg_(cfg), start_(clock_t::now()) {
        fs::create_directories(cfg.out_dir);
    }

    fs::path path(const std::string& name) const { return cfg_.out_dir / name; }

    void add_output(const std::string& name) { outputs_.push_back(name); }

    void finalize() {
        // resolved config is itself an output, so reruns are self-describing
        {
            std::ofstream out(path("resolved_config.txt"));
            out << cfg_.canonical().serialize();
        }
        add_output("resolved_config.txt");
        nlohmann::json manifest;
        char hex[24];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(cfg_.hash()));
        manifest["config_hash"] = hex;
        manifest["code_version"] = kCodeVersion;
        manifest["wall_time_s"] =
            std::chrono::duration<double>(clock_t::now() - start_).count();
        nlohmann::json sums = nlohmann::json::object();
        for (const auto& name : outputs_) {
            std::snprintf(hex, sizeof(hex), "%016llx",
                          static_cast<unsigned long long>(file_checksum(path(name))));
            sums[name] = hex;
        }
        manifest["outputs"] = sums;
        std::ofstream out(path("manifest.json"));
        out << manifest.dump(2) << "\n";
    }

private:
    using clock_t = std::chrono::steady_clock;
    ExperimentConfig cfg_;
    clock_t::time_point start_;
    std::vector<std::string> outputs_;
};

// -- scenario runners ---------------------------------------------------------

struct DynamicsResult {
    Trajectory traj;
    MeritReport report;
    std::vector<double> e_analytic, xi_analytic, sl_analytic;
};

/// Core of the dynamics scenario; also reused by the acceptance suite.
inline DynamicsResult dynamics_run(const SystemGeometry& geom, const ModelParams& params,
                                   int horizon, bool track_variances = true) {
    const FloquetOperator fop = build_floquet(geom, params);
    std::vector<TrackedOperator> tracked;
    if (track_variances) {
        tracked.push_back(track_diagonal("H_b", total_battery_diagonal(geom, params)));
        tracked.push_back(track_dense("H", total_hamiltonian_dense(geom, params)));
    }
    DynamicsResult res;
    res.traj = evolve(fop, initial_state(geom, params), horizon, tracked);

    const Mat h_b = battery_hamiltonian_diagonal(geom, params).cast<cxd>().asDiagonal();
    for (const Mat& rho : res.traj.rdm) {
        res.report.ergotropy_series.push_back(ergotropy(rho, h_b));
        res.report.linear_entropy_series.push_back(linear_entropy(rho));
    }
    const AnalyticKickModel analytic(params.kappa, params.tau, params.delta);
    for (int n = 0; n <= horizon; ++n) {
        const double p = analytic.population(n);
        res.e_analytic.push_back(params.delta * p);
        res.xi_analytic.push_back(p > 0.5 ? params.delta * (2.0 * p - 1.0) : 0.0);
        res.sl_analytic.push_back(2.0 * (p - p * p));
    }
    const ChargingTime ct = charging_time(res.traj, horizon);
    res.report.never_charges = ct.never_charges;
    res.report.charging_kicks = ct.m;
    res.report.charging_time = ct.T;
    res.report.e_max = ct.e_max;
    if (!ct.never_charges) {
        res.report.power_at_T = average_power(res.traj.energy[size_t(ct.m)], ct.m, params.tau);
        if (track_variances)
            res.report.power_bound_at_T =
                power_bound(time_avg_variance_rate(res.traj, 0, ct.m),
                            time_avg_variance_rate(res.traj, 1, ct.m));
        if (horizon > ct.m)
            res.report.stability = stability_metric(res.traj, ct.m, horizon);
    }
    return res;
}

inline nlohmann::json merit_json(const MeritReport& r) {
    nlohmann::json j;
    j["charging_kicks"] = r.charging_kicks;
    j["charging_time"] = r.charging_time;
    j["e_max"] = r.e_max;
    j["power_at_T"] = r.power_at_T;
    j["power_bound_at_T"] = r.power_bound_at_T;
    j["stability"] = r.stability;
    j["never_charges"] = r.never_charges;
    return j;
}

inline void run_dynamics(const ExperimentConfig& cfg) {
    RunContext ctx(cfg);
    const SystemGeometry geom = cfg.geometry();
    const DynamicsResult res = dynamics_run(geom, cfg.params, cfg.horizon);

    CsvWriter csv(ctx.path("dynamics.csv"),
                  {"n", "E", "ergotropy", "linear_entropy", "E_analytic",
                   "ergotropy_analytic", "linear_entropy_analytic"});
    SvgSeries se{"E(n)", "green", {}, {}}, sx{"ergotropy", "red", {}, {}},
        sl{"linear entropy", "blue", {}, {}}, sa{"E analytic", "black", {}, {}};
    for (int n = 0; n <= cfg.horizon; ++n) {
        csv.row({static_cast<long long>(n), res.traj.energy[size_t(n)],
                 res.report.ergotropy_series[size_t(n)],
                 res.report.linear_entropy_series[size_t(n)], res.e_analytic[size_t(n)],
                 res.xi_analytic[size_t(n)], res.sl_analytic[size_t(n)]});
        se.x.push_back(n); se.y.push_back(res.traj.energy[size_t(n)]);
        sx.x.push_back(n); sx.y.push_back(res.report.ergotropy_series[size_t(n)]);
        sl.x.push_back(n); sl.y.push_back(res.report.linear_entropy_series[size_t(n)]);
        sa.x.push_back(n); sa.y.push_back(res.e_analytic[size_t(n)]);
    }
    csv.close();
    ctx.add_output("dynamics.csv");
    write_svg_plot(ctx.path("dynamics.svg"), "battery dynamics", {se, sx, sl, sa},
                   {cfg.params.delta});
    ctx.add_output("dynamics.svg");
    {
        std::ofstream out(ctx.path("summary.json"));
        out << merit_json(res.report).dump(2) << "\n";
    }
    ctx.add_output("summary.json");
    ctx.finalize();
}

inline void run_rmt_scan(const ExperimentConfig& cfg) {
    if (cfg.nb_values.empty() || (cfg.h_values.empty() && cfg.kappa_values.empty()))
        throw ConfigError("rmt-scan: empty grid");
    RunContext ctx(cfg);
    std::vector<SvgSeries> curves;
    const char* colors[] = {"green", "red", "blue", "orange", "purple", "brown"};
    int color_idx = 0;
    for (long long nb : cfg.nb_values) {
        const SystemGeometry geom(cfg.L_total - static_cast<int>(nb),
                                  static_cast<int>(nb), 0);
        for (int axis = 0; axis < 2; ++axis) {
            const auto& values = (axis == 0) ? cfg.h_values : cfg.kappa_values;
            if (values.empty()) continue;
            ModelParams base = cfg.params;
            // scan over h holds kappa fixed and vice versa
            DisorderSpec spec(cfg.disorder_w,
                              Rng::derive(cfg.seed, static_cast<uint64_t>(axis),
                                          static_cast<uint64_t>(nb)));
            const auto rows = scan_ratio(geom, base,
                                         axis == 0 ? ScanAxis::H : ScanAxis::Kappa, values,
                                         spec, cfg.realizations, cfg.threads);
            const std::string name = std::string(axis == 0 ? "rmt_h_nb" : "rmt_kappa_nb") +
                                     std::to_string(nb) + ".csv";
            CsvWriter csv(ctx.path(name),
                          {"scan_value", "r_mean", "r_stderr", "sector_dim", "realizations"});
            SvgSeries curve{(axis == 0 ? "h scan n_b=" : "kappa scan n_b=") +
                                std::to_string(nb),
                            colors[color_idx % 6], {}, {}};
            for (const auto& r : rows) {
                csv.row({r.scan_value, r.r_mean, r.r_stderr,
                         static_cast<long long>(r.sector_dim),
                         static_cast<long long>(r.realizations)});
                curve.x.push_back(r.scan_value);
                curve.y.push_back(r.r_mean);
            }
            csv.close();
            ctx.add_output(name);
            curves.push_back(std::move(curve));
            ++color_idx;
        }
    }
    write_svg_plot(ctx.path("rmt_scan.svg"), "spacing-ratio scans", curves, {0.386, 0.53});
    ctx.add_output("rmt_scan.svg");
    ctx.finalize();
}

inline void run_stability(const ExperimentConfig& cfg) {
    if (cfg.nb_values.empty()) throw ConfigError("stability: empty n_b grid");
    RunContext ctx(cfg);
    CsvWriter series(ctx.path("stability_series.csv"), {"n_b", "n", "E_over_nb"});
    CsvWriter metrics(ctx.path("stability_metrics.csv"),
                      {"n_b", "L", "m", "T", "sigma_over_mu", "never_charges"});
    std::vector<SvgSeries> curves;
    const char* colors[] = {"green", "red", "blue", "orange", "purple", "brown"};
    for (size_t k = 0; k < cfg.nb_values.size(); ++k) {
        const int nb = static_cast<int>(cfg.nb_values[k]);
        const SystemGeometry geom(cfg.L_total - nb, nb, 0);
        const DynamicsResult res = dynamics_run(geom, cfg.params, cfg.horizon, false);
        SvgSeries curve{"n_b=" + std::to_string(nb), colors[k % 6], {}, {}};
        for (int n = 0; n <= cfg.horizon; ++n) {
            series.row({static_cast<long long>(nb), static_cast<long long>(n),
                        res.traj.energy[size_t(n)] / nb});
            curve.x.push_back(n);
            curve.y.push_back(res.traj.energy[size_t(n)] / nb);
        }
        metrics.row({static_cast<long long>(nb), static_cast<long long>(geom.L),
                     static_cast<long long>(res.report.charging_kicks),
                     res.report.charging_time, res.report.stability,
                     static_cast<long long>(res.report.never_charges ? 1 : 0)});
        curves.push_back(std::move(curve));
    }
    series.close();
    metrics.close();
    ctx.add_output("stability_series.csv");
    ctx.add_output("stability_metrics.csv");
    write_svg_plot(ctx.path("stability.svg"), "E(n)/n_b time series", curves);
    ctx.add_output("stability.svg");
    ctx.finalize();
}

inline void run_charging_time(const ExperimentConfig& cfg) {
    if (cfg.nb_values.empty() || cfg.tau_values.empty())
        throw ConfigError("charging-time: empty grid");
    RunContext ctx(cfg);
    CsvWriter csv(ctx.path("charging_time.csv"),
                  {"panel", "tau", "L", "n_b", "m", "T", "E_max"});
    std::vector<SvgSeries> curves;
    const char* colors[] = {"green", "red", "blue", "orange"};
    int color_idx = 0;
    for (int panel = 0; panel < 2; ++panel) {      // 0: L fixed, 1: L_total fixed
        for (double tau : cfg.tau_values) {
            ModelParams p = cfg.params;
            p.tau = tau;
            SvgSeries curve{(panel == 0 ? "L=" + std::to_string(cfg.L)
                                        : "L+n_b=" + std::to_string(cfg.L_total)) +
                                ", tau=" + std::to_string(tau),
                            colors[color_idx % 4], {}, {}};
            for (long long nbv : cfg.nb_values) {
                const int nb = static_cast<int>(nbv);
                const int L = (panel == 0) ? cfg.L : cfg.L_total - nb;
                const SystemGeometry geom(L, nb, 0);
                const DynamicsResult res = dynamics_run(geom, p, cfg.horizon, false);
                csv.row({static_cast<long long>(panel), tau, static_cast<long long>(L),
                         static_cast<long long>(nb),
                         static_cast<long long>(res.report.charging_kicks),
                         res.report.charging_time, res.report.e_max});
                curve.x.push_back(nb);
                curve.y.push_back(res.report.charging_time);
            }
            curves.push_back(std::move(curve));
            ++color_idx;
        }
    }
    csv.close();
    ctx.add_output("charging_time.csv");
    write_svg_plot(ctx.path("charging_time.svg"), "charging time vs n_b", curves);
    ctx.add_output("charging_time.svg");
    ctx.finalize();
}

inline void run_power_scaling(const ExperimentConfig& cfg) {
    if (cfg.nb_values.empty()) throw ConfigError("power-scaling: empty n_b grid");
    RunContext ctx(cfg);
    CsvWriter csv(ctx.path("power_scaling.csv"),
                  {"n_b", "L", "m", "T", "E", "P", "P_bound", "P_over_nb",
                   "P_bound_over_nb"});
    SvgSeries sp{"P(T)/n_b", "green", {}, {}}, sb{"P_bo(T)/n_b", "red", {}, {}};
    for (long long nbv : cfg.nb_values) {
        const int nb = static_cast<int>(nbv);
        const SystemGeometry geom(cfg.L, nb, 0);
        const DynamicsResult res = dynamics_run(geom, cfg.params, cfg.horizon, true);
        const auto& r = res.report;
        const double e_at_T =
            r.never_charges ? 0.0 : res.traj.energy[size_t(r.charging_kicks)];
        csv.row({static_cast<long long>(nb), static_cast<long long>(cfg.L),
                 static_cast<long long>(r.charging_kicks), r.charging_time, e_at_T,
                 r.power_at_T, r.power_bound_at_T, r.power_at_T / nb,
                 r.power_bound_at_T / nb});
        sp.x.push_back(nb); sp.y.push_back(r.power_at_T / nb);
        sb.x.push_back(nb); sb.y.push_back(r.power_bound_at_T / nb);
    }
    csv.close();
    ctx.add_output("power_scaling.csv");
    write_svg_plot(ctx.path("power_scaling.svg"), "charging power scaling", {sp, sb});
    ctx.add_output("power_scaling.svg");
    ctx.finalize();
}

inline void run_qfi_table(const ExperimentConfig& cfg) {
    if (cfg.nb_values.empty() || cfg.tau_values.empty())
        throw ConfigError("qfi-table: empty grid");
    RunContext ctx(cfg);
    CsvWriter csv(ctx.path("qfi_table.csv"),
                  {"n_b", "L", "tau", "lambda_max", "witness", "argmax_kick"});
    for (long long nbv : cfg.nb_values) {
        const int nb = static_cast<int>(nbv);
        for (int panel = 0; panel < 2; ++panel) {
            const int L = (panel == 0) ? cfg.L : cfg.L_total - nb;
            for (double tau : cfg.tau_values) {
                ModelParams p = cfg.params;
                p.tau = tau;
                const SystemGeometry geom(L, nb, 0);
                const FloquetOperator fop = build_floquet(geom, p);
                const Trajectory traj = evolve(fop, initial_state(geom, p), cfg.horizon);
                const QfiSeries q = qfi_over_trajectory(traj, geom);
                csv.row({static_cast<long long>(nb), static_cast<long long>(L), tau,
                         q.max_value,
                         static_cast<long long>(q.max_value > nb ? 1 : 0),
                         static_cast<long long>(q.argmax_kick)});
            }
        }
    }
    csv.close();
    ctx.add_output("qfi_table.csv");
    ctx.finalize();
}

inline void run_scenario(const ExperimentConfig& cfg) {
    if (cfg.scenario == "dynamics") run_dynamics(cfg);
    else if (cfg.scenario == "rmt-scan") run_rmt_scan(cfg);
    else if (cfg.scenario == "stability") run_stability(cfg);
    else if (cfg.scenario == "charging-time") run_charging_time(cfg);
    else if (cfg.scenario == "power-scaling") run_power_scaling(cfg);
    else if (cfg.scenario == "qfi-table") run_qfi_table(cfg);
    else throw ConfigError("unknown scenario: " + cfg.scenario);
}

}  // namespace qb

#endif  // QBATTERY_EXPERIMENTS_HPP
