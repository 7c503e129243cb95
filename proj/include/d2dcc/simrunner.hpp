#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "d2dcc/mode_select.hpp"

namespace d2dcc {

enum class Scheme {
    MulticastOnly,
    D2DOnly,
    HybridExhaustive,
    HybridHeuristic,
    HybridHeuristicGeneral,
};

inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::MulticastOnly: return "multicast-only";
        case Scheme::D2DOnly: return "d2d-only";
        case Scheme::HybridExhaustive: return "hybrid-exhaustive";
        case Scheme::HybridHeuristic: return "hybrid-heuristic";
        case Scheme::HybridHeuristicGeneral: return "hybrid-heuristic-general";
    }
    return "?";
}

inline Scheme scheme_from_name(const std::string& name) {
    for (Scheme s : {Scheme::MulticastOnly, Scheme::D2DOnly, Scheme::HybridExhaustive,
                     Scheme::HybridHeuristic, Scheme::HybridHeuristicGeneral})
        if (name == scheme_name(s)) return s;
    throw std::invalid_argument("unknown scheme: " + name);
}

struct DeliveryReport {
    Scheme scheme = Scheme::MulticastOnly;
    std::uint64_t seed = 0;
    double t_d2d = 0.0;
    double t_dl = 0.0;
    double per_user_rate = 0.0;  // F / (t_d2d + t_dl)
    bool solver_ok = true;
    int d2d_groups = 0;
    int dl_messages = 0;
    double common_rate = 0.0;  // DL common rate, 0 when no DL phase
    int sca_iterations = 0;
    bool sca_converged = true;
    std::vector<UserSet> selected_groups;
};

// One full pipeline pass: sample -> mode selection -> D2D accounting ->
// message plan -> beamformer solve -> report.
inline DeliveryReport run_trial(const ScenarioConfig& cfg, std::uint64_t seed, Scheme scheme,
                                const SolverOptions& opts = SolverOptions()) {
    cfg.validate();
    int tau = cfg.tau();
    PlacementMap placement = place(cfg.K, cfg.N, cfg.M, tau);
    Demands demands = Demands::distinct(cfg.K);
    if (cfg.N < cfg.K)
        for (int k = 1; k <= cfg.K; ++k) demands.file_of[k - 1] = (k - 1) % cfg.N + 1;
    ChannelRealization chans = sample(cfg, seed);
    double csize = subfile_size(cfg.K, tau, cfg.L, cfg.F);

    DeliveryReport report;
    report.scheme = scheme;
    report.seed = seed;

    D2DSchedule schedule;
    switch (scheme) {
        case Scheme::MulticastOnly:
            break;
        case Scheme::D2DOnly:
            schedule = make_schedule(subsets_of_size(UserSet::first(cfg.K), tau + 1), demands,
                                     placement, csize);
            break;
        case Scheme::HybridExhaustive:
            schedule = exhaustive_select(demands, placement, chans, cfg, opts).schedule;
            break;
        case Scheme::HybridHeuristic:
            schedule = heuristic_select(demands, placement, chans, cfg, false);
            break;
        case Scheme::HybridHeuristicGeneral:
            schedule = heuristic_select(demands, placement, chans, cfg, true);
            break;
    }

    report.d2d_groups = static_cast<int>(schedule.groups.size());
    for (const auto& g : schedule.groups) report.selected_groups.push_back(g.members);
    report.t_d2d = t_d2d(schedule, chans, cfg);

    MessagePlan plan = remaining_message_plan(schedule, demands, placement);
    report.dl_messages = static_cast<int>(plan.messages.size());
    if (plan.remaining_subfiles() > 0) {
        try {
            BeamformerSolution sol = solve_max_min(plan, chans.dl, cfg.tx_power_dl(), cfg.N0, opts);
            report.common_rate = sol.rate;
            report.sca_iterations = sol.iterations;
            report.sca_converged = sol.converged;
            report.t_dl = t_dl(plan, sol, cfg.K, tau, cfg.L, cfg.F);
        } catch (const std::runtime_error&) {
            report.solver_ok = false;
            report.t_dl = std::numeric_limits<double>::infinity();
        }
    }

    double total = report.t_d2d + report.t_dl;
    report.per_user_rate = total > 0.0 ? cfg.F / total : std::numeric_limits<double>::infinity();
    if (!std::isfinite(report.per_user_rate) && total > 0.0) report.solver_ok = false;
    return report;
}

struct ExperimentRow {
    double sweep_value = 0.0;
    Scheme scheme = Scheme::MulticastOnly;
    double mean_rate = 0.0;
    double stderr_rate = 0.0;
    double mean_t_d2d = 0.0;
    double mean_t_dl = 0.0;
    int n_ok = 0;
    int n_failed = 0;
};

// Paired Monte Carlo sweep: trial t of every scheme and sweep value shares
// the seed base_seed + t.
inline std::vector<ExperimentRow> run_experiment(const ScenarioConfig& base,
                                                 const std::string& sweep_key,
                                                 const std::vector<double>& values,
                                                 const std::vector<Scheme>& schemes, int trials,
                                                 std::uint64_t base_seed,
                                                 const SolverOptions& opts = SolverOptions()) {
    if (trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
    std::vector<ExperimentRow> rows;
    char buf[64];
    for (double value : values) {
        ScenarioConfig cfg = base;
        if (!sweep_key.empty()) {
            std::snprintf(buf, sizeof(buf), "%.17g", value);
            cfg.set_key(sweep_key, buf);
        }
        cfg.validate();
        for (Scheme scheme : schemes) {
            ExperimentRow row;
            row.sweep_value = value;
            row.scheme = scheme;
            double sum = 0, sum2 = 0, sum_d2d = 0, sum_dl = 0;
            for (int t = 0; t < trials; ++t) {
                DeliveryReport rep;
                bool ok = true;
                try {
                    rep = run_trial(cfg, base_seed + static_cast<std::uint64_t>(t), scheme, opts);
                    ok = rep.solver_ok;
                } catch (const std::exception&) {
                    ok = false;
                }
                if (!ok) {
                    ++row.n_failed;
                    continue;
                }
                ++row.n_ok;
                sum += rep.per_user_rate;
                sum2 += rep.per_user_rate * rep.per_user_rate;
                sum_d2d += rep.t_d2d;
                sum_dl += rep.t_dl;
            }
            if (row.n_ok > 0) {
                row.mean_rate = sum / row.n_ok;
                row.mean_t_d2d = sum_d2d / row.n_ok;
                row.mean_t_dl = sum_dl / row.n_ok;
                if (row.n_ok > 1) {
                    double var = (sum2 - sum * sum / row.n_ok) / (row.n_ok - 1);
                    row.stderr_rate = std::sqrt(std::max(var, 0.0) / row.n_ok);
                }
            }
            rows.push_back(row);
        }
    }
    return rows;
}

inline void write_experiment_csv(const std::vector<ExperimentRow>& rows, std::ostream& os) {
    os << "sweep_value,scheme,mean_rate,stderr_rate,mean_t_d2d,mean_t_dl,n_ok,n_failed\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return std::string(buf);
    };
    for (const ExperimentRow& r : rows) {
        os << num(r.sweep_value) << ',' << scheme_name(r.scheme) << ',' << num(r.mean_rate) << ','
           << num(r.stderr_rate) << ',' << num(r.mean_t_d2d) << ',' << num(r.mean_t_dl) << ','
           << r.n_ok << ',' << r.n_failed << '\n';
    }
}

inline std::vector<Scheme> default_schemes() {
    return {Scheme::MulticastOnly, Scheme::D2DOnly, Scheme::HybridExhaustive,
            Scheme::HybridHeuristic};
}

}  // namespace d2dcc
