#pragma once

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include "d2dcc/beamforming.hpp"
#include "d2dcc/d2d.hpp"

namespace d2dcc {

// Coarse per-subfile D2D time of the best candidate:
// min over the pool of (1/|D|) sum_{k in D} (C(K,tau,L)/(|D|-1)) / R_k^D.
// Ties break towards the lexicographically first subset.
inline std::pair<UserSet, double> approx_t_d2d(const std::vector<UserSet>& pool,
                                               const ChannelRealization& chans,
                                               const ScenarioConfig& cfg) {
    if (pool.empty()) throw std::invalid_argument("approx_t_d2d: empty pool");
    double csize = subfile_size(cfg.K, cfg.tau(), cfg.L, cfg.F);
    UserSet best;
    double best_time = std::numeric_limits<double>::infinity();
    bool have = false;
    for (const UserSet& D : pool) {
        double msg_bits = csize / (D.size() - 1);
        double time = 0.0;
        for (int k : D.members()) {
            double rate = d2d_rate(k, D.without(k), chans, cfg);
            time += rate > 0.0 ? msg_bits / rate : std::numeric_limits<double>::infinity();
        }
        time /= D.size();
        if (!have || time < best_time || (time == best_time && D < best)) {
            best = D;
            best_time = time;
            have = true;
        }
    }
    return {best, best_time};
}

// Per-message power split equalizing the minimum received SNR across
// messages: P_D proportional to 1 / min_{k needing D} ||h_k||^2, summing to
// P_T. The minimum runs over users still needing the message.
inline Eigen::VectorXd approx_power(const MessagePlan& plan, const Eigen::MatrixXcd& H,
                                    double P_T) {
    if (plan.empty()) throw std::invalid_argument("approx_power: empty plan");
    int nm = static_cast<int>(plan.messages.size());
    Eigen::VectorXd inv_min(nm);
    for (int j = 0; j < nm; ++j) {
        double min_norm = std::numeric_limits<double>::infinity();
        for (int k : plan.recipients(j)) min_norm = std::min(min_norm, H.col(k - 1).squaredNorm());
        if (!(min_norm > 0.0) || !std::isfinite(min_norm))
            throw std::invalid_argument("approx_power: zero channel norm");
        inv_min(j) = 1.0 / min_norm;
    }
    return P_T * inv_min / inv_min.sum();
}

// Coarse DL time: C(K,tau,L) over the worst per-user approximate rate
// (1/|Omega_k|) log2(1 + ||h_k||^2/N0 * sum of its message powers).
inline double approx_t_dl(const MessagePlan& plan, const Eigen::MatrixXcd& H,
                          const Eigen::VectorXd& powers, int K, int tau, int L, double F,
                          double N0) {
    if (plan.empty() || plan.remaining_subfiles() == 0) return 0.0;
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= plan.K; ++k) {
        const auto& omega = plan.omega(k);
        if (omega.empty()) continue;
        double p = 0.0;
        for (int j : omega) p += powers(j);
        double rate = std::log2(1.0 + H.col(k - 1).squaredNorm() * p / N0) /
                      static_cast<double>(omega.size());
        worst = std::min(worst, rate);
    }
    if (!(worst > 0.0)) return std::numeric_limits<double>::infinity();
    return subfile_size(K, tau, L, F) / worst;
}

namespace detail {

// Subfiles a candidate group could still deliver, given the ledger state.
inline int deliverable_subfiles(const FragmentLedger& ledger, const UserSet& V,
                                const Demands& demands, const PlacementMap& placement) {
    (void)demands;
    int count = 0;
    for (int i : V.members()) {
        UserSet holders_req = V.without(i);
        for (const UserSet& v : subsets_of_size(UserSet::first(placement.K), placement.tau)) {
            if (v.contains(i) || !holders_req.subset_of(v)) continue;
            if (ledger.untouched(i, v)) ++count;
        }
    }
    return count;
}

}  // namespace detail

// Iterative low-complexity mode selection. Size-(tau+1) candidates are
// checked first; with general groups enabled, smaller sizes follow (tau down
// to 2), each class running until its first rejection or pool exhaustion.
inline D2DSchedule heuristic_select(const Demands& demands, const PlacementMap& placement,
                                    const ChannelRealization& chans, const ScenarioConfig& cfg,
                                    bool allow_general_groups = false) {
    cfg.validate();
    int tau = placement.tau;
    if (tau < 1) throw std::invalid_argument("heuristic_select: requires tau >= 1");
    double csize = subfile_size(cfg.K, tau, cfg.L, cfg.F);
    double P_T = cfg.tx_power_dl();

    D2DSchedule schedule;
    std::vector<int> sizes{tau + 1};
    if (allow_general_groups)
        for (int g = tau; g >= 2; --g) sizes.push_back(g);

    for (int g : sizes) {
        std::vector<UserSet> pool = subsets_of_size(UserSet::first(cfg.K), g);
        while (true) {
            MessagePlan plan = remaining_message_plan(schedule, demands, placement);
            long long remaining = plan.remaining_subfiles();
            if (remaining == 0) return schedule;
            std::erase_if(pool, [&](const UserSet& V) {
                return schedule.group_selected(V) ||
                       detail::deliverable_subfiles(schedule.ledger, V, demands, placement) == 0;
            });
            if (pool.empty()) break;

            Eigen::VectorXd powers = approx_power(plan, chans.dl, P_T);
            double t_dl_hat = approx_t_dl(plan, chans.dl, powers, cfg.K, tau, cfg.L, cfg.F, cfg.N0);
            auto [best, t_d2d_hat] = approx_t_d2d(pool, chans, cfg);

            if (t_dl_hat / static_cast<double>(remaining) >= t_d2d_hat) {
                add_group(schedule, best, demands, placement, csize);
                std::erase(pool, best);
            } else {
                break;  // rejection closes this size class
            }
        }
    }
    return schedule;
}

struct ExhaustiveResult {
    D2DSchedule schedule;
    double total_time = 0.0;
    long long evaluations = 0;
};

// Exact search over all 2^C(tau+L, tau+1) D2D subset selections, evaluating
// the true delivery time (Eq.-(4) accounting plus the SCA solver) for each.
// Ties prefer fewer groups, then the lexicographically smaller group list.
inline ExhaustiveResult exhaustive_select(const Demands& demands,
                                          const PlacementMap& placement,
                                          const ChannelRealization& chans,
                                          const ScenarioConfig& cfg,
                                          const SolverOptions& opts = SolverOptions()) {
    cfg.validate();
    int tau = placement.tau;
    double csize = subfile_size(cfg.K, tau, cfg.L, cfg.F);
    std::vector<UserSet> all = subsets_of_size(UserSet::first(cfg.K), tau + 1);
    int n = static_cast<int>(all.size());
    if (n > 20)
        throw std::invalid_argument(
            "exhaustive_select: C(tau+L, tau+1) exceeds the guard of 20 subsets; use "
            "heuristic_select instead");

    double P_T = cfg.tx_power_dl();
    bool have = false;
    double best_total = std::numeric_limits<double>::infinity();
    std::vector<UserSet> best_groups;
    long long evaluations = 0;

    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask, ++evaluations) {
        std::vector<UserSet> groups;
        for (int j = 0; j < n; ++j)
            if (mask & (std::uint64_t{1} << j)) groups.push_back(all[j]);
        D2DSchedule schedule = make_schedule(groups, demands, placement, csize);
        double total = t_d2d(schedule, chans, cfg);
        MessagePlan plan = remaining_message_plan(schedule, demands, placement);
        if (plan.remaining_subfiles() > 0) {
            BeamformerSolution sol = solve_max_min(plan, chans.dl, P_T, cfg.N0, opts);
            total += t_dl(plan, sol, cfg.K, tau, cfg.L, cfg.F);
        }
        bool better = false;
        if (!have || total < best_total) {
            better = true;
        } else if (total == best_total) {
            if (groups.size() < best_groups.size())
                better = true;
            else if (groups.size() == best_groups.size() &&
                     std::lexicographical_compare(groups.begin(), groups.end(),
                                                  best_groups.begin(), best_groups.end()))
                better = true;
        }
        if (better) {
            have = true;
            best_total = total;
            best_groups = groups;
        }
    }
    return {make_schedule(best_groups, demands, placement, csize), best_total, evaluations};
}

}  // namespace d2dcc
