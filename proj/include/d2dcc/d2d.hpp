#pragma once

#include <limits>
#include <vector>

#include "d2dcc/channel.hpp"
#include "d2dcc/combinatorics.hpp"
#include "d2dcc/plan.hpp"

namespace d2dcc {

struct D2DGroup {
    UserSet members;
    std::vector<D2DTransmission> transmissions;
    std::vector<std::pair<int, int>> message_counts;  // (user, a_k^V), ascending users
    int subfiles_delivered = 0;

    int count_for(int user) const {
        for (auto& [u, a] : message_counts)
            if (u == user) return a;
        return 0;
    }
};

// Ordered list of selected D2D groups plus the fragment ledger left behind by
// their exchanges. Groups are served sequentially (TDMA) in list order.
struct D2DSchedule {
    std::vector<D2DGroup> groups;
    FragmentLedger ledger;

    bool group_selected(const UserSet& s) const {
        for (const auto& g : groups)
            if (g.members == s) return true;
        return false;
    }

    // i in the complexity bounds: selected groups of size tau + 1.
    long long full_group_count(int tau) const {
        long long i = 0;
        for (const auto& g : groups)
            if (g.members.size() == tau + 1) ++i;
        return i;
    }

    // m in the complexity bounds: total messages sent by groups smaller than
    // tau + 1 (sum of a_k^V).
    long long small_group_message_count(int tau) const {
        long long m = 0;
        for (const auto& g : groups)
            if (g.members.size() < tau + 1)
                for (auto& [u, a] : g.message_counts) m += a;
        return m;
    }
};

// Runs the exchange for group V against the schedule's ledger and appends it.
inline void add_group(D2DSchedule& schedule, const UserSet& V, const Demands& demands,
                      const PlacementMap& placement, double subfile_bits = 1.0) {
    D2DGroup group;
    group.members = V;
    group.transmissions = d2d_coded_messages(V, demands, placement, schedule.ledger, subfile_bits);
    for (int u : V.members()) {
        int a = 0;
        for (const auto& t : group.transmissions)
            if (t.transmitter == u) ++a;
        group.message_counts.emplace_back(u, a);
    }
    int parts = 0;
    for (const auto& t : group.transmissions) parts += static_cast<int>(t.message.parts.size());
    group.subfiles_delivered = parts / std::max(V.size() - 1, 1);
    schedule.groups.push_back(std::move(group));
}

inline D2DSchedule make_schedule(const std::vector<UserSet>& groups, const Demands& demands,
                                 const PlacementMap& placement, double subfile_bits = 1.0) {
    D2DSchedule schedule;
    for (const UserSet& g : groups) add_group(schedule, g, demands, placement, subfile_bits);
    return schedule;
}

// Total D2D time: sum over groups and members of a_k^V * (C(K,tau,L)/(|V|-1))
// divided by the member's multicast rate to the rest of the group.
inline double t_d2d(const D2DSchedule& schedule, const ChannelRealization& chans,
                    const ScenarioConfig& cfg) {
    double csize = subfile_size(cfg.K, cfg.tau(), cfg.L, cfg.F);
    double total = 0.0;
    for (const auto& group : schedule.groups) {
        double msg_bits = csize / (group.members.size() - 1);
        for (auto& [user, a] : group.message_counts) {
            if (a == 0) continue;
            double rate = d2d_rate(user, group.members.without(user), chans, cfg);
            if (!(rate > 0.0)) throw std::runtime_error("t_d2d: zero D2D rate in group");
            total += a * msg_bits / rate;
        }
    }
    return total;
}

// Downlink plan left after the D2D phase: Omega^S keeps every size-(tau+1)
// subset with at least one undelivered subfile, and user k needs message D
// iff its own subfile W_{d_k, D\{k}} was not covered by D2D.
inline MessagePlan remaining_message_plan(const D2DSchedule& schedule, const Demands& demands,
                                          const PlacementMap& placement) {
    (void)demands;
    MessagePlan plan;
    plan.K = placement.K;
    plan.needed.assign(placement.K, {});
    for (const UserSet& D : subsets_of_size(UserSet::first(placement.K), placement.tau + 1)) {
        std::vector<int> needers;
        for (int k : D.members())
            if (schedule.ledger.untouched(k, D.without(k))) needers.push_back(k);
        if (needers.empty()) continue;  // I_D2D(D) = 1
        int idx = static_cast<int>(plan.messages.size());
        plan.messages.push_back(D);
        for (int k : needers) plan.needed[k - 1].push_back(idx);
    }
    return plan;
}

// Pure D2D baseline: every one of the C(K, tau+1) groups is exchanged, each
// subfile of size F/C(K,tau) split into tau fragments.
inline double d2d_only_baseline(const Demands& demands, const PlacementMap& placement,
                                const ChannelRealization& chans, const ScenarioConfig& cfg) {
    if (placement.tau < 1) throw std::invalid_argument("d2d_only_baseline: requires tau >= 1");
    D2DSchedule schedule = make_schedule(
        subsets_of_size(UserSet::first(placement.K), placement.tau + 1), demands, placement);
    return t_d2d(schedule, chans, cfg);
}

}  // namespace d2dcc
