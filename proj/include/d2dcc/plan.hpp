#pragma once

#include <vector>

#include "d2dcc/core.hpp"

namespace d2dcc {

// Downlink message plan: the multicast index set Omega^S plus, per user, the
// subset of messages the user still needs. A message D not needed by user
// k in D is not interference either (k reconstructs it from cache and D2D
// data); interference at k is every message whose subset excludes k.
struct MessagePlan {
    int K = 0;
    std::vector<UserSet> messages;         // Omega^S, lexicographic
    std::vector<std::vector<int>> needed;  // needed[k-1]: message indices, ascending

    bool empty() const { return messages.empty(); }

    const std::vector<int>& omega(int user) const { return needed.at(user - 1); }

    std::vector<int> interference(int user) const {
        std::vector<int> out;
        for (int j = 0; j < static_cast<int>(messages.size()); ++j)
            if (!messages[j].contains(user)) out.push_back(j);
        return out;
    }

    std::vector<int> recipients(int msg_index) const {
        std::vector<int> out;
        for (int k = 1; k <= K; ++k)
            for (int j : needed[k - 1])
                if (j == msg_index) out.push_back(k);
        return out;
    }

    std::vector<int> active_users() const {
        std::vector<int> out;
        for (int k = 1; k <= K; ++k)
            if (!needed[k - 1].empty()) out.push_back(k);
        return out;
    }

    // Total remaining subfiles to deliver in the DL phase (one per needed
    // message per user).
    long long remaining_subfiles() const {
        long long n = 0;
        for (const auto& lst : needed) n += static_cast<long long>(lst.size());
        return n;
    }

    void validate() const {
        if (static_cast<int>(needed.size()) != K)
            throw std::logic_error("message plan: needs one entry per user");
        std::vector<bool> used(messages.size(), false);
        for (int k = 1; k <= K; ++k)
            for (int j : needed[k - 1]) {
                if (j < 0 || j >= static_cast<int>(messages.size()))
                    throw std::logic_error("message plan: message index out of range");
                if (!messages[j].contains(k))
                    throw std::logic_error("message plan: user needs a message not addressed to it");
                used[j] = true;
            }
        for (bool u : used)
            if (!u) throw std::logic_error("message plan: message needed by no user");
    }

    // The no-D2D plan: all size-(tau+1) subsets, each needed by its members.
    static MessagePlan full(int K, int tau) {
        MessagePlan plan;
        plan.K = K;
        plan.messages = subsets_of_size(UserSet::first(K), tau + 1);
        plan.needed.assign(K, {});
        for (int j = 0; j < static_cast<int>(plan.messages.size()); ++j)
            for (int k : plan.messages[j].members()) plan.needed[k - 1].push_back(j);
        return plan;
    }
};

}  // namespace d2dcc
