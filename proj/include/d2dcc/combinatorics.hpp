#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "d2dcc/core.hpp"

namespace d2dcc {

// One fragment of subfile W_{file, cache_set}. A whole subfile is fragment 0
// of split_count 1; a subfile exchanged inside a D2D group of size g is split
// into g-1 equal fragments.
struct SubfileId {
    int file = 0;          // 1-based file index
    UserSet cache_set;     // the tau users caching this subfile
    int fragment = 0;      // 0-based
    int split_count = 1;

    bool operator==(const SubfileId& o) const {
        return file == o.file && cache_set == o.cache_set && fragment == o.fragment &&
               split_count == o.split_count;
    }

    // "A_3", "A_{2,4}", "B^1_{1,3}" (1-based fragment superscript, shown only
    // when the subfile is split).
    std::string to_string() const {
        std::string out;
        if (file >= 1 && file <= 26)
            out += static_cast<char>('A' + file - 1);
        else
            out += "W" + std::to_string(file);
        if (split_count > 1) out += "^" + std::to_string(fragment + 1);
        std::vector<int> v = cache_set.members();
        if (v.size() == 1) {
            out += "_" + std::to_string(v[0]);
        } else {
            out += "_{";
            for (std::size_t j = 0; j < v.size(); ++j) {
                if (j) out += ",";
                out += std::to_string(v[j]);
            }
            out += "}";
        }
        return out;
    }
};

// Per-user demanded file indices (1-based users and files).
struct Demands {
    std::vector<int> file_of;  // file_of[k-1] = d_k

    static Demands distinct(int K) {
        Demands d;
        d.file_of.resize(K);
        for (int k = 1; k <= K; ++k) d.file_of[k - 1] = k;
        return d;
    }

    int operator()(int user) const { return file_of.at(user - 1); }
    int users() const { return static_cast<int>(file_of.size()); }
};

// Cache placement: user k stores W_{n,v} for every v with k in v, |v| = tau.
struct PlacementMap {
    int K = 0;
    int N = 0;
    int M = 0;
    int tau = 0;

    bool caches(int user, int file, const UserSet& cache_set) const {
        (void)file;
        return cache_set.contains(user);
    }

    // All subfiles cached at `user` (fragment-free), lexicographic in
    // (file, cache_set). Size N * C(K-1, tau-1).
    std::vector<SubfileId> cache_of(int user) const {
        std::vector<SubfileId> out;
        for (int n = 1; n <= N; ++n)
            for (const UserSet& v : subsets_of_size(UserSet::first(K), tau))
                if (v.contains(user)) out.push_back(SubfileId{n, v, 0, 1});
        return out;
    }

    std::int64_t subfiles_per_file() const { return binomial(K, tau); }
};

inline PlacementMap place(int K, int N, int M, int tau) {
    if (K < 1 || N < 1 || M < 1) throw std::invalid_argument("K, N, M must be positive");
    if (tau < 1 || static_cast<long long>(tau) * N != static_cast<long long>(K) * M)
        throw std::invalid_argument("tau = KM/N must be a positive integer");
    if (tau > K) throw std::invalid_argument("tau must not exceed K");
    return PlacementMap{K, N, M, tau};
}

// Size in bits of one transmitted subfile, C(K,tau,L) = F / (C(K,tau) * C(K-(tau+1), L-1)).
inline double subfile_size(int K, int tau, int L, double F = 1.0) {
    if (tau + 1 > K) throw std::invalid_argument("requires tau + 1 <= K");
    std::int64_t denom = binomial(K, tau) * binomial(K - (tau + 1), L - 1);
    if (denom == 0) throw std::domain_error("unsupported configuration: C(K-(tau+1), L-1) = 0");
    return F / static_cast<double>(denom);
}

// An XOR multicast message: each part is a subfile fragment intended for one
// recipient and cached by all the others.
struct CodedMessage {
    UserSet recipients;
    std::vector<std::pair<int, SubfileId>> parts;  // (intended user, fragment)
    double size_bits = 0.0;

    bool empty() const { return parts.empty(); }

    std::string to_string() const {
        if (parts.empty()) return "(empty)";
        std::string out;
        for (std::size_t j = 0; j < parts.size(); ++j) {
            if (j) out += " (+) ";
            out += parts[j].second.to_string();
        }
        return out;
    }
};

// Tracks which fragments of each (intended user, cache set) subfile have been
// emitted, so nothing is delivered twice across the D2D and DL phases.
class FragmentLedger {
public:
    enum class Phase { Untouched, D2D, DL };

    struct State {
        Phase phase = Phase::Untouched;
        int split_count = 0;  // fragments in the active split
        int taken = 0;        // fragments emitted so far
    };

    bool untouched(int user, const UserSet& cache_set) const {
        auto it = states_.find(key(user, cache_set));
        return it == states_.end() || it->second.taken == 0;
    }

    bool exhausted(int user, const UserSet& cache_set) const {
        auto it = states_.find(key(user, cache_set));
        return it != states_.end() && it->second.taken == it->second.split_count &&
               it->second.split_count > 0;
    }

    // Fraction of the subfile already delivered, in [0, 1].
    double delivered_fraction(int user, const UserSet& cache_set) const {
        auto it = states_.find(key(user, cache_set));
        if (it == states_.end() || it->second.split_count == 0) return 0.0;
        return static_cast<double>(it->second.taken) / it->second.split_count;
    }

    // Start a D2D split into `split_count` fragments. Only valid on an
    // untouched subfile.
    void begin_d2d_split(int user, const UserSet& cache_set, int split_count) {
        State& s = states_[key(user, cache_set)];
        if (s.taken != 0)
            throw std::logic_error("fragment ledger: subfile already split or delivered");
        s.phase = Phase::D2D;
        s.split_count = split_count;
        s.taken = 0;
    }

    // Next fragment of an active D2D split.
    SubfileId take_d2d_fragment(int user, int file, const UserSet& cache_set) {
        State& s = states_[key(user, cache_set)];
        if (s.phase != Phase::D2D || s.taken >= s.split_count)
            throw std::logic_error("fragment ledger: no D2D fragment available");
        return SubfileId{file, cache_set, s.taken++, s.split_count};
    }

    // The whole subfile for a DL message; throws if the DL already took it.
    // Returns nothing when the subfile was fully delivered in the D2D phase.
    std::optional<SubfileId> take_dl_whole(int user, int file, const UserSet& cache_set) {
        State& s = states_[key(user, cache_set)];
        if (s.phase == Phase::DL)
            throw std::logic_error("fragment ledger: subfile requested twice in the DL phase");
        if (s.split_count > 0 && s.taken == s.split_count) return std::nullopt;  // done via D2D
        if (s.taken != 0)
            throw std::logic_error("fragment ledger: partially delivered subfile in DL phase");
        s.phase = Phase::DL;
        s.split_count = 1;
        s.taken = 1;
        return SubfileId{file, cache_set, 0, 1};
    }

private:
    using Key = std::pair<int, std::uint32_t>;
    static Key key(int user, const UserSet& v) { return {user, v.raw_bits()}; }
    std::map<Key, State> states_;
};

// Downlink coded message X_D = XOR over k in D of a fresh fragment of
// W_{d_k, D\{k}}. Parts whose subfile was already completed in the D2D phase
// are omitted. `subfile_bits` is the size C(K,tau,L) of one whole subfile.
inline CodedMessage dl_coded_message(const UserSet& D, const Demands& demands,
                                     const PlacementMap& placement, FragmentLedger& ledger,
                                     double subfile_bits = 1.0) {
    if (D.size() != placement.tau + 1)
        throw std::invalid_argument("DL message subset must have size tau + 1");
    CodedMessage msg;
    msg.recipients = D;
    for (int k : D.members()) {
        UserSet v = D.without(k);
        if (auto frag = ledger.take_dl_whole(k, demands(k), v)) msg.parts.emplace_back(k, *frag);
    }
    msg.size_bits = msg.parts.empty() ? 0.0 : subfile_bits;
    return msg;
}

struct D2DTransmission {
    int transmitter = 0;
    CodedMessage message;
};

// One D2D exchange inside group V (2 <= |V| <= tau+1). Every member transmits
// the fragments in its cache that the other members still need; each needed
// subfile is split into |V|-1 fragments, one per holder. Transmitters go in
// ascending user order, each sending as many XOR messages as it owes.
inline std::vector<D2DTransmission> d2d_coded_messages(const UserSet& V, const Demands& demands,
                                                       const PlacementMap& placement,
                                                       FragmentLedger& ledger,
                                                       double subfile_bits = 1.0) {
    int g = V.size();
    if (g < 2 || g > placement.tau + 1)
        throw std::invalid_argument("D2D group size must be in [2, tau+1]");

    std::vector<int> members = V.members();

    // Subfiles member i still needs that every other group member holds:
    // W_{d_i, v} with V\{i} subset of v, i not in v.
    std::map<int, std::vector<UserSet>> needed;
    for (int i : members) {
        std::vector<UserSet> lst;
        UserSet holders_req = V.without(i);
        for (const UserSet& v : subsets_of_size(UserSet::first(placement.K), placement.tau)) {
            if (v.contains(i)) continue;
            if (!holders_req.subset_of(v)) continue;
            if (!ledger.untouched(i, v)) continue;
            lst.push_back(v);
        }
        needed[i] = lst;
        for (const UserSet& v : lst) ledger.begin_d2d_split(i, v, g - 1);
    }

    std::vector<D2DTransmission> out;
    for (int k : members) {
        int owed = 0;
        for (int i : members)
            if (i != k) owed = std::max(owed, static_cast<int>(needed[i].size()));
        for (int j = 0; j < owed; ++j) {
            CodedMessage msg;
            msg.recipients = V.without(k);
            for (int i : members) {
                if (i == k || j >= static_cast<int>(needed[i].size())) continue;
                msg.parts.emplace_back(i, ledger.take_d2d_fragment(i, demands(i), needed[i][j]));
            }
            msg.size_bits = subfile_bits / (g - 1);
            out.push_back(D2DTransmission{k, std::move(msg)});
        }
    }
    return out;
}

}  // namespace d2dcc
