#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace d2dcc {

// C(n, k); zero when k < 0 or k > n.
inline std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::int64_t c = 1;
    for (int j = 1; j <= k; ++j) {
        c = c * (n - k + j) / j;
        if (c < 0) throw std::overflow_error("binomial overflow");
    }
    return c;
}

// A set of user indices (1-based, at most 31 users), stored as a bitmask.
// Ordering is lexicographic on the sorted member list, so {1,4} < {2,3}.
class UserSet {
public:
    UserSet() = default;

    static UserSet of(std::initializer_list<int> users) {
        UserSet s;
        for (int u : users) s = s.with(u);
        return s;
    }

    static UserSet from_vector(const std::vector<int>& users) {
        UserSet s;
        for (int u : users) s = s.with(u);
        return s;
    }

    // {1, 2, ..., k}
    static UserSet first(int k) {
        UserSet s;
        for (int u = 1; u <= k; ++u) s = s.with(u);
        return s;
    }

    bool contains(int user) const { return (bits_ >> bit(user)) & 1u; }
    bool empty() const { return bits_ == 0; }
    int size() const { return __builtin_popcount(bits_); }

    UserSet with(int user) const { return UserSet(bits_ | (1u << bit(user))); }
    UserSet without(int user) const { return UserSet(bits_ & ~(1u << bit(user))); }

    bool subset_of(const UserSet& other) const { return (bits_ & ~other.bits_) == 0; }

    UserSet intersect(const UserSet& other) const { return UserSet(bits_ & other.bits_); }
    UserSet unite(const UserSet& other) const { return UserSet(bits_ | other.bits_); }

    std::vector<int> members() const {
        std::vector<int> out;
        out.reserve(size());
        for (std::uint32_t b = bits_; b; b &= b - 1) out.push_back(__builtin_ctz(b) + 1);
        return out;
    }

    bool operator==(const UserSet& other) const { return bits_ == other.bits_; }
    bool operator!=(const UserSet& other) const { return bits_ != other.bits_; }

    // First differing user decides; a prefix sorts before its extensions.
    bool operator<(const UserSet& other) const {
        std::uint32_t diff = bits_ ^ other.bits_;
        if (diff == 0) return false;
        int p = __builtin_ctz(diff);
        std::uint32_t above = ~std::uint32_t{0} << (p + 1);
        if (bits_ & (1u << p)) return (other.bits_ & above) != 0;
        return (bits_ & above) == 0;
    }

    std::string to_string() const {
        std::string out = "{";
        bool sep = false;
        for (int u : members()) {
            if (sep) out += ",";
            out += std::to_string(u);
            sep = true;
        }
        return out + "}";
    }

    std::uint32_t raw_bits() const { return bits_; }

private:
    explicit UserSet(std::uint32_t bits) : bits_(bits) {}

    static int bit(int user) {
        if (user < 1 || user > 31) throw std::invalid_argument("user index out of range [1,31]");
        return user - 1;
    }

    std::uint32_t bits_ = 0;
};

// All size-k subsets of `universe`, in lexicographic order.
inline std::vector<UserSet> subsets_of_size(const UserSet& universe, int k) {
    std::vector<int> pool = universe.members();
    int n = static_cast<int>(pool.size());
    std::vector<UserSet> out;
    if (k < 0 || k > n) return out;
    std::vector<int> idx(k);
    for (int j = 0; j < k; ++j) idx[j] = j;
    while (true) {
        UserSet s;
        for (int j : idx) s = s.with(pool[j]);
        out.push_back(s);
        int j = k - 1;
        while (j >= 0 && idx[j] == n - k + j) --j;
        if (j < 0) break;
        ++idx[j];
        for (int l = j + 1; l < k; ++l) idx[l] = idx[l - 1] + 1;
    }
    return out;
}

}  // namespace d2dcc
