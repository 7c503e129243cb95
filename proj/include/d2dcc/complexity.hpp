#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "d2dcc/core.hpp"
#include "d2dcc/plan.hpp"

namespace d2dcc {

struct ComplexityRestriction {
    int beta = 0;  // restricted-DoF beta; alpha is implied by P(tau+beta) = tau+alpha
    int P = 1;
};

// i size-(tau+1) D2D groups, m subfiles delivered through smaller groups.
struct ComplexityInput {
    int tau = 0;
    int L = 0;
    long long i = 0;
    long long m = 0;
    std::optional<ComplexityRestriction> restriction;

    // Effective parameter set after the restricted-DoF substitutions:
    // users tau+alpha, M_T = P*C(tau+beta, tau+1), W = C(tau+beta-1, tau).
    struct Effective {
        long long users;
        long long M_T;
        long long W;
    };
    Effective effective() const {
        int beta = restriction ? restriction->beta : L;
        int P = restriction ? restriction->P : 1;
        Effective e;
        e.users = static_cast<long long>(P) * (tau + beta);
        e.M_T = P * binomial(tau + beta, tau + 1);
        e.W = binomial(tau + beta - 1, tau);
        return e;
    }

    void validate() const {
        if (tau < 1 || L < 1) throw std::invalid_argument("complexity: tau and L must be >= 1");
        Effective e = effective();
        if (i < 0 || i > e.M_T) throw std::invalid_argument("complexity: i out of [0, M_T]");
        if (m < 0) throw std::invalid_argument("complexity: m must be nonnegative");
        if ((tau + 1) * (e.M_T - i) - m < 0)
            throw std::invalid_argument("complexity: more subfiles delivered than exist");
        if (e.W > 62) throw std::overflow_error("complexity: 2^W exceeds 64-bit range");
    }
};

struct ComplexityBounds {
    long long mac_min = 0, mac_max = 0;
    long long q_min = 0, q_max = 0;
    // intermediates, reproducible from the input (for audit)
    long long a = 0, b = 0, U = 0, X = 0, phi = 0, W = 0, M_T = 0;
    long long L_m = 0, U_m = 0;
};

namespace detail {

inline long long pow2m1(long long e) {
    if (e < 0) throw std::logic_error("complexity: negative exponent");
    if (e > 62) throw std::overflow_error("complexity: 2^e exceeds 64-bit range");
    return (1LL << e) - 1;
}

// Fills the shared intermediates of Theorems 1 and 2.
inline ComplexityBounds intermediates(const ComplexityInput& in) {
    in.validate();
    auto e = in.effective();
    ComplexityBounds out;
    out.W = e.W;
    out.M_T = e.M_T;
    long long remaining = (in.tau + 1) * (e.M_T - in.i) - in.m;
    out.a = remaining / e.users;
    out.b = remaining - out.a * e.users;
    out.U_m = e.M_T - in.i;
    out.L_m = (remaining + in.tau) / (in.tau + 1);  // ceil(remaining / (tau+1))
    if (in.i >= 1) {
        long long U = in.tau + 1;
        while (binomial(static_cast<int>(U), in.tau + 1) < in.i) ++U;
        out.U = U;
        out.X = in.i - binomial(static_cast<int>(U - 1), in.tau + 1);
        long long W_S = e.W - binomial(static_cast<int>(U - 2), in.tau);
        out.phi = in.m == 0 ? 0 : in.m / W_S;
    }
    return out;
}

}  // namespace detail

// Theorem 1: closed-form bounds on the number of MAC conditions in the DL
// beamformer design.
inline ComplexityBounds mac_bounds(const ComplexityInput& in) {
    ComplexityBounds out = detail::intermediates(in);
    auto e = in.effective();
    long long n = e.users;
    long long remaining = (in.tau + 1) * (e.M_T - in.i) - in.m;

    out.mac_min = (n - out.b) * detail::pow2m1(out.a) + out.b * detail::pow2m1(out.a + 1);
    if (remaining == 0) {
        out.mac_max = 0;
    } else if (in.i == 0) {
        out.mac_max = n * detail::pow2m1(e.W);  // no-D2D closed form
    } else {
        long long W_S = e.W - binomial(static_cast<int>(out.U - 2), in.tau);
        long long mid = std::max(out.U - (out.phi + 1), 0LL);
        out.mac_max = (n - out.U) * detail::pow2m1(e.W) + mid * detail::pow2m1(W_S) +
                      detail::pow2m1(e.W - out.X);
    }
    return out;
}

// Theorem 2: closed-form bounds on the number of quadratic terms in the SINR
// constraints. The labeled minimum follows the paper's limited-user
// construction and may numerically exceed the maximum for some inputs; both
// are reported exactly as defined.
inline ComplexityBounds quad_bounds(const ComplexityInput& in) {
    ComplexityBounds out = detail::intermediates(in);
    auto e = in.effective();
    long long n = e.users;
    long long remaining = (in.tau + 1) * (e.M_T - in.i) - in.m;

    if (remaining == 0) {
        out.q_min = out.q_max = 0;
        return out;
    }
    if (in.i == 0) {
        out.q_min = out.q_max = n * e.W * (e.M_T - e.W + 1);
        return out;
    }
    long long A1 = out.a, A2 = out.a + 1;
    long long B1 = out.U_m - A1 + 1, B2 = out.U_m - A2 + 1;
    out.q_max = out.b * A2 * B2 + (n - out.b) * A1 * B1;

    long long A1p = e.W;
    long long A2p = A1p - binomial(static_cast<int>(out.U - 2), in.tau);
    long long A3p = A1p - out.X;
    long long B1p = out.L_m - A1p + 1;
    long long B2p = out.L_m - A2p + 1;
    long long B3p = out.L_m - A3p + 1;
    long long mid = std::max(out.U - (out.phi + 1), 0LL);
    out.q_min = (n - out.U) * A1p * B1p + mid * A2p * B2p + A3p * B3p;
    return out;
}

// Exact counts by enumeration, independent of the closed forms: per user
// 2^{|Omega_k|} - 1 MAC conditions and, for each needed message, one signal
// term plus one per interfering message.
struct ActualCounts {
    long long mac = 0;
    long long quad = 0;
};

inline ActualCounts count_actual(const std::vector<int>& needed_counts, long long total_messages) {
    ActualCounts out;
    for (int n : needed_counts) {
        if (n < 0 || n > total_messages)
            throw std::invalid_argument("count_actual: bad needed count");
        out.mac += detail::pow2m1(n);
        out.quad += static_cast<long long>(n) * (total_messages - n + 1);
    }
    return out;
}

inline ActualCounts count_actual(const MessagePlan& plan) {
    std::vector<int> counts;
    counts.reserve(plan.K);
    for (int k = 1; k <= plan.K; ++k) counts.push_back(static_cast<int>(plan.omega(k).size()));
    return count_actual(counts, static_cast<long long>(plan.messages.size()));
}

struct SweepRow {
    long long i = 0, m = 0;
    long long mac_min = 0, mac_max = 0, q_min = 0, q_max = 0;
    double mac_min_norm = 0, mac_max_norm = 0, q_min_norm = 0, q_max_norm = 0;
};

// Bounds for i = 0..M_T at fixed m, normalized by the i = 0 row.
inline std::vector<SweepRow> sweep(int tau, int L, long long m = 0,
                                   std::optional<ComplexityRestriction> restriction = {},
                                   std::optional<long long> i_max = {}) {
    ComplexityInput base{tau, L, 0, m, restriction};
    base.validate();
    long long top = i_max.value_or(base.effective().M_T);
    std::vector<SweepRow> rows;
    double mac_min0 = 1, mac_max0 = 1, q_min0 = 1, q_max0 = 1;
    for (long long i = 0; i <= top; ++i) {
        ComplexityInput in{tau, L, i, m, restriction};
        if ((tau + 1) * (in.effective().M_T - i) - m < 0) break;
        ComplexityBounds mb = mac_bounds(in);
        ComplexityBounds qb = quad_bounds(in);
        SweepRow row;
        row.i = i;
        row.m = m;
        row.mac_min = mb.mac_min;
        row.mac_max = mb.mac_max;
        row.q_min = qb.q_min;
        row.q_max = qb.q_max;
        if (i == 0) {
            mac_min0 = std::max<double>(1.0, static_cast<double>(mb.mac_min));
            mac_max0 = std::max<double>(1.0, static_cast<double>(mb.mac_max));
            q_min0 = std::max<double>(1.0, static_cast<double>(qb.q_min));
            q_max0 = std::max<double>(1.0, static_cast<double>(qb.q_max));
        }
        row.mac_min_norm = row.mac_min / mac_min0;
        row.mac_max_norm = row.mac_max / mac_max0;
        row.q_min_norm = row.q_min / q_min0;
        row.q_max_norm = row.q_max / q_max0;
        rows.push_back(row);
    }
    return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << "i,m,mac_min,mac_max,q_min,q_max,mac_min_norm,mac_max_norm,q_min_norm,q_max_norm\n";
    char buf[64];
    for (const SweepRow& r : rows) {
        os << r.i << ',' << r.m << ',' << r.mac_min << ',' << r.mac_max << ',' << r.q_min << ','
           << r.q_max;
        for (double v : {r.mac_min_norm, r.mac_max_norm, r.q_min_norm, r.q_max_norm}) {
            std::snprintf(buf, sizeof(buf), "%.10g", v);
            os << ',' << buf;
        }
        os << '\n';
    }
}

}  // namespace d2dcc
