#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "d2dcc/combinatorics.hpp"
#include "d2dcc/core.hpp"
#include "d2dcc/plan.hpp"

namespace d2dcc {

struct SolverOptions {
    double rel_tol = 1e-4;   // SCA stop on relative objective improvement
    int max_iter = 50;       // SCA iterations
    int max_restarts = 3;    // fresh initializations on numerical failure
    double barrier_tol = 1e-10;
    int max_omega = 20;      // guard on per-user MAC enumeration
};

struct BeamformerSolution {
    std::vector<Eigen::VectorXcd> w;  // one per plan message (zero if pruned)
    double rate = 0.0;                // audited common rate, bits per channel use
    int iterations = 0;
    std::vector<double> trace;        // best audited rate after each SCA iteration
    bool converged = false;
    int restarts = 0;
};

struct MacConstraint {
    int user = 0;
    std::vector<int> subset;  // message indices, a nonempty subset of Omega_k
};

// All SIC decoding constraints: for every user, every nonempty subset of its
// needed messages.
inline std::vector<MacConstraint> enumerate_mac_constraints(const MessagePlan& plan,
                                                            int max_omega = 20) {
    std::vector<MacConstraint> out;
    for (int k = 1; k <= plan.K; ++k) {
        const auto& omega = plan.omega(k);
        int n = static_cast<int>(omega.size());
        if (n == 0) continue;
        if (n > max_omega) throw std::invalid_argument("MAC enumeration: |Omega_k| too large");
        for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
            MacConstraint c;
            c.user = k;
            for (int j = 0; j < n; ++j)
                if (mask & (1u << j)) c.subset.push_back(omega[j]);
            out.push_back(std::move(c));
        }
    }
    return out;
}

// Maximum ratio transmission with full power: sqrt(P_T) h / ||h||.
inline Eigen::VectorXcd mrt_unicast(const Eigen::VectorXcd& h, double P_T) {
    double n = h.norm();
    if (!(n > 0.0)) throw std::invalid_argument("mrt_unicast: zero channel");
    return std::sqrt(P_T) * (h / n);
}

// Common rate achieved by the given beamformers: min over users of the MAC
// minimum min_B (1/|B|) log2(1 + sum_B |h_k^H w_D|^2 / (N0 + interference)).
inline double audited_common_rate(const MessagePlan& plan, const Eigen::MatrixXcd& H,
                                  const std::vector<Eigen::VectorXcd>& w, double N0) {
    double rate = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int k = 1; k <= plan.K; ++k) {
        const auto& omega = plan.omega(k);
        if (omega.empty()) continue;
        any = true;
        Eigen::VectorXcd h = H.col(k - 1);
        double denom = N0;
        for (int j : plan.interference(k)) denom += std::norm(h.dot(w[j]));
        std::vector<double> gammas;
        gammas.reserve(omega.size());
        for (int j : omega) gammas.push_back(std::norm(h.dot(w[j])) / denom);
        std::sort(gammas.begin(), gammas.end());
        double prefix = 0.0;
        for (std::size_t j = 0; j < gammas.size(); ++j) {
            prefix += gammas[j];
            rate = std::min(rate, std::log2(1.0 + prefix) / static_cast<double>(j + 1));
        }
    }
    if (!any) return std::numeric_limits<double>::infinity();
    return rate;
}

namespace detail {

// Convex barrier subproblem for one SCA step. Works on prescaled channels
// (power budget 1, noise 1). Variables: [r, gamma..., beta..., wRe/wIm...].
class ScaSubproblem {
public:
    struct GammaSlot {
        int user_pos;   // index into active user list
        int msg;        // message index
        int var;        // gamma variable offset
        // expansion data
        double p = 0.0, q = 0.0;        // bilinear bound coefficients
        double lin_a = 0.0, lin_b = 0.0;  // 2*Re(conj(c_bar) * c): a,b weights
        double lin_const = 0.0;           // |c_bar|^2
    };

    ScaSubproblem(const MessagePlan& plan, const Eigen::MatrixXcd& Hs,
                  const std::vector<MacConstraint>& macs)
        : plan_(plan), Hs_(Hs), macs_(macs) {
        L_ = static_cast<int>(Hs.rows());
        nm_ = static_cast<int>(plan.messages.size());
        for (int k = 1; k <= plan_.K; ++k)
            if (!plan_.omega(k).empty()) active_.push_back(k);
        na_ = static_cast<int>(active_.size());
        for (int a = 0; a < na_; ++a) {
            int k = active_[a];
            for (int j : plan_.omega(k)) {
                GammaSlot s;
                s.user_pos = a;
                s.msg = j;
                s.var = 1 + static_cast<int>(slots_.size());
                gamma_index_[{k, j}] = static_cast<int>(slots_.size());
                slots_.push_back(s);
            }
        }
        nz_ = static_cast<int>(slots_.size());
        dim_ = 1 + nz_ + na_ + 2 * L_ * nm_;
        interference_.resize(na_);
        for (int a = 0; a < na_; ++a) interference_[a] = plan_.interference(active_[a]);
    }

    int dim() const { return dim_; }
    int var_r() const { return 0; }
    int var_gamma(int slot) const { return 1 + slot; }
    int var_beta(int a) const { return 1 + nz_ + a; }
    int var_w(int msg) const { return 1 + nz_ + na_ + 2 * L_ * msg; }
    int gamma_slot(int user, int msg) const { return gamma_index_.at({user, msg}); }
    int num_slots() const { return nz_; }
    int num_active() const { return na_; }
    const std::vector<int>& active_users() const { return active_; }

    Eigen::VectorXcd w_of(const Eigen::VectorXd& x, int msg) const {
        Eigen::VectorXcd w(L_);
        int base = var_w(msg);
        for (int l = 0; l < L_; ++l) w(l) = {x(base + l), x(base + L_ + l)};
        return w;
    }

    void set_w(Eigen::VectorXd& x, int msg, const Eigen::VectorXcd& w) const {
        int base = var_w(msg);
        for (int l = 0; l < L_; ++l) {
            x(base + l) = w(l).real();
            x(base + L_ + l) = w(l).imag();
        }
    }

    // (a, b) components of h_k^H w_D at x.
    std::pair<double, double> inner(const Eigen::VectorXd& x, int user, int msg) const {
        std::complex<double> c = Hs_.col(user - 1).dot(w_of(x, msg));
        return {c.real(), c.imag()};
    }

    // Refresh the linearization around the beamformers stored in x_bar.
    void set_expansion(const Eigen::VectorXd& x_bar) {
        for (GammaSlot& s : slots_) {
            int k = active_[s.user_pos];
            auto [a, b] = inner(x_bar, k, s.msg);
            double c2 = a * a + b * b;
            double beta_bar = x_bar(var_beta(s.user_pos));
            double gamma_bar = std::max(c2 / beta_bar * (1.0 - 1e-6), 1e-14);
            s.p = beta_bar / (2.0 * gamma_bar);
            s.q = gamma_bar / (2.0 * beta_bar);
            s.lin_a = a;
            s.lin_b = b;
            s.lin_const = c2;
        }
    }

    // All constraint values g_i(x) <= 0.
    void constraints(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
        int m = num_constraints();
        g.resize(m);
        int idx = 0;
        double r = x(var_r());
        for (const MacConstraint& c : macs_) {
            double s = 0.0;
            for (int j : c.subset) s += x(var_gamma(gamma_slot(c.user, j)));
            g(idx++) = r * c.subset.size() * kLn2 - std::log1p(s);
        }
        for (int a = 0; a < na_; ++a) {
            double acc = 1.0;  // prescaled noise
            for (int j : interference_[a]) {
                auto [ca, cb] = inner(x, active_[a], j);
                acc += ca * ca + cb * cb;
            }
            g(idx++) = acc - x(var_beta(a));
        }
        for (const GammaSlot& s : slots_) {
            double gam = x(var_gamma(s.var - 1));
            double bet = x(var_beta(s.user_pos));
            auto [ca, cb] = inner(x, active_[s.user_pos], s.msg);
            double rhs = 2.0 * (s.lin_a * ca + s.lin_b * cb) - s.lin_const;
            g(idx++) = s.p * gam * gam + s.q * bet * bet - rhs;
        }
        double pw = 0.0;
        for (int j = 0; j < nm_; ++j) {
            int base = var_w(j);
            for (int l = 0; l < 2 * L_; ++l) pw += x(base + l) * x(base + l);
        }
        g(idx++) = pw - 1.0;
        for (const GammaSlot& s : slots_) g(idx++) = -x(var_gamma(s.var - 1));
        if (idx != m) throw std::logic_error("constraint count mismatch");
    }

    int num_constraints() const {
        return static_cast<int>(macs_.size()) + na_ + nz_ + 1 + nz_;
    }

    // Newton minimization of -t*r - sum ln(-g_i), keeping x strictly feasible.
    bool newton(Eigen::VectorXd& x, double t) const {
        Eigen::VectorXd g, grad(dim_);
        Eigen::MatrixXd hess(dim_, dim_);
        for (int it = 0; it < 80; ++it) {
            grad.setZero();
            hess.setZero();
            grad(var_r()) = -t;
            if (!accumulate_barrier(x, grad, hess)) return false;
            hess.diagonal().array() += 1e-11;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
            if (ldlt.info() != Eigen::Success) return false;
            Eigen::VectorXd step = ldlt.solve(-grad);
            double decrement = -grad.dot(step);
            if (!std::isfinite(decrement)) return false;
            if (decrement * 0.5 < 1e-11) return true;
            double phi0 = objective(x, t);
            double alpha = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                Eigen::VectorXd xn = x + alpha * step;
                constraints(xn, g);
                if ((g.array() < 0.0).all()) {
                    double phin = objective(xn, t);
                    if (phin <= phi0 - 1e-4 * alpha * decrement) {
                        x = xn;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if (!accepted) return true;  // stalled at the current point
        }
        return true;
    }

    double objective(const Eigen::VectorXd& x, double t) const {
        Eigen::VectorXd g;
        constraints(x, g);
        double phi = -t * x(var_r());
        for (int i = 0; i < g.size(); ++i) {
            if (!(g(i) < 0.0)) return std::numeric_limits<double>::infinity();
            phi -= std::log(-g(i));
        }
        return phi;
    }

    bool feasible(const Eigen::VectorXd& x) const {
        Eigen::VectorXd g;
        constraints(x, g);
        return (g.array() < 0.0).all();
    }

    bool solve(Eigen::VectorXd& x, double barrier_tol) const {
        if (!feasible(x)) return false;
        double m = num_constraints();
        for (double t = 1.0; m / t > barrier_tol; t *= 20.0) {
            if (!newton(x, t)) return false;
            if (!x.allFinite()) return false;
        }
        return true;
    }

private:
    static constexpr double kLn2 = 0.6931471805599453;

    // Adds barrier gradient and Hessian contributions; false on domain exit.
    bool accumulate_barrier(const Eigen::VectorXd& x, Eigen::VectorXd& grad,
                            Eigen::MatrixXd& hess) const {
        double r = x(var_r());
        // MAC constraints
        for (const MacConstraint& c : macs_) {
            double s = 0.0;
            for (int j : c.subset) s += x(var_gamma(gamma_slot(c.user, j)));
            double cb = c.subset.size() * kLn2;
            double gval = r * cb - std::log1p(s);
            if (!(gval < 0.0)) return false;
            double inv = 1.0 / (-gval);
            double ds = -1.0 / (1.0 + s);
            // gradient of g: [cb at r, ds at each gamma]
            grad(var_r()) += inv * cb;
            for (int j : c.subset) grad(var_gamma(gamma_slot(c.user, j))) += inv * ds;
            // (1/s^2) outer product
            double inv2 = inv * inv;
            hess(var_r(), var_r()) += inv2 * cb * cb;
            for (int j : c.subset) {
                int vj = var_gamma(gamma_slot(c.user, j));
                hess(var_r(), vj) += inv2 * cb * ds;
                hess(vj, var_r()) += inv2 * cb * ds;
                for (int j2 : c.subset) {
                    int vj2 = var_gamma(gamma_slot(c.user, j2));
                    hess(vj, vj2) += inv2 * ds * ds;
                }
            }
            // (1/s) * Hessian of g: d2/dgamma2 of -log1p = +1/(1+s)^2
            double curz = inv * ds * ds;  // 1/(1+s)^2 * inv
            for (int j : c.subset)
                for (int j2 : c.subset)
                    hess(var_gamma(gamma_slot(c.user, j)), var_gamma(gamma_slot(c.user, j2))) +=
                        curz;
        }
        // interference constraints
        for (int a = 0; a < na_; ++a) {
            int k = active_[a];
            double acc = 1.0;
            for (int j : interference_[a]) {
                auto [ca, cb2] = inner(x, k, j);
                acc += ca * ca + cb2 * cb2;
            }
            double gval = acc - x(var_beta(a));
            if (!(gval < 0.0)) return false;
            double inv = 1.0 / (-gval);
            Eigen::VectorXd dg = Eigen::VectorXd::Zero(dim_);
            dg(var_beta(a)) = -1.0;
            for (int j : interference_[a]) add_abs2_gradient(x, k, j, 2.0, dg);
            rank_one_update(grad, hess, dg, inv);
            for (int j : interference_[a]) add_abs2_hessian(k, j, 2.0 * inv, hess);
        }
        // convexified SINR constraints
        for (const GammaSlot& s : slots_) {
            int k = active_[s.user_pos];
            double gam = x(var_gamma(s.var - 1));
            double bet = x(var_beta(s.user_pos));
            auto [ca, cb2] = inner(x, k, s.msg);
            double rhs = 2.0 * (s.lin_a * ca + s.lin_b * cb2) - s.lin_const;
            double gval = s.p * gam * gam + s.q * bet * bet - rhs;
            if (!(gval < 0.0)) return false;
            double inv = 1.0 / (-gval);
            Eigen::VectorXd dg = Eigen::VectorXd::Zero(dim_);
            dg(var_gamma(s.var - 1)) = 2.0 * s.p * gam;
            dg(var_beta(s.user_pos)) = 2.0 * s.q * bet;
            add_linear_gradient(k, s.msg, -2.0 * s.lin_a, -2.0 * s.lin_b, dg);
            rank_one_update(grad, hess, dg, inv);
            hess(var_gamma(s.var - 1), var_gamma(s.var - 1)) += inv * 2.0 * s.p;
            hess(var_beta(s.user_pos), var_beta(s.user_pos)) += inv * 2.0 * s.q;
        }
        // power constraint
        {
            double pw = 0.0;
            for (int j = 0; j < nm_; ++j) {
                int base = var_w(j);
                for (int l = 0; l < 2 * L_; ++l) pw += x(base + l) * x(base + l);
            }
            double gval = pw - 1.0;
            if (!(gval < 0.0)) return false;
            double inv = 1.0 / (-gval);
            Eigen::VectorXd dg = Eigen::VectorXd::Zero(dim_);
            for (int j = 0; j < nm_; ++j) {
                int base = var_w(j);
                for (int l = 0; l < 2 * L_; ++l) dg(base + l) = 2.0 * x(base + l);
            }
            rank_one_update(grad, hess, dg, inv);
            for (int j = 0; j < nm_; ++j) {
                int base = var_w(j);
                for (int l = 0; l < 2 * L_; ++l) hess(base + l, base + l) += inv * 2.0;
            }
        }
        // gamma >= 0
        for (const GammaSlot& s : slots_) {
            double gval = -x(var_gamma(s.var - 1));
            if (!(gval < 0.0)) return false;
            double inv = 1.0 / (-gval);
            grad(var_gamma(s.var - 1)) += -inv;
            hess(var_gamma(s.var - 1), var_gamma(s.var - 1)) += inv * inv;
        }
        return true;
    }

    // gradient of scale * |h_k^H w_j|^2 with respect to the w_j block
    void add_abs2_gradient(const Eigen::VectorXd& x, int user, int msg, double scale,
                           Eigen::VectorXd& dg) const {
        auto [a, b] = inner(x, user, msg);
        add_linear_gradient(user, msg, scale * a, scale * b, dg);
    }

    // adds wa * grad(a) + wb * grad(b) where a + ib = h_k^H w_j
    void add_linear_gradient(int user, int msg, double wa, double wb, Eigen::VectorXd& dg) const {
        const Eigen::VectorXcd h = Hs_.col(user - 1);
        int base = var_w(msg);
        for (int l = 0; l < L_; ++l) {
            double hr = h(l).real(), hi = h(l).imag();
            dg(base + l) += wa * hr - wb * hi;
            dg(base + L_ + l) += wa * hi + wb * hr;
        }
    }

    // Hessian of scale * |h_k^H w_j|^2 (constant in w): scale * (g1 g1^T + g2 g2^T)
    void add_abs2_hessian(int user, int msg, double scale, Eigen::MatrixXd& hess) const {
        const Eigen::VectorXcd h = Hs_.col(user - 1);
        int base = var_w(msg);
        for (int l = 0; l < L_; ++l) {
            double hr = h(l).real(), hi = h(l).imag();
            for (int l2 = 0; l2 < L_; ++l2) {
                double hr2 = h(l2).real(), hi2 = h(l2).imag();
                // grad(a) = [hr; hi], grad(b) = [-hi; hr]
                hess(base + l, base + l2) += scale * (hr * hr2 + hi * hi2);
                hess(base + l, base + L_ + l2) += scale * (hr * hi2 - hi * hr2);
                hess(base + L_ + l, base + l2) += scale * (hi * hr2 - hr * hi2);
                hess(base + L_ + l, base + L_ + l2) += scale * (hi * hi2 + hr * hr2);
            }
        }
    }

    static void rank_one_update(Eigen::VectorXd& grad, Eigen::MatrixXd& hess,
                                const Eigen::VectorXd& dg, double inv) {
        grad += inv * dg;
        hess.noalias() += (inv * inv) * dg * dg.transpose();
    }

    const MessagePlan& plan_;
    const Eigen::MatrixXcd& Hs_;
    const std::vector<MacConstraint>& macs_;
    int L_ = 0, nm_ = 0, na_ = 0, nz_ = 0, dim_ = 0;
    std::vector<int> active_;
    std::vector<std::vector<int>> interference_;
    std::vector<GammaSlot> slots_;
    std::map<std::pair<int, int>, int> gamma_index_;
};

}  // namespace detail

// Max-min common-rate multicast beamforming via successive convex
// approximation. H holds the downlink channels as columns (L x K). The
// returned rate is the audited MAC rate of the best iterate.
inline BeamformerSolution solve_max_min(const MessagePlan& plan, const Eigen::MatrixXcd& H,
                                        double P_T, double N0,
                                        const SolverOptions& opts = SolverOptions()) {
    if (plan.empty()) throw std::invalid_argument("solve_max_min: empty plan");
    if (!(P_T > 0.0) || !(N0 > 0.0))
        throw std::invalid_argument("solve_max_min: P_T and N0 must be positive");
    if (!H.allFinite()) throw std::invalid_argument("solve_max_min: non-finite channels");

    // Prune messages nobody needs; solve on the reduced plan.
    std::vector<int> keep;
    {
        std::vector<bool> used(plan.messages.size(), false);
        for (const auto& lst : plan.needed)
            for (int j : lst) used[j] = true;
        for (int j = 0; j < static_cast<int>(plan.messages.size()); ++j)
            if (used[j]) keep.push_back(j);
    }
    if (keep.empty()) throw std::invalid_argument("solve_max_min: no needed messages");
    MessagePlan reduced;
    reduced.K = plan.K;
    std::vector<int> remap(plan.messages.size(), -1);
    for (int j : keep) {
        remap[j] = static_cast<int>(reduced.messages.size());
        reduced.messages.push_back(plan.messages[j]);
    }
    reduced.needed.assign(plan.K, {});
    for (int k = 1; k <= plan.K; ++k)
        for (int j : plan.omega(k)) reduced.needed[k - 1].push_back(remap[j]);

    auto expand = [&](BeamformerSolution sol) {
        std::vector<Eigen::VectorXcd> full(plan.messages.size(),
                                           Eigen::VectorXcd::Zero(H.rows()));
        for (std::size_t j = 0; j < keep.size(); ++j) full[keep[j]] = sol.w[j];
        sol.w = std::move(full);
        return sol;
    };

    const int L = static_cast<int>(H.rows());
    const int nm = static_cast<int>(reduced.messages.size());
    std::vector<int> active = reduced.active_users();

    // Single remaining user: the optimum is an equal-power MRT split with
    // rate (1/n) log2(1 + ||h||^2 P_T / N0); exact, no iterations.
    if (active.size() == 1) {
        int k = active[0];
        int n = static_cast<int>(reduced.omega(k).size());
        BeamformerSolution sol;
        sol.w.assign(nm, Eigen::VectorXcd::Zero(L));
        Eigen::VectorXcd h = H.col(k - 1);
        for (int j : reduced.omega(k)) sol.w[j] = mrt_unicast(h, P_T / n);
        sol.rate = std::log2(1.0 + h.squaredNorm() * P_T / N0) / n;
        sol.iterations = 0;
        sol.trace = {sol.rate};
        sol.converged = true;
        return expand(sol);
    }

    // Prescale: channels absorb sqrt(P_T/N0), power budget becomes 1, noise 1.
    Eigen::MatrixXcd Hs = H * std::sqrt(P_T / N0);
    std::vector<MacConstraint> macs = enumerate_mac_constraints(reduced, opts.max_omega);
    detail::ScaSubproblem sub(reduced, Hs, macs);

    auto audit_scaled = [&](const Eigen::VectorXd& x) {
        std::vector<Eigen::VectorXcd> w(nm);
        for (int j = 0; j < nm; ++j) w[j] = sub.w_of(x, j);
        return audited_common_rate(reduced, Hs, w, 1.0);
    };

    BeamformerSolution best_overall;
    best_overall.rate = -std::numeric_limits<double>::infinity();

    for (int restart = 0; restart <= opts.max_restarts; ++restart) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(sub.dim());

        // Initial beams: per message, MRT towards its weakest needed user,
        // equal power split. Restarts blend in the strongest user.
        for (int j = 0; j < nm; ++j) {
            int weakest = -1, strongest = -1;
            for (int k : reduced.recipients(j)) {
                if (weakest < 0 || Hs.col(k - 1).norm() < Hs.col(weakest - 1).norm()) weakest = k;
                if (strongest < 0 || Hs.col(k - 1).norm() > Hs.col(strongest - 1).norm())
                    strongest = k;
            }
            Eigen::VectorXcd dir = Hs.col(weakest - 1);
            if (restart > 0)
                dir += (0.37 * restart) * Hs.col(strongest - 1) +
                       Eigen::VectorXcd::Constant(L, 1e-3 * restart);
            double n = dir.norm();
            if (!(n > 0.0)) dir = Eigen::VectorXcd::Ones(L), n = dir.norm();
            sub.set_w(x, j, std::sqrt((1.0 - 1e-9) / nm) * dir / n);
        }

        bool failed = false;
        double prev_sub_r = -std::numeric_limits<double>::infinity();
        BeamformerSolution sol;
        sol.rate = -std::numeric_limits<double>::infinity();
        sol.restarts = restart;

        for (int iter = 1; iter <= opts.max_iter && !failed; ++iter) {
            // Expansion around the current beams; dead inner products get a
            // tiny deterministic nudge so every gamma can stay positive.
            for (int j = 0; j < nm; ++j) {
                for (int k : reduced.recipients(j)) {
                    auto [a, b] = sub.inner(x, k, j);
                    if (a * a + b * b < 1e-18 * Hs.col(k - 1).squaredNorm()) {
                        Eigen::VectorXcd w = sub.w_of(x, j);
                        w += 1e-6 * Hs.col(k - 1) / Hs.col(k - 1).norm() *
                             std::max(w.norm(), 1e-6);
                        sub.set_w(x, j, w);
                    }
                }
            }
            // Renormalize inside the power budget.
            double pw = 0.0;
            for (int j = 0; j < nm; ++j) pw += sub.w_of(x, j).squaredNorm();
            if (pw >= 1.0) {
                double scale = std::sqrt((1.0 - 1e-9) / pw);
                for (int j = 0; j < nm; ++j) sub.set_w(x, j, sub.w_of(x, j) * scale);
            }
            // beta, gamma, r from direct evaluation with strict slack.
            for (int a = 0; a < sub.num_active(); ++a) {
                int k = sub.active_users()[a];
                double acc = 1.0;
                for (int j : reduced.interference(k)) {
                    auto [ca, cb] = sub.inner(x, k, j);
                    acc += ca * ca + cb * cb;
                }
                x(sub.var_beta(a)) = acc * (1.0 + 1e-9);
            }
            sub.set_expansion(x);
            for (int a = 0; a < sub.num_active(); ++a) {
                int k = sub.active_users()[a];
                for (int j : reduced.omega(k)) {
                    auto [ca, cb] = sub.inner(x, k, j);
                    double c2 = ca * ca + cb * cb;
                    x(sub.var_gamma(sub.gamma_slot(k, j))) =
                        std::max(c2 / x(sub.var_beta(a)) * (1.0 - 1e-6), 1e-15);
                }
            }
            double r0 = std::numeric_limits<double>::infinity();
            for (const MacConstraint& c : macs) {
                double s = 0.0;
                for (int j : c.subset) s += x(sub.var_gamma(sub.gamma_slot(c.user, j)));
                r0 = std::min(r0, std::log1p(s) / (c.subset.size() * 0.6931471805599453));
            }
            x(sub.var_r()) = r0 * (1.0 - 1e-7) - 1e-12;

            if (!sub.solve(x, opts.barrier_tol)) {
                failed = true;
                break;
            }

            double audited = audit_scaled(x);
            if (audited > sol.rate) {
                sol.rate = audited;
                sol.w.assign(nm, Eigen::VectorXcd());
                for (int j = 0; j < nm; ++j) sol.w[j] = sub.w_of(x, j) * std::sqrt(P_T);
            }
            sol.trace.push_back(sol.rate);
            sol.iterations = iter;

            double sub_r = x(sub.var_r());
            if (iter > 1 && sub_r - prev_sub_r < opts.rel_tol * std::max(1.0, std::abs(sub_r))) {
                sol.converged = true;
                break;
            }
            prev_sub_r = sub_r;
        }

        if (!failed && sol.rate > -std::numeric_limits<double>::infinity()) {
            best_overall = sol;
            break;  // restart only on numerical failure
        }
        if (restart == opts.max_restarts)
            throw std::runtime_error("solve_max_min: no feasible iterate after restarts");
    }

    return expand(best_overall);
}

// DL phase duration C(K,tau,L) / r; zero for an empty plan, infinity flag for
// a zero rate.
inline double t_dl(const MessagePlan& plan, const BeamformerSolution& solution, int K, int tau,
                   int L, double F) {
    if (plan.empty() || plan.remaining_subfiles() == 0) return 0.0;
    if (!(solution.rate > 0.0)) return std::numeric_limits<double>::infinity();
    return subfile_size(K, tau, L, F) / solution.rate;
}

}  // namespace d2dcc
