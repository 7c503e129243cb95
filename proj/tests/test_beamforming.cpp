#include <catch2/catch_amalgamated.hpp>

#include "d2dcc/beamforming.hpp"
#include "d2dcc/d2d.hpp"

using namespace d2dcc;

namespace {

ScenarioConfig k3_config() {
    ScenarioConfig cfg;
    cfg.K = 3;
    cfg.N = 3;
    cfg.M = 1;
    cfg.L = 2;
    return cfg;
}

ScenarioConfig k4_config() {
    ScenarioConfig cfg;
    cfg.K = 4;
    cfg.N = 4;
    cfg.M = 2;
    cfg.L = 2;
    return cfg;
}

// Example-1 downlink plan: messages {1,3} and {2,3} (pair {1,2} offloaded).
MessagePlan example1_plan() {
    PlacementMap pm = place(3, 3, 1, 1);
    Demands d = Demands::distinct(3);
    D2DSchedule s = make_schedule({UserSet::of({1, 2})}, d, pm);
    return remaining_message_plan(s, d, pm);
}

// Example-2 downlink plan: three triples after the {1,2,3} exchange.
MessagePlan example2_plan() {
    PlacementMap pm = place(4, 4, 2, 2);
    Demands d = Demands::distinct(4);
    D2DSchedule s = make_schedule({UserSet::of({1, 2, 3})}, d, pm);
    return remaining_message_plan(s, d, pm);
}

double total_power(const BeamformerSolution& sol) {
    double p = 0.0;
    for (const auto& w : sol.w) p += w.squaredNorm();
    return p;
}

}  // namespace

TEST_CASE("MAC constraint enumeration counts") {
    SECTION("Example 2: 3+3+3+7 constraints") {
        auto macs = enumerate_mac_constraints(example2_plan());
        CHECK(macs.size() == 16);
        int user4 = 0;
        for (auto& c : macs)
            if (c.user == 4) ++user4;
        CHECK(user4 == 7);
    }
    SECTION("a single needed message gives one constraint") {
        MessagePlan plan;
        plan.K = 2;
        plan.messages = {UserSet::of({1, 2})};
        plan.needed = {{0}, {}};
        CHECK(enumerate_mac_constraints(plan).size() == 1);
    }
    SECTION("K=10, tau=1: 511 per user, 5110 in total") {
        MessagePlan plan = MessagePlan::full(10, 1);
        auto macs = enumerate_mac_constraints(plan);
        CHECK(macs.size() == 5110);
        int user1 = 0;
        for (auto& c : macs)
            if (c.user == 1) ++user1;
        CHECK(user1 == 511);
    }
}

TEST_CASE("mrt_unicast scales the channel direction to full power") {
    Eigen::VectorXcd h(2);
    h << 1.0, 0.0;
    Eigen::VectorXcd w = mrt_unicast(h, 4.0);
    CHECK_THAT(std::abs(w(0) - std::complex<double>(2.0, 0.0)),
               Catch::Matchers::WithinAbs(0, 1e-14));
    CHECK_THAT(std::abs(w(1)), Catch::Matchers::WithinAbs(0.0, 1e-14));

    RandomStream rng(3);
    for (int t = 0; t < 5; ++t) {
        Eigen::VectorXcd hr(3);
        for (int l = 0; l < 3; ++l) hr(l) = rng.complex_gaussian();
        Eigen::VectorXcd wm = mrt_unicast(hr, 2.5);
        CHECK_THAT(wm.squaredNorm(), Catch::Matchers::WithinRel(2.5, 1e-12));
        // MRT beats random unit-power beamformers
        double mrt_rate = std::log2(1.0 + std::norm(hr.dot(wm)));
        for (int s = 0; s < 1000; ++s) {
            Eigen::VectorXcd wr(3);
            for (int l = 0; l < 3; ++l) wr(l) = rng.complex_gaussian();
            wr *= std::sqrt(2.5) / wr.norm();
            CHECK(std::log2(1.0 + std::norm(hr.dot(wr))) <= mrt_rate + 1e-12);
        }
    }
    CHECK_THROWS_AS(mrt_unicast(Eigen::VectorXcd::Zero(2), 1.0), std::invalid_argument);
}

TEST_CASE("single message to a single user returns the exact MRT rate") {
    RandomStream rng(17);
    for (int t = 0; t < 10; ++t) {
        Eigen::MatrixXcd H(2, 2);
        for (int l = 0; l < 2; ++l)
            for (int k = 0; k < 2; ++k) H(l, k) = rng.complex_gaussian();
        MessagePlan plan;
        plan.K = 2;
        plan.messages = {UserSet::of({1, 2})};
        plan.needed = {{0}, {}};  // only user 1 still needs it
        double P_T = 2.0, N0 = 0.5;
        BeamformerSolution sol = solve_max_min(plan, H, P_T, N0);
        double expect = std::log2(1.0 + H.col(0).squaredNorm() * P_T / N0);
        CHECK_THAT(sol.rate, Catch::Matchers::WithinRel(expect, 1e-9));
        CHECK_THAT((sol.w[0] - mrt_unicast(H.col(0), P_T)).norm(),
                   Catch::Matchers::WithinAbs(0, 1e-9));
        CHECK(sol.converged);
    }
}

TEST_CASE("single remaining user with several messages splits power equally") {
    // The unicast corner: n messages to one user at rate (1/n) log2(1 + SNR),
    // so t_dl equals (n * subfile) / log2(1 + SNR).
    RandomStream rng(23);
    Eigen::MatrixXcd H(2, 4);
    for (int l = 0; l < 2; ++l)
        for (int k = 0; k < 4; ++k) H(l, k) = rng.complex_gaussian();
    PlacementMap pm = place(4, 4, 2, 2);
    Demands d = Demands::distinct(4);
    D2DSchedule s = make_schedule(
        {UserSet::of({1, 2}), UserSet::of({1, 3}), UserSet::of({2, 3})}, d, pm);
    MessagePlan plan = remaining_message_plan(s, d, pm);
    double P_T = 3.0, N0 = 1.0;
    BeamformerSolution sol = solve_max_min(plan, H, P_T, N0);
    double unicast = std::log2(1.0 + H.col(3).squaredNorm() * P_T / N0);
    CHECK_THAT(sol.rate, Catch::Matchers::WithinRel(unicast / 3.0, 1e-9));
    CHECK_THAT(total_power(sol), Catch::Matchers::WithinRel(P_T, 1e-9));
    double tdl = t_dl(plan, sol, 4, 2, 2, 1.0);
    CHECK_THAT(tdl, Catch::Matchers::WithinRel(0.5 / unicast, 1e-9));  // F/2 over the MRT rate
}

TEST_CASE("two decoupled users match a grid-search power split oracle") {
    // Orthogonal channels: the optimum is per-message MRT with a scalar power
    // split; brute-force the split on a grid.
    double a2 = 2.0, b2 = 0.6;  // ||h1||^2, ||h2||^2
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(2, 2);
    H(0, 0) = std::sqrt(a2);
    H(1, 1) = std::sqrt(b2);
    MessagePlan plan;
    plan.K = 2;
    plan.messages = {UserSet::of({1}), UserSet::of({2})};
    plan.needed = {{0}, {1}};
    double P_T = 4.0, N0 = 1.0;

    double oracle = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        double p = P_T * i / 1000.0;
        oracle = std::max(oracle, std::min(std::log2(1.0 + p * a2 / N0),
                                           std::log2(1.0 + (P_T - p) * b2 / N0)));
    }
    BeamformerSolution sol = solve_max_min(plan, H, P_T, N0);
    CHECK(sol.rate >= oracle - 2e-4);
    CHECK(sol.rate <= oracle + 1e-3);  // grid resolution slack
    CHECK(total_power(sol) <= P_T * (1.0 + 1e-8));
}

TEST_CASE("Example 1 solutions satisfy the stated rate bounds") {
    ScenarioConfig cfg = k3_config();
    MessagePlan plan = example1_plan();
    for (int t = 0; t < 5; ++t) {
        ChannelRealization chans = sample(cfg, 100 + t);
        double P_T = cfg.tx_power_dl();
        BeamformerSolution sol = solve_max_min(plan, chans.dl, P_T, cfg.N0);
        // recompute the Example-1 bounds at the returned beamformers
        Eigen::VectorXcd h3 = chans.h(3);
        double g31 = std::norm(h3.dot(sol.w[0])) / cfg.N0;
        double g32 = std::norm(h3.dot(sol.w[1])) / cfg.N0;
        CHECK(sol.rate <= 0.5 * std::log2(1.0 + g31 + g32) + 1e-9);
        CHECK(sol.rate <= std::log2(1.0 + g31) + 1e-9);
        CHECK(sol.rate <= std::log2(1.0 + g32) + 1e-9);
        double r11 = dl_point_rate(chans.h(1), sol.w[0], {sol.w[1]}, cfg.N0);
        double r21 = dl_point_rate(chans.h(2), sol.w[1], {sol.w[0]}, cfg.N0);
        CHECK(sol.rate <= r11 + 1e-9);
        CHECK(sol.rate <= r21 + 1e-9);
        // and the audit agrees with the reported rate
        CHECK_THAT(audited_common_rate(plan, chans.dl, sol.w, cfg.N0),
                   Catch::Matchers::WithinRel(sol.rate, 1e-12));
    }
}

TEST_CASE("solver invariants on random Example-2 instances") {
    ScenarioConfig cfg = k4_config();
    MessagePlan plan = example2_plan();
    for (int t = 0; t < 8; ++t) {
        ChannelRealization chans = sample(cfg, 500 + t);
        double P_T = cfg.tx_power_dl();
        BeamformerSolution sol = solve_max_min(plan, chans.dl, P_T, cfg.N0);
        double audited = audited_common_rate(plan, chans.dl, sol.w, cfg.N0);
        CHECK(audited >= sol.rate - 1e-6 * std::max(1.0, sol.rate));
        CHECK(total_power(sol) <= P_T * (1.0 + 1e-8));
        for (std::size_t j = 1; j < sol.trace.size(); ++j)
            CHECK(sol.trace[j] >= sol.trace[j - 1] - 1e-9);
        CHECK(sol.rate > 0.0);
    }
}

TEST_CASE("dropping a message never hurts the optimum (statistical)") {
    ScenarioConfig cfg = k4_config();
    MessagePlan full = remaining_message_plan(D2DSchedule{}, Demands::distinct(4),
                                              place(4, 4, 2, 2));
    // drop message {1,2,3}: exactly the Example-2 plan
    MessagePlan dropped = example2_plan();
    for (int t = 0; t < 20; ++t) {
        ChannelRealization chans = sample(cfg, 900 + t);
        double P_T = cfg.tx_power_dl();
        double with = solve_max_min(full, chans.dl, P_T, cfg.N0).rate;
        double without = solve_max_min(dropped, chans.dl, P_T, cfg.N0).rate;
        CHECK(without >= with - 1e-3);
    }
}

TEST_CASE("the achieved rate is invariant to channel/noise rescaling") {
    ScenarioConfig cfg = k3_config();
    MessagePlan plan = example1_plan();
    ChannelRealization chans = sample(cfg, 321);
    double P_T = cfg.tx_power_dl();
    BeamformerSolution base = solve_max_min(plan, chans.dl, P_T, cfg.N0);
    double c = 37.5;
    BeamformerSolution scaled = solve_max_min(plan, (c * chans.dl).eval(), P_T, cfg.N0 * c * c);
    CHECK_THAT(scaled.rate, Catch::Matchers::WithinRel(base.rate, 1e-6));
}

TEST_CASE("t_dl handles the edge cases") {
    MessagePlan empty;
    empty.K = 3;
    CHECK(t_dl(empty, BeamformerSolution{}, 3, 1, 2, 1.0) == 0.0);
    BeamformerSolution zero;
    zero.rate = 0.0;
    MessagePlan plan = example1_plan();
    CHECK(std::isinf(t_dl(plan, zero, 3, 1, 2, 1.0)));
    BeamformerSolution ok;
    ok.rate = 2.0;
    CHECK_THAT(t_dl(plan, ok, 3, 1, 2, 1.0), Catch::Matchers::WithinRel((1.0 / 3.0) / 2.0, 1e-12));
}

TEST_CASE("empty or unneeded plans are rejected") {
    MessagePlan empty;
    empty.K = 2;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Ones(2, 2);
    CHECK_THROWS_AS(solve_max_min(empty, H, 1.0, 1.0), std::invalid_argument);
    MessagePlan unneeded;
    unneeded.K = 2;
    unneeded.messages = {UserSet::of({1, 2})};
    unneeded.needed = {{}, {}};
    CHECK_THROWS_AS(solve_max_min(unneeded, H, 1.0, 1.0), std::invalid_argument);
}
