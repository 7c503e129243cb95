#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "d2dcc/channel.hpp"

using namespace d2dcc;

namespace {

ScenarioConfig k3_config() {
    ScenarioConfig cfg;
    cfg.K = 3;
    cfg.N = 3;
    cfg.M = 1;
    cfg.L = 2;
    cfg.inner_radius_m = 10.0;
    return cfg;
}

}  // namespace

TEST_CASE("sampling is deterministic for a given seed") {
    ScenarioConfig cfg = k3_config();
    ChannelRealization a = sample(cfg, 42);
    ChannelRealization b = sample(cfg, 42);
    CHECK(a.dl == b.dl);
    CHECK(a.d2d == b.d2d);
    REQUIRE(a.positions.size() == b.positions.size());
    for (std::size_t i = 0; i < a.positions.size(); ++i) CHECK(a.positions[i] == b.positions[i]);
    ChannelRealization c = sample(cfg, 43);
    CHECK(a.dl != c.dl);
}

TEST_CASE("r = 0 co-locates all users at the distance floor") {
    ScenarioConfig cfg = k3_config();
    cfg.inner_radius_m = 0.0;
    ChannelRealization chans = sample(cfg, 7);
    for (std::size_t i = 1; i < chans.positions.size(); ++i)
        CHECK(chans.positions[i] == chans.positions[0]);
    // every D2D gain sits at the 1 m floor, so only fading remains
    for (int i = 1; i <= cfg.K; ++i)
        for (int k = 1; k <= cfg.K; ++k)
            if (i != k) CHECK(std::abs(chans.d2d_gain(i, k)) > 0.0);
}

TEST_CASE("calibration: 0 dB mean received SNR at the reference distances") {
    ScenarioConfig cfg = k3_config();
    cfg.fixed_reference_geometry = true;  // d_k = 100 m, d_ik = 10 m
    double P_T = cfg.tx_power_dl();
    double P_d = cfg.tx_power_d2d();
    double dl_acc = 0.0, d2d_acc = 0.0;
    const int draws = 10000;
    for (int s = 0; s < draws; ++s) {
        ChannelRealization chans = sample(cfg, 1000 + s);
        dl_acc += P_T * chans.h(1).squaredNorm() / (cfg.L * cfg.N0);
        d2d_acc += P_d * std::norm(chans.d2d_gain(1, 2)) / cfg.N0;
    }
    double dl_db = 10.0 * std::log10(dl_acc / draws);
    double d2d_db = 10.0 * std::log10(d2d_acc / draws);
    CHECK(std::abs(dl_db) < 0.2);
    CHECK(std::abs(d2d_db) < 0.2);
}

TEST_CASE("d2d rate follows the weakest receiver") {
    ScenarioConfig cfg = k3_config();
    cfg.P_d = 1.0;
    ChannelRealization chans;
    chans.dl = Eigen::MatrixXcd::Zero(2, 3);
    chans.d2d = Eigen::MatrixXcd::Zero(3, 3);
    chans.d2d(0, 1) = 1.0;             // SNR 1 towards user 2
    chans.d2d(0, 2) = std::sqrt(3.0);  // SNR 3 towards user 3

    CHECK_THAT(d2d_rate(1, UserSet::of({2}), chans, cfg), Catch::Matchers::WithinRel(1.0, 1e-12));
    // min rule: receivers at SNR {3, 1} give log2(2) = 1
    CHECK_THAT(d2d_rate(1, UserSet::of({2, 3}), chans, cfg),
               Catch::Matchers::WithinRel(1.0, 1e-12));
    CHECK_THROWS_AS(d2d_rate(1, UserSet::of({1, 2}), chans, cfg), std::invalid_argument);
    CHECK_THROWS_AS(d2d_rate(1, UserSet(), chans, cfg), std::invalid_argument);
}

TEST_CASE("dl point rate matches a naive recomputation") {
    Eigen::VectorXcd h(2), w(2);
    h << std::complex<double>(1.0, 0.5), std::complex<double>(-0.25, 2.0);
    SECTION("orthogonal beam gives zero") {
        w << -std::conj(h(1)), std::conj(h(0));
        // h^H w = conj(h1)(-conj(h2)) + conj(h2)conj(h1) = 0
        CHECK(dl_point_rate(h, w, {}, 1.0) < 1e-12);
    }
    SECTION("unit received power over unit noise gives one bit") {
        w = h / h.norm();  // |h^H w|^2 = ||h||^2
        CHECK_THAT(dl_point_rate(h, w, {}, h.squaredNorm()),
                   Catch::Matchers::WithinRel(std::log2(2.0), 1e-12));
    }
    SECTION("random instance against scalar dot products") {
        RandomStream rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXcd h2(3), w2(3), i1(3), i2(3);
            for (int l = 0; l < 3; ++l) {
                h2(l) = rng.complex_gaussian();
                w2(l) = rng.complex_gaussian();
                i1(l) = rng.complex_gaussian();
                i2(l) = rng.complex_gaussian();
            }
            double n0 = 0.7;
            std::complex<double> sig{0, 0}, a{0, 0}, b{0, 0};
            for (int l = 0; l < 3; ++l) {
                sig += std::conj(h2(l)) * w2(l);
                a += std::conj(h2(l)) * i1(l);
                b += std::conj(h2(l)) * i2(l);
            }
            double expect = std::log2(1.0 + std::norm(sig) / (n0 + std::norm(a) + std::norm(b)));
            CHECK_THAT(dl_point_rate(h2, w2, {i1, i2}, n0),
                       Catch::Matchers::WithinRel(expect, 1e-12));
        }
    }
}

TEST_CASE("rates are monotone in transmit power") {
    ScenarioConfig lo = k3_config();
    ScenarioConfig hi = k3_config();
    lo.P_d = 0.5;
    hi.P_d = 2.0;
    ChannelRealization chans = sample(lo, 11);
    for (int i = 1; i <= 3; ++i)
        for (int k = 1; k <= 3; ++k)
            if (i != k)
                CHECK(d2d_rate(i, UserSet::of({k}), chans, lo) <=
                      d2d_rate(i, UserSet::of({k}), chans, hi));
}

TEST_CASE("config files parse with the documented keys") {
    std::istringstream in(
        "# scenario\n"
        "K = 4\n"
        "N = 4\n"
        "M = 2\n"
        "L = 2\n"
        "inner_radius_m = 5\n"
        "d2d_ref_snr_db = 3\n"
        "d2d_attenuated_pairs = 1-3,2-4\n"
        "d2d_attenuation_db = 10\n"
        "fixed_reference_geometry = true\n");
    ScenarioConfig cfg = ScenarioConfig::from_stream(in);
    cfg.validate();
    CHECK(cfg.K == 4);
    CHECK(cfg.tau() == 2);
    CHECK(cfg.inner_radius_m == 5.0);
    CHECK(cfg.d2d_attenuated_pairs.size() == 2);
    CHECK(cfg.fixed_reference_geometry);
    CHECK_THAT(cfg.tx_power_d2d(),
               Catch::Matchers::WithinRel(std::pow(10.0, 0.3) * 100.0, 1e-12));

    std::istringstream bad("no_such_key = 1\n");
    CHECK_THROWS_AS(ScenarioConfig::from_stream(bad), std::invalid_argument);
}

TEST_CASE("the K = tau + L regime guard rejects other configurations") {
    ScenarioConfig cfg = k3_config();
    cfg.L = 3;  // tau + L = 4 != K
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = k3_config();
    cfg.inner_radius_m = 500.0;  // exceeds the cell
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("attenuated pairs scale only the listed links") {
    ScenarioConfig base = k3_config();
    ScenarioConfig att = k3_config();
    att.d2d_attenuated_pairs = {{1, 2}};
    att.d2d_attenuation_db = 10.0;
    ChannelRealization a = sample(base, 99);
    ChannelRealization b = sample(att, 99);
    double factor = std::abs(b.d2d_gain(1, 2)) / std::abs(a.d2d_gain(1, 2));
    CHECK_THAT(factor, Catch::Matchers::WithinRel(std::pow(10.0, -0.5), 1e-9));
    CHECK_THAT(std::abs(b.d2d_gain(2, 3)),
               Catch::Matchers::WithinRel(std::abs(a.d2d_gain(2, 3)), 1e-12));
}
