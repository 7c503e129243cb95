#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "d2dcc/core.hpp"

namespace d2dcc {

struct RestrictedDof {
    int alpha = 0;
    int beta = 0;
    int P = 1;
};

// Scenario parameters. Reference SNRs are defined at fixed distances: the DL
// link is calibrated at 100 m, the D2D link at 10 m. N0 is 1 unless overridden.
struct ScenarioConfig {
    int K = 0;
    int N = 0;
    int M = 0;
    int L = 1;
    double F = 1.0;

    double cell_radius_m = 100.0;   // R
    double inner_radius_m = 10.0;   // r
    double n_dl = 3.0;
    double n_d2d = 2.0;
    double N0 = 1.0;
    double dl_ref_snr_db = 0.0;
    double d2d_ref_snr_db = 0.0;
    std::optional<double> P_T;  // explicit transmit powers override calibration
    std::optional<double> P_d;

    // Pin every user at the reference distances (d_k = 100 m, d_ik = 10 m)
    // instead of drawing positions; used for the SNR-sweep experiments.
    bool fixed_reference_geometry = false;
    std::vector<std::pair<int, int>> d2d_attenuated_pairs;
    double d2d_attenuation_db = 0.0;

    std::optional<RestrictedDof> restricted_dof;

    static constexpr double dl_ref_distance_m = 100.0;
    static constexpr double d2d_ref_distance_m = 10.0;
    static constexpr double min_distance_m = 1.0;  // floor against path-loss singularities

    int tau() const {
        long long num = static_cast<long long>(K) * M;
        if (N < 1 || num % N != 0 || num / N < 1)
            throw std::invalid_argument("tau = KM/N must be a positive integer");
        return static_cast<int>(num / N);
    }

    // E[P |h|^2 / N0] = 1 at the reference distance, with unit fading power
    // per complex dimension.
    double tx_power_dl() const {
        if (P_T) return *P_T;
        return N0 * std::pow(10.0, dl_ref_snr_db / 10.0) * std::pow(dl_ref_distance_m, n_dl);
    }
    double tx_power_d2d() const {
        if (P_d) return *P_d;
        return N0 * std::pow(10.0, d2d_ref_snr_db / 10.0) * std::pow(d2d_ref_distance_m, n_d2d);
    }

    void validate() const {
        int t = tau();
        if (L < 1) throw std::invalid_argument("L must be at least 1");
        if (t + L != K)
            throw std::invalid_argument(
                "this library requires K = tau + L; other regimes (orthogonal phases for "
                "K > tau+L, or replacing tau+L by K for K < tau+L) are not supported");
        if (cell_radius_m <= 0.0 || inner_radius_m < 0.0)
            throw std::invalid_argument("radii must be positive");
        if (inner_radius_m > cell_radius_m)
            throw std::invalid_argument("inner radius must not exceed the cell radius");
        if (N0 <= 0.0) throw std::invalid_argument("N0 must be positive");
        if (F <= 0.0) throw std::invalid_argument("F must be positive");
        for (auto [a, b] : d2d_attenuated_pairs)
            if (a < 1 || a > K || b < 1 || b > K || a == b)
                throw std::invalid_argument("attenuated pair indices must be distinct users in [K]");
    }

    static ScenarioConfig from_stream(std::istream& in);
    static ScenarioConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open config file: " + path);
        return from_stream(in);
    }

    // Assign one key (file syntax "key = value"); shared with the sweep driver.
    void set_key(const std::string& key, const std::string& value);
};

inline ScenarioConfig ScenarioConfig::from_stream(std::istream& in) {
    ScenarioConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                     ": empty key");
        cfg.set_key(key, value);
    }
    return cfg;
}

inline void ScenarioConfig::set_key(const std::string& key, const std::string& value) {
    auto as_int = [&] {
        std::size_t pos = 0;
        int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("bad integer for " + key);
        return v;
    };
    auto as_double = [&] {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("bad number for " + key);
        return v;
    };
    auto as_bool = [&] {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        throw std::invalid_argument("bad boolean for " + key);
    };

    if (key == "K") K = as_int();
    else if (key == "N") N = as_int();
    else if (key == "M") M = as_int();
    else if (key == "L") L = as_int();
    else if (key == "F") F = as_double();
    else if (key == "cell_radius_m") cell_radius_m = as_double();
    else if (key == "inner_radius_m") inner_radius_m = as_double();
    else if (key == "n_dl") n_dl = as_double();
    else if (key == "n_d2d") n_d2d = as_double();
    else if (key == "N0") N0 = as_double();
    else if (key == "dl_ref_snr_db") dl_ref_snr_db = as_double();
    else if (key == "d2d_ref_snr_db") d2d_ref_snr_db = as_double();
    else if (key == "P_T") P_T = as_double();
    else if (key == "P_d") P_d = as_double();
    else if (key == "fixed_reference_geometry") fixed_reference_geometry = as_bool();
    else if (key == "d2d_attenuation_db") d2d_attenuation_db = as_double();
    else if (key == "d2d_attenuated_pairs") {
        // e.g. "1-3,2-4"
        d2d_attenuated_pairs.clear();
        std::stringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            auto dash = tok.find('-');
            if (dash == std::string::npos)
                throw std::invalid_argument("d2d_attenuated_pairs expects entries like 1-3");
            d2d_attenuated_pairs.emplace_back(std::stoi(tok.substr(0, dash)),
                                              std::stoi(tok.substr(dash + 1)));
        }
    } else if (key == "restricted_dof") {
        // "alpha,beta,P"
        std::stringstream ss(value);
        std::string tok;
        std::vector<int> v;
        while (std::getline(ss, tok, ',')) v.push_back(std::stoi(tok));
        if (v.size() != 3) throw std::invalid_argument("restricted_dof expects alpha,beta,P");
        restricted_dof = RestrictedDof{v[0], v[1], v[2]};
    } else {
        throw std::invalid_argument("unknown config key: " + key);
    }
}

// Deterministic stream of uniforms and standard normals on top of mt19937_64.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

    double uniform01() {  // in (0, 1)
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
    }

    std::pair<double, double> gaussian_pair() {  // Box-Muller
        double u1 = uniform01();
        double u2 = uniform01();
        double rad = std::sqrt(-2.0 * std::log(u1));
        return {rad * std::cos(2.0 * M_PI * u2), rad * std::sin(2.0 * M_PI * u2)};
    }

    std::complex<double> complex_gaussian() {  // CN(0, 1)
        auto [a, b] = gaussian_pair();
        return {a * M_SQRT1_2, b * M_SQRT1_2};
    }

    Eigen::Vector2d disc_point(double radius) {  // uniform on the disc
        double rho = radius * std::sqrt(uniform01());
        double phi = 2.0 * M_PI * uniform01();
        return {rho * std::cos(phi), rho * std::sin(phi)};
    }

private:
    std::mt19937_64 eng_;
};

// One Monte Carlo draw: user positions, downlink channel vectors h_k (columns
// of `dl`), and D2D scalar gains h_ik in `d2d(i-1, k-1)`.
struct ChannelRealization {
    std::vector<Eigen::Vector2d> positions;  // BS at the origin
    Eigen::MatrixXcd dl;                     // L x K
    Eigen::MatrixXcd d2d;                    // K x K, diagonal unused

    Eigen::VectorXcd h(int user) const { return dl.col(user - 1); }
    std::complex<double> d2d_gain(int tx, int rx) const { return d2d(tx - 1, rx - 1); }
};

// Users are scattered uniformly on a disc of radius r whose center is drawn
// uniformly in a disc of radius R - r around the BS, so the BS-user distance
// spans (0, R] while any inter-user distance stays below 2r. Distances are
// floored at 1 m.
inline ChannelRealization sample(const ScenarioConfig& cfg, std::uint64_t seed) {
    RandomStream rng(seed);
    ChannelRealization out;
    const int K = cfg.K;
    const int L = cfg.L;

    std::vector<double> dist_bs(K, ScenarioConfig::dl_ref_distance_m);
    Eigen::MatrixXd dist_uu = Eigen::MatrixXd::Constant(K, K, ScenarioConfig::d2d_ref_distance_m);
    if (!cfg.fixed_reference_geometry) {
        double center_radius = std::max(cfg.cell_radius_m - cfg.inner_radius_m, 0.0);
        Eigen::Vector2d center = rng.disc_point(center_radius);
        out.positions.reserve(K);
        for (int k = 0; k < K; ++k)
            out.positions.push_back(center + rng.disc_point(cfg.inner_radius_m));
        for (int k = 0; k < K; ++k)
            dist_bs[k] = std::max(out.positions[k].norm(), ScenarioConfig::min_distance_m);
        for (int i = 0; i < K; ++i)
            for (int k = 0; k < K; ++k)
                if (i != k)
                    dist_uu(i, k) = std::max((out.positions[i] - out.positions[k]).norm(),
                                             ScenarioConfig::min_distance_m);
    }

    out.dl.resize(L, K);
    for (int k = 0; k < K; ++k) {
        double gain = std::pow(dist_bs[k], -cfg.n_dl / 2.0);
        for (int a = 0; a < L; ++a) out.dl(a, k) = gain * rng.complex_gaussian();
    }

    Eigen::MatrixXd atten = Eigen::MatrixXd::Ones(K, K);
    double factor = std::pow(10.0, -cfg.d2d_attenuation_db / 20.0);
    for (auto [a, b] : cfg.d2d_attenuated_pairs) {
        atten(a - 1, b - 1) = factor;
        atten(b - 1, a - 1) = factor;
    }

    out.d2d.resize(K, K);
    out.d2d.setZero();
    for (int i = 0; i < K; ++i)
        for (int k = 0; k < K; ++k)
            if (i != k)
                out.d2d(i, k) = std::pow(dist_uu(i, k), -cfg.n_d2d / 2.0) * atten(i, k) *
                                rng.complex_gaussian();
    return out;
}

// Multicast D2D rate from user i to `receivers`, limited by the weakest one:
// min_k log2(1 + P_d |h_ik|^2 / N0).
inline double d2d_rate(int i, const UserSet& receivers, const ChannelRealization& chans,
                       const ScenarioConfig& cfg) {
    if (receivers.empty()) throw std::invalid_argument("d2d_rate: no receivers");
    if (receivers.contains(i)) throw std::invalid_argument("d2d_rate: transmitter among receivers");
    double pd = cfg.tx_power_d2d();
    double rate = std::numeric_limits<double>::infinity();
    for (int k : receivers.members()) {
        double snr = pd * std::norm(chans.d2d_gain(i, k)) / cfg.N0;
        rate = std::min(rate, std::log2(1.0 + snr));
    }
    return rate;
}

// Single-stream downlink rate log2(1 + |h^H w|^2 / (N0 + sum |h^H w'|^2)).
inline double dl_point_rate(const Eigen::VectorXcd& h, const Eigen::VectorXcd& w,
                            const std::vector<Eigen::VectorXcd>& interferers, double N0) {
    if (h.size() != w.size()) throw std::invalid_argument("dl_point_rate: dimension mismatch");
    double signal = std::norm(h.dot(w));
    double denom = N0;
    for (const auto& wi : interferers) {
        if (wi.size() != h.size()) throw std::invalid_argument("dl_point_rate: dimension mismatch");
        denom += std::norm(h.dot(wi));
    }
    return std::log2(1.0 + signal / denom);
}

}  // namespace d2dcc
