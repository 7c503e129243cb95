// Command line front end: Monte Carlo experiments, single trials, complexity
// sweeps, and the golden-vector selftest.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "d2dcc/complexity.hpp"
#include "d2dcc/selftest.hpp"
#include "d2dcc/simrunner.hpp"

namespace {

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    if (out.empty()) throw CLI::ValidationError("--values", "expected a comma-separated list");
    return out;
}

std::vector<d2dcc::Scheme> parse_schemes(const std::string& list) {
    if (list.empty()) return d2dcc::default_schemes();
    std::vector<d2dcc::Scheme> out;
    std::stringstream ss(list);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(d2dcc::scheme_from_name(tok));
    return out;
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    return file;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"D2D-assisted multi-antenna coded caching simulator"};
    app.require_subcommand(1);

    std::string config_path, out_path, sweep_var, values_list, scheme_list;
    std::uint64_t seed = 1;
    int trials = 200;

    CLI::App* run = app.add_subcommand("run", "run a Monte Carlo experiment sweep");
    run->add_option("--config", config_path, "scenario config file")->required();
    run->add_option("--sweep", sweep_var, "config key to sweep (e.g. inner_radius_m)");
    run->add_option("--values", values_list, "comma-separated sweep values");
    run->add_option("--trials", trials, "trials per sweep point");
    run->add_option("--seed", seed, "base seed; trial t uses seed + t");
    run->add_option("--scheme", scheme_list, "comma-separated scheme list");
    run->add_option("--out", out_path, "output CSV path (default stdout)");

    std::string trial_scheme = "hybrid-heuristic";
    CLI::App* trial = app.add_subcommand("trial", "run one seed and print a verbose report");
    trial->add_option("--config", config_path, "scenario config file")->required();
    trial->add_option("--seed", seed, "seed");
    trial->add_option("--scheme", trial_scheme, "scheme name");

    int tau = 1, L = 9, P = 0, beta = 0;
    long long m = 0;
    long long i_max = -1;
    CLI::App* cplx = app.add_subcommand("complexity", "beamformer complexity bound sweep");
    cplx->add_option("--tau", tau, "cache replication factor")->required();
    cplx->add_option("--L", L, "transmit antennas")->required();
    cplx->add_option("--m", m, "subfiles delivered via groups smaller than tau+1");
    cplx->add_option("--i-max", i_max, "truncate the sweep at this i");
    cplx->add_option("--P", P, "restricted-DoF partition count");
    cplx->add_option("--beta", beta, "restricted-DoF beta");
    cplx->add_option("--out", out_path, "output CSV path (default stdout)");

    app.add_subcommand("selftest", "check the golden coded-message vectors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors exit 2, --help exits 0
    }

    try {
        if (app.got_subcommand("selftest")) {
            return d2dcc::run_selftest(std::cout) ? 0 : 1;
        }
        if (app.got_subcommand("complexity")) {
            std::optional<d2dcc::ComplexityRestriction> restriction;
            if (P > 0 || beta > 0) {
                if (P < 1 || beta < 1) throw std::invalid_argument("--P and --beta go together");
                restriction = d2dcc::ComplexityRestriction{beta, P};
            }
            auto rows = d2dcc::sweep(tau, L, m, restriction,
                                     i_max >= 0 ? std::optional<long long>(i_max) : std::nullopt);
            std::ofstream file;
            d2dcc::write_sweep_csv(rows, open_output(out_path, file));
            return 0;
        }
        if (app.got_subcommand("trial")) {
            d2dcc::ScenarioConfig cfg = d2dcc::ScenarioConfig::from_file(config_path);
            cfg.validate();
            d2dcc::DeliveryReport rep =
                d2dcc::run_trial(cfg, seed, d2dcc::scheme_from_name(trial_scheme));
            std::cout << "scheme:        " << d2dcc::scheme_name(rep.scheme) << "\n"
                      << "seed:          " << rep.seed << "\n"
                      << "d2d groups:    ";
            if (rep.selected_groups.empty()) std::cout << "(none)";
            for (const auto& g : rep.selected_groups) std::cout << g.to_string() << " ";
            std::cout << "\n"
                      << "dl messages:   " << rep.dl_messages << "\n"
                      << "t_d2d:         " << rep.t_d2d << "\n"
                      << "t_dl:          " << rep.t_dl << "\n"
                      << "dl rate:       " << rep.common_rate << "\n"
                      << "sca iters:     " << rep.sca_iterations
                      << (rep.sca_converged ? "" : " (not converged)") << "\n"
                      << "per-user rate: " << rep.per_user_rate << "\n";
            return rep.solver_ok ? 0 : 1;
        }
        // run
        d2dcc::ScenarioConfig cfg = d2dcc::ScenarioConfig::from_file(config_path);
        cfg.validate();
        std::vector<double> values = values_list.empty() ? std::vector<double>{0.0}
                                                         : parse_values(values_list);
        if (!sweep_var.empty() && values_list.empty())
            throw std::invalid_argument("--sweep requires --values");
        auto rows = d2dcc::run_experiment(cfg, sweep_var, values, parse_schemes(scheme_list),
                                          trials, seed);
        std::ofstream file;
        d2dcc::write_experiment_csv(rows, open_output(out_path, file));
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
