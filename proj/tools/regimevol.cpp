#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "regimevol/config.hpp"
#include "regimevol/error.hpp"
#include "regimevol/pipeline.hpp"
#include "regimevol/quantile_regression.hpp"
#include "regimevol/rng.hpp"
#include "regimevol/simulation.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& stage_name,
            const std::string& out_override, std::uint64_t seed_override, bool has_seed) {
    regimevol::ConfigErrors errors;
    regimevol::PipelineConfig config;
    try {
        config = regimevol::load_pipeline_config(config_path, errors);
    } catch (const regimevol::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    if (!errors.empty()) {
        for (const auto& [key, message] : errors) {
            std::cerr << "config error: " << key << ": " << message << "\n";
        }
        return 1;
    }
    if (!out_override.empty()) config.output_dir = out_override;
    if (has_seed) config.seed = seed_override;

    regimevol::PipelineStage stage = regimevol::PipelineStage::All;
    try {
        stage = regimevol::stage_from_string(stage_name);
    } catch (const regimevol::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    regimevol::PipelineResult result = regimevol::run_pipeline(config, stage);
    if (result.exit_code != 0) {
        std::cerr << "pipeline failed: " << result.error << "\n";
        return result.exit_code;
    }
    std::cout << "wrote " << result.artifacts.size() << " artifacts to "
              << config.output_dir.string() << "\n";
    return 0;
}

int cmd_simulate(const std::string& scenario, const std::string& out, std::uint64_t seed,
                 const std::string& scenario_config) {
    std::string name = scenario;
    std::string directory = out;
    std::uint64_t use_seed = seed;
    if (!scenario_config.empty()) {
        regimevol::ConfigErrors errors;
        regimevol::ScenarioConfig loaded;
        try {
            loaded = regimevol::load_scenario_config(scenario_config, errors);
        } catch (const regimevol::Error& e) {
            std::cerr << e.what() << "\n";
            return 1;
        }
        if (!errors.empty()) {
            for (const auto& [key, message] : errors) {
                std::cerr << "config error: " << key << ": " << message << "\n";
            }
            return 1;
        }
        name = loaded.name;
        directory = loaded.output_dir.string();
        use_seed = loaded.seed;
    }
    try {
        auto config_path = regimevol::write_fixture(name, directory, use_seed);
        std::cout << "fixture written; config at " << config_path.string() << "\n";
        return 0;
    } catch (const regimevol::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}

// quick cross-checks of the solvers against their brute-force references
int cmd_test_oracle(std::uint64_t seed) {
    using namespace regimevol;
    int failures = 0;

    for (int instance = 0; instance < 25; ++instance) {
        Philox4x32 rng(seed, static_cast<std::uint64_t>(instance));
        int n = 6 + static_cast<int>(rng.uniform_below(4));   // 6..9
        int p = 1 + static_cast<int>(rng.uniform_below(3));   // 1..3
        Eigen::MatrixXd X(n, p);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            X(i, 0) = 1.0;
            for (int j = 1; j < p; ++j) X(i, j) = rng.normal();
            y(i) = rng.normal();
        }
        for (double tau : {0.25, 0.5, 0.75}) {
            BruteForceQr reference = brute_force_qr(y, X, tau);
            QrFit fit = fit_qr(y, X, tau);
            if (std::abs(fit.objective - reference.objective) > 1e-10) {
                std::cout << "FAIL qr instance=" << instance << " tau=" << tau
                          << " simplex=" << fit.objective
                          << " brute=" << reference.objective << "\n";
                ++failures;
            }
        }
    }

    {  // determinism of the counter generator
        Philox4x32 a(seed, 7), b(seed, 7);
        for (int i = 0; i < 1000; ++i) {
            if (a.next_u64() != b.next_u64()) {
                std::cout << "FAIL rng determinism\n";
                ++failures;
                break;
            }
        }
    }

    if (failures == 0) {
        std::cout << "PASS oracle cross-checks\n";
        return 0;
    }
    std::cout << failures << " oracle check(s) failed\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixed-frequency volatility toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string stage = "run";
    std::string out_dir;
    std::uint64_t seed = 42;
    bool seed_set = false;

    CLI::App* run = app.add_subcommand("run", "execute the estimation pipeline");
    run->add_option("--config", config_path, "pipeline config file")->required();
    run->add_option("--stage", stage, "run | diagnostics | garch | msr | qr");
    run->add_option("--out", out_dir, "override the output directory");
    run->add_option("--seed", seed, "override the master seed")->each([&](const std::string&) {
        seed_set = true;
    });

    std::string scenario = "pipeline-fixture";
    std::string sim_out = "fixture";
    std::string sim_config;
    std::uint64_t sim_seed = 42;
    CLI::App* simulate = app.add_subcommand("simulate", "write a simulation fixture");
    simulate->add_option("--scenario", scenario, "pipeline-fixture | pipeline-fixture-small");
    simulate->add_option("--out", sim_out, "fixture directory");
    simulate->add_option("--seed", sim_seed, "simulation seed");
    simulate->add_option("--config", sim_config, "scenario definition file ([scenario] section)");

    std::uint64_t oracle_seed = 1234;
    CLI::App* oracle = app.add_subcommand("test-oracle", "run brute-force cross-checks");
    oracle->add_option("--seed", oracle_seed, "seed for the random instances");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config_path, stage, out_dir, seed, seed_set);
    if (simulate->parsed()) return cmd_simulate(scenario, sim_out, sim_seed, sim_config);
    if (oracle->parsed()) return cmd_test_oracle(oracle_seed);
    return 1;
}
