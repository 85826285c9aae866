#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dcs/config.hpp"
#include "dcs/errors.hpp"
#include "dcs/scenario.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kNumericalFailure = 2 };

void print_convergence(const dcs::ScenarioResult& result) {
    std::printf("%-28s %20s %20s %s\n", "point", "F(dt/2)", "F(2 n_max)", "converged");
    for (const auto& entry : result.convergence)
        std::printf("%-28s %20.15f %20.15f %s\n", entry.label.c_str(), entry.report.fidelity_half_dt,
                    entry.report.fidelity_double_nmax, entry.report.converged ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driven qubit-cavity simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string scenario;
    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "run a scenario and write CSV");
    run->add_option("--config", config_path, "config file (key = value)")->required();
    run->add_option("--out", out_path, "CSV output path (default: config 'out', else stdout)");
    run->add_option("--scenario", scenario, "override the scenario");
    run->add_option("--set", overrides, "override a config key, key=value (repeatable)");

    auto* check = app.add_subcommand("check", "print the convergence report only");
    check->add_option("--config", config_path, "config file (key = value)")->required();
    check->add_option("--set", overrides, "override a config key, key=value (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (!scenario.empty()) overrides.insert(overrides.begin(), "scenario=" + scenario);
        auto config = dcs::load_config(config_path, overrides);

        if (*check) {
            config.convergence = true;
            const auto result = dcs::run_scenario(config);
            print_convergence(result);
            bool all = true;
            for (const auto& entry : result.convergence) all = all && entry.report.converged;
            return all ? kOk : kNumericalFailure;
        }

        const auto result = dcs::run_scenario(config);
        const std::string target = !out_path.empty() ? out_path : config.out.value_or("");
        if (target.empty() || target == "-") dcs::write_csv(result, std::cout);
        else dcs::emit_csv(result, target);
        std::fprintf(stderr, "%s: %zu rows, %zu not converged, %.2f s\n", std::string(dcs::to_string(config.scenario)).c_str(),
                     result.rows.size(), result.unconverged_rows(), result.wall_seconds);
        return kOk;
    } catch (const dcs::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const dcs::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumericalFailure;
    } catch (const dcs::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumericalFailure;
    }
}
