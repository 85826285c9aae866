#pragma once

// Scenario runner: sweeps, time series and CSV output.

#include <iosfwd>
#include <string>
#include <vector>

#include "dcs/config.hpp"
#include "dcs/dynamics.hpp"

namespace dcs {

struct ConvergenceEntry {
    std::string label;
    ConvergenceReport report;
};

struct ScenarioResult {
    Scenario scenario = Scenario::custom;
    std::string metadata;
    std::vector<std::string> columns;  ///< excluding the trailing converged flag
    std::vector<std::vector<double>> rows;
    std::vector<bool> converged;        ///< one per row
    std::vector<ConvergenceEntry> convergence;
    double wall_seconds = 0.0;

    std::size_t column(std::string_view name) const;
    double value(std::size_t row, std::string_view name) const { return rows.at(row).at(column(name)); }
    std::size_t unconverged_rows() const;
};

/// Sweep points run concurrently; rows come back in sweep order. Points that fail
/// the convergence check are kept and flagged.
ScenarioResult run_scenario(const ScenarioConfig& config);

/// "# scenario=..., params=..." line, header, then rows with 12 significant digits.
void write_csv(const ScenarioResult& result, std::ostream& out);
/// Throws Error on I/O failure.
void emit_csv(const ScenarioResult& result, const std::string& path);

/// dt actually used for a Hamiltonian: the configured step, or when none is set the
/// default 2 pi / (50 w_q) shrunk until the stability guard holds.
TimeGrid choose_grid(const ScenarioConfig& config, const TimeDependentHamiltonian& h, double t1);

}  // namespace dcs
