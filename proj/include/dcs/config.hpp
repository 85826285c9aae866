#pragma once

// Flat key=value scenario configuration.
//
//   # comment
//   scenario = fig2a
//   lambda = 0.1
//   sweep = alpha_sq
//   sweep_start = 1
//   sweep_stop = 9
//   sweep_points = 9

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcs/dressed.hpp"
#include "dcs/dynamics.hpp"
#include "dcs/hilbert.hpp"
#include "dcs/propagators.hpp"

namespace dcs {

enum class Scenario { fig2a, fig2b, fig2c, fig2d, fig4, readout, custom };

std::string_view to_string(Scenario s);
/// Throws ConfigError naming the valid scenarios.
Scenario parse_scenario(std::string_view name, int line = 0);

struct Sweep {
    std::string name;
    double start = 0.0;
    double stop = 0.0;
    std::size_t points = 1;

    /// Evenly spaced, endpoints included.
    std::vector<double> values() const;
};

struct ScenarioConfig {
    Scenario scenario = Scenario::fig2a;

    double g = 1.0;
    double lambda = 0.1;
    double omega_c = 100.0;

    cplx epsilon = 0.05;
    /// Target |alpha|^2 for fixed-target scenarios.
    double alpha_sq = 4.0;
    /// custom: cavity drive detuning w_c - w_d (unset: chi) and duration (unset: from alpha_sq).
    std::optional<double> drive_detuning;
    std::optional<double> duration;
    Qubit initial_qubit = Qubit::g;

    std::size_t n_max = 40;
    /// Unset: 2 pi / (50 w_q).
    std::optional<double> dt;

    bool phase_correction = true;
    DriveForm drive_form = DriveForm::rwa;
    ExcitedInitial initial_state = ExcitedInitial::dressed_e0;
    DressedVariant basis = DressedVariant::exact;
    bool convergence = true;

    /// fig4: eta defaults to 0.05 w_q, w to w_q + chi (2|beta|^2 + 2), t_max to 2 pi / |eta|.
    std::optional<cplx> eta;
    double beta_sq = 4.0;
    std::optional<double> qubit_omega;
    std::optional<double> t_max;
    std::size_t samples = 201;

    std::optional<Sweep> sweep;
    std::optional<std::string> out;

    double omega_q() const { return omega_c + g / lambda; }
    SystemParams params() const { return SystemParams::from_lambda(omega_c, g, lambda); }
    double time_step() const;
    /// Explicit sweep, else the scenario default (a single point when there is none).
    Sweep effective_sweep() const;
    cplx qubit_drive_amplitude() const;
    double qubit_drive_frequency() const;

    /// Single-line summary of every field for CSV metadata.
    std::string describe() const;
};

/// Parses config text, then applies "key=value" overrides in order. Errors in the
/// text carry the 1-based line number. lambda, omega_q and delta all fix the
/// detuning: giving inconsistent values in the text is an error, while an override
/// of one of them replaces whatever the text said.
ScenarioConfig parse_config(std::string_view text, std::span<const std::string> overrides = {});

/// Reads the file and calls parse_config. Throws ConfigError when unreadable.
ScenarioConfig load_config(const std::string& path, std::span<const std::string> overrides = {});

}  // namespace dcs
