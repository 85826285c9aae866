#include "dcs/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numbers>
#include <ostream>

#include "dcs/diagnostics.hpp"
#include "dcs/errors.hpp"
#include "dcs/kernels.hpp"
#include "dcs/metrics.hpp"
#include "dcs/propagators.hpp"

namespace dcs {

namespace {

constexpr double kGuardTarget = 0.05;

struct PointSetup {
    SystemParams params;
    cplx epsilon;
    double alpha_sq;
};

PointSetup setup_for(const ScenarioConfig& cfg, const std::string& sweep_name, double value) {
    double lambda = cfg.lambda;
    cplx eps = cfg.epsilon;
    double alpha_sq = cfg.alpha_sq;
    if (sweep_name == "lambda") lambda = value;
    if (sweep_name == "epsilon") eps = std::polar(value, std::arg(cfg.epsilon));
    if (sweep_name == "alpha_sq") alpha_sq = value;
    if (std::abs(eps) == 0.0) throw ConfigError("epsilon must be nonzero for this scenario");
    if (!(alpha_sq > 0.0)) throw ConfigError("alpha_sq must be > 0");
    return {SystemParams::from_lambda(cfg.omega_c, cfg.g, lambda), eps, alpha_sq};
}

FockCutoff cutoff_for(const ScenarioConfig& cfg, double abs_alpha, std::size_t headroom) {
    const std::size_t needed = FockCutoff::required_levels(abs_alpha) + headroom;
    if (needed > cfg.n_max)
        warn("n_max raised from " + std::to_string(cfg.n_max) + " to " + std::to_string(needed) +
             " to satisfy the truncation rule");
    return FockCutoff(std::max(cfg.n_max, needed));
}

QuantumState initial_state(Qubit q, ExcitedInitial form, const DressedBasis& basis) {
    if (q == Qubit::g) return QuantumState::basis(basis.cutoff(), Qubit::g, 0);
    if (form == ExcitedInitial::bare_e0) return QuantumState::basis(basis.cutoff(), Qubit::e, 0);
    return dressed_state(Qubit::e, 0, basis);
}

struct DriveRun {
    QuantumState final_state;
    ConvergenceReport convergence;
};

DriveRun run_cavity_drive(const ScenarioConfig& cfg, const SystemParams& params, const DriveParams& drive,
                          FockCutoff cutoff, Qubit q, ExcitedInitial form) {
    auto factory = [&](FockCutoff cut) {
        const DressedBasis basis(params, cut, cfg.basis);
        return EvolutionProblem{lab_drive_hamiltonian(params, drive, cut, cfg.drive_form),
                                initial_state(q, form, basis)};
    };
    const auto problem = factory(cutoff);
    const TimeGrid grid = choose_grid(cfg, problem.hamiltonian, drive.duration);
    IntegrateOptions opts;
    opts.stride = grid.steps();
    auto traj = integrate(problem.hamiltonian, problem.initial, grid, opts);
    DriveRun run{traj.final_state(), {}};
    if (cfg.convergence) run.convergence = convergence_check(factory, cutoff, grid, &run.final_state);
    else run.convergence.converged = true;
    return run;
}

struct BranchResult {
    FidelityGap gap;
    double photons;
    bool converged;
    ConvergenceReport report;
};

BranchResult fig2_branch(const ScenarioConfig& cfg, const PointSetup& pt, Qubit q) {
    const double chi = pt.params.chi();
    const double delta = q == Qubit::g ? chi : -chi;
    const double T = std::sqrt(pt.alpha_sq) / std::abs(pt.epsilon);
    const DriveParams drive(pt.epsilon, pt.params.omega_c() - delta, T);
    const PhaseCorrection correction = cfg.phase_correction ? PhaseCorrection::on() : PhaseCorrection::off();
    const auto targets = target_amplitudes(drive, pt.params, correction);
    const cplx target = q == Qubit::g ? targets.g : targets.e;
    const FockCutoff cutoff = cutoff_for(cfg, std::abs(target), q == Qubit::e ? 1 : 0);
    const auto run = run_cavity_drive(cfg, pt.params, drive, cutoff, q, cfg.initial_state);
    const DressedBasis basis(pt.params, cutoff, cfg.basis);
    return {dressed_vs_bare_gap(run.final_state, target, q, basis), photon_number(run.final_state),
            run.convergence.converged, run.convergence};
}

std::string point_label(const std::string& name, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%.6g", name.c_str(), value);
    return buf;
}

// Evaluates body(i) for every sweep point in parallel and rethrows the first failure.
template <class Row>
std::vector<Row> sweep_parallel(std::size_t count, const std::function<Row(std::size_t)>& body) {
    std::vector<std::optional<Row>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    kernels::parallel_for(count, [&](std::size_t i) {
        try {
            slots[i] = body(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<Row> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

struct Fig2Row {
    BranchResult g;
    BranchResult e;
};

void run_fig2(const ScenarioConfig& cfg, ScenarioResult& result) {
    const Sweep sweep = cfg.effective_sweep();
    const auto values = sweep.values();
    const auto rows = sweep_parallel<Fig2Row>(values.size(), [&](std::size_t i) {
        const auto pt = setup_for(cfg, sweep.name, values[i]);
        return Fig2Row{fig2_branch(cfg, pt, Qubit::g), fig2_branch(cfg, pt, Qubit::e)};
    });

    if (cfg.scenario == Scenario::fig2b)
        result.columns = {sweep.name, "F_D_g", "F_g", "gap_g", "F_D_e", "F_e", "gap_e"};
    else
        result.columns = {sweep.name, "infidelity_D_g", "infidelity_D_e", "F_D_g", "F_D_e", "F_g", "F_e", "n_g", "n_e"};

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (cfg.scenario == Scenario::fig2b)
            result.rows.push_back({values[i], r.g.gap.dressed, r.g.gap.bare, r.g.gap.gap(), r.e.gap.dressed,
                                   r.e.gap.bare, r.e.gap.gap()});
        else
            result.rows.push_back({values[i], 1.0 - r.g.gap.dressed, 1.0 - r.e.gap.dressed, r.g.gap.dressed,
                                   r.e.gap.dressed, r.g.gap.bare, r.e.gap.bare, r.g.photons, r.e.photons});
        result.converged.push_back(r.g.converged && r.e.converged);
        result.convergence.push_back({point_label(sweep.name, values[i]) + " g", r.g.report});
        result.convergence.push_back({point_label(sweep.name, values[i]) + " e", r.e.report});
    }
}

struct ReadoutRow {
    double alpha_e_abs;
    double alpha_g_sq;
    double n_g;
    double n_e_dressed;
    double n_e_bare;
    double estimate;
    ConvergenceReport g_report;
    ConvergenceReport e_report;
};

void run_readout(const ScenarioConfig& cfg, ScenarioResult& result) {
    const Sweep sweep = cfg.effective_sweep();
    const auto values = sweep.values();
    const auto rows = sweep_parallel<ReadoutRow>(values.size(), [&](std::size_t i) {
        const auto pt = setup_for(cfg, sweep.name, values[i]);
        const double chi = pt.params.chi();
        const DriveParams drive(pt.epsilon, pt.params.omega_c() - chi, std::numbers::pi / chi);
        const auto alpha = alpha_ge(drive, pt.params);
        const FockCutoff cutoff = cutoff_for(cfg, std::abs(alpha.g), 2);
        const auto g_run = run_cavity_drive(cfg, pt.params, drive, cutoff, Qubit::g, cfg.initial_state);
        const auto e_run = run_cavity_drive(cfg, pt.params, drive, cutoff, Qubit::e, ExcitedInitial::dressed_e0);
        auto bare_cfg = cfg;
        bare_cfg.convergence = false;
        const auto e_bare = run_cavity_drive(bare_cfg, pt.params, drive, cutoff, Qubit::e, ExcitedInitial::bare_e0);
        const double alpha_g_sq = std::norm(cavity_amplitude(g_run.final_state));
        return ReadoutRow{std::abs(alpha.e),
                          alpha_g_sq,
                          photon_number(g_run.final_state),
                          photon_number(e_run.final_state),
                          photon_number(e_bare.final_state),
                          spurious_photon_estimate(pt.params.lambda(), alpha_g_sq),
                          g_run.convergence,
                          e_run.convergence};
    });
    result.columns = {sweep.name, "alpha_e_abs", "alpha_g_sq", "n_g",          "n_e_dressed",
                      "n_e_bare", "n_estimate",  "ratio_dressed", "ratio_bare"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        result.rows.push_back({values[i], r.alpha_e_abs, r.alpha_g_sq, r.n_g, r.n_e_dressed, r.n_e_bare, r.estimate,
                               r.n_e_dressed / r.estimate, r.n_e_bare / r.estimate});
        result.converged.push_back(r.g_report.converged && r.e_report.converged);
        result.convergence.push_back({point_label(sweep.name, values[i]) + " g", r.g_report});
        result.convergence.push_back({point_label(sweep.name, values[i]) + " e", r.e_report});
    }
}

struct Fig4Series {
    std::vector<double> times;
    std::vector<double> pe;
    std::vector<double> pe_closed;
    ConvergenceReport report;
};

void run_fig4(const ScenarioConfig& cfg, ScenarioResult& result) {
    const SystemParams params = cfg.params();
    const cplx eta = cfg.qubit_drive_amplitude();
    if (std::abs(eta) == 0.0 && !cfg.t_max) throw ConfigError("eta = 0 needs an explicit t_max");
    const double t_max = cfg.t_max.value_or(2.0 * std::numbers::pi / std::abs(eta));
    const double omega = cfg.qubit_drive_frequency();
    const double beta_abs = std::sqrt(cfg.beta_sq);
    const std::array<cplx, 2> betas{cplx(beta_abs, 0.0), cplx(0.0, beta_abs)};
    const FockCutoff cutoff = cutoff_for(cfg, beta_abs, 1);
    const QubitDriveParams qd(eta, omega, t_max);

    const auto series = sweep_parallel<Fig4Series>(2, [&](std::size_t i) {
        auto factory = [&](FockCutoff cut) {
            const DressedBasis basis(params, cut, cfg.basis);
            return EvolutionProblem{qubit_drive_lab_hamiltonian(params, qd, cut),
                                    dressed_coherent_state(Qubit::g, betas[i], basis)};
        };
        const auto problem = factory(cutoff);
        const TimeGrid grid = choose_grid(cfg, problem.hamiltonian, t_max);
        IntegrateOptions opts;
        opts.stride = std::max<std::size_t>(1, grid.steps() / (cfg.samples - 1));
        const auto traj = integrate(problem.hamiltonian, problem.initial, grid, opts);
        Fig4Series s;
        const std::size_t k_max = cutoff.n_max() - 2;
        for (std::size_t j = 0; j < traj.times.size(); ++j) {
            s.times.push_back(traj.times[j]);
            s.pe.push_back(excited_probability(traj.states[j]));
            s.pe_closed.push_back(pe_full(QubitDriveParams(eta, omega, traj.times[j]), params, betas[i], k_max));
        }
        if (cfg.convergence) s.report = convergence_check(factory, cutoff, grid, &traj.final_state());
        else s.report.converged = true;
        return s;
    });

    result.columns = {"t", "P_e_beta_real", "P_e_beta_imag", "P_e_closed_beta_real", "P_e_closed_beta_imag"};
    const bool ok = series[0].report.converged && series[1].report.converged;
    for (std::size_t j = 0; j < series[0].times.size(); ++j) {
        result.rows.push_back(
            {series[0].times[j], series[0].pe[j], series[1].pe[j], series[0].pe_closed[j], series[1].pe_closed[j]});
        result.converged.push_back(ok);
    }
    result.convergence.push_back({"beta real", series[0].report});
    result.convergence.push_back({"beta imag", series[1].report});
}

void run_custom(const ScenarioConfig& cfg, ScenarioResult& result) {
    const SystemParams params = cfg.params();
    if (std::abs(cfg.epsilon) == 0.0 && !cfg.duration) throw ConfigError("epsilon = 0 needs an explicit duration");
    const double delta = cfg.drive_detuning.value_or(params.chi());
    const double T = cfg.duration.value_or(std::sqrt(cfg.alpha_sq) / std::abs(cfg.epsilon));
    const DriveParams drive(cfg.epsilon, params.omega_c() - delta, T);
    const PhaseCorrection correction = cfg.phase_correction ? PhaseCorrection::on() : PhaseCorrection::off();
    const auto targets = target_amplitudes(drive, params, correction);
    const Qubit q = cfg.initial_qubit;
    const cplx target = q == Qubit::g ? targets.g : targets.e;
    const FockCutoff cutoff = cutoff_for(cfg, std::abs(target), q == Qubit::e ? 1 : 0);
    const auto run = run_cavity_drive(cfg, params, drive, cutoff, q, cfg.initial_state);
    const DressedBasis basis(params, cutoff, cfg.basis);
    const auto gap = dressed_vs_bare_gap(run.final_state, target, q, basis);
    result.columns = {"T", "alpha_target_abs", "F_D", "F", "gap", "P_e", "n", "entropy"};
    result.rows.push_back({T, std::abs(target), gap.dressed, gap.bare, gap.gap(), excited_probability(run.final_state),
                           photon_number(run.final_state), entanglement_entropy(run.final_state)});
    result.converged.push_back(run.convergence.converged);
    result.convergence.push_back({"custom", run.convergence});
}

}  // namespace

std::size_t ScenarioResult::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw Error("no column named '" + std::string(name) + "'");
}

std::size_t ScenarioResult::unconverged_rows() const {
    return static_cast<std::size_t>(std::count(converged.begin(), converged.end(), false));
}

TimeGrid choose_grid(const ScenarioConfig& config, const TimeDependentHamiltonian& h, double t1) {
    TimeGrid grid(0.0, t1, config.time_step());
    if (config.dt) return grid;
    const double guard = stability_guard_value(h, grid);
    if (guard < 0.1) return grid;
    return TimeGrid(0.0, t1, grid.dt() * kGuardTarget / guard);
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    ScenarioResult result;
    result.scenario = config.scenario;
    result.metadata = "# scenario=" + std::string(to_string(config.scenario)) + ", params=" + config.describe();
    switch (config.scenario) {
        case Scenario::fig2a:
        case Scenario::fig2b:
        case Scenario::fig2c:
        case Scenario::fig2d:
            run_fig2(config, result);
            break;
        case Scenario::readout:
            run_readout(config, result);
            break;
        case Scenario::fig4:
            run_fig4(config, result);
            break;
        case Scenario::custom:
            run_custom(config, result);
            break;
    }
    for (const auto& row : result.rows)
        for (double v : row)
            if (!std::isfinite(v)) throw NumericalError("scenario produced a non-finite value");
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

void write_csv(const ScenarioResult& result, std::ostream& out) {
    out << result.metadata << '\n';
    for (const auto& c : result.columns) out << c << ',';
    out << "converged\n";
    char buf[32];
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        for (double v : result.rows[i]) {
            std::snprintf(buf, sizeof buf, "%.12g", v);
            out << buf << ',';
        }
        out << (result.converged[i] ? "true" : "false") << '\n';
    }
}

void emit_csv(const ScenarioResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_csv(result, out);
    out.flush();
    if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace dcs
