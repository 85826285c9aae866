#include "dcs/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "dcs/diagnostics.hpp"
#include "dcs/errors.hpp"
#include "dcs/kernels.hpp"

namespace dcs {

namespace {

constexpr double kGuardLimit = 0.1;
constexpr double kNormDriftMax = 1e-10;
constexpr double kConvergenceThreshold = 1.0 - 1e-8;

cplx unit_phase(double angle) { return {std::cos(angle), std::sin(angle)}; }

// |q><q| (x) cavity_op
Matrix on_qubit_level(const Matrix& cavity_op, Qubit q) {
    const auto n = cavity_op.rows();
    Matrix out = Matrix::Zero(2 * n, 2 * n);
    const auto off = static_cast<Eigen::Index>(q) * n;
    out.block(off, off, n, n) = cavity_op;
    return out;
}

// w (a^dag a + (1 - sz)/2): w times the excitation number
RealVector excitation_frame(FockCutoff cutoff, double w) {
    RealVector r(static_cast<Eigen::Index>(cutoff.dim()));
    for (int q = 0; q < 2; ++q)
        for (std::size_t n = 0; n < cutoff.n_max(); ++n)
            r(static_cast<Eigen::Index>(cutoff.index(Qubit(q), n))) = w * static_cast<double>(n + q);
    return r;
}

// exp(-i dt H) psi. Small steps use a Taylor series on the vector, summed until the terms
// drop below double precision, after removing the mean diagonal as an exact phase.
Vector step_exponential(const Matrix& h, double dt, const Vector& psi) {
    const double shift = h.diagonal().real().mean();
    Matrix a = h;
    a.diagonal().array() -= shift;
    const double norm = a.cwiseAbs().colwise().sum().maxCoeff() * dt;
    if (norm > 0.5) return expm_hermitian(OperatorMatrix(h, OperatorKind::hermitian), dt).matrix() * psi;

    const cplx factor(0.0, -dt);
    Vector term = psi;
    Vector sum = psi;
    for (int k = 1; k <= 40; ++k) {
        term = (factor / static_cast<double>(k)) * (a * term);
        sum += term;
        if (term.norm() <= 1e-17 * sum.norm()) break;
    }
    return unit_phase(-shift * dt) * sum;
}

bool is_zero_frequency(double residual, double scale) {
    return std::abs(residual) <= 1e-12 * std::max(1.0, scale);
}

}  // namespace

TimeGrid::TimeGrid(double t0, double t1, double dt) : t0_(t0), t1_(t1) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step dt must be > 0");
    if (!(t1 >= t0)) throw ConfigError("time grid needs t1 >= t0");
    const double count = std::round((t1 - t0) / dt);
    steps_ = std::max<std::size_t>(1, static_cast<std::size_t>(count));
}

TimeGrid TimeGrid::refined(std::size_t factor) const {
    if (factor == 0) throw ConfigError("refinement factor must be positive");
    TimeGrid out = *this;
    out.steps_ = steps_ * factor;
    return out;
}

TimeDependentHamiltonian::TimeDependentHamiltonian(OperatorMatrix static_part, std::vector<DriveTerm> terms,
                                                   RealVector frame)
    : static_part_(std::move(static_part)), terms_(std::move(terms)), frame_(std::move(frame)) {
    if (static_part_.kind() != OperatorKind::hermitian)
        throw ConfigError("static part of a Hamiltonian must be Hermitian");
    const auto d = static_part_.dim();
    for (const auto& term : terms_) {
        if (term.op.rows() != d || term.op.cols() != d)
            throw ConfigError("drive operator dimension does not match the static part");
        if (!(term.t_off >= term.t_on)) throw ConfigError("drive window needs t_off >= t_on");
    }

    for (const auto& term : terms_) sparse_ops_.push_back(term.op.sparseView());
    static_in_frame_ = static_part_.matrix();

    // sample each window away from its edges
    for (const auto& term : terms_) {
        for (double f : {0.1234, 0.5, 0.8765}) {
            const double t = term.t_on + f * (term.t_off - term.t_on);
            const Matrix h = at(t);
            if (hermiticity_defect(h) > 1e-12 * std::max(1.0, max_abs(h)))
                throw ConfigError("time-dependent Hamiltonian is not Hermitian");
        }
    }

    frame_shift_.assign(terms_.size(), 0.0);
    if (!has_frame()) return;
    if (frame_.size() != d) throw ConfigError("frame generator dimension does not match the Hamiltonian");
    const double r_scale = std::max(1.0, frame_.cwiseAbs().maxCoeff());
    const double s_scale = std::max(1.0, max_abs(static_part_.matrix()));
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            if (std::abs(static_part_(i, j)) > 1e-14 * s_scale && std::abs(frame_(i) - frame_(j)) > 1e-9 * r_scale)
                throw ConfigError("frame generator does not commute with the static Hamiltonian");

    for (std::size_t k = 0; k < terms_.size(); ++k) {
        const Matrix& op = terms_[k].op;
        const double o_scale = std::max(1e-300, max_abs(op));
        bool found = false;
        double shift = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                if (std::abs(op(i, j)) <= 1e-14 * o_scale) continue;
                const double s = frame_(i) - frame_(j);
                if (!found) {
                    shift = s;
                    found = true;
                } else if (std::abs(s - shift) > 1e-9 * r_scale) {
                    throw ConfigError("drive operator has no single frequency under the frame generator");
                }
            }
        }
        frame_shift_[k] = shift;
    }
    static_in_frame_.diagonal() -= frame_.cast<cplx>();
}

Matrix TimeDependentHamiltonian::at(double t) const {
    Matrix h = static_part_.matrix();
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        const auto& term = terms_[k];
        if (term.active(t)) h += (term.amplitude * unit_phase(term.frequency * t)) * sparse_ops_[k];
    }
    return h;
}

Matrix TimeDependentHamiltonian::in_frame(double t) const {
    Matrix h = static_in_frame_;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        const auto& term = terms_[k];
        if (term.active(t)) h += (term.amplitude * unit_phase(residual_frequency(k) * t)) * sparse_ops_[k];
    }
    return h;
}

std::vector<double> TimeDependentHamiltonian::breakpoints(double t0, double t1) const {
    std::vector<double> out;
    for (const auto& term : terms_)
        for (double edge : {term.t_on, term.t_off})
            if (edge > t0 && edge < t1) out.push_back(edge);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

TimeDependentHamiltonian lab_drive_hamiltonian(const SystemParams& params, const DriveParams& drive,
                                               FockCutoff cutoff, DriveForm form) {
    const auto ops = build_mode_operators(cutoff);
    const double T = drive.duration;
    const double wd = drive.omega_d;
    const cplx eps = drive.epsilon;
    std::vector<DriveTerm> terms;
    terms.push_back({ops.a.matrix(), eps, wd, 0.0, T});
    terms.push_back({ops.a_dag.matrix(), std::conj(eps), -wd, 0.0, T});
    if (form == DriveForm::cosine) {
        terms.push_back({ops.a.matrix(), eps, -wd, 0.0, T});
        terms.push_back({ops.a_dag.matrix(), std::conj(eps), wd, 0.0, T});
    }
    return {jc_hamiltonian(params, cutoff), std::move(terms), excitation_frame(cutoff, wd)};
}

TimeDependentHamiltonian qubit_drive_lab_hamiltonian(const SystemParams& params, const QubitDriveParams& qd,
                                                     FockCutoff cutoff) {
    const auto ops = build_mode_operators(cutoff);
    std::vector<DriveTerm> terms;
    terms.push_back({ops.sp.matrix(), qd.eta, -qd.omega, 0.0, qd.tau});
    terms.push_back({ops.sm.matrix(), std::conj(qd.eta), qd.omega, 0.0, qd.tau});
    return {jc_hamiltonian(params, cutoff), std::move(terms), excitation_frame(cutoff, qd.omega)};
}

TimeDependentHamiltonian dispersive_interaction_hamiltonian(const SystemParams& params, const DriveParams& drive,
                                                            FockCutoff cutoff) {
    const Matrix a = cavity_annihilation(cutoff.n_max());
    const Matrix a_dag = a.adjoint();
    const double delta = drive.detuning(params);
    const double chi = params.chi();
    const double T = drive.duration;
    const cplx eps = drive.epsilon;
    std::vector<DriveTerm> terms;
    // sz = +1 on g, -1 on e
    terms.push_back({on_qubit_level(a, Qubit::g), eps, -(delta - chi), 0.0, T});
    terms.push_back({on_qubit_level(a_dag, Qubit::g), std::conj(eps), delta - chi, 0.0, T});
    terms.push_back({on_qubit_level(a, Qubit::e), eps, -(delta + chi), 0.0, T});
    terms.push_back({on_qubit_level(a_dag, Qubit::e), std::conj(eps), delta + chi, 0.0, T});
    const auto d = static_cast<Eigen::Index>(cutoff.dim());
    return {OperatorMatrix(Matrix::Zero(d, d), OperatorKind::hermitian), std::move(terms)};
}

TimeDependentHamiltonian dispersive_interaction_qubit_hamiltonian(const SystemParams& params,
                                                                  const QubitDriveParams& qd, FockCutoff cutoff) {
    const auto d = static_cast<Eigen::Index>(cutoff.dim());
    const double nu = qd.nu(params);
    std::vector<DriveTerm> terms;
    for (std::size_t k = 0; k < cutoff.n_max(); ++k) {
        Matrix sp = Matrix::Zero(d, d);
        sp(static_cast<Eigen::Index>(cutoff.index(Qubit::e, k)), static_cast<Eigen::Index>(cutoff.index(Qubit::g, k))) =
            1.0;
        const double x = nu + 2.0 * static_cast<double>(k) * params.chi();
        terms.push_back({sp, qd.eta, x, 0.0, qd.tau});
        terms.push_back({sp.adjoint(), std::conj(qd.eta), -x, 0.0, qd.tau});
    }
    return {OperatorMatrix(Matrix::Zero(d, d), OperatorKind::hermitian), std::move(terms)};
}

namespace {

struct Piece {
    double start;
    double end;
    std::vector<bool> active;
    bool constant;
};

// Splits [t0, t1] at window edges; within a piece the active set is fixed.
std::vector<Piece> pieces_of(const TimeDependentHamiltonian& h, const TimeGrid& grid) {
    std::vector<double> edges{grid.t0()};
    for (double b : h.breakpoints(grid.t0(), grid.t1())) edges.push_back(b);
    edges.push_back(grid.t1());
    const double tol = 1e-9 * grid.dt();

    std::vector<Piece> out;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        Piece piece{edges[p], edges[p + 1], std::vector<bool>(h.terms().size()), true};
        if (piece.end - piece.start <= tol) continue;
        const double t_mid = 0.5 * (piece.start + piece.end);
        for (std::size_t k = 0; k < h.terms().size(); ++k) {
            piece.active[k] = h.terms()[k].active(t_mid);
            if (piece.active[k] && !is_zero_frequency(h.residual_frequency(k), std::abs(h.terms()[k].frequency)))
                piece.constant = false;
        }
        out.push_back(std::move(piece));
    }
    return out;
}

double piece_guard(const TimeDependentHamiltonian& h, const Piece& piece, double dt) {
    const double t_mid = 0.5 * (piece.start + piece.end);
    const auto spectrum = hermitian_spectrum(OperatorMatrix(h.in_frame(t_mid), OperatorKind::hermitian));
    const double half_spread = 0.5 * (spectrum.values.maxCoeff() - spectrum.values.minCoeff());
    double max_freq = 0.0;
    for (std::size_t k = 0; k < h.terms().size(); ++k)
        if (piece.active[k]) max_freq = std::max(max_freq, std::abs(h.residual_frequency(k)));
    return dt * (half_spread + max_freq);
}

double guard_over(const TimeDependentHamiltonian& h, const std::vector<Piece>& pieces, double dt) {
    double guard = 0.0;
    for (const auto& piece : pieces)
        if (!piece.constant) guard = std::max(guard, piece_guard(h, piece, dt));
    return guard;
}

}  // namespace

double stability_guard_value(const TimeDependentHamiltonian& h, const TimeGrid& grid) {
    return guard_over(h, pieces_of(h, grid), grid.dt());
}

namespace {

class TrajectoryRecorder {
public:
    TrajectoryRecorder(const TimeDependentHamiltonian& h, FockCutoff cutoff, const TimeGrid& grid, std::size_t stride)
        : h_(h), cutoff_(cutoff), grid_(grid), stride_(stride) {}

    bool wants(std::size_t k) const { return k % stride_ == 0 || k == grid_.steps(); }

    void record(std::size_t k, const Vector& frame_state) {
        const double t = grid_.time(k);
        Vector lab = frame_state;
        if (h_.has_frame())
            for (Eigen::Index i = 0; i < lab.size(); ++i) lab(i) *= unit_phase(-h_.frame()(i) * t);
        out_.max_norm_drift = std::max(out_.max_norm_drift, std::abs(lab.norm() - 1.0));
        out_.times.push_back(t);
        out_.states.push_back(QuantumState::normalized(cutoff_, std::move(lab)));
    }

    Trajectory take() { return std::move(out_); }

private:
    const TimeDependentHamiltonian& h_;
    FockCutoff cutoff_;
    const TimeGrid& grid_;
    std::size_t stride_;
    Trajectory out_;
};

}  // namespace

Trajectory integrate(const TimeDependentHamiltonian& h, const QuantumState& psi0, const TimeGrid& grid,
                     const IntegrateOptions& options) {
    if (static_cast<Eigen::Index>(psi0.cutoff().dim()) != h.dim())
        throw ConfigError("initial state dimension does not match the Hamiltonian");
    const auto pieces = pieces_of(h, grid);
    const double guard = guard_over(h, pieces, grid.dt());
    if (options.enforce_guard && !(guard < kGuardLimit))
        throw NumericalError("stability guard violated (dt * spectral scale = " + std::to_string(guard) +
                             " >= 0.1); use a smaller dt");

    const std::size_t steps = grid.steps();
    const std::size_t stride = options.stride > 0 ? options.stride : (steps + 999) / 1000;
    const double tol = 1e-9 * grid.dt();

    TrajectoryRecorder recorder(h, psi0.cutoff(), grid, stride);
    Vector psi = psi0.amplitudes();
    if (h.has_frame())
        for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) *= unit_phase(h.frame()(i) * grid.t0());
    recorder.record(0, psi);

    std::map<std::vector<bool>, HermitianSpectrum> constant_spectra;
    std::size_t next_k = 1;  // first grid point not yet reached

    for (const auto& piece : pieces) {
        const double pa = piece.start;
        const double pb = piece.end;

        // grid points in (pa, pb]
        std::vector<std::size_t> ks;
        while (next_k <= steps && grid.time(next_k) <= pb + tol) ks.push_back(next_k++);

        if (piece.constant) {
            auto it = constant_spectra.find(piece.active);
            if (it == constant_spectra.end()) {
                const OperatorMatrix hc(h.in_frame(0.5 * (pa + pb)), OperatorKind::hermitian);
                it = constant_spectra.emplace(piece.active, hermitian_spectrum(hc)).first;
            }
            const auto& spec = it->second;
            const Vector coeffs = spec.vectors.adjoint() * psi;
            std::vector<double> times;
            std::vector<std::size_t> recorded;
            for (std::size_t k : ks)
                if (recorder.wants(k)) {
                    times.push_back(grid.time(k));
                    recorded.push_back(k);
                }
            const auto samples = kernels::evolve_samples(spec.vectors, spec.values, coeffs, times, pa);
            for (std::size_t j = 0; j < recorded.size(); ++j) recorder.record(recorded[j], samples[j]);
            const double end[] = {pb};
            psi = kernels::serial::evolve_samples(spec.vectors, spec.values, coeffs, end, pa)[0];
        } else {
            double t = pa;
            auto advance = [&](double t_next) {
                const double step = t_next - t;
                if (step <= tol) return;
                psi = step_exponential(h.in_frame(t + 0.5 * step), step, psi);
                t = t_next;
            };
            for (std::size_t k : ks) {
                advance(std::min(grid.time(k), pb));
                if (recorder.wants(k)) recorder.record(k, psi);
            }
            advance(pb);
        }
    }

    auto out = recorder.take();
    out.guard_value = guard;
    if (out.max_norm_drift > kNormDriftMax)
        warn("norm drift " + std::to_string(out.max_norm_drift) + " exceeds 1e-10");
    return out;
}

namespace {

double overlap_fidelity(const QuantumState& a, const QuantumState& b) {
    if (a.cutoff().n_max() < b.cutoff().n_max()) return overlap_fidelity(a.embedded(b.cutoff()), b);
    if (b.cutoff().n_max() < a.cutoff().n_max()) return overlap_fidelity(a, b.embedded(a.cutoff()));
    return std::norm(a.amplitudes().dot(b.amplitudes()));
}

}  // namespace

ConvergenceReport convergence_check(const ProblemFactory& factory, FockCutoff cutoff, const TimeGrid& grid,
                                    const QuantumState* baseline_final) {
    ConvergenceReport report;
    report.threshold = kConvergenceThreshold;
    IntegrateOptions opts;
    opts.stride = grid.steps();

    std::optional<QuantumState> baseline;
    if (baseline_final) {
        baseline = *baseline_final;
    } else {
        try {
            const auto problem = factory(cutoff);
            baseline = integrate(problem.hamiltonian, problem.initial, grid, opts).final_state();
        } catch (const NumericalError&) {
            report.fidelity_half_dt = 0.0;
            report.fidelity_double_nmax = 0.0;
            return report;
        }
    }

    try {
        const auto problem = factory(cutoff);
        const auto fine = grid.refined(2);
        IntegrateOptions fine_opts;
        fine_opts.stride = fine.steps();
        report.fidelity_half_dt =
            overlap_fidelity(*baseline, integrate(problem.hamiltonian, problem.initial, fine, fine_opts).final_state());
    } catch (const NumericalError&) {
        report.fidelity_half_dt = 0.0;
    }
    try {
        const FockCutoff larger(2 * cutoff.n_max());
        const auto problem = factory(larger);
        report.fidelity_double_nmax =
            overlap_fidelity(*baseline, integrate(problem.hamiltonian, problem.initial, grid, opts).final_state());
    } catch (const NumericalError&) {
        report.fidelity_double_nmax = 0.0;
    }
    report.converged = report.fidelity_half_dt >= report.threshold && report.fidelity_double_nmax >= report.threshold;
    return report;
}

}  // namespace dcs
