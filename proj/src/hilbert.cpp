#include "dcs/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "dcs/diagnostics.hpp"
#include "dcs/errors.hpp"
#include "dcs/kernels.hpp"

namespace dcs {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kUnitaryTol = 1e-10;
constexpr double kNormTol = 1e-10;
constexpr double kLeakWarn = 1e-8;
constexpr double kCoherentLeakMax = 1e-10;

Matrix kron(const Matrix& qubit, const Matrix& cavity) {
    Matrix out(qubit.rows() * cavity.rows(), qubit.cols() * cavity.cols());
    for (Eigen::Index i = 0; i < qubit.rows(); ++i)
        for (Eigen::Index j = 0; j < qubit.cols(); ++j)
            out.block(i * cavity.rows(), j * cavity.cols(), cavity.rows(), cavity.cols()) =
                qubit(i, j) * cavity;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// SystemParams

SystemParams::SystemParams(double omega_c, double omega_q, double g)
    : omega_c_(omega_c), omega_q_(omega_q), g_(g), delta_(omega_q - omega_c), lambda_(0.0), chi_(0.0) {
    if (!std::isfinite(omega_c) || !std::isfinite(omega_q) || !std::isfinite(g))
        throw ConfigError("system frequencies must be finite");
    if (delta_ == 0.0) throw ConfigError("detuning omega_q - omega_c must be nonzero");
    lambda_ = g_ / delta_;
    if (std::abs(lambda_) >= 1.0)
        throw ConfigError("|lambda| = |g/delta| must be < 1 (got " + std::to_string(lambda_) + ")");
    if (std::abs(lambda_) > 0.3)
        warn("|lambda| = " + std::to_string(std::abs(lambda_)) + " > 0.3: dispersive regime questionable");
    chi_ = g_ * lambda_;
}

SystemParams SystemParams::from_frequencies(double omega_c, double omega_q, double g) {
    return SystemParams(omega_c, omega_q, g);
}

SystemParams SystemParams::from_lambda(double omega_c, double g, double lambda) {
    if (lambda == 0.0 || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and nonzero");
    return SystemParams(omega_c, omega_c + g / lambda, g);
}

// ---------------------------------------------------------------------------
// FockCutoff

FockCutoff::FockCutoff(std::size_t n_max) : n_max_(n_max) {
    if (n_max < 2) throw ConfigError("Fock cutoff n_max must be >= 2");
}

std::size_t FockCutoff::required_levels(double abs_alpha) {
    return static_cast<std::size_t>(std::ceil(abs_alpha * abs_alpha + 6.0 * abs_alpha + 10.0));
}

void FockCutoff::require_adequate(double abs_alpha, std::size_t headroom) const {
    if (!adequate_for(abs_alpha, headroom)) {
        std::ostringstream os;
        os << "Fock cutoff n_max=" << n_max_ << " too small for |alpha|=" << abs_alpha
           << " (need n_max >= " << required_levels(abs_alpha) + headroom << ")";
        throw TruncationError(os.str());
    }
}

// ---------------------------------------------------------------------------
// OperatorMatrix

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double hermiticity_defect(const Matrix& m) { return max_abs(m - m.adjoint()); }

double unitarity_defect(const Matrix& m) {
    return max_abs(m.adjoint() * m - Matrix::Identity(m.rows(), m.cols()));
}

OperatorMatrix::OperatorMatrix(Matrix entries, OperatorKind kind)
    : entries_(std::move(entries)), kind_(kind) {
    if (entries_.rows() != entries_.cols()) throw NumericalError("operator matrix must be square");
    switch (kind_) {
        case OperatorKind::hermitian:
            if (hermiticity_defect(entries_) >= kHermitianTol * std::max(1.0, max_abs(entries_)))
                throw NumericalError("operator tagged hermitian is not Hermitian");
            break;
        case OperatorKind::unitary:
            if (unitarity_defect(entries_) >= kUnitaryTol)
                throw NumericalError("operator tagged unitary is not unitary");
            break;
        case OperatorKind::general:
            break;
    }
}

OperatorMatrix OperatorMatrix::adjoint() const {
    return OperatorMatrix(entries_.adjoint(), kind_);
}

OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
    const bool unitary = lhs.kind() == OperatorKind::unitary && rhs.kind() == OperatorKind::unitary;
    return OperatorMatrix(lhs.matrix() * rhs.matrix(),
                          unitary ? OperatorKind::unitary : OperatorKind::general);
}

// ---------------------------------------------------------------------------
// QuantumState

QuantumState::QuantumState(FockCutoff cutoff, Vector amplitudes)
    : cutoff_(cutoff), amplitudes_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amplitudes_.size()) != cutoff_.dim())
        throw NumericalError("state length does not match 2*n_max");
    if (std::abs(amplitudes_.norm() - 1.0) > kNormTol)
        throw NumericalError("state is not normalized (norm = " + std::to_string(amplitudes_.norm()) + ")");
}

QuantumState QuantumState::basis(FockCutoff cutoff, Qubit q, std::size_t n) {
    if (n >= cutoff.n_max()) throw TruncationError("Fock level outside the cutoff");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(cutoff.dim()));
    v(static_cast<Eigen::Index>(cutoff.index(q, n))) = 1.0;
    return QuantumState(cutoff, std::move(v));
}

QuantumState QuantumState::normalized(FockCutoff cutoff, Vector amplitudes) {
    const double nrm = amplitudes.norm();
    if (!(nrm > 0.0)) throw NumericalError("cannot normalize the zero vector");
    amplitudes /= nrm;
    return QuantumState(cutoff, std::move(amplitudes));
}

double QuantumState::truncation_leak() const {
    const auto top = cutoff_.n_max() - 1;
    return std::norm(amplitude(Qubit::g, top)) + std::norm(amplitude(Qubit::e, top));
}

QuantumState QuantumState::with_fixed_global_phase() const {
    Eigen::Index imax = 0;
    amplitudes_.cwiseAbs().maxCoeff(&imax);
    const cplx a = amplitudes_(imax);
    if (std::abs(a) == 0.0) return *this;
    const cplx phase = std::conj(a) / std::abs(a);
    Vector v = amplitudes_ * phase;
    v(imax) = std::abs(a);
    return QuantumState(cutoff_, std::move(v));
}

QuantumState QuantumState::embedded(FockCutoff larger) const {
    if (larger.n_max() < cutoff_.n_max()) throw NumericalError("embedding target is smaller");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(larger.dim()));
    for (int q = 0; q < 2; ++q)
        for (std::size_t n = 0; n < cutoff_.n_max(); ++n)
            v(static_cast<Eigen::Index>(larger.index(Qubit(q), n))) = amplitude(Qubit(q), n);
    return QuantumState(larger, std::move(v));
}

QuantumState operator*(const OperatorMatrix& op, const QuantumState& psi) {
    if (op.dim() != psi.amplitudes_.size()) throw NumericalError("operator/state dimension mismatch");
    return QuantumState(psi.cutoff_, op.matrix() * psi.amplitudes_);
}

// ---------------------------------------------------------------------------
// Operators

Matrix cavity_annihilation(std::size_t n_max) {
    const auto n = static_cast<Eigen::Index>(n_max);
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

ModeOperators build_mode_operators(FockCutoff cutoff) {
    const auto n = static_cast<Eigen::Index>(cutoff.n_max());
    const Matrix id_c = Matrix::Identity(n, n);
    const Matrix id_q = Matrix::Identity(2, 2);
    const Matrix a_c = cavity_annihilation(cutoff.n_max());

    Matrix sz_q = Matrix::Zero(2, 2);
    sz_q(0, 0) = 1.0;
    sz_q(1, 1) = -1.0;
    Matrix sp_q = Matrix::Zero(2, 2);
    sp_q(1, 0) = 1.0;  // |e><g|

    Matrix a = kron(id_q, a_c);
    Matrix a_dag = a.adjoint();
    Matrix num = a_dag * a;
    return ModeOperators{
        OperatorMatrix(a, OperatorKind::general),
        OperatorMatrix(a_dag, OperatorKind::general),
        OperatorMatrix(num, OperatorKind::hermitian),
        OperatorMatrix(kron(sz_q, id_c), OperatorKind::hermitian),
        OperatorMatrix(kron(sp_q, id_c), OperatorKind::general),
        OperatorMatrix(kron(sp_q.adjoint(), id_c), OperatorKind::general),
    };
}

OperatorMatrix jc_hamiltonian(const SystemParams& p, FockCutoff cutoff) {
    const auto ops = build_mode_operators(cutoff);
    Matrix h = p.omega_c() * ops.n.matrix() - 0.5 * p.omega_q() * ops.sz.matrix();
    Matrix coupling = ops.sm.matrix() * ops.a_dag.matrix() + ops.sp.matrix() * ops.a.matrix();
    h += p.g() * coupling;
    return OperatorMatrix(std::move(h), OperatorKind::hermitian);
}

OperatorMatrix dispersive_hamiltonian(const SystemParams& p, FockCutoff cutoff) {
    const auto dim = static_cast<Eigen::Index>(cutoff.dim());
    Matrix h = Matrix::Zero(dim, dim);
    for (int q = 0; q < 2; ++q) {
        const double sz = q == 0 ? 1.0 : -1.0;
        for (std::size_t n = 0; n < cutoff.n_max(); ++n) {
            const double nn = static_cast<double>(n);
            const auto i = static_cast<Eigen::Index>(cutoff.index(Qubit(q), n));
            h(i, i) = p.omega_c() * nn - 0.5 * (p.omega_q() + p.chi()) * sz - p.chi() * sz * nn;
        }
    }
    return OperatorMatrix(std::move(h), OperatorKind::hermitian);
}

OperatorMatrix dispersive_unitary(const SystemParams& p, FockCutoff cutoff) {
    const auto ops = build_mode_operators(cutoff);
    Matrix generator = p.lambda() * (ops.sp.matrix() * ops.a.matrix() - ops.sm.matrix() * ops.a_dag.matrix());
    return expm_antihermitian(generator);
}

QuantumState undo_dispersive_frame(const SystemParams& params, const QuantumState& psi) {
    const double leak = psi.truncation_leak();
    if (leak > kLeakWarn)
        warn("truncation leak " + std::to_string(leak) + " on level n_max-1 before U_D^dag");
    return dispersive_unitary(params, psi.cutoff()).adjoint() * psi;
}

// ---------------------------------------------------------------------------
// Exponentials

HermitianSpectrum hermitian_spectrum(const OperatorMatrix& m) {
    if (m.kind() != OperatorKind::hermitian) throw NumericalError("spectrum requires a Hermitian operator");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix());
    if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigendecomposition failed");
    return HermitianSpectrum{solver.eigenvalues(), solver.eigenvectors()};
}

OperatorMatrix expm_hermitian(const OperatorMatrix& m, double t) {
    if (m.kind() != OperatorKind::hermitian &&
        hermiticity_defect(m.matrix()) >= kHermitianTol * std::max(1.0, max_abs(m.matrix())))
        throw NumericalError("expm_hermitian: input is not Hermitian");
    const OperatorMatrix h(m.matrix(), OperatorKind::hermitian);
    const auto spec = hermitian_spectrum(h);
    Vector phases(spec.values.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k) {
        const double angle = -t * spec.values(k);
        phases(k) = cplx(std::cos(angle), std::sin(angle));
    }
    return OperatorMatrix(kernels::spectral_reconstruct(spec.vectors, phases), OperatorKind::unitary);
}

OperatorMatrix expm_antihermitian(const Matrix& generator) {
    const double scale = std::max(1.0, max_abs(generator));
    if (max_abs(generator + generator.adjoint()) >= kHermitianTol * scale)
        throw NumericalError("expm_antihermitian: generator is not anti-Hermitian");
    // exp(G) = exp(-i M) with M = i G Hermitian.
    Matrix m = cplx(0.0, 1.0) * generator;
    m = 0.5 * (m + m.adjoint()).eval();
    return expm_hermitian(OperatorMatrix(std::move(m), OperatorKind::hermitian), 1.0);
}

Matrix cavity_displacement(cplx beta, std::size_t n_max) {
    const Matrix a = cavity_annihilation(n_max);
    return expm_antihermitian(beta * a.adjoint() - std::conj(beta) * a).matrix();
}

// ---------------------------------------------------------------------------
// Coherent states

std::vector<cplx> poisson_amplitudes(cplx beta, std::size_t count) {
    std::vector<cplx> c(count);
    if (count == 0) return c;
    c[0] = std::exp(-0.5 * std::norm(beta));
    for (std::size_t n = 1; n < count; ++n) c[n] = c[n - 1] * beta / std::sqrt(static_cast<double>(n));
    return c;
}

double poisson_tail(double mean, std::size_t count) {
    if (mean == 0.0) return count == 0 ? 1.0 : 0.0;
    // log P(count), then sum the decreasing-ratio tail directly
    const double k = static_cast<double>(count);
    double term = std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
    double sum = 0.0;
    for (std::size_t n = count; n < count + 100000; ++n) {
        sum += term;
        term *= mean / static_cast<double>(n + 1);
        if (static_cast<double>(n + 1) > mean && term < 1e-18 * std::max(sum, 1e-300)) break;
    }
    return std::min(1.0, sum);
}

QuantumState coherent_state(cplx beta, FockCutoff cutoff, Qubit qubit) {
    const double leak = poisson_tail(std::norm(beta), cutoff.n_max());
    if (leak >= kCoherentLeakMax) {
        std::ostringstream os;
        os << "coherent state |beta|=" << std::abs(beta) << " leaks " << leak << " beyond n_max="
           << cutoff.n_max() << " (need n_max >= " << FockCutoff::required_levels(std::abs(beta)) << ")";
        throw TruncationError(os.str());
    }
    const auto amps = poisson_amplitudes(beta, cutoff.n_max());
    Vector v = Vector::Zero(static_cast<Eigen::Index>(cutoff.dim()));
    for (std::size_t n = 0; n < cutoff.n_max(); ++n)
        v(static_cast<Eigen::Index>(cutoff.index(qubit, n))) = amps[n];
    return QuantumState::normalized(cutoff, std::move(v));
}

}  // namespace dcs
