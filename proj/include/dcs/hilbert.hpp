#pragma once

// Truncated qubit (x) cavity Hilbert space.
//
// Basis ordering is |q, n> with the qubit as the slow index:
//   index(q, n) = q * n_max + n,   q = 0 (g), q = 1 (e).
//
// Sign convention: sigma_z |g> = +|g>, sigma_z |e> = -|e>. With
// H = w_c a^dag a - (w_q / 2) sigma_z + ..., |g,0> is the global ground state.
// sigma_plus = |e><g|, sigma_minus = |g><e|.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dcs {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

enum class Qubit : int { g = 0, e = 1 };

/// Physical frequencies in angular units with hbar = 1.
class SystemParams {
public:
    /// Validates delta != 0 and |lambda| < 1; warns when |lambda| > 0.3.
    static SystemParams from_frequencies(double omega_c, double omega_q, double g);
    /// omega_q = omega_c + g / lambda.
    static SystemParams from_lambda(double omega_c, double g, double lambda);

    double omega_c() const { return omega_c_; }
    double omega_q() const { return omega_q_; }
    double g() const { return g_; }
    double delta() const { return delta_; }
    double lambda() const { return lambda_; }
    double chi() const { return chi_; }

private:
    SystemParams(double omega_c, double omega_q, double g);

    double omega_c_;
    double omega_q_;
    double g_;
    double delta_;
    double lambda_;
    double chi_;
};

/// Number of retained cavity levels (0 .. n_max-1). Composite dimension is 2 n_max.
class FockCutoff {
public:
    explicit FockCutoff(std::size_t n_max);

    std::size_t n_max() const { return n_max_; }
    std::size_t dim() const { return 2 * n_max_; }
    std::size_t index(Qubit q, std::size_t n) const {
        return static_cast<std::size_t>(q) * n_max_ + n;
    }

    /// ceil(|alpha|^2 + 6|alpha| + 10): keeps the Poisson tail below 1e-9.
    static std::size_t required_levels(double abs_alpha);
    bool adequate_for(double abs_alpha, std::size_t headroom = 0) const {
        return n_max_ >= required_levels(abs_alpha) + headroom;
    }
    /// Throws TruncationError naming the required cutoff.
    void require_adequate(double abs_alpha, std::size_t headroom = 0) const;

    friend bool operator==(const FockCutoff&, const FockCutoff&) = default;

private:
    std::size_t n_max_;
};

enum class OperatorKind { hermitian, unitary, general };

/// Dense operator on the composite space. The kind tag is verified on construction:
/// hermitian needs max|M - M^dag| < 1e-12 (relative to max(1, max|M|)),
/// unitary needs max|M^dag M - I| < 1e-10.
class OperatorMatrix {
public:
    OperatorMatrix(Matrix entries, OperatorKind kind);

    const Matrix& matrix() const { return entries_; }
    OperatorKind kind() const { return kind_; }
    Eigen::Index dim() const { return entries_.rows(); }

    OperatorMatrix adjoint() const;
    cplx operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

private:
    Matrix entries_;
    OperatorKind kind_;
};

OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs);

double max_abs(const Matrix& m);
double hermiticity_defect(const Matrix& m);
double unitarity_defect(const Matrix& m);

/// Pure state over the composite basis. Construction checks the norm is 1 within 1e-10.
class QuantumState {
public:
    QuantumState(FockCutoff cutoff, Vector amplitudes);

    static QuantumState basis(FockCutoff cutoff, Qubit q, std::size_t n);
    /// Normalizes a nonzero vector; rejects the zero vector.
    static QuantumState normalized(FockCutoff cutoff, Vector amplitudes);

    const FockCutoff& cutoff() const { return cutoff_; }
    const Vector& amplitudes() const { return amplitudes_; }
    cplx amplitude(Qubit q, std::size_t n) const { return amplitudes_(cutoff_.index(q, n)); }
    double norm() const { return amplitudes_.norm(); }

    /// Weight on the highest retained Fock level (both qubit states).
    double truncation_leak() const;

    /// Multiplies by the phase that makes the largest-magnitude amplitude real positive.
    QuantumState with_fixed_global_phase() const;

    /// Zero-pads into a larger cutoff.
    QuantumState embedded(FockCutoff larger) const;

    friend QuantumState operator*(const OperatorMatrix& op, const QuantumState& psi);

private:
    FockCutoff cutoff_;
    Vector amplitudes_;
};

struct ModeOperators {
    OperatorMatrix a;
    OperatorMatrix a_dag;
    OperatorMatrix n;
    OperatorMatrix sz;
    OperatorMatrix sp;
    OperatorMatrix sm;
};

ModeOperators build_mode_operators(FockCutoff cutoff);

/// Cavity-only annihilation operator (n_max x n_max).
Matrix cavity_annihilation(std::size_t n_max);

/// H = w_c a^dag a - (w_q/2) sz + g (sm a^dag + sp a).
OperatorMatrix jc_hamiltonian(const SystemParams& params, FockCutoff cutoff);

/// H_D = w_c a^dag a - ((w_q + chi)/2) sz - chi sz a^dag a  (diagonal).
OperatorMatrix dispersive_hamiltonian(const SystemParams& params, FockCutoff cutoff);

/// U_D = exp{lambda (sp a - sm a^dag)}.
OperatorMatrix dispersive_unitary(const SystemParams& params, FockCutoff cutoff);

/// U_D^dag psi. Warns when psi has weight > 1e-8 on level n_max-1, where the
/// top doublet is clipped by the truncation.
QuantumState undo_dispersive_frame(const SystemParams& params, const QuantumState& psi);

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
struct HermitianSpectrum {
    RealVector values;
    Matrix vectors;
};

HermitianSpectrum hermitian_spectrum(const OperatorMatrix& m);

/// exp(-i t M) for Hermitian M. Non-Hermitian input throws.
OperatorMatrix expm_hermitian(const OperatorMatrix& m, double t);
/// exp(G) for anti-Hermitian G. Throws when G + G^dag != 0.
OperatorMatrix expm_antihermitian(const Matrix& generator);

/// Cavity displacement D(beta) = exp(beta a^dag - beta^* a) on n_max levels.
Matrix cavity_displacement(cplx beta, std::size_t n_max);

/// e^{-|beta|^2/2} beta^n / sqrt(n!) on (qubit, n). Error if the Poisson weight
/// beyond the cutoff is >= 1e-10; otherwise renormalized over the retained levels.
QuantumState coherent_state(cplx beta, FockCutoff cutoff, Qubit qubit = Qubit::g);

/// e^{-|beta|^2/2} beta^n / sqrt(n!) for n = 0 .. count-1 (unnormalized, stable recursion).
std::vector<cplx> poisson_amplitudes(cplx beta, std::size_t count);

/// Poisson weight not captured by levels 0 .. count-1.
double poisson_tail(double mean, std::size_t count);

}  // namespace dcs
