#pragma once

// Dressed (Jaynes-Cummings) eigenstates and dressed coherent states.
//
// Doublet n >= 1 couples |g,n> and |e,n-1> with mixing angle theta_n:
//   dressed(g, n)   = cos(theta_n) |g,n>   - sin(theta_n) |e,n-1>
//   dressed(e, n-1) = cos(theta_n) |e,n-1> + sin(theta_n) |g,n>
// so the e-branch state labelled n uses theta_{n+1} and partner |g,n+1>.
// theta_0 = 0: |g,0> is dark.

#include <vector>

#include "dcs/hilbert.hpp"

namespace dcs {

enum class DressedVariant { exact, first_order };

/// exact: atan(2 lambda sqrt(n)) / 2; first_order: lambda sqrt(n). n = 0 gives 0.
double mixing_angle(std::size_t n, double lambda, DressedVariant variant);

class DressedBasis {
public:
    DressedBasis(SystemParams params, FockCutoff cutoff, DressedVariant variant);

    const SystemParams& params() const { return params_; }
    const FockCutoff& cutoff() const { return cutoff_; }
    DressedVariant variant() const { return variant_; }
    /// theta_n for n = 0 .. n_max-1.
    double angle(std::size_t n) const { return angles_.at(n); }

private:
    SystemParams params_;
    FockCutoff cutoff_;
    DressedVariant variant_;
    std::vector<double> angles_;
};

/// Throws TruncationError when the partner level lies outside the cutoff.
QuantumState dressed_state(Qubit q, std::size_t n, const DressedBasis& basis);

/// e^{-|alpha|^2/2} sum_n alpha^n / sqrt(n!) dressed(q, n). The e-branch needs one
/// extra level for the partner |g,n+1>.
QuantumState dressed_coherent_state(Qubit q, cplx alpha, const DressedBasis& basis);

struct QubitAmplitudes {
    cplx c_g;
    cplx c_e;
};

/// (1, -lambda beta) / sqrt(1 + lambda^2 |beta|^2): reduced qubit of dressed(g, beta)
/// at lowest nontrivial order. Warns when |lambda beta| >= 0.5.
QubitAmplitudes effective_qubit_state(cplx beta, double lambda);

/// q0 = i beta^* lambda / T. Throws ConfigError for T <= 0.
cplx effective_drive_strength(cplx beta, double lambda, double duration);

}  // namespace dcs
