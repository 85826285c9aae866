#pragma once

// Scalar figures of merit for pure states on the qubit (x) cavity space.

#include <Eigen/Dense>

#include "dcs/dressed.hpp"
#include "dcs/hilbert.hpp"

namespace dcs {

using QubitDensity = Eigen::Matrix2cd;

/// |<psi|phi>|^2. Throws ConfigError on a cutoff mismatch.
double fidelity(const QuantumState& psi, const QuantumState& phi);

struct FidelityGap {
    double dressed;  ///< F_D against dressed(q, alpha)
    double bare;     ///< F against |q> (x) |alpha>
    double gap() const { return dressed - bare; }
};

FidelityGap dressed_vs_bare_gap(const QuantumState& psi, cplx alpha_target, Qubit q, const DressedBasis& basis);

double excited_probability(const QuantumState& psi);
double ground_probability(const QuantumState& psi);
/// <a^dag a>
double photon_number(const QuantumState& psi);
/// <a>
cplx cavity_amplitude(const QuantumState& psi);

/// Partial trace over the cavity, rows/columns ordered (g, e).
QubitDensity reduced_qubit(const QuantumState& psi);
double purity(const QubitDensity& rho);
/// (<sx>, <sy>, <sz>) with sx = sp + sm, sy = -i(sp - sm); sz = +1 on g.
Eigen::Vector3d bloch_vector(const QubitDensity& rho);
/// Von Neumann entropy of the reduced qubit, in bits.
double entanglement_entropy(const QuantumState& psi);

/// sin^2(lambda) (cos^2(lambda) + 1 + |alpha_g|^2): spurious photon number when the
/// qubit starts excited and the cavity is driven to the ground-state pointer.
double spurious_photon_estimate(double lambda, double alpha_g_sq);

}  // namespace dcs
