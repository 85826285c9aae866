#pragma once

// Closed-form propagators from the Magnus expansion.
//
// Frames used below:
//   lab frame                H_JC
//   dispersive frame         U_D H U_D^dag ~ H_D
//   dispersive-interaction   interaction picture of H_D
// A lab-frame state is U_D^dag exp(-i H_D t) |psi'(t)>.
//
// Final-state functions return states with the global phase fixed so that the
// largest-magnitude amplitude is real and positive.

#include <optional>

#include "dcs/dressed.hpp"
#include "dcs/hilbert.hpp"

namespace dcs {

/// Rectangular cavity drive eps e^{i w_d t} a + h.c. on [0, T].
struct DriveParams {
    DriveParams(cplx epsilon, double omega_d, double duration);

    cplx epsilon;
    double omega_d;
    double duration;

    /// delta = w_c - w_d
    double detuning(const SystemParams& p) const { return p.omega_c() - omega_d; }
};

/// Rectangular qubit drive eta e^{-i w t} sp + h.c. on [0, tau].
struct QubitDriveParams {
    QubitDriveParams(cplx eta, double omega, double tau);

    cplx eta;
    double omega;
    double tau;

    /// nu = w_q + chi - w
    double nu(const SystemParams& p) const { return p.omega_q() + p.chi() - omega; }
    /// phi with e^{i phi} = eta / |eta| (0 for eta = 0).
    double phase() const { return eta == cplx(0.0) ? 0.0 : std::arg(eta); }
};

template <class T>
struct BranchPair {
    T g;
    T e;
};

/// (e^{i x T} - 1) / (i x), evaluated without cancellation; T at x = 0.
cplx oscillating_integral(double x, double duration);

/// alpha_g = -eps^* (e^{i(delta-chi)T} - 1)/(delta-chi), alpha_e likewise with delta+chi.
BranchPair<cplx> alpha_ge(const DriveParams& drive, const SystemParams& params);

/// Stark phase from the second Magnus generator in the sigma_z = sz_sign sector:
///   F = |eps|^2 (kappa T - sin kappa T) / kappa^2,  kappa = delta - sz_sign * chi.
/// At delta = 0 this is |eps|^2/chi^2 (sin(chi T s) - chi T s), odd in s.
double magnus_second_order_phase(const DriveParams& drive, const SystemParams& params, int sz_sign);

/// |g><g| D(alpha_g) e^{i F_g} + |e><e| D(alpha_e) e^{i F_e}
struct ConditionalDisplacement {
    cplx alpha_g;
    cplx alpha_e;
    double phase_g;
    double phase_e;

    OperatorMatrix to_operator(FockCutoff cutoff) const;
};

ConditionalDisplacement conditional_displacement(const DriveParams& drive, const SystemParams& params);

/// U_I(T, 0) in the dispersive-interaction frame. Throws TruncationError when the
/// cutoff is inadequate for max(|alpha_g|, |alpha_e|).
OperatorMatrix cavity_drive_propagator(const DriveParams& drive, const SystemParams& params,
                                       FockCutoff cutoff);

/// Nonlinear phase matching for the dressed targets. n_avg unset means each branch uses
/// its own |alpha(T)|^2.
struct PhaseCorrection {
    bool enabled = false;
    std::optional<double> n_avg;

    static PhaseCorrection off() { return {}; }
    static PhaseCorrection on(std::optional<double> n_avg = std::nullopt) { return {true, n_avg}; }
};

/// alpha_g e^{-i(w_c - chi)T}, alpha_e e^{-i(w_c + chi)T}
BranchPair<cplx> frame_rotated_amplitudes(const DriveParams& drive, const SystemParams& params);

/// zeta = Delta lambda^4;
///   g: alpha_g exp(-i(w_c - chi + zeta n/2) T)
///   e: alpha_e exp(-i(w_c + chi - zeta (n/2 + 1)) T)
/// Throws ConfigError for n_avg < 0.
BranchPair<cplx> phase_corrected_amplitudes(const DriveParams& drive, const SystemParams& params,
                                            double n_avg);
BranchPair<cplx> phase_corrected_amplitudes(const DriveParams& drive, const SystemParams& params);

BranchPair<cplx> target_amplitudes(const DriveParams& drive, const SystemParams& params,
                                   const PhaseCorrection& correction);

/// Lab-frame state after driving |g,0> for T: dressed(g, alpha_g~).
QuantumState ground_final_state_lab(const DriveParams& drive, const SystemParams& params,
                                    const DressedBasis& basis,
                                    const PhaseCorrection& correction = PhaseCorrection::off());

enum class ExcitedInitial { bare_e0, dressed_e0 };

/// dressed_e0: dressed(e, alpha_e~).
/// bare_e0:   cos(lambda) dressed(e, alpha_e~) - e^{iG} sin(lambda) U_D^dag |g>|xi(T)>,
///            G = (w_q + chi) T + F_g - F_e.
QuantumState excited_final_state_lab(const DriveParams& drive, const SystemParams& params,
                                     const DressedBasis& basis, ExcitedInitial initial,
                                     const PhaseCorrection& correction = PhaseCorrection::off());

/// |g> (x) |xi(T)>, |xi(T)> = e^{-i(w_c - chi) a^dag a T} D(alpha_g(T)) |1>.
QuantumState displaced_fock_state(const DriveParams& drive, const SystemParams& params, FockCutoff cutoff);

/// The relative phase G(T) of the bare_e0 final state.
double excited_branch_phase(const DriveParams& drive, const SystemParams& params);

/// First-order Magnus qubit-drive propagator in the dispersive-interaction frame.
/// Block diagonal over photon number k: a rotation of (|g,k>, |e,k>) generated by
///   c_k sp - c_k^* sm,  c_k = eta b(k, tau) / (nu + 2 k chi),  b = 1 - e^{i(nu + 2 k chi) tau}.
OperatorMatrix qubit_drive_propagator(const QubitDriveParams& qd, const SystemParams& params,
                                      FockCutoff cutoff);

/// Signed block rotation angle |eta| tau sinc((nu + 2 k chi) tau / 2); tends to |eta| tau
/// on resonance.
double qubit_block_angle(const QubitDriveParams& qd, const SystemParams& params, std::size_t k);

/// Lab-frame state U_D^dag e^{-i H_D tau} U_Q(tau) |g, beta>, i.e. the first-order
/// dressed coherent state dressed(g, beta) after the qubit drive.
QuantumState qubit_drive_final_state_lab(const QubitDriveParams& qd, const SystemParams& params,
                                         cplx beta, FockCutoff cutoff);

/// Excited-state probability of the state above, as a closed double sum over photon
/// number. k_max must leave a Poisson tail below 1e-10 (else TruncationError).
double pe_full(const QubitDriveParams& qd, const SystemParams& params, cplx beta, std::size_t k_max);

struct ClampedProbability {
    double value;       ///< clamped to [0, 1]
    double unclamped;
    bool in_range;
};

/// Small chi, lambda limit at w = w_q:
///   (1 - l^2) sin^2(|eta| tau) + l^2 |beta|^2 cos(2|eta| tau)
///   + l sin(2|eta| tau) [Im(beta e^{-i phi}) cos(Delta tau) + Re(beta e^{-i phi}) sin(Delta tau)]
/// Values outside [0, 1] are clamped and reported with a warning.
ClampedProbability pe_simplified(cplx eta, double lambda, cplx beta, double Delta, double tau);

}  // namespace dcs
