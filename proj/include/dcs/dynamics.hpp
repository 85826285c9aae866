#pragma once

// Numerical time evolution of driven lab-frame Hamiltonians.
//
// A TimeDependentHamiltonian is H(t) = S + sum_k [t_on <= t < t_off] a_k e^{i w_k t} O_k.
// It may carry a diagonal frame generator R with [S, R] = 0 under which every
// O_k has a single frame frequency s_k (e^{iRt} O_k e^{-iRt} = e^{i s_k t} O_k).
// Integration then runs on e^{iRt}(H - R)e^{-iRt}; pieces where every active
// term has w_k + s_k = 0 are constant and advanced spectrally, which is the
// same as repeated midpoint-exponential steps.

#include <functional>
#include <vector>

#include <Eigen/SparseCore>

#include "dcs/hilbert.hpp"
#include "dcs/propagators.hpp"

namespace dcs {

class TimeGrid {
public:
    /// steps = round((t1 - t0) / dt), at least 1; the step is adjusted to land on t1.
    TimeGrid(double t0, double t1, double dt);

    double t0() const { return t0_; }
    double t1() const { return t1_; }
    double dt() const { return (t1_ - t0_) / static_cast<double>(steps_); }
    std::size_t steps() const { return steps_; }
    double time(std::size_t k) const { return k == steps_ ? t1_ : t0_ + static_cast<double>(k) * dt(); }

    TimeGrid refined(std::size_t factor = 2) const;

private:
    double t0_;
    double t1_;
    std::size_t steps_;
};

struct DriveTerm {
    Matrix op;
    cplx amplitude;
    double frequency;
    double t_on;
    double t_off;

    bool active(double t) const { return t >= t_on && t < t_off; }
};

class TimeDependentHamiltonian {
public:
    /// Checks H(t) is Hermitian within 1e-12 inside every window, and the frame
    /// conditions when `frame` is non-empty.
    TimeDependentHamiltonian(OperatorMatrix static_part, std::vector<DriveTerm> terms,
                             RealVector frame = RealVector());

    const OperatorMatrix& static_part() const { return static_part_; }
    const std::vector<DriveTerm>& terms() const { return terms_; }
    const RealVector& frame() const { return frame_; }
    bool has_frame() const { return frame_.size() > 0; }
    Eigen::Index dim() const { return static_part_.dim(); }

    /// Lab-frame H(t).
    Matrix at(double t) const;
    /// Integration-frame Hamiltonian e^{iRt}(H(t) - R)e^{-iRt} (= at(t) without a frame).
    Matrix in_frame(double t) const;
    /// w_k + s_k.
    double residual_frequency(std::size_t k) const { return terms_[k].frequency + frame_shift_[k]; }
    /// Window edges strictly inside (t0, t1), sorted.
    std::vector<double> breakpoints(double t0, double t1) const;

private:
    OperatorMatrix static_part_;
    std::vector<DriveTerm> terms_;
    RealVector frame_;
    std::vector<double> frame_shift_;
    Matrix static_in_frame_;
    std::vector<Eigen::SparseMatrix<cplx>> sparse_ops_;
};

enum class DriveForm { rwa, cosine };

/// rwa:    H_JC + eps e^{i w_d t} a + eps^* e^{-i w_d t} a^dag   on [0, T)
/// cosine: H_JC + 2 cos(w_d t)(eps a + eps^* a^dag)              on [0, T)
/// Frame: w_d (a^dag a + (1 - sz)/2).
TimeDependentHamiltonian lab_drive_hamiltonian(const SystemParams& params, const DriveParams& drive,
                                               FockCutoff cutoff, DriveForm form);

/// H_JC + eta e^{-i w t} sp + eta^* e^{i w t} sm on [0, tau). Frame: w (a^dag a + (1 - sz)/2).
TimeDependentHamiltonian qubit_drive_lab_hamiltonian(const SystemParams& params, const QubitDriveParams& qd,
                                                     FockCutoff cutoff);

/// Cavity drive in the dispersive-interaction frame:
/// eps e^{-i delta t} e^{i chi sz t} a + h.c. on [0, T).
TimeDependentHamiltonian dispersive_interaction_hamiltonian(const SystemParams& params, const DriveParams& drive,
                                                            FockCutoff cutoff);

/// Qubit drive in the dispersive-interaction frame:
/// eta e^{i nu t} e^{2 i chi n t} sp + h.c. on [0, tau).
TimeDependentHamiltonian dispersive_interaction_qubit_hamiltonian(const SystemParams& params,
                                                                  const QubitDriveParams& qd, FockCutoff cutoff);

struct IntegrateOptions {
    /// Store every stride-th grid point; 0 means ceil(steps / 1000). The final state is always stored.
    std::size_t stride = 0;
    /// Throw when the stability guard value is >= 0.1.
    bool enforce_guard = true;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<QuantumState> states;
    double max_norm_drift = 0.0;
    double guard_value = 0.0;

    const QuantumState& final_state() const { return states.back(); }
};

/// max over time-dependent pieces of dt * (half spectral spread + max residual frequency).
/// Constant pieces are advanced exactly and do not contribute.
double stability_guard_value(const TimeDependentHamiltonian& h, const TimeGrid& grid);

/// Propagates i d/dt psi = H(t) psi with psi_{k+1} = exp(-i dt H(t_k + dt/2)) psi_k.
Trajectory integrate(const TimeDependentHamiltonian& h, const QuantumState& psi0, const TimeGrid& grid,
                     const IntegrateOptions& options = {});

struct EvolutionProblem {
    TimeDependentHamiltonian hamiltonian;
    QuantumState initial;
};

using ProblemFactory = std::function<EvolutionProblem(FockCutoff)>;

struct ConvergenceReport {
    double fidelity_half_dt = 1.0;     ///< final state vs rerun at dt/2
    double fidelity_double_nmax = 1.0; ///< final state vs rerun at 2 n_max
    double threshold = 1.0 - 1e-8;
    bool converged = false;
};

/// Reruns at dt/2 and at 2 n_max; converged if both fidelities >= 1 - 1e-8.
/// Never throws for non-convergence; a guard violation in any run counts as not converged.
ConvergenceReport convergence_check(const ProblemFactory& factory, FockCutoff cutoff, const TimeGrid& grid,
                                    const QuantumState* baseline_final = nullptr);

}  // namespace dcs
