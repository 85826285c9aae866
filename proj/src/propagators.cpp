#include "dcs/propagators.hpp"

#include <algorithm>
#include <cmath>

#include "dcs/diagnostics.hpp"
#include "dcs/errors.hpp"

namespace dcs {

namespace {

constexpr cplx kI(0.0, 1.0);
constexpr double kSeriesThreshold = 1e-6;
constexpr double kPoissonTailMax = 1e-10;

cplx unit_phase(double angle) { return {std::cos(angle), std::sin(angle)}; }

// sin(z)/z; 6-term Taylor series near 0
double sinc(double z) {
    if (std::abs(z) < kSeriesThreshold) {
        const double z2 = z * z;
        return 1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0 * (1.0 - z2 / 72.0 * (1.0 - z2 / 110.0))));
    }
    return std::sin(z) / z;
}

// (y - sin y) / y^2; series below 0.1 where the difference cancels
double stark_kernel(double y) {
    if (std::abs(y) < 0.1) {
        const double y2 = y * y;
        return y / 6.0 * (1.0 - y2 / 20.0 * (1.0 - y2 / 42.0 * (1.0 - y2 / 72.0 * (1.0 - y2 / 110.0 * (1.0 - y2 / 156.0)))));
    }
    return (y - std::sin(y)) / (y * y);
}

// exp(-i H_D t) psi; H_D is diagonal
QuantumState apply_dispersive_evolution(const SystemParams& p, const QuantumState& psi, double t) {
    const auto& cut = psi.cutoff();
    Vector v = psi.amplitudes();
    for (int q = 0; q < 2; ++q) {
        const double sz = q == 0 ? 1.0 : -1.0;
        for (std::size_t n = 0; n < cut.n_max(); ++n) {
            const double nn = static_cast<double>(n);
            const double energy = p.omega_c() * nn - 0.5 * (p.omega_q() + p.chi()) * sz - p.chi() * sz * nn;
            v(static_cast<Eigen::Index>(cut.index(Qubit(q), n))) *= unit_phase(-energy * t);
        }
    }
    return QuantumState(cut, std::move(v));
}

}  // namespace

DriveParams::DriveParams(cplx eps, double wd, double T) : epsilon(eps), omega_d(wd), duration(T) {
    if (!(T >= 0.0)) throw ConfigError("drive duration T must be >= 0");
}

QubitDriveParams::QubitDriveParams(cplx eta_, double omega_, double tau_) : eta(eta_), omega(omega_), tau(tau_) {
    if (!(tau_ >= 0.0)) throw ConfigError("qubit drive duration tau must be >= 0");
}

cplx oscillating_integral(double x, double duration) {
    const double half = 0.5 * x * duration;
    return duration * unit_phase(half) * sinc(half);
}

BranchPair<cplx> alpha_ge(const DriveParams& drive, const SystemParams& params) {
    const double delta = drive.detuning(params);
    const double chi = params.chi();
    const double T = drive.duration;
    // -eps^* (e^{iyT} - 1)/y = -i eps^* * integral_0^T e^{iyt} dt
    return {-kI * std::conj(drive.epsilon) * oscillating_integral(delta - chi, T),
            -kI * std::conj(drive.epsilon) * oscillating_integral(delta + chi, T)};
}

double magnus_second_order_phase(const DriveParams& drive, const SystemParams& params, int sz_sign) {
    if (sz_sign != 1 && sz_sign != -1) throw ConfigError("sz_sign must be +1 or -1");
    const double T = drive.duration;
    const double kappa = drive.detuning(params) - sz_sign * params.chi();
    return std::norm(drive.epsilon) * T * T * stark_kernel(kappa * T);
}

OperatorMatrix ConditionalDisplacement::to_operator(FockCutoff cutoff) const {
    const auto n = static_cast<Eigen::Index>(cutoff.n_max());
    Matrix u = Matrix::Zero(2 * n, 2 * n);
    u.topLeftCorner(n, n) = cavity_displacement(alpha_g, cutoff.n_max()) * unit_phase(phase_g);
    u.bottomRightCorner(n, n) = cavity_displacement(alpha_e, cutoff.n_max()) * unit_phase(phase_e);
    return OperatorMatrix(std::move(u), OperatorKind::unitary);
}

ConditionalDisplacement conditional_displacement(const DriveParams& drive, const SystemParams& params) {
    const auto alpha = alpha_ge(drive, params);
    return {alpha.g, alpha.e, magnus_second_order_phase(drive, params, +1),
            magnus_second_order_phase(drive, params, -1)};
}

OperatorMatrix cavity_drive_propagator(const DriveParams& drive, const SystemParams& params,
                                       FockCutoff cutoff) {
    const auto cd = conditional_displacement(drive, params);
    cutoff.require_adequate(std::max(std::abs(cd.alpha_g), std::abs(cd.alpha_e)));
    return cd.to_operator(cutoff);
}

BranchPair<cplx> frame_rotated_amplitudes(const DriveParams& drive, const SystemParams& params) {
    const auto alpha = alpha_ge(drive, params);
    const double T = drive.duration;
    return {alpha.g * unit_phase(-(params.omega_c() - params.chi()) * T),
            alpha.e * unit_phase(-(params.omega_c() + params.chi()) * T)};
}

namespace {

BranchPair<cplx> corrected(const DriveParams& drive, const SystemParams& params, double n_g, double n_e) {
    if (n_g < 0.0 || n_e < 0.0) throw ConfigError("average photon number must be >= 0");
    const auto alpha = alpha_ge(drive, params);
    const double zeta = params.delta() * std::pow(params.lambda(), 4);
    const double T = drive.duration;
    const double w_g = params.omega_c() - params.chi() + zeta * n_g / 2.0;
    const double w_e = params.omega_c() + params.chi() - zeta * (n_e / 2.0 + 1.0);
    return {alpha.g * unit_phase(-w_g * T), alpha.e * unit_phase(-w_e * T)};
}

}  // namespace

BranchPair<cplx> phase_corrected_amplitudes(const DriveParams& drive, const SystemParams& params, double n_avg) {
    return corrected(drive, params, n_avg, n_avg);
}

BranchPair<cplx> phase_corrected_amplitudes(const DriveParams& drive, const SystemParams& params) {
    const auto alpha = alpha_ge(drive, params);
    return corrected(drive, params, std::norm(alpha.g), std::norm(alpha.e));
}

BranchPair<cplx> target_amplitudes(const DriveParams& drive, const SystemParams& params,
                                   const PhaseCorrection& correction) {
    if (!correction.enabled) return frame_rotated_amplitudes(drive, params);
    if (correction.n_avg) return phase_corrected_amplitudes(drive, params, *correction.n_avg);
    return phase_corrected_amplitudes(drive, params);
}

QuantumState ground_final_state_lab(const DriveParams& drive, const SystemParams& params,
                                    const DressedBasis& basis, const PhaseCorrection& correction) {
    const cplx alpha = target_amplitudes(drive, params, correction).g;
    basis.cutoff().require_adequate(std::abs(alpha));
    return dressed_coherent_state(Qubit::g, alpha, basis).with_fixed_global_phase();
}

double excited_branch_phase(const DriveParams& drive, const SystemParams& params) {
    return (params.omega_q() + params.chi()) * drive.duration + magnus_second_order_phase(drive, params, +1) -
           magnus_second_order_phase(drive, params, -1);
}

QuantumState displaced_fock_state(const DriveParams& drive, const SystemParams& params, FockCutoff cutoff) {
    const cplx alpha_g = alpha_ge(drive, params).g;
    cutoff.require_adequate(std::abs(alpha_g), 2);
    const auto n = static_cast<Eigen::Index>(cutoff.n_max());
    Vector one = Vector::Zero(n);
    one(1) = 1.0;
    Vector xi = cavity_displacement(alpha_g, cutoff.n_max()) * one;
    for (Eigen::Index k = 0; k < n; ++k)
        xi(k) *= unit_phase(-(params.omega_c() - params.chi()) * static_cast<double>(k) * drive.duration);
    Vector v = Vector::Zero(2 * n);
    v.head(n) = xi;
    return QuantumState::normalized(cutoff, std::move(v));
}

QuantumState excited_final_state_lab(const DriveParams& drive, const SystemParams& params,
                                     const DressedBasis& basis, ExcitedInitial initial,
                                     const PhaseCorrection& correction) {
    const cplx alpha = target_amplitudes(drive, params, correction).e;
    basis.cutoff().require_adequate(std::abs(alpha), 1);
    const auto dressed = dressed_coherent_state(Qubit::e, alpha, basis);
    if (initial == ExcitedInitial::dressed_e0) return dressed.with_fixed_global_phase();

    const auto xi_lab = undo_dispersive_frame(params, displaced_fock_state(drive, params, basis.cutoff()));
    const double lam = params.lambda();
    Vector v = std::cos(lam) * dressed.amplitudes() -
               unit_phase(excited_branch_phase(drive, params)) * std::sin(lam) * xi_lab.amplitudes();
    return QuantumState::normalized(basis.cutoff(), std::move(v)).with_fixed_global_phase();
}

// ---------------------------------------------------------------------------
// Qubit drive

double qubit_block_angle(const QubitDriveParams& qd, const SystemParams& params, std::size_t k) {
    const double x = qd.nu(params) + 2.0 * static_cast<double>(k) * params.chi();
    return std::abs(qd.eta) * qd.tau * sinc(0.5 * x * qd.tau);
}

OperatorMatrix qubit_drive_propagator(const QubitDriveParams& qd, const SystemParams& params, FockCutoff cutoff) {
    const auto dim = static_cast<Eigen::Index>(cutoff.dim());
    Matrix u = Matrix::Zero(dim, dim);
    for (std::size_t k = 0; k < cutoff.n_max(); ++k) {
        const double x = qd.nu(params) + 2.0 * static_cast<double>(k) * params.chi();
        // c = eta b / x = -i eta * integral_0^tau e^{ixt} dt
        const cplx c = -kI * qd.eta * oscillating_integral(x, qd.tau);
        const double r = std::abs(c);
        const cplx axis = r > 0.0 ? c / r : cplx(0.0);
        const auto ig = static_cast<Eigen::Index>(cutoff.index(Qubit::g, k));
        const auto ie = static_cast<Eigen::Index>(cutoff.index(Qubit::e, k));
        u(ig, ig) = std::cos(r);
        u(ie, ie) = std::cos(r);
        u(ie, ig) = axis * std::sin(r);
        u(ig, ie) = -std::conj(axis) * std::sin(r);
    }
    return OperatorMatrix(std::move(u), OperatorKind::unitary);
}

QuantumState qubit_drive_final_state_lab(const QubitDriveParams& qd, const SystemParams& params, cplx beta,
                                         FockCutoff cutoff) {
    const auto start = coherent_state(beta, cutoff, Qubit::g);
    const auto driven = qubit_drive_propagator(qd, params, cutoff) * start;
    return undo_dispersive_frame(params, apply_dispersive_evolution(params, driven, qd.tau)).with_fixed_global_phase();
}

double pe_full(const QubitDriveParams& qd, const SystemParams& params, cplx beta, std::size_t k_max) {
    const double mean = std::norm(beta);
    if (poisson_tail(mean, k_max + 1) >= kPoissonTailMax)
        throw TruncationError("pe_full: k_max=" + std::to_string(k_max) + " leaves a Poisson tail >= 1e-10");

    const double lam = params.lambda();
    const double chi = params.chi();
    const double tau = qd.tau;
    const double phi = qd.phase();
    const cplx beta_rot = beta * unit_phase(-params.omega_c() * tau);

    // Poisson weights P_k, k = 0 .. k_max+1
    std::vector<double> weight(k_max + 2);
    weight[0] = std::exp(-mean);
    for (std::size_t k = 1; k < weight.size(); ++k) weight[k] = weight[k - 1] * mean / static_cast<double>(k);

    double diagonal = 0.0;
    double cross = 0.0;
    for (std::size_t k = 0; k <= k_max; ++k) {
        const double kk = static_cast<double>(k);
        const double rot_k = qubit_block_angle(qd, params, k);
        const double rot_k1 = qubit_block_angle(qd, params, k + 1);
        const double s_k = std::sin(lam * std::sqrt(kk));
        const double s_k1 = std::sin(lam * std::sqrt(kk + 1.0));
        const double c_k1 = std::cos(lam * std::sqrt(kk + 1.0));
        diagonal += weight[k] * (std::pow(std::cos(rot_k) * s_k, 2) + std::pow(std::sin(rot_k) * c_k1, 2));

        // Sigma_k = nu + 2 k chi + 2 w; relative to |e,k>, the |g,k+1> amplitude picks up an extra e^{-i chi tau}
        const double sigma = qd.nu(params) + 2.0 * kk * chi + 2.0 * qd.omega;
        const cplx z = beta_rot * unit_phase(-phi + 0.5 * sigma * tau + chi * tau);
        // weight[k] / sqrt(k+1) = e^{-|b|^2} |b|^{2k} / (k! sqrt(k+1))
        cross += 2.0 * weight[k] / std::sqrt(kk + 1.0) * std::cos(rot_k1) * s_k1 * std::sin(rot_k) * c_k1 * z.imag();
    }
    return diagonal + cross;
}

ClampedProbability pe_simplified(cplx eta, double lambda, cplx beta, double Delta, double tau) {
    const double r = std::abs(eta);
    const double phi = eta == cplx(0.0) ? 0.0 : std::arg(eta);
    const cplx b = beta * unit_phase(-phi);
    const double value = (1.0 - lambda * lambda) * std::pow(std::sin(r * tau), 2) +
                         lambda * lambda * std::norm(beta) * std::cos(2.0 * r * tau) +
                         lambda * std::sin(2.0 * r * tau) * (b.imag() * std::cos(Delta * tau) + b.real() * std::sin(Delta * tau));
    const bool in_range = value >= 0.0 && value <= 1.0;
    if (!in_range) warn("pe_simplified: perturbative value " + std::to_string(value) + " outside [0, 1], clamped");
    return {std::clamp(value, 0.0, 1.0), value, in_range};
}

}  // namespace dcs
