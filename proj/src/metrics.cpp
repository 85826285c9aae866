#include "dcs/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dcs/errors.hpp"

namespace dcs {

namespace {

void require_same_space(const QuantumState& a, const QuantumState& b) {
    if (!(a.cutoff() == b.cutoff()))
        throw ConfigError("states live on different cutoffs (" + std::to_string(a.cutoff().n_max()) + " vs " +
                          std::to_string(b.cutoff().n_max()) + ")");
}

}  // namespace

double fidelity(const QuantumState& psi, const QuantumState& phi) {
    require_same_space(psi, phi);
    return std::clamp(std::norm(psi.amplitudes().dot(phi.amplitudes())), 0.0, 1.0);
}

FidelityGap dressed_vs_bare_gap(const QuantumState& psi, cplx alpha_target, Qubit q, const DressedBasis& basis) {
    const auto dressed = dressed_coherent_state(q, alpha_target, basis);
    const auto bare = coherent_state(alpha_target, basis.cutoff(), q);
    return {fidelity(psi, dressed), fidelity(psi, bare)};
}

double excited_probability(const QuantumState& psi) {
    const auto n = static_cast<Eigen::Index>(psi.cutoff().n_max());
    return psi.amplitudes().tail(n).squaredNorm();
}

double ground_probability(const QuantumState& psi) {
    const auto n = static_cast<Eigen::Index>(psi.cutoff().n_max());
    return psi.amplitudes().head(n).squaredNorm();
}

double photon_number(const QuantumState& psi) {
    const auto& cut = psi.cutoff();
    double total = 0.0;
    for (int q = 0; q < 2; ++q)
        for (std::size_t n = 1; n < cut.n_max(); ++n)
            total += static_cast<double>(n) * std::norm(psi.amplitude(Qubit(q), n));
    return total;
}

cplx cavity_amplitude(const QuantumState& psi) {
    const auto& cut = psi.cutoff();
    cplx total = 0.0;
    for (int q = 0; q < 2; ++q)
        for (std::size_t n = 1; n < cut.n_max(); ++n)
            total += std::conj(psi.amplitude(Qubit(q), n - 1)) * std::sqrt(static_cast<double>(n)) *
                     psi.amplitude(Qubit(q), n);
    return total;
}

QubitDensity reduced_qubit(const QuantumState& psi) {
    const auto n = static_cast<Eigen::Index>(psi.cutoff().n_max());
    const auto g = psi.amplitudes().head(n);
    const auto e = psi.amplitudes().tail(n);
    QubitDensity rho;
    rho(0, 0) = g.squaredNorm();
    rho(1, 1) = e.squaredNorm();
    rho(0, 1) = e.dot(g);  // sum_n <g,n|psi><psi|e,n>
    rho(1, 0) = std::conj(rho(0, 1));
    return rho;
}

double purity(const QubitDensity& rho) { return (rho * rho).trace().real(); }

Eigen::Vector3d bloch_vector(const QubitDensity& rho) {
    // sx = sp + sm, sy = -i(sp - sm), sz = |g><g| - |e><e|
    return {2.0 * rho(0, 1).real(), 2.0 * rho(0, 1).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

double entanglement_entropy(const QuantumState& psi) {
    const Eigen::SelfAdjointEigenSolver<QubitDensity> solver(reduced_qubit(psi));
    double s = 0.0;
    for (Eigen::Index k = 0; k < 2; ++k) {
        const double p = solver.eigenvalues()(k);
        if (p > 1e-300) s -= p * std::log2(p);
    }
    return std::max(0.0, s);
}

double spurious_photon_estimate(double lambda, double alpha_g_sq) {
    const double s = std::sin(lambda);
    const double c = std::cos(lambda);
    return s * s * (c * c + 1.0 + alpha_g_sq);
}

}  // namespace dcs
