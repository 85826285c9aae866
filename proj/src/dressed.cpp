#include "dcs/dressed.hpp"

#include <cmath>
#include <sstream>

#include "dcs/diagnostics.hpp"
#include "dcs/errors.hpp"

namespace dcs {

namespace {
constexpr double kLeakMax = 1e-10;
}

double mixing_angle(std::size_t n, double lambda, DressedVariant variant) {
    if (n == 0) return 0.0;
    const double x = lambda * std::sqrt(static_cast<double>(n));
    return variant == DressedVariant::exact ? 0.5 * std::atan(2.0 * x) : x;
}

DressedBasis::DressedBasis(SystemParams params, FockCutoff cutoff, DressedVariant variant)
    : params_(params), cutoff_(cutoff), variant_(variant), angles_(cutoff.n_max()) {
    for (std::size_t n = 0; n < angles_.size(); ++n) angles_[n] = mixing_angle(n, params_.lambda(), variant_);
}

namespace {

// Adds coeff * dressed(q, n) into v.
void add_dressed(Vector& v, Qubit q, std::size_t n, cplx coeff, const DressedBasis& basis) {
    const auto& cut = basis.cutoff();
    const auto at = [&](Qubit qq, std::size_t nn) { return static_cast<Eigen::Index>(cut.index(qq, nn)); };
    if (q == Qubit::g) {
        const double th = basis.angle(n);
        v(at(Qubit::g, n)) += coeff * std::cos(th);
        if (n > 0) v(at(Qubit::e, n - 1)) -= coeff * std::sin(th);
    } else {
        const double th = basis.angle(n + 1);
        v(at(Qubit::e, n)) += coeff * std::cos(th);
        v(at(Qubit::g, n + 1)) += coeff * std::sin(th);
    }
}

}  // namespace

QuantumState dressed_state(Qubit q, std::size_t n, const DressedBasis& basis) {
    const auto n_max = basis.cutoff().n_max();
    if (q == Qubit::g ? n >= n_max : n + 1 >= n_max) {
        std::ostringstream os;
        os << "dressed state (" << (q == Qubit::g ? 'g' : 'e') << ", " << n
           << ") needs a partner level outside n_max=" << n_max;
        throw TruncationError(os.str());
    }
    Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.cutoff().dim()));
    add_dressed(v, q, n, 1.0, basis);
    return QuantumState::normalized(basis.cutoff(), std::move(v));
}

QuantumState dressed_coherent_state(Qubit q, cplx alpha, const DressedBasis& basis) {
    const auto& cut = basis.cutoff();
    const std::size_t count = q == Qubit::g ? cut.n_max() : cut.n_max() - 1;
    const double leak = poisson_tail(std::norm(alpha), count);
    if (leak >= kLeakMax) {
        std::ostringstream os;
        os << "dressed coherent state |alpha|=" << std::abs(alpha) << " leaks " << leak
           << " beyond n_max=" << cut.n_max();
        throw TruncationError(os.str());
    }
    const auto amps = poisson_amplitudes(alpha, count);
    Vector v = Vector::Zero(static_cast<Eigen::Index>(cut.dim()));
    for (std::size_t n = 0; n < count; ++n) add_dressed(v, q, n, amps[n], basis);
    return QuantumState::normalized(cut, std::move(v));
}

QubitAmplitudes effective_qubit_state(cplx beta, double lambda) {
    if (std::abs(lambda * beta) >= 0.5)
        warn("effective_qubit_state: |lambda beta| >= 0.5, expansion not valid");
    const double norm = std::sqrt(1.0 + lambda * lambda * std::norm(beta));
    return {1.0 / norm, -lambda * beta / norm};
}

cplx effective_drive_strength(cplx beta, double lambda, double duration) {
    if (!(duration > 0.0)) throw ConfigError("effective drive strength needs T > 0");
    return cplx(0.0, 1.0) * std::conj(beta) * lambda / duration;
}

}  // namespace dcs
