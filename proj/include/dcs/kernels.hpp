#pragma once

// Data-parallel inner kernels. Each kernel has a serial reference in
// `kernels::serial` and an OpenMP version in `kernels::omp`; the unqualified
// names forward to the OpenMP version. Both versions do the same arithmetic
// per output element, so results do not depend on the thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "dcs/hilbert.hpp"

namespace dcs::kernels {

namespace serial {

/// V diag(phases) V^dag.
Matrix spectral_reconstruct(const Matrix& vectors, const Vector& phases);

/// out[j] = V (exp(-i E (t_j - t_ref)) .* coeffs), coeffs = V^dag psi(t_ref).
std::vector<Vector> evolve_samples(const Matrix& vectors, const RealVector& energies,
                                   const Vector& coeffs, std::span<const double> times,
                                   double t_ref);

template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    for (std::size_t i = 0; i < count; ++i) body(i);
}

}  // namespace serial

namespace omp {

Matrix spectral_reconstruct(const Matrix& vectors, const Vector& phases);

std::vector<Vector> evolve_samples(const Matrix& vectors, const RealVector& energies,
                                   const Vector& coeffs, std::span<const double> times,
                                   double t_ref);

/// Dynamic schedule; body(i) must only write to slot i of its output.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
}

}  // namespace omp

using omp::evolve_samples;
using omp::parallel_for;
using omp::spectral_reconstruct;

/// Threads the OpenMP kernels will use (1 when built without OpenMP).
int max_threads();

}  // namespace dcs::kernels
