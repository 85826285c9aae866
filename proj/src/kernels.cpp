#include "dcs/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dcs::kernels {

namespace {

Vector phase_column(const Matrix& vectors, const Vector& phases, Eigen::Index j) {
    // column j of V diag(p) V^dag = V (p .* conj(V(j, :))^T)
    Vector weights = phases.cwiseProduct(vectors.row(j).adjoint());
    return vectors * weights;
}

Vector evolve_one(const Matrix& vectors, const RealVector& energies, const Vector& coeffs,
                  double dt) {
    Vector rotated(coeffs.size());
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
        const double angle = -energies(k) * dt;
        rotated(k) = coeffs(k) * cplx(std::cos(angle), std::sin(angle));
    }
    return vectors * rotated;
}

}  // namespace

namespace serial {

Matrix spectral_reconstruct(const Matrix& vectors, const Vector& phases) {
    Matrix out(vectors.rows(), vectors.rows());
    for (Eigen::Index j = 0; j < vectors.rows(); ++j) out.col(j) = phase_column(vectors, phases, j);
    return out;
}

std::vector<Vector> evolve_samples(const Matrix& vectors, const RealVector& energies,
                                   const Vector& coeffs, std::span<const double> times,
                                   double t_ref) {
    std::vector<Vector> out(times.size());
    for (std::size_t j = 0; j < times.size(); ++j)
        out[j] = evolve_one(vectors, energies, coeffs, times[j] - t_ref);
    return out;
}

}  // namespace serial

namespace omp {

Matrix spectral_reconstruct(const Matrix& vectors, const Vector& phases) {
    Matrix out(vectors.rows(), vectors.rows());
    const auto n = static_cast<long long>(vectors.rows());
#pragma omp parallel for schedule(static)
    for (long long j = 0; j < n; ++j) {
        out.col(static_cast<Eigen::Index>(j)) =
            phase_column(vectors, phases, static_cast<Eigen::Index>(j));
    }
    return out;
}

std::vector<Vector> evolve_samples(const Matrix& vectors, const RealVector& energies,
                                   const Vector& coeffs, std::span<const double> times,
                                   double t_ref) {
    std::vector<Vector> out(times.size());
    const auto n = static_cast<long long>(times.size());
#pragma omp parallel for schedule(static)
    for (long long j = 0; j < n; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        out[idx] = evolve_one(vectors, energies, coeffs, times[idx] - t_ref);
    }
    return out;
}

}  // namespace omp

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace dcs::kernels
