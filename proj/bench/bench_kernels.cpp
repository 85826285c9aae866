// Serial vs OpenMP versions of the spectral kernels and of a small scenario sweep.

#include <benchmark/benchmark.h>

#include <vector>

#include "dcs/config.hpp"
#include "dcs/kernels.hpp"
#include "dcs/scenario.hpp"

namespace {

using namespace dcs;

struct Fixture {
    Matrix vectors;
    RealVector energies;
    Vector coeffs;
    std::vector<double> times;

    explicit Fixture(Eigen::Index dim) {
        std::srand(11);
        const Matrix a = Matrix::Random(dim, dim);
        const Eigen::SelfAdjointEigenSolver<Matrix> solver(a + a.adjoint());
        vectors = solver.eigenvectors();
        energies = solver.eigenvalues();
        coeffs = Vector::Random(dim).normalized();
        for (int k = 0; k < 1000; ++k) times.push_back(0.01 * k);
    }
};

template <auto Kernel>
void evolve(benchmark::State& state) {
    const Fixture f(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.vectors, f.energies, f.coeffs, f.times, 0.0));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(f.times.size()));
}

template <auto Kernel>
void reconstruct(benchmark::State& state) {
    const Fixture f(state.range(0));
    Vector phases(f.energies.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, -f.energies(i));
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.vectors, phases));
}

void sweep(benchmark::State& state) {
    const auto cfg = parse_config("scenario = fig2a\nconvergence = off\nsweep = alpha_sq\nsweep_start = 1\n"
                                  "sweep_stop = 9\nsweep_points = 8\n");
    for (auto _ : state) benchmark::DoNotOptimize(run_scenario(cfg));
}

}  // namespace

BENCHMARK(evolve<&dcs::kernels::serial::evolve_samples>)->Name("evolve_samples/serial")->Arg(80)->Arg(160);
BENCHMARK(evolve<&dcs::kernels::omp::evolve_samples>)->Name("evolve_samples/omp")->Arg(80)->Arg(160)->UseRealTime();
BENCHMARK(reconstruct<&dcs::kernels::serial::spectral_reconstruct>)->Name("spectral_reconstruct/serial")->Arg(80)->Arg(160);
BENCHMARK(reconstruct<&dcs::kernels::omp::spectral_reconstruct>)
    ->Name("spectral_reconstruct/omp")
    ->Arg(80)
    ->Arg(160)
    ->UseRealTime();
BENCHMARK(sweep)->Name("fig2a_sweep_8_points")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
