#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dcs/diagnostics.hpp"
#include "dcs/errors.hpp"
#include "dcs/metrics.hpp"
#include "dcs/propagators.hpp"
#include "oracles.hpp"

using namespace dcs;
using std::numbers::pi;

namespace {

const SystemParams kParams = SystemParams::from_lambda(100.0, 1.0, 0.1);
constexpr cplx kI(0.0, 1.0);

// Dispersive-interaction cavity drive eps e^{-i(delta - s chi)t} P_s a + h.c., applied to psi
// with the ladder matrix elements written out directly.
Vector cavity_interaction(std::size_t n_max, cplx eps, double delta, double chi, double t, const Vector& psi) {
    Vector out = Vector::Zero(psi.size());
    for (int q = 0; q < 2; ++q) {
        const double kappa = q == 0 ? delta - chi : delta + chi;
        const cplx f = eps * std::polar(1.0, -kappa * t);
        const auto base = static_cast<Eigen::Index>(q * n_max);
        for (std::size_t k = 1; k < n_max; ++k) {
            const double s = std::sqrt(static_cast<double>(k));
            const auto lo = base + static_cast<Eigen::Index>(k - 1);
            const auto hi = base + static_cast<Eigen::Index>(k);
            out(lo) += f * s * psi(hi);
            out(hi) += std::conj(f) * s * psi(lo);
        }
    }
    return out;
}

// Dispersive-interaction qubit drive: eta e^{i(nu + 2 k chi)t} |e,k><g,k| + h.c.
Matrix qubit_interaction(std::size_t n_max, cplx eta, double nu, double chi, double t) {
    const auto d = static_cast<Eigen::Index>(2 * n_max);
    Matrix h = Matrix::Zero(d, d);
    for (std::size_t k = 0; k < n_max; ++k) {
        const double x = nu + 2.0 * chi * static_cast<double>(k);
        h(static_cast<Eigen::Index>(n_max + k), static_cast<Eigen::Index>(k)) = eta * std::polar(1.0, x * t);
    }
    return h + h.adjoint().eval();
}

Vector diag_phase(const SystemParams& p, std::size_t n_max, double t) {
    Vector v(static_cast<Eigen::Index>(2 * n_max));
    for (int q = 0; q < 2; ++q)
        for (std::size_t n = 0; n < n_max; ++n) {
            const double s = q == 0 ? 1.0 : -1.0;
            const double nn = static_cast<double>(n);
            const double e = p.omega_c() * nn - 0.5 * (p.omega_q() + p.chi()) * s - p.chi() * s * nn;
            v(static_cast<Eigen::Index>(q * n_max + n)) = std::polar(1.0, -e * t);
        }
    return v;
}

double oracle_stark_phase(cplx eps, double kappa, double T) {
    // F = -int_0^T dt1 int_0^t1 dt2 Im(f(t1) f^*(t2)),  f(t) = eps e^{-i kappa t}
    auto inner = [&](double t1) {
        return oracle::simpson(
            [&](double t2) { return -std::norm(eps) * std::sin(-kappa * (t1 - t2)); }, 0.0, t1, 1000);
    };
    return oracle::simpson(inner, 0.0, T, 1000);
}

}  // namespace

TEST_CASE("oscillating integral") {
    for (double x : {0.0, 1e-9, 1e-7, 1e-5, 0.3, -2.0, 15.0}) {
        for (double T : {0.5, 3.0, 20.0}) {
            const double re = oracle::simpson([&](double t) { return std::cos(x * t); }, 0.0, T, 4000);
            const double im = oracle::simpson([&](double t) { return std::sin(x * t); }, 0.0, T, 4000);
            const cplx got = oscillating_integral(x, T);
            CHECK(std::abs(got - cplx(re, im)) < 1e-9 * std::max(1.0, T));
        }
    }
    // smooth through small arguments: the imaginary part is x T^2 / 2 to leading order
    const double T = 10.0;
    for (double x : {1e-12, 1e-9, 1e-6, 1e-4}) {
        const cplx got = oscillating_integral(x, T);
        CHECK(std::abs(got.real() - (T - x * x * T * T * T / 6.0)) < 1e-12);
        CHECK(std::abs(got.imag() - (0.5 * x * T * T - x * x * x * T * T * T * T / 24.0)) < 1e-12);
    }
}

TEST_CASE("conditional displacement amplitudes") {
    const double chi = kParams.chi();
    SUBCASE("no drive time") {
        const auto a = alpha_ge(DriveParams(0.05, 99.9, 0.0), kParams);
        CHECK(a.g == cplx(0.0));
        CHECK(a.e == cplx(0.0));
    }
    SUBCASE("delta = chi grows linearly") {
        for (double T : {1.0, 7.5, 31.0}) {
            const auto a = alpha_ge(DriveParams(0.05, kParams.omega_c() - chi, T), kParams);
            CHECK(std::abs(a.g - (-kI * 0.05 * T)) < 1e-14 * T);
        }
    }
    SUBCASE("readout condition zeroes the excited branch") {
        const auto a = alpha_ge(DriveParams(cplx(0.05, 0.02), kParams.omega_c() - chi, pi / chi), kParams);
        CHECK(std::abs(a.e) < 1e-10);
        CHECK(std::abs(a.g) > 1.0);
    }
    SUBCASE("closed form away from resonance") {
        const cplx eps(0.03, -0.04);
        const DriveParams d(eps, 99.5, 4.2);
        const double delta = d.detuning(kParams);
        const auto a = alpha_ge(d, kParams);
        const cplx ag = -std::conj(eps) * (std::polar(1.0, (delta - chi) * 4.2) - 1.0) / (delta - chi);
        const cplx ae = -std::conj(eps) * (std::polar(1.0, (delta + chi) * 4.2) - 1.0) / (delta + chi);
        CHECK(std::abs(a.g - ag) < 1e-14);
        CHECK(std::abs(a.e - ae) < 1e-14);
    }
    CHECK_THROWS_AS(DriveParams(0.1, 100.0, -1.0), ConfigError);
}

TEST_CASE("second-order phase") {
    const double chi = kParams.chi();
    const double wc = kParams.omega_c();
    SUBCASE("zero duration") { CHECK(magnus_second_order_phase(DriveParams(0.05, wc, 0.0), kParams, 1) == 0.0); }
    SUBCASE("resonant drive, chi T = 2 pi") {
        const DriveParams d(0.05, wc, 2 * pi / chi);
        CHECK(magnus_second_order_phase(d, kParams, 1) == doctest::Approx(-2 * pi * 0.0025 / (chi * chi)).epsilon(1e-12));
        CHECK(magnus_second_order_phase(d, kParams, -1) == doctest::Approx(2 * pi * 0.0025 / (chi * chi)).epsilon(1e-12));
    }
    SUBCASE("odd in the qubit sign at delta = 0") {
        for (double T : {0.3, 5.0, 40.0}) {
            const DriveParams d(cplx(0.02, 0.07), wc, T);
            CHECK(std::abs(magnus_second_order_phase(d, kParams, 1) + magnus_second_order_phase(d, kParams, -1)) < 1e-14);
        }
    }
    SUBCASE("matches the double-integral definition") {
        for (double wd : {wc, wc - chi, wc + 0.37, wc - 2.0}) {
            for (double T : {0.7, 9.0, 31.4}) {
                const DriveParams d(cplx(0.04, 0.03), wd, T);
                for (int s : {1, -1}) {
                    const double kappa = d.detuning(kParams) - s * chi;
                    CHECK(magnus_second_order_phase(d, kParams, s) ==
                          doctest::Approx(oracle_stark_phase(d.epsilon, kappa, T)).epsilon(1e-9));
                }
            }
        }
    }
    CHECK_THROWS_AS(magnus_second_order_phase(DriveParams(0.05, wc, 1.0), kParams, 0), ConfigError);
}

TEST_CASE("cavity-drive propagator") {
    const FockCutoff c(30);
    const double chi = kParams.chi();
    SUBCASE("zero amplitude is the identity") {
        const auto u = cavity_drive_propagator(DriveParams(0.0, 99.0, 5.0), kParams, c);
        CHECK(max_abs(u.matrix() - Matrix::Identity(60, 60)) < 1e-13);
    }
    SUBCASE("unitary and qubit block-diagonal") {
        const auto u = cavity_drive_propagator(DriveParams(cplx(0.05, 0.01), 100.0 - chi, 20.0), kParams, c);
        CHECK(unitarity_defect(u.matrix()) < 1e-10);
        CHECK(max_abs(u.matrix().topRightCorner(30, 30)) < 1e-12);
        CHECK(max_abs(u.matrix().bottomLeftCorner(30, 30)) < 1e-12);
    }
    SUBCASE("displaces the vacuum") {
        const DriveParams d(0.05, 100.0 - chi, 25.0);
        const auto u = cavity_drive_propagator(d, kParams, c);
        const auto out = u * QuantumState::basis(c, Qubit::g, 0);
        CHECK(fidelity(out, coherent_state(alpha_ge(d, kParams).g, c)) >= 1.0 - 1e-12);
    }
    SUBCASE("matches RK4 on the interaction-frame Hamiltonian") {
        const FockCutoff cc(90);
        Vector start = Vector::Zero(180);
        start(1) = 1.0 / std::sqrt(2.0);      // |g,1>
        start(90 + 2) = kI / std::sqrt(2.0);  // |e,2>
        for (double eps_over_chi : {0.1, 0.55, 1.0}) {
            for (double chi_t : {0.5, 3.0, 2 * pi}) {
                for (double delta : {0.0, chi, 0.25}) {
                    const cplx eps = std::polar(eps_over_chi * chi, 0.4);
                    const DriveParams d(eps, kParams.omega_c() - delta, chi_t / chi);
                    const Vector expected = oracle::rk4_apply(
                        [&](double t, const Vector& v) { return cavity_interaction(cc.n_max(), eps, delta, chi, t, v); },
                        start, 0.0, d.duration, 4000);
                    const Vector got = cavity_drive_propagator(d, kParams, cc).matrix() * start;
                    CHECK(oracle::overlap(expected, got) >= 1.0 - 1e-8);
                }
            }
        }
    }
    SUBCASE("inadequate cutoff") {
        CHECK_THROWS_AS(cavity_drive_propagator(DriveParams(0.05, 100.0 - chi, 80.0), kParams, FockCutoff(20)),
                        TruncationError);
    }
}

TEST_CASE("frame-rotated and phase-corrected targets") {
    const double chi = kParams.chi();
    const DriveParams d(0.05, 100.0 - chi, 40.0);
    const auto raw = alpha_ge(d, kParams);
    SUBCASE("zeta") {
        CHECK(kParams.delta() * std::pow(kParams.lambda(), 4) == doctest::Approx(1e-3).epsilon(1e-12));
    }
    SUBCASE("magnitudes are unchanged") {
        for (double n : {0.0, 1.0, 4.0, 9.0}) {
            const auto t = phase_corrected_amplitudes(d, kParams, n);
            CHECK(std::abs(std::abs(t.g) - std::abs(raw.g)) < 1e-14);
            CHECK(std::abs(std::abs(t.e) - std::abs(raw.e)) < 1e-14);
        }
        CHECK_THROWS_AS(phase_corrected_amplitudes(d, kParams, -1.0), ConfigError);
    }
    SUBCASE("corrected phases") {
        const double zeta = 1e-3, n = 4.0, T = d.duration;
        const auto t = phase_corrected_amplitudes(d, kParams, n);
        CHECK(std::abs(t.g - raw.g * std::polar(1.0, -(100.0 - chi + zeta * n / 2) * T)) < 1e-12);
        CHECK(std::abs(t.e - raw.e * std::polar(1.0, -(100.0 + chi - zeta * (n / 2 + 1)) * T)) < 1e-12);
    }
    SUBCASE("reduces to the frame rotation without the nonlinearity") {
        const auto p = SystemParams::from_frequencies(100.0, 110.0, 1e-6);
        const DriveParams dd(0.05, 100.0 - p.chi(), 40.0);
        const auto corrected = phase_corrected_amplitudes(dd, p, 4.0);
        const auto plain = frame_rotated_amplitudes(dd, p);
        CHECK(std::abs(corrected.g - plain.g) < 1e-12);
        CHECK(std::abs(corrected.e - plain.e) < 1e-12);
    }
    SUBCASE("default n_avg is each branch's own photon number") {
        const auto self = phase_corrected_amplitudes(d, kParams);
        CHECK(std::abs(self.g - phase_corrected_amplitudes(d, kParams, std::norm(raw.g)).g) < 1e-15);
        CHECK(std::abs(self.e - phase_corrected_amplitudes(d, kParams, std::norm(raw.e)).e) < 1e-15);
    }
    SUBCASE("ground target phase advances at -(w_c - chi)") {
        const DriveParams d1(0.05, 100.0 - chi, 10.0), d2(0.05, 100.0 - chi, 10.01);
        const double a1 = std::arg(frame_rotated_amplitudes(d1, kParams).g);
        const double a2 = std::arg(frame_rotated_amplitudes(d2, kParams).g);
        CHECK(std::remainder(a2 - a1 + (100.0 - chi) * 0.01, 2 * pi) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("lab-frame final states follow the frame chain") {
    const FockCutoff c(40);
    const DressedBasis first(kParams, c, DressedVariant::first_order);
    const double chi = kParams.chi();
    const Matrix ud_dag = dispersive_unitary(kParams, c).matrix().adjoint();
    const Matrix ud = dispersive_unitary(kParams, c).matrix();

    SUBCASE("zero duration") {
        const DriveParams d(0.05, 100.0 - chi, 0.0);
        CHECK(fidelity(ground_final_state_lab(d, kParams, first), QuantumState::basis(c, Qubit::g, 0)) >= 1 - 1e-15);
        CHECK(fidelity(excited_final_state_lab(d, kParams, first, ExcitedInitial::dressed_e0),
                       dressed_state(Qubit::e, 0, first)) >= 1 - 1e-15);
    }
    for (double wd : {100.0 - chi, 100.0 + chi, 100.0}) {
        for (double T : {3.0, 17.0, 31.4}) {
            const DriveParams d(cplx(0.05, -0.02), wd, T);
            const Matrix ui = cavity_drive_propagator(d, kParams, c).matrix();
            const Vector hd = diag_phase(kParams, c.n_max(), T);
            auto chain = [&](const Vector& lab0) -> Vector {
                const Vector v = ui * (ud * lab0);
                return ud_dag * hd.cwiseProduct(v).eval();
            };
            const Vector g0 = QuantumState::basis(c, Qubit::g, 0).amplitudes();
            const Vector e0 = QuantumState::basis(c, Qubit::e, 0).amplitudes();
            const Vector e0_dressed = dressed_state(Qubit::e, 0, first).amplitudes();
            CHECK(oracle::overlap(chain(g0), ground_final_state_lab(d, kParams, first).amplitudes()) >= 1 - 1e-10);
            CHECK(oracle::overlap(chain(e0_dressed),
                                  excited_final_state_lab(d, kParams, first, ExcitedInitial::dressed_e0).amplitudes()) >=
                  1 - 1e-10);
            CHECK(oracle::overlap(chain(e0),
                                  excited_final_state_lab(d, kParams, first, ExcitedInitial::bare_e0).amplitudes()) >=
                  1 - 1e-10);
        }
    }
    SUBCASE("displaced Fock state photon number") {
        for (double T : {5.0, 20.0, 31.4}) {
            const DriveParams d(0.05, 100.0 - chi, T);
            const auto xi = displaced_fock_state(d, kParams, c);
            CHECK(photon_number(xi) == doctest::Approx(1.0 + std::norm(alpha_ge(d, kParams).g)).epsilon(1e-10));
        }
    }
}

TEST_CASE("qubit-drive propagator") {
    const FockCutoff c(20);
    const double chi = kParams.chi();
    SUBCASE("identity limits") {
        CHECK(max_abs(qubit_drive_propagator(QubitDriveParams(0.0, 110.1, 3.0), kParams, c).matrix() -
                      Matrix::Identity(40, 40)) < 1e-15);
        CHECK(max_abs(qubit_drive_propagator(QubitDriveParams(0.3, 110.1, 0.0), kParams, c).matrix() -
                      Matrix::Identity(40, 40)) < 1e-15);
    }
    SUBCASE("photon-number blocks") {
        const auto u = qubit_drive_propagator(QubitDriveParams(cplx(0.2, 0.1), 110.3, 2.0), kParams, c);
        CHECK(unitarity_defect(u.matrix()) < 1e-12);
        for (Eigen::Index i = 0; i < 40; ++i)
            for (Eigen::Index j = 0; j < 40; ++j)
                if (i % 20 != j % 20) CHECK(std::abs(u(i, j)) < 1e-12);
    }
    SUBCASE("resonant block angle") {
        const double omega = kParams.omega_q() + chi + 2.0 * 3.0 * chi;  // nu + 6 chi = 0
        const QubitDriveParams qd(0.25, omega, 1.7);
        CHECK(qubit_block_angle(qd, kParams, 3) == doctest::Approx(0.25 * 1.7).epsilon(1e-14));
        const auto u = qubit_drive_propagator(qd, kParams, c);
        CHECK(std::abs(u(3, 3) - std::cos(0.25 * 1.7)) < 1e-14);
        CHECK(std::abs(std::abs(u(23, 3)) - std::sin(0.25 * 1.7)) < 1e-14);
    }
    SUBCASE("first-order Magnus against RK4 on the interaction-frame Hamiltonian") {
        const FockCutoff cc(24);
        const cplx beta(1.5, 0.5);
        const Vector start = coherent_state(beta, cc).amplitudes();
        const double omega_q = kParams.omega_q();
        for (double w : {omega_q + chi, omega_q + chi * 4.0, omega_q + chi * 6.0}) {
            for (cplx eta : {cplx(0.02, 0.0), cplx(0.0, 0.05)}) {
                const QubitDriveParams qd(eta, w, 2 * pi / w);
                const double nu = qd.nu(kParams);
                const Vector expected = oracle::rk4(
                    [&](double t) { return qubit_interaction(cc.n_max(), eta, nu, chi, t); }, start, 0.0, qd.tau, 400);
                const Vector got = qubit_drive_propagator(qd, kParams, cc).matrix() * start;
                CHECK(oracle::overlap(expected, got) >= 1.0 - 1e-3);
            }
        }
    }
}

TEST_CASE("qubit-drive final state and excited probability") {
    const FockCutoff c(40);
    const double chi = kParams.chi();
    SUBCASE("final state follows the frame chain") {
        const QubitDriveParams qd(cplx(0.1, 0.05), kParams.omega_q() + 0.5, 2.5);
        const cplx beta(1.2, -1.1);
        const Matrix ud_dag = dispersive_unitary(kParams, c).matrix().adjoint();
        const Vector v = diag_phase(kParams, c.n_max(), qd.tau)
                             .cwiseProduct(qubit_drive_propagator(qd, kParams, c).matrix() *
                                           coherent_state(beta, c).amplitudes());
        const Vector expected = ud_dag * v;
        CHECK(oracle::overlap(expected, qubit_drive_final_state_lab(qd, kParams, beta, c).amplitudes()) >= 1 - 1e-12);
    }
    SUBCASE("closed-form sum matches the constructed state") {
        for (double w : {kParams.omega_q(), kParams.omega_q() + chi * 10.0, kParams.omega_q() - 0.8}) {
            for (cplx eta : {cplx(0.3, 0.0), cplx(0.0, 0.7), std::polar(0.5, 2.0)}) {
                for (double tau : {0.0, 0.4, 1.3, 3.0}) {
                    for (cplx beta : {cplx(2.0, 0.0), cplx(0.0, 2.0), cplx(-1.0, 1.3)}) {
                        const QubitDriveParams qd(eta, w, tau);
                        const double direct = excited_probability(qubit_drive_final_state_lab(qd, kParams, beta, c));
                        CHECK(pe_full(qd, kParams, beta, 38) == doctest::Approx(direct).epsilon(1e-10));
                    }
                }
            }
        }
    }
    SUBCASE("no drive reproduces the dressed population") {
        const DressedBasis first(kParams, c, DressedVariant::first_order);
        for (cplx beta : {cplx(2.0, 0.0), cplx(0.3, -1.8)}) {
            const double pe = pe_full(QubitDriveParams(0.0, 110.0, 2.0), kParams, beta, 38);
            CHECK(std::abs(pe - excited_probability(dressed_coherent_state(Qubit::g, beta, first))) < 1e-8);
        }
    }
    SUBCASE("bare Rabi limit") {
        const auto p = SystemParams::from_frequencies(100.0, 110.0, 0.0);
        for (double tau : {0.1, 0.9, 2.2}) {
            const QubitDriveParams qd(cplx(0.4, 0.3), 110.0, tau);
            CHECK(pe_full(qd, p, 1.5, 38) == doctest::Approx(std::pow(std::sin(0.5 * tau), 2)).epsilon(1e-12));
        }
    }
    SUBCASE("depends on the phase of beta") {
        const double eta = 0.05 * kParams.omega_q();
        const QubitDriveParams qd(eta, kParams.omega_q() + chi * 10.0, pi / (4 * eta));
        CHECK(std::abs(pe_full(qd, kParams, 2.0, 38) - pe_full(qd, kParams, cplx(0.0, 2.0), 38)) > 1e-3);
    }
    SUBCASE("tail check") {
        CHECK_THROWS_AS(pe_full(QubitDriveParams(0.1, 110.0, 1.0), kParams, 3.0, 10), TruncationError);
    }
}

TEST_CASE("simplified excited probability") {
    for (double tau : {0.0, 0.3, 1.7}) {
        const auto p = pe_simplified(cplx(0.6, 0.8), 0.0, 2.0, 10.0, tau);
        CHECK(p.value == doctest::Approx(std::pow(std::sin(tau), 2)).epsilon(1e-14));
    }
    CHECK(pe_simplified(0.5, 0.1, cplx(1.0, 1.0), 10.0, 0.0).value == doctest::Approx(0.02).epsilon(1e-14));

    const double lambda = 0.1, eta = 0.3, beta = 1.5, Delta = 10.0;
    const double tau = pi / 2 / Delta;
    const double expected = (1 - lambda * lambda) * std::pow(std::sin(eta * tau), 2) +
                            lambda * lambda * beta * beta * std::cos(2 * eta * tau) +
                            lambda * std::sin(2 * eta * tau) * beta;
    CHECK(pe_simplified(eta, lambda, beta, Delta, tau).value == doctest::Approx(expected).epsilon(1e-14));

    WarningCapture warnings;
    const auto out = pe_simplified(1.0, 0.3, 4.0, 10.0, 0.0);
    CHECK_FALSE(out.in_range);
    CHECK(out.value == 1.0);
    CHECK(out.unclamped == doctest::Approx(1.44));
    CHECK(warnings.contains("outside [0, 1]"));
}
