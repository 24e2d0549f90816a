// Copyright 2026 The weakmeter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"
#include "weakmeter/meter.hpp"

using namespace weakmeter;
using namespace weakmeter::testing;

namespace {

double max_abs(const ComplexMatrix &m) { return m.cwiseAbs().maxCoeff(); }

ComplexVector fock_superposition(Eigen::Index dim, Eigen::Index a, Eigen::Index b, double ca,
                                 double cb) {
    ComplexVector v = ComplexVector::Zero(dim);
    v(a) = ca;
    v(b) = cb;
    return v / v.norm();
}

} // namespace

TEST_CASE("qubit meter derived operators", "[meter]") {
    const MeterModel m = build_qubit_meter();
    CHECK(max_abs(m.response() - pauli_z()) < 1e-15);          // (i/hbar)[sy/2, sx] = sz
    CHECK(max_abs(m.saturation() - pauli_x()) < 1e-15);        // saturation equals the readout
    CHECK(m.correlation_kmb() == Catch::Approx(0.0).margin(1e-15));
    CHECK(m.response_mean() == Catch::Approx(1.0).margin(1e-15));
    CHECK(m.response_variance() == Catch::Approx(0.0).margin(1e-15));

    const SymmetryReport report = validate_meter_symmetry(m);
    CHECK(report.fully_symmetric());
}

TEST_CASE("gaussian cv meter matches its closed-form moments", "[meter]") {
    const double sigma_x2 = 0.5;
    const MeterModel m = build_gaussian_cv_meter(std::sqrt(sigma_x2), 60);

    CHECK(m.readout_variance() == Catch::Approx(sigma_x2).margin(1e-10));
    CHECK(m.response_mean() == Catch::Approx(1.0).margin(1e-12));
    CHECK(m.correlation_kmb() == Catch::Approx(-0.5).margin(1e-6));
    CHECK(expectation(m.state(), m.readout()).real() == Catch::Approx(0.0).margin(1e-14));
    CHECK(expectation(m.state(), m.generator()).real() == Catch::Approx(0.0).margin(1e-14));

    // minimal uncertainty: dx * dp = hbar/2
    const double dp2 = variance(m.state(), m.generator());
    CHECK(std::sqrt(m.readout_variance() * dp2) == Catch::Approx(0.5).margin(1e-8));

    CHECK(validate_meter_symmetry(m).fully_symmetric());

    // response is the identity away from the truncation edge
    const Eigen::Index dim = m.dim();
    CHECK(max_abs(ComplexMatrix(m.response().topLeftCorner(dim - 2, dim - 2) -
                                identity_matrix(dim - 2))) < 1e-12);
    // saturation vanishes away from the edge
    CHECK(max_abs(ComplexMatrix(m.saturation().topLeftCorner(dim - 4, dim - 4))) < 1e-12);

    CHECK_THROWS_AS(build_gaussian_cv_meter(-1.0, 60), std::invalid_argument);
    CHECK_THROWS_AS(build_gaussian_cv_meter(1.0, 1), std::invalid_argument);
}

TEST_CASE("gaussian K_MB scales as -hbar^2/2", "[meter]") {
    for (double hbar : {1.0, 2.0}) {
        for (double sigma_x2 : {0.25, 0.5, 1.0}) {
            const MeterModel m = build_gaussian_cv_meter(std::sqrt(sigma_x2), 40, hbar);
            CHECK(meter_correlation_kmb(m) ==
                  Catch::Approx(-hbar * hbar / 2.0).margin(1e-6));
        }
    }
}

TEST_CASE("custom meter with qubit parts reproduces the qubit builder", "[meter]") {
    const MeterModel custom = build_custom_meter(pauli_x(), pauli_y() / 2.0,
                                                 QuantumState::pure(basis_state(2, 0)), pauli_z());
    const MeterModel builtin = build_qubit_meter();
    CHECK(max_abs(custom.response() - builtin.response()) == 0.0);
    CHECK(max_abs(custom.saturation() - builtin.saturation()) == 0.0);
    CHECK(custom.correlation_kmb() == builtin.correlation_kmb());
}

TEST_CASE("custom fock meters and parity flags", "[meter]") {
    const Eigen::Index dim = 24;
    const double sigma = std::sqrt(0.5);
    const ComplexMatrix x = position_quadrature(sigma, dim);
    const ComplexMatrix p = momentum_quadrature(sigma, dim, 1.0);

    // even superposition: accepted, all symmetry checks pass
    const MeterModel even = build_custom_meter(
        x, p, QuantumState::pure(fock_superposition(dim, 0, 2, 1.0, 1.0)), fock_parity(dim));
    CHECK(validate_meter_symmetry(even).fully_symmetric());

    // |1> is parity odd; readout variance is unaffected but the flag trips
    const MeterModel odd =
        build_custom_meter(x, p, QuantumState::pure(basis_state(dim, 1)), fock_parity(dim));
    const SymmetryReport report = validate_meter_symmetry(odd);
    CHECK_FALSE(report.state_parity_ok);
    CHECK(report.spectrum_symmetric);
    CHECK(report.generator_odd_ok);
    CHECK(report.unbiased_mb_ok);

    // (|0>+|1>)/sqrt2 trips the parity flag too
    const MeterModel biased = build_custom_meter(
        x, p, QuantumState::pure(fock_superposition(dim, 0, 1, 1.0, 1.0)), fock_parity(dim));
    CHECK_FALSE(validate_meter_symmetry(biased).state_parity_ok);

    // without an inversion the three inversion checks are not applicable
    const MeterModel no_inv =
        build_custom_meter(x, p, QuantumState::pure(basis_state(dim, 0)));
    const SymmetryReport na = validate_meter_symmetry(no_inv);
    CHECK_FALSE(na.inversion_present);
    CHECK(na.unbiased_mb_ok);
    CHECK(std::isnan(na.spectrum_residual));

    // invariant violations are rejected outright
    ComplexMatrix not_hermitian(2, 2);
    not_hermitian << 0, 1, 0, 0;
    CHECK_THROWS_AS(build_custom_meter(not_hermitian, pauli_y(),
                                       QuantumState::pure(basis_state(2, 0))),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_custom_meter(pauli_x(), pauli_y(),
                                       QuantumState::pure(basis_state(2, 0)), 2.0 * pauli_z()),
                    std::invalid_argument);
}

TEST_CASE("response and saturation special cases", "[meter]") {
    // commuting pair: zero response
    const MeterModel commuting =
        build_custom_meter(pauli_x(), pauli_x(), QuantumState::pure(basis_state(2, 0)));
    CHECK(max_abs(meter_response(commuting)) == 0.0);
    CHECK(max_abs(meter_saturation(commuting)) == 0.0);

    // response proportional to the identity: zero saturation (cv meter interior)
    const MeterModel cv = build_gaussian_cv_meter(1.0, 30);
    CHECK(max_abs(ComplexMatrix(cv.saturation().topLeftCorner(20, 20))) < 1e-12);

    // M^2 = I factors out of K_MB regardless of the generator
    std::mt19937_64 rng(101);
    ComplexMatrix m4 = ComplexMatrix::Zero(4, 4);
    m4.diagonal() << 1, -1, 1, -1;
    const MeterModel involutive =
        build_custom_meter(m4, random_hermitian(rng, 4), random_pure_state(rng, 4));
    CHECK(involutive.correlation_kmb() == Catch::Approx(0.0).margin(1e-13));

    // derived operators stay Hermitian, K_MB stays real, for random meters
    for (int trial = 0; trial < 5; ++trial) {
        const MeterModel random_meter = build_custom_meter(
            random_hermitian(rng, 5), random_hermitian(rng, 5), random_pure_state(rng, 5));
        CHECK(is_hermitian(random_meter.response(), 1e-10));
        CHECK(is_hermitian(random_meter.saturation(), 1e-10));
    }
}

TEST_CASE("fock tail probability guards the truncation", "[meter]") {
    const Eigen::Index dim = 24;
    ComplexVector top = ComplexVector::Zero(dim);
    top(dim - 1) = 1.0;
    CHECK(fock_tail_probability(QuantumState::pure(top), 20) == Catch::Approx(1.0));
    CHECK(fock_tail_probability(QuantumState::pure(basis_state(dim, 0)), 20) == 0.0);
}
