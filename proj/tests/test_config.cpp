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

#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"
#include "weakmeter/config.hpp"
#include "weakmeter/formulas.hpp"

using namespace weakmeter;
using namespace weakmeter::testing;

namespace {

const char *kS2Config = R"(
hbar = 1

[system]
dimension = 2
observable = pauli_z
state = [0.7071067811865475+0j, 0.7071067811865475+0j]

[postselection]
amplitudes = [0.5+0j, -0.8660254037844386+0j]

[meter]
kind = gaussian_cv
sigma_x2 = 0.5
cutoff = 60

[scan]
s_values = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3]

[numdiff]
h = 0.001
richardson_levels = 2
)";

ScenarioConfig parse_string(const std::string &text) {
    std::istringstream in(text);
    return parse_scenario(in, "<test>");
}

} // namespace

TEST_CASE("the anomalous sample config materializes correctly", "[config]") {
    const ScenarioConfig cfg = parse_string(kS2Config);
    CHECK(cfg.hbar == 1.0);
    CHECK(cfg.system.dimension == 2);
    CHECK(cfg.system.observable_name == "pauli_z");
    CHECK(cfg.meter.kind == "gaussian_cv");
    REQUIRE(cfg.scan.s_values.size() == 7);
    CHECK(cfg.numdiff.richardson_levels == 2);

    const Scenario sc = make_scenario(cfg);
    const Complex wv =
        weak_value(sc.system_state(), sc.system_observable(), *sc.postselection());
    CHECK(std::abs(wv - Complex(anomalous_weak_value(), 0.0)) < 1e-10);
}

TEST_CASE("complex literal forms", "[config]") {
    const ScenarioConfig cfg = parse_string(R"(
[system]
dimension = 2
observable = [[0+0j, -1.5j], [1.5j, 0]]
state = [0.6, 0.8j]

[meter]
kind = qubit

[scan]
s_values = [0.1]
)");
    REQUIRE(cfg.system.observable_matrix.has_value());
    CHECK((*cfg.system.observable_matrix)(0, 1) == Complex(0.0, -1.5));
    CHECK((*cfg.system.observable_matrix)(1, 0) == Complex(0.0, 1.5));
    REQUIRE(cfg.system.state_amplitudes.has_value());
    CHECK((*cfg.system.state_amplitudes)(1) == Complex(0.0, 0.8));
}

TEST_CASE("field-pathed load errors", "[config]") {
    // non-Hermitian observable names the offending field
    const std::string non_hermitian = R"(
[system]
dimension = 2
observable = [[0+0j, 1+0j], [0+0j, 0+0j]]
state = [1+0j, 0+0j]
[meter]
kind = qubit
[scan]
s_values = [0.1]
)";
    CHECK_THROWS_WITH(parse_string(non_hermitian),
                      Catch::Matchers::ContainsSubstring("system.observable"));

    // normalization drift beyond 1e-6 is rejected
    CHECK_THROWS_WITH(parse_string(R"(
[system]
dimension = 2
observable = pauli_z
state = [1.00001+0j, 0+0j]
[meter]
kind = qubit
[scan]
s_values = [0.1]
)"),
                      Catch::Matchers::ContainsSubstring("system.state"));

    // unknown keys are refused with their path
    CHECK_THROWS_WITH(parse_string(R"(
[system]
dimension = 2
observable = pauli_z
state = [1+0j, 0+0j]
spin = up
[meter]
kind = qubit
[scan]
s_values = [0.1]
)"),
                      Catch::Matchers::ContainsSubstring("system.spin"));

    // malformed literals carry the line number
    CHECK_THROWS_WITH(parse_string("[system]\ndimension = banana\n"),
                      Catch::Matchers::ContainsSubstring("<test>:2"));

    // missing sections
    CHECK_THROWS_WITH(parse_string("[system]\ndimension = 2\nobservable = pauli_z\n"),
                      Catch::Matchers::ContainsSubstring("system.state"));

    // gaussian_cv needs its parameters
    CHECK_THROWS_WITH(parse_string(R"(
[system]
dimension = 2
observable = pauli_z
state = [1+0j, 0+0j]
[meter]
kind = gaussian_cv
[scan]
s_values = [0.1]
)"),
                      Catch::Matchers::ContainsSubstring("meter.sigma_x2"));
}

TEST_CASE("sub-tolerance drift is renormalized", "[config]") {
    const ScenarioConfig cfg = parse_string(R"(
[system]
dimension = 2
observable = pauli_z
state = [1.0000001+0j, 0+0j]
[meter]
kind = qubit
[scan]
s_values = [0.1]
)");
    REQUIRE(cfg.system.state_amplitudes.has_value());
    CHECK(cfg.system.state_amplitudes->norm() == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("orthogonal postselection loads but fails at run time", "[config]") {
    const ScenarioConfig cfg = parse_string(R"(
[system]
dimension = 2
observable = pauli_z
state = [1+0j, 0+0j]
[postselection]
amplitudes = [0+0j, 1+0j]
[meter]
kind = qubit
[scan]
s_values = [0.0]
)");
    const Scenario sc = make_scenario(cfg); // loading succeeds
    CHECK_THROWS_AS(sc.conditional_moments(0.0), DegeneratePostselectionError);
}

TEST_CASE("spin_j observables", "[config]") {
    const ScenarioConfig cfg = parse_string(R"(
[system]
dimension = 3
observable = spin_j
state = [1+0j, 0+0j, 0+0j]
[meter]
kind = qubit
[scan]
s_values = [0.1]
)");
    const ComplexMatrix j = make_system_observable(cfg);
    CHECK(j(0, 0) == Complex(1.0, 0.0));
    CHECK(j(1, 1) == Complex(0.0, 0.0));
    CHECK(j(2, 2) == Complex(-1.0, 0.0));
}

TEST_CASE("custom meters from configs", "[config]") {
    // explicit operator form
    const ScenarioConfig explicit_cfg = parse_string(R"(
[system]
dimension = 2
observable = pauli_z
state = [1+0j, 0+0j]
[meter]
kind = custom
m = [[0+0j, 1+0j], [1+0j, 0+0j]]
b = [[0+0j, -0.5j], [0.5j, 0+0j]]
state = [1+0j, 0+0j]
inversion = [[1+0j, 0+0j], [0+0j, -1+0j]]
[scan]
s_values = [0.1]
)");
    const MeterModel explicit_meter = make_meter(explicit_cfg);
    const MeterModel builtin = build_qubit_meter();
    CHECK((explicit_meter.response() - builtin.response()).cwiseAbs().maxCoeff() < 1e-15);

    // x/p quadrature form with Fock amplitudes
    const ScenarioConfig fock_cfg = parse_string(R"(
[system]
dimension = 2
observable = pauli_z
state = [1+0j, 0+0j]
[meter]
kind = custom
sigma_x2 = 0.5
cutoff = 24
state = [0.7071067811865475+0j, 0+0j, 0.7071067811865475+0j]
[scan]
s_values = [0.1]
)");
    const MeterModel fock_meter = make_meter(fock_cfg);
    CHECK(fock_meter.dim() == 28);
    CHECK(fock_meter.correlation_kmb() == Catch::Approx(-0.5).margin(1e-10));
    CHECK(validate_meter_symmetry(fock_meter).fully_symmetric());

    // a state populating levels past the cutoff is a truncation leak
    std::string leaking = R"(
[system]
dimension = 2
observable = pauli_z
state = [1+0j, 0+0j]
[meter]
kind = custom
sigma_x2 = 0.5
cutoff = 2
state = [0.7071067811865475+0j, 0+0j, 0+0j, 0.7071067811865475+0j]
[scan]
s_values = [0.1]
)";
    CHECK_THROWS_AS(make_meter(parse_string(leaking)), TruncationError);
}

TEST_CASE("write/load round trip is the identity", "[config]") {
    for (const std::string text :
         {std::string(kS2Config), std::string(R"(
hbar = 2

[system]
dimension = 3
observable = [[0.5+0j, 0.25-0.125j, 0+0j], [0.25+0.125j, -0.5+0j, 0+0j], [0+0j, 0+0j, 0.75+0j]]
state = [[0.5+0j, 0+0j, 0+0j], [0+0j, 0.25+0j, 0+0j], [0+0j, 0+0j, 0.25+0j]]

[meter]
kind = qubit

[scan]
s_values = [0.0, 0.125]

[numdiff]
h = 0.0005
richardson_levels = 3
)")}) {
        const ScenarioConfig cfg = parse_string(text);
        const std::string written = write_scenario(cfg);
        const ScenarioConfig reloaded = parse_string(written);
        CHECK(write_scenario(reloaded) == written); // canonical fixpoint
        CHECK(reloaded.hbar == cfg.hbar);
        CHECK(reloaded.system.dimension == cfg.system.dimension);
        CHECK(reloaded.scan.s_values == cfg.scan.s_values);
        CHECK(reloaded.numdiff.h == cfg.numdiff.h);
        CHECK(reloaded.numdiff.richardson_levels == cfg.numdiff.richardson_levels);
        if (cfg.system.state_amplitudes) {
            CHECK((*reloaded.system.state_amplitudes - *cfg.system.state_amplitudes).norm() ==
                  0.0);
        }
        if (cfg.system.state_density) {
            CHECK((*reloaded.system.state_density - *cfg.system.state_density).cwiseAbs()
                      .maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("multi-line lists parse", "[config]") {
    const ScenarioConfig cfg = parse_string(R"(
[system]
dimension = 2
observable = [[1+0j, 0+0j],
              [0+0j, -1+0j]]
state = [1+0j,
         0+0j]
[meter]
kind = qubit
[scan]
s_values = [0.0,
            0.1]
)");
    CHECK(cfg.scan.s_values.size() == 2);
    REQUIRE(cfg.system.observable_matrix.has_value());
    CHECK((*cfg.system.observable_matrix - pauli_z()).cwiseAbs().maxCoeff() == 0.0);
}
