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

//=========================================================================
// Closed-form second-order predictors for the readout statistics:
//
//   unconditioned   d2(Var M)/ds2 = 2<G>^2 VarA + 2 VarG <A^2> - <{M,T}><A^2>
//   conditional     d2(Var M|f)/ds2 = 2<G>^2 e2 + (2 VarG - <{M,T}>) q
//                                     + K_MB * (d2_phi <f|rho|f>) / <f|rho|f>
//
// with G the meter response, T the saturation, e2 the post-selected
// uncertainty of the observable, q = <f|A rho A|f>/<f|rho|f> the sandwiched
// second moment, and K_MB the squared-moment correlation of the meter
// state. Every evaluator reports term by term so the finite-difference
// oracle can check each total.
//=========================================================================

#ifndef WEAKMETER_FORMULAS_HPP
#define WEAKMETER_FORMULAS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "weakmeter/dynamics.hpp"

namespace weakmeter {

/// Term-by-term second derivative of a readout variance at s = 0. The
/// Bayesian-update term is zero for unconditioned growth. total is always
/// the exact sum of the four terms; oracle is filled by the report layer.
struct GrowthReport {
    double total = 0.0;
    double term_linear_response = 0.0;
    double term_response_fluctuation = 0.0;
    double term_saturation = 0.0;
    double term_bayesian_update = 0.0;
    std::optional<double> oracle;
    std::vector<std::string> advisories;
};

/// Post-selected statistics of the observable: the complex weak value, the
/// sandwiched second moment, the weak value of A^2, the post-selected
/// uncertainty, the normalized curvature of the post-selection probability
/// under the system dynamics, the dynamic pseudovariance, and (pure states
/// only) the weak variance Re(wv(A^2) - wv(A)^2).
struct WeakStatistics {
    Complex weak_value;
    double sandwiched_second_moment = 0.0;
    Complex weak_value_of_a2;
    double ozawa = 0.0;
    double curvature = 0.0;
    double v_dyn = 0.0;
    std::optional<double> weak_variance;
};

namespace detail {

inline void check_postselected_inputs(const QuantumState &state, const ComplexMatrix &a,
                                      const ComplexVector &f) {
    require_square(a, "postselected statistics");
    if (a.rows() != state.dim() || f.size() != state.dim()) {
        throw std::invalid_argument("postselected statistics: dimension mismatch");
    }
}

inline double postselection_probability(const QuantumState &state, const ComplexVector &f) {
    if (state.is_pure()) {
        return std::norm(f.dot(state.vector()));
    }
    return (f.adjoint() * state.density() * f)(0).real();
}

inline void check_not_degenerate(double pf, const char *what) {
    if (pf < kDegenerateProbability) {
        throw DegeneratePostselectionError(std::string(what) +
                                           ": postselection probability " + std::to_string(pf));
    }
}

/// <f|O rho|f> / <f|rho|f>.
inline Complex postselected_ratio(const QuantumState &state, const ComplexMatrix &o,
                                  const ComplexVector &f) {
    if (state.is_pure()) {
        return f.dot(o * state.vector()) / f.dot(state.vector());
    }
    const ComplexMatrix rho = state.density();
    return (f.adjoint() * o * rho * f)(0) / (f.adjoint() * rho * f)(0);
}

/// <f|A rho A|f> / <f|rho|f>. For pure states the two algebraic routes are
/// cross-checked; they collapse to |<f|A|psi>|^2 / |<f|psi>|^2.
inline double sandwiched_moment(const QuantumState &state, const ComplexMatrix &a,
                                const ComplexVector &f) {
    if (state.is_pure()) {
        const double direct = std::norm(f.dot(a * state.vector())) / std::norm(f.dot(state.vector()));
        const ComplexMatrix rho = state.density();
        const double via_density = ((f.adjoint() * a * rho * a * f)(0) /
                                    (f.adjoint() * rho * f)(0))
                                       .real();
        if (std::abs(direct - via_density) >
            1e-12 * std::max({1.0, std::abs(direct), std::abs(via_density)})) {
            throw ConsistencyError("sandwiched moment: pure and density routes disagree by " +
                                   std::to_string(std::abs(direct - via_density)));
        }
        return direct;
    }
    const ComplexMatrix rho = state.density();
    return ((f.adjoint() * a * rho * a * f)(0) / (f.adjoint() * rho * f)(0)).real();
}

} // namespace detail

//-------------------------------------------------------------------------
// Post-selected statistics of the observable.
//-------------------------------------------------------------------------

/// Complex weak value <f|A rho|f> / <f|rho|f>.
inline Complex weak_value(const QuantumState &state, const ComplexMatrix &a,
                          const ComplexVector &f) {
    detail::check_postselected_inputs(state, a, f);
    detail::check_not_degenerate(detail::postselection_probability(state, f), "weak_value");
    return detail::postselected_ratio(state, a, f);
}

/// Weak value of the squared observable.
inline Complex weak_value_of_square(const QuantumState &state, const ComplexMatrix &a,
                                    const ComplexVector &f) {
    detail::check_postselected_inputs(state, a, f);
    detail::check_not_degenerate(detail::postselection_probability(state, f),
                                 "weak_value_of_square");
    return detail::postselected_ratio(state, ComplexMatrix(a * a), f);
}

/// <f|A rho A|f> / <f|rho|f>.
inline double sandwiched_second_moment(const QuantumState &state, const ComplexMatrix &a,
                                       const ComplexVector &f) {
    detail::check_postselected_inputs(state, a, f);
    detail::check_not_degenerate(detail::postselection_probability(state, f),
                                 "sandwiched_second_moment");
    return detail::sandwiched_moment(state, a, f);
}

/// Post-selected uncertainty of the observable,
/// <f|A rho A|f>/<f|rho|f> - (Re weak value)^2. Non-negative by
/// Cauchy-Schwarz; rounding residue is clamped to zero.
inline double ozawa_uncertainty(const QuantumState &state, const ComplexMatrix &a,
                                const ComplexVector &f) {
    detail::check_postselected_inputs(state, a, f);
    detail::check_not_degenerate(detail::postselection_probability(state, f), "ozawa_uncertainty");
    const double sandwich = detail::sandwiched_moment(state, a, f);
    const Complex wv = detail::postselected_ratio(state, a, f);
    const double value = sandwich - wv.real() * wv.real();
    if (value < -1e-12) {
        throw ConsistencyError("ozawa_uncertainty: negative value " + std::to_string(value));
    }
    return std::max(value, 0.0);
}

/// Normalized curvature (d^2/dphi^2) <f|rho(phi)|f> / <f|rho|f> of the
/// post-selection probability under the system dynamics, computed two ways:
/// (a) the double commutator -(1/hbar^2) tr(rho [A,[A,|f><f|]]) and (b) the
/// weak-value expression -(2/hbar^2)(Re wv(A^2) - sandwiched moment). Route
/// (a) is returned; disagreement beyond 1e-8 signals an implementation bug.
inline double postselection_curvature(const QuantumState &state, const ComplexMatrix &a,
                                      const ComplexVector &f, double hbar) {
    detail::check_postselected_inputs(state, a, f);
    const double pf = detail::postselection_probability(state, f);
    detail::check_not_degenerate(pf, "postselection_curvature");

    const ComplexMatrix projector = f * f.adjoint();
    const ComplexMatrix double_comm = commutator(a, commutator(a, projector));
    const double via_commutator =
        -(expectation(state, double_comm).real() / (hbar * hbar)) / pf;

    const double re_wv_a2 = detail::postselected_ratio(state, ComplexMatrix(a * a), f).real();
    const double sandwich = detail::sandwiched_moment(state, a, f);
    const double via_weak_values = -(2.0 / (hbar * hbar)) * (re_wv_a2 - sandwich);

    const double scale = std::max({1.0, std::abs(via_commutator), std::abs(via_weak_values)});
    if (std::abs(via_commutator - via_weak_values) > 1e-8 * scale) {
        throw ConsistencyError("postselection_curvature: routes disagree, " +
                               std::to_string(via_commutator) + " vs " +
                               std::to_string(via_weak_values));
    }
    return via_commutator;
}

/// V_dyn = -(hbar^2/2) * curvature: the dynamical response of the
/// post-selection probability dressed up as a variance. For pure states it
/// equals Re wv(A^2) - |wv(A)|^2, which is cross-checked here.
inline double dynamic_pseudovariance(const QuantumState &state, const ComplexMatrix &a,
                                     const ComplexVector &f, double hbar) {
    const double curvature = postselection_curvature(state, a, f, hbar);
    const double value = -(hbar * hbar / 2.0) * curvature;
    if (state.is_pure()) {
        const Complex wv = detail::postselected_ratio(state, a, f);
        const double pure_form =
            detail::postselected_ratio(state, ComplexMatrix(a * a), f).real() - std::norm(wv);
        if (std::abs(value - pure_form) > 1e-10 * std::max(1.0, std::abs(value))) {
            throw ConsistencyError("dynamic_pseudovariance: pure-state form disagrees by " +
                                   std::to_string(std::abs(value - pure_form)));
        }
    }
    return value;
}

/// Re(wv(A^2) - wv(A)^2). Only meaningful for pure system states; it then
/// accounts for the full Gaussian-meter conditional variance growth.
inline double weak_variance(const QuantumState &state, const ComplexMatrix &a,
                            const ComplexVector &f) {
    if (!state.is_pure()) {
        throw std::invalid_argument("weak_variance: defined for pure system states only");
    }
    detail::check_postselected_inputs(state, a, f);
    detail::check_not_degenerate(detail::postselection_probability(state, f), "weak_variance");
    const Complex wv = detail::postselected_ratio(state, a, f);
    const Complex wv_a2 = detail::postselected_ratio(state, ComplexMatrix(a * a), f);
    return (wv_a2 - wv * wv).real();
}

/// All post-selected statistics in one pass.
inline WeakStatistics weak_statistics(const QuantumState &state, const ComplexMatrix &a,
                                      const ComplexVector &f, double hbar) {
    WeakStatistics out;
    out.weak_value = weak_value(state, a, f);
    out.sandwiched_second_moment = sandwiched_second_moment(state, a, f);
    out.weak_value_of_a2 = weak_value_of_square(state, a, f);
    out.ozawa = ozawa_uncertainty(state, a, f);
    out.curvature = postselection_curvature(state, a, f, hbar);
    out.v_dyn = -(hbar * hbar / 2.0) * out.curvature;
    if (state.is_pure()) {
        out.weak_variance = weak_variance(state, a, f);
    }
    return out;
}

//-------------------------------------------------------------------------
// Shift rates and growth decompositions.
//-------------------------------------------------------------------------

namespace detail {

inline void append_meter_advisories(const Scenario &sc, bool need_unbiased,
                                    std::vector<std::string> &advisories) {
    const SymmetryReport report = validate_meter_symmetry(sc.meter());
    if (!report.inversion_present) {
        advisories.push_back("meter has no inversion unitary; the symmetry conditions the "
                             "growth formulas assume could not be verified");
    } else if (!(report.spectrum_symmetric && report.state_parity_ok && report.generator_odd_ok)) {
        advisories.push_back("meter violates the inversion-symmetry conditions (residuals: "
                             "spectrum " + std::to_string(report.spectrum_residual) + ", state " +
                             std::to_string(report.state_residual) + ", generator " +
                             std::to_string(report.generator_residual) + ")");
    }
    if (need_unbiased && !report.unbiased_mb_ok) {
        advisories.push_back("meter state violates <BM+MB> = 0 (residual " +
                             std::to_string(report.mb_residual) +
                             "); the conditional first-order formulas assume it");
    }
}

} // namespace detail

/// d<M(s)>/ds at s = 0: <Gamma> <A>.
inline double unconditioned_shift_rate(const Scenario &sc) {
    return sc.meter().response_mean() * expectation(sc.system_state(), sc.system_observable()).real();
}

/// d<M(s|f)>/ds at s = 0: <Gamma> Re(weak value). Assumes <BM+MB> = 0.
inline double conditional_shift_rate(const Scenario &sc) {
    if (!sc.has_postselection()) {
        throw std::logic_error("conditional_shift_rate: scenario has no postselection");
    }
    return sc.meter().response_mean() *
           weak_value(sc.system_state(), sc.system_observable(), *sc.postselection()).real();
}

/// Unconditioned d2(Var M)/ds2 at s = 0, term by term.
inline GrowthReport variance_growth_decomposition(const Scenario &sc) {
    const MeterModel &m = sc.meter();
    const double var_a = variance(sc.system_state(), sc.system_observable());
    const double second_a =
        expectation(sc.system_state(),
                    ComplexMatrix(sc.system_observable() * sc.system_observable()))
            .real();

    GrowthReport report;
    report.term_linear_response = 2.0 * m.response_mean() * m.response_mean() * var_a;
    report.term_response_fluctuation = 2.0 * m.response_variance() * second_a;
    report.term_saturation = -m.saturation_readout_moment() * second_a;
    report.term_bayesian_update = 0.0;
    report.total = report.term_linear_response + report.term_response_fluctuation +
                   report.term_saturation + report.term_bayesian_update;
    detail::append_meter_advisories(sc, /*need_unbiased=*/false, report.advisories);
    return report;
}

/// Conditional d2(Var M|f)/ds2 at s = 0, term by term. The Bayesian-update
/// term couples the meter's squared-moment correlation K_MB to the
/// curvature of the post-selection probability.
inline GrowthReport conditional_variance_growth(const Scenario &sc) {
    if (!sc.has_postselection()) {
        throw std::logic_error("conditional_variance_growth: scenario has no postselection");
    }
    const MeterModel &m = sc.meter();
    const QuantumState &rho = sc.system_state();
    const ComplexMatrix &a = sc.system_observable();
    const ComplexVector &f = *sc.postselection();

    const double eps2 = ozawa_uncertainty(rho, a, f);
    const double sandwich = sandwiched_second_moment(rho, a, f);
    const double curvature = postselection_curvature(rho, a, f, sc.hbar());

    GrowthReport report;
    report.term_linear_response = 2.0 * m.response_mean() * m.response_mean() * eps2;
    report.term_response_fluctuation = 2.0 * m.response_variance() * sandwich;
    report.term_saturation = -m.saturation_readout_moment() * sandwich;
    report.term_bayesian_update = m.correlation_kmb() * curvature;
    report.total = report.term_linear_response + report.term_response_fluctuation +
                   report.term_saturation + report.term_bayesian_update;
    detail::append_meter_advisories(sc, /*need_unbiased=*/true, report.advisories);
    return report;
}

/// The Gaussian-meter closed form Re wv(A^2) + sandwich - 2 (Re wv)^2.
/// Equals conditional_variance_growth(...).total whenever the meter is an
/// x/p pair in a Gaussian state (response one, no saturation, K = -hbar^2/2).
inline double gaussian_conditional_growth(const QuantumState &state, const ComplexMatrix &a,
                                          const ComplexVector &f, double /*hbar*/) {
    detail::check_postselected_inputs(state, a, f);
    detail::check_not_degenerate(detail::postselection_probability(state, f),
                                 "gaussian_conditional_growth");
    const double re_wv_a2 = detail::postselected_ratio(state, ComplexMatrix(a * a), f).real();
    const double sandwich = detail::sandwiched_moment(state, a, f);
    const double re_wv = detail::postselected_ratio(state, a, f).real();
    return re_wv_a2 + sandwich - 2.0 * re_wv * re_wv;
}

/// d/ds of the unnormalized conditional numerator <|f><f|(s) M(s)> at s = 0,
/// split into (weak-value term, back-action term). The back-action term
/// carries the meter's <BM+MB>/2 bias and vanishes for unbiased meters.
inline std::pair<double, double> projector_product_derivative(const Scenario &sc) {
    if (!sc.has_postselection()) {
        throw std::logic_error("projector_product_derivative: scenario has no postselection");
    }
    const ComplexVector &f = *sc.postselection();
    Complex overlap; // <f|A rho|f>, unnormalized
    if (sc.system_state().is_pure()) {
        const ComplexVector &psi = sc.system_state().vector();
        overlap = f.dot(sc.system_observable() * psi) * psi.dot(f);
    } else {
        overlap = (f.adjoint() * sc.system_observable() * sc.system_state().density() * f)(0);
    }
    const double weak_term = sc.meter().response_mean() * overlap.real();
    const double backaction_term =
        (overlap.imag() / sc.hbar()) * sc.meter().readout_generator_moment();
    return {weak_term, backaction_term};
}

} // namespace weakmeter

#endif // WEAKMETER_FORMULAS_HPP
