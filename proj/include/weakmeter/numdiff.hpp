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
// Central finite differences with Richardson extrapolation, applied to the
// exact dynamics. This is the ground truth the closed-form predictors are
// checked against, so nothing here may call into weakmeter/formulas.hpp.
//=========================================================================

#ifndef WEAKMETER_NUMDIFF_HPP
#define WEAKMETER_NUMDIFF_HPP

#include <cmath>
#include <vector>

#include "weakmeter/dynamics.hpp"

namespace weakmeter {

enum class DerivativeOrder { first, second };

struct DerivativeEstimate {
    double value = 0.0;
    double step = 0.0;
    DerivativeOrder order = DerivativeOrder::first;
    int richardson_levels = 0;
    double error_estimate = 0.0;
};

// Every target function is entire in s and phi, so a fixed step with two
// halving levels sits comfortably above the double-precision noise floor
// (~1e-8 for second derivatives).
inline constexpr double kDefaultStep = 1e-3;
inline constexpr int kDefaultRichardsonLevels = 2;

/// Central-stencil derivative of fn at x0, Richardson-extrapolated by
/// halving the step once per level. Both stencils have even error series,
/// so each column removes another h^2 order.
template <class F>
DerivativeEstimate central_derivative(F &&fn, double x0, double h, DerivativeOrder order,
                                      int richardson_levels = 0) {
    if (h <= 0.0) {
        throw std::invalid_argument("central_derivative: step must be positive");
    }
    if (richardson_levels < 0) {
        throw std::invalid_argument("central_derivative: negative Richardson level count");
    }
    auto eval = [&](double x) {
        const double v = fn(x);
        if (!std::isfinite(v)) {
            throw Error("central_derivative: non-finite function value at x = " +
                        std::to_string(x));
        }
        return v;
    };
    auto stencil = [&](double hh) {
        if (order == DerivativeOrder::first) {
            return (eval(x0 + hh) - eval(x0 - hh)) / (2.0 * hh);
        }
        return (eval(x0 + hh) - 2.0 * eval(x0) + eval(x0 - hh)) / (hh * hh);
    };

    DerivativeEstimate out;
    out.step = h;
    out.order = order;
    out.richardson_levels = richardson_levels;

    if (richardson_levels == 0) {
        out.value = stencil(h);
        out.error_estimate = std::abs(out.value - stencil(h / 2.0));
        return out;
    }

    const int rows = richardson_levels + 1;
    std::vector<std::vector<double>> tableau(rows);
    double step = h;
    for (int r = 0; r < rows; ++r, step /= 2.0) {
        tableau[r].resize(r + 1);
        tableau[r][0] = stencil(step);
        double factor = 4.0;
        for (int c = 1; c <= r; ++c, factor *= 4.0) {
            tableau[r][c] = (factor * tableau[r][c - 1] - tableau[r - 1][c - 1]) / (factor - 1.0);
        }
    }
    out.value = tableau[rows - 1][rows - 1];
    out.error_estimate = std::abs(tableau[rows - 1][rows - 1] - tableau[rows - 2][rows - 2]);
    return out;
}

/// d^2/ds^2 at s = 0 of the readout variance: the conditional variance when
/// a post-selection is present, the unconditioned one otherwise.
inline DerivativeEstimate fd_variance_growth(const Scenario &sc, double h = kDefaultStep,
                                             int richardson_levels = kDefaultRichardsonLevels) {
    if (sc.has_postselection()) {
        return central_derivative([&](double s) { return sc.conditional_moments(s).variance; },
                                  0.0, h, DerivativeOrder::second, richardson_levels);
    }
    return central_derivative([&](double s) { return sc.unconditioned_moments(s).variance; }, 0.0,
                              h, DerivativeOrder::second, richardson_levels);
}

/// Unconditioned counterpart, usable even when the scenario carries a
/// post-selection (report plumbing needs both columns side by side).
inline DerivativeEstimate
fd_unconditioned_variance_growth(const Scenario &sc, double h = kDefaultStep,
                                 int richardson_levels = kDefaultRichardsonLevels) {
    return central_derivative([&](double s) { return sc.unconditioned_moments(s).variance; }, 0.0,
                              h, DerivativeOrder::second, richardson_levels);
}

/// (d^2/dphi^2) <f|rho(phi)|f> / <f|rho|f> at phi = 0, from the system-only
/// dynamics generated by the observable.
inline DerivativeEstimate
fd_postselection_curvature(const Scenario &sc, double h = kDefaultStep,
                           int richardson_levels = kDefaultRichardsonLevels) {
    const double p0 = sc.phase_shifted_probability(0.0);
    if (p0 < kDegenerateProbability) {
        throw DegeneratePostselectionError("fd_postselection_curvature: postselection probability " +
                                           std::to_string(p0));
    }
    DerivativeEstimate est =
        central_derivative([&](double phi) { return sc.phase_shifted_probability(phi); }, 0.0, h,
                           DerivativeOrder::second, richardson_levels);
    est.value /= p0;
    est.error_estimate /= p0;
    return est;
}

} // namespace weakmeter

#endif // WEAKMETER_NUMDIFF_HPP
