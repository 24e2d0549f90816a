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

#ifndef WEAKMETER_TEST_HELPERS_HPP
#define WEAKMETER_TEST_HELPERS_HPP

#include <cmath>
#include <random>

#include "weakmeter/dynamics.hpp"

namespace weakmeter::testing {

/// Random Hermitian matrix with spectral norm capped at norm_cap, keeping the
/// finite-difference stencils of the dynamics well inside their accuracy range.
inline ComplexMatrix random_hermitian(std::mt19937_64 &rng, Eigen::Index dim,
                                      double norm_cap = 1.5) {
    std::normal_distribution<double> gauss;
    ComplexMatrix g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            g(i, j) = Complex(gauss(rng), gauss(rng));
        }
    }
    ComplexMatrix h = (g + g.adjoint()) / 2.0;
    const double norm = spectral_norm(h);
    if (norm > norm_cap) {
        h *= norm_cap / norm;
    }
    return h;
}

inline ComplexVector random_unit_vector(std::mt19937_64 &rng, Eigen::Index dim) {
    std::normal_distribution<double> gauss;
    ComplexVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        v(i) = Complex(gauss(rng), gauss(rng));
    }
    return v / v.norm();
}

inline QuantumState random_pure_state(std::mt19937_64 &rng, Eigen::Index dim) {
    return QuantumState::pure(random_unit_vector(rng, dim));
}

/// Random full-rank density matrix.
inline QuantumState random_mixed_state(std::mt19937_64 &rng, Eigen::Index dim) {
    std::normal_distribution<double> gauss;
    ComplexMatrix g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            g(i, j) = Complex(gauss(rng), gauss(rng));
        }
    }
    ComplexMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return QuantumState::mixed(std::move(rho));
}

/// Postselection vector with probability at least p_floor on the given state.
inline ComplexVector random_postselection(std::mt19937_64 &rng, const QuantumState &state,
                                          double p_floor = 0.05) {
    for (int attempt = 0; attempt < 256; ++attempt) {
        ComplexVector f = random_unit_vector(rng, state.dim());
        const double p = state.is_pure() ? std::norm(f.dot(state.vector()))
                                         : (f.adjoint() * state.density() * f)(0).real();
        if (p > p_floor) {
            return f;
        }
    }
    throw std::runtime_error("random_postselection: no vector above the probability floor");
}

inline ComplexVector plus_state() {
    ComplexVector v(2);
    v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    return v;
}

/// The anomalous-weak-value scenario pinned throughout the tests:
/// psi = (|0>+|1>)/sqrt2, f = cos(pi/3)|0> - sin(pi/3)|1>, A = sigma_z,
/// giving A_w = -(2+sqrt3).
inline ComplexVector anomalous_postselection() {
    ComplexVector f(2);
    f << 0.5, -std::sqrt(3.0) / 2.0;
    return f;
}

inline double anomalous_weak_value() { return -(2.0 + std::sqrt(3.0)); }

} // namespace weakmeter::testing

#endif // WEAKMETER_TEST_HELPERS_HPP
