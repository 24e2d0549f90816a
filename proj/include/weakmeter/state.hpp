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

#ifndef WEAKMETER_STATE_HPP
#define WEAKMETER_STATE_HPP

#include <algorithm>
#include <cmath>
#include <utility>

#include "weakmeter/linalg.hpp"

namespace weakmeter {

enum class StateKind { pure, mixed };

/// A normalized quantum state: either a pure vector or a density matrix.
/// Immutable after construction; construction validates the invariants
/// (unit norm for pure states; Hermitian, unit trace, positive semidefinite
/// for density matrices).
class QuantumState {
  public:
    static QuantumState pure(ComplexVector psi) {
        if (psi.size() == 0) {
            throw std::invalid_argument("QuantumState: empty state vector");
        }
        const double n = psi.norm();
        if (std::abs(n - 1.0) > kNormTol) {
            throw std::invalid_argument("QuantumState: pure state norm deviates from 1 by " +
                                        std::to_string(std::abs(n - 1.0)));
        }
        psi /= n; // absorb sub-tolerance drift
        return QuantumState(StateKind::pure, std::move(psi), ComplexMatrix());
    }

    static QuantumState mixed(ComplexMatrix rho) {
        require_square(rho, "QuantumState");
        if (!is_hermitian(rho)) {
            throw std::invalid_argument("QuantumState: density matrix is not Hermitian");
        }
        const double tr = rho.trace().real();
        if (std::abs(tr - 1.0) > kNormTol) {
            throw std::invalid_argument("QuantumState: density matrix trace deviates from 1 by " +
                                        std::to_string(std::abs(tr - 1.0)));
        }
        rho = ((rho + rho.adjoint()) / 2.0).eval();
        rho /= tr;
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(rho, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -kEigenvalueTol) {
            throw std::invalid_argument("QuantumState: density matrix has eigenvalue " +
                                        std::to_string(eig.eigenvalues().minCoeff()));
        }
        return QuantumState(StateKind::mixed, ComplexVector(), std::move(rho));
    }

    StateKind kind() const { return kind_; }
    bool is_pure() const { return kind_ == StateKind::pure; }

    Eigen::Index dim() const { return is_pure() ? vec_.size() : mat_.rows(); }

    /// Pure amplitude vector; only valid for pure states.
    const ComplexVector &vector() const {
        if (!is_pure()) {
            throw std::logic_error("QuantumState: vector() called on a mixed state");
        }
        return vec_;
    }

    /// Density matrix form (outer product for pure states).
    ComplexMatrix density() const {
        return is_pure() ? ComplexMatrix(vec_ * vec_.adjoint()) : mat_;
    }

    static constexpr double kNormTol = 1e-12;
    static constexpr double kEigenvalueTol = 1e-10;

  private:
    QuantumState(StateKind kind, ComplexVector vec, ComplexMatrix mat)
        : kind_(kind), vec_(std::move(vec)), mat_(std::move(mat)) {}

    StateKind kind_;
    ComplexVector vec_;
    ComplexMatrix mat_;
};

/// <psi|o|psi> or tr(rho o).
inline Complex expectation(const QuantumState &state, const ComplexMatrix &o) {
    require_square(o, "expectation");
    if (o.rows() != state.dim()) {
        throw std::invalid_argument("expectation: operator dimension " + std::to_string(o.rows()) +
                                    " does not match state dimension " +
                                    std::to_string(state.dim()));
    }
    if (state.is_pure()) {
        return state.vector().dot(o * state.vector());
    }
    return (o * state.density()).trace();
}

/// <o^2> - <o>^2 for a Hermitian observable. Tiny negative rounding residue
/// is clamped to zero; anything past -1e-10 signals a caller bug.
inline double variance(const QuantumState &state, const ComplexMatrix &o) {
    if (!is_hermitian(o)) {
        throw std::invalid_argument("variance: observable is not Hermitian within 1e-10");
    }
    const double mean = expectation(state, o).real();
    const double second = expectation(state, ComplexMatrix(o * o)).real();
    const double v = second - mean * mean;
    if (v < -1e-10) {
        throw ConsistencyError("variance: negative variance " + std::to_string(v));
    }
    return std::max(v, 0.0);
}

} // namespace weakmeter

#endif // WEAKMETER_STATE_HPP
