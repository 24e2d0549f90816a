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
// Dense complex linear algebra shared by every other header: operator
// carriers, Kronecker products, (anti)commutators and the Hermitian
// matrix exponential used to build unitaries. Double precision throughout.
//=========================================================================

#ifndef WEAKMETER_LINALG_HPP
#define WEAKMETER_LINALG_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "weakmeter/errors.hpp"

namespace weakmeter {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-10;

inline void require_square(const ComplexMatrix &m, const char *what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
    }
}

inline void require_same_dim(const ComplexMatrix &a, const ComplexMatrix &b, const char *what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()) + ")");
    }
}

inline bool is_hermitian(const ComplexMatrix &m, double tol = kHermitianTol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary(const ComplexMatrix &m, double tol = kUnitaryTol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    ComplexMatrix gram = m.adjoint() * m;
    gram -= ComplexMatrix::Identity(m.rows(), m.cols());
    return gram.cwiseAbs().maxCoeff() <= tol;
}

/// Largest singular value. Used for the symmetry-condition residuals.
inline double spectral_norm(const ComplexMatrix &m) {
    if (m.size() == 0) {
        return 0.0;
    }
    return Eigen::JacobiSVD<ComplexMatrix>(m).singularValues()(0);
}

/// Kronecker product with the fixed convention: first factor indexes the
/// major (system) subspace, second the minor (meter) subspace.
inline ComplexMatrix tensor_product(const ComplexMatrix &a, const ComplexMatrix &b) {
    require_square(a, "tensor_product");
    require_square(b, "tensor_product");
    const Eigen::Index da = a.rows();
    const Eigen::Index db = b.rows();
    ComplexMatrix out(da * db, da * db);
    for (Eigen::Index i = 0; i < da; ++i) {
        for (Eigen::Index j = 0; j < da; ++j) {
            out.block(i * db, j * db, db, db) = a(i, j) * b;
        }
    }
    return out;
}

inline ComplexVector tensor_product(const ComplexVector &a, const ComplexVector &b) {
    ComplexVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

inline ComplexMatrix commutator(const ComplexMatrix &a, const ComplexMatrix &b) {
    require_same_dim(a, b, "commutator");
    return a * b - b * a;
}

inline ComplexMatrix anticommutator(const ComplexMatrix &a, const ComplexMatrix &b) {
    require_same_dim(a, b, "anticommutator");
    return a * b + b * a;
}

/// exp(-i * theta * h) for Hermitian h, via eigendecomposition. Generators in
/// this library are always Hermitian, so no series or scaling-and-squaring.
inline ComplexMatrix hermitian_exponential(const ComplexMatrix &h, double theta) {
    require_square(h, "hermitian_exponential");
    if (!is_hermitian(h)) {
        throw std::invalid_argument("hermitian_exponential: generator is not Hermitian within 1e-10");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h);
    const RealVector &w = eig.eigenvalues();
    ComplexVector phases(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) {
        phases(k) = std::exp(Complex(0.0, -theta * w(k)));
    }
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

//-------------------------------------------------------------------------
// Small fixed operators used all over the tests and the meter builders.
//-------------------------------------------------------------------------

inline ComplexMatrix identity_matrix(Eigen::Index dim) {
    return ComplexMatrix::Identity(dim, dim);
}

inline ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}

inline ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

inline ComplexVector basis_state(Eigen::Index dim, Eigen::Index k) {
    if (k < 0 || k >= dim) {
        throw std::invalid_argument("basis_state: index out of range");
    }
    ComplexVector v = ComplexVector::Zero(dim);
    v(k) = 1.0;
    return v;
}

} // namespace weakmeter

#endif // WEAKMETER_LINALG_HPP
