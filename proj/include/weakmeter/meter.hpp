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
// Meter systems: a readout observable M, the generator B that moves the
// meter during the interaction, and an initial meter state. The derived
// response Gamma = (i/hbar)[B, M], saturation Theta = -(i/hbar)[B, Gamma]
// and the squared-moment correlation K_MB are cached at build time, along
// with the initial-state moments every growth formula consumes.
//=========================================================================

#ifndef WEAKMETER_METER_HPP
#define WEAKMETER_METER_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "weakmeter/state.hpp"

namespace weakmeter {

/// Result of checking the four unbiased-meter conditions:
///   1. the inversion unitary flips the readout spectrum, U'MU = -M
///   2. the initial meter state is inversion-symmetric
///   3. the inversion flips the generator, U'BU = -B
///   4. the state carries no readout/generator bias, <BM + MB> = 0
/// The first three need an inversion unitary; without one they are reported
/// as not applicable (inversion_present = false, residuals NaN, flags false).
struct SymmetryReport {
    bool inversion_present = false;
    bool spectrum_symmetric = false;
    bool state_parity_ok = false;
    bool generator_odd_ok = false;
    bool unbiased_mb_ok = false;
    double spectrum_residual = std::numeric_limits<double>::quiet_NaN();
    double state_residual = std::numeric_limits<double>::quiet_NaN();
    double generator_residual = std::numeric_limits<double>::quiet_NaN();
    double mb_residual = std::numeric_limits<double>::quiet_NaN();

    static constexpr double kTol = 1e-9;

    /// True when every check that could be evaluated passed.
    bool all_applicable_ok() const {
        if (!unbiased_mb_ok) {
            return false;
        }
        return !inversion_present || (spectrum_symmetric && state_parity_ok && generator_odd_ok);
    }

    /// True when the inversion is present and all four conditions hold.
    bool fully_symmetric() const {
        return inversion_present && spectrum_symmetric && state_parity_ok && generator_odd_ok &&
               unbiased_mb_ok;
    }
};

class MeterModel {
  public:
    MeterModel(ComplexMatrix readout, ComplexMatrix generator, QuantumState state,
               std::optional<ComplexMatrix> inversion, double hbar = 1.0,
               std::string kind = "custom")
        : readout_(std::move(readout)),
          generator_(std::move(generator)),
          state_(std::move(state)),
          inversion_(std::move(inversion)),
          hbar_(hbar),
          kind_(std::move(kind)) {
        require_square(readout_, "MeterModel");
        require_same_dim(readout_, generator_, "MeterModel");
        if (hbar_ <= 0.0) {
            throw std::invalid_argument("MeterModel: hbar must be positive");
        }
        if (!is_hermitian(readout_)) {
            throw std::invalid_argument("MeterModel: readout is not Hermitian within 1e-10, max "
                                        "residual " +
                                        std::to_string((readout_ - readout_.adjoint()).cwiseAbs().maxCoeff()));
        }
        if (!is_hermitian(generator_)) {
            throw std::invalid_argument("MeterModel: generator is not Hermitian within 1e-10, max "
                                        "residual " +
                                        std::to_string((generator_ - generator_.adjoint()).cwiseAbs().maxCoeff()));
        }
        if (state_.dim() != readout_.rows()) {
            throw std::invalid_argument("MeterModel: state dimension does not match operators");
        }
        if (inversion_) {
            require_same_dim(readout_, *inversion_, "MeterModel inversion");
            if (!is_unitary(*inversion_)) {
                ComplexMatrix gram = inversion_->adjoint() * (*inversion_);
                gram -= identity_matrix(inversion_->rows());
                throw std::invalid_argument("MeterModel: inversion is not unitary within 1e-10, "
                                            "max residual " +
                                            std::to_string(gram.cwiseAbs().maxCoeff()));
            }
        }

        const Complex i_over_hbar(0.0, 1.0 / hbar_);
        response_ = i_over_hbar * commutator(generator_, readout_);
        response_ = ((response_ + response_.adjoint()) / 2.0).eval();
        saturation_ = -i_over_hbar * commutator(generator_, response_);
        saturation_ = ((saturation_ + saturation_.adjoint()) / 2.0).eval();

        const ComplexMatrix m2 = readout_ * readout_;
        const ComplexMatrix b2 = generator_ * generator_;
        correlation_kmb_ = 0.5 * expectation(state_, ComplexMatrix(b2 * m2 + m2 * b2)).real() -
                           expectation(state_, b2).real() * expectation(state_, m2).real();

        response_mean_ = expectation(state_, response_).real();
        response_variance_ = variance(state_, response_);
        saturation_readout_moment_ =
            expectation(state_, anticommutator(readout_, saturation_)).real();
        readout_generator_moment_ =
            expectation(state_, anticommutator(generator_, readout_)).real();
        readout_mean_ = expectation(state_, readout_).real();
        readout_variance_ = variance(state_, readout_);

        generator_eig_.compute(generator_);
    }

    Eigen::Index dim() const { return readout_.rows(); }
    const ComplexMatrix &readout() const { return readout_; }
    const ComplexMatrix &generator() const { return generator_; }
    const QuantumState &state() const { return state_; }
    const std::optional<ComplexMatrix> &inversion() const { return inversion_; }
    double hbar() const { return hbar_; }
    const std::string &kind() const { return kind_; }

    const ComplexMatrix &response() const { return response_; }
    const ComplexMatrix &saturation() const { return saturation_; }
    double correlation_kmb() const { return correlation_kmb_; }

    // Initial-state moments consumed by the growth decompositions.
    double response_mean() const { return response_mean_; }
    double response_variance() const { return response_variance_; }
    double saturation_readout_moment() const { return saturation_readout_moment_; }
    double readout_generator_moment() const { return readout_generator_moment_; }
    double readout_mean() const { return readout_mean_; }
    double readout_variance() const { return readout_variance_; }

    const RealVector &generator_eigenvalues() const { return generator_eig_.eigenvalues(); }
    const ComplexMatrix &generator_eigenvectors() const { return generator_eig_.eigenvectors(); }

  private:
    ComplexMatrix readout_;
    ComplexMatrix generator_;
    QuantumState state_;
    std::optional<ComplexMatrix> inversion_;
    double hbar_;
    std::string kind_;

    ComplexMatrix response_;
    ComplexMatrix saturation_;
    double correlation_kmb_ = 0.0;
    double response_mean_ = 0.0;
    double response_variance_ = 0.0;
    double saturation_readout_moment_ = 0.0;
    double readout_generator_moment_ = 0.0;
    double readout_mean_ = 0.0;
    double readout_variance_ = 0.0;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> generator_eig_;
};

//-------------------------------------------------------------------------
// Truncated Fock-space operators for continuous-variable meters.
//-------------------------------------------------------------------------

inline ComplexMatrix annihilation_operator(Eigen::Index dim) {
    ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index n = 0; n + 1 < dim; ++n) {
        a(n, n + 1) = std::sqrt(static_cast<double>(n + 1));
    }
    return a;
}

/// x = sigma_x (a + a'); the reference oscillator's ground state has
/// variance sigma_x^2 in this quadrature.
inline ComplexMatrix position_quadrature(double sigma_x, Eigen::Index dim) {
    const ComplexMatrix a = annihilation_operator(dim);
    return sigma_x * (a + a.adjoint());
}

/// p = (hbar / 2 sigma_x) i (a' - a); [x, p] = i hbar away from the
/// truncation edge.
inline ComplexMatrix momentum_quadrature(double sigma_x, Eigen::Index dim, double hbar) {
    const ComplexMatrix a = annihilation_operator(dim);
    return (hbar / (2.0 * sigma_x)) * (Complex(0.0, 1.0) * (a.adjoint() - a));
}

/// Fock parity diag((-1)^n); the natural inversion unitary for x/p meters.
inline ComplexMatrix fock_parity(Eigen::Index dim) {
    ComplexMatrix p = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index n = 0; n < dim; ++n) {
        p(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
    }
    return p;
}

/// Occupation above the given Fock level.
inline double fock_tail_probability(const QuantumState &state, Eigen::Index level) {
    double tail = 0.0;
    if (state.is_pure()) {
        for (Eigen::Index n = level + 1; n < state.dim(); ++n) {
            tail += std::norm(state.vector()(n));
        }
    } else {
        for (Eigen::Index n = level + 1; n < state.dim(); ++n) {
            tail += state.density()(n, n).real();
        }
    }
    return tail;
}

inline constexpr double kTruncationLeakTol = 1e-10;

//-------------------------------------------------------------------------
// Builders.
//-------------------------------------------------------------------------

/// Two-level meter: readout sigma_x, generator sigma_y / 2, state |0>,
/// inversion sigma_z. Response is sigma_z (mean one in |0>), the saturation
/// equals the readout, and K_MB vanishes because both M^2 and B^2 are
/// proportional to the identity.
inline MeterModel build_qubit_meter(double hbar = 1.0) {
    return MeterModel(pauli_x(), pauli_y() / 2.0, QuantumState::pure(basis_state(2, 0)),
                      pauli_z(), hbar, "qubit");
}

/// Continuous-variable x/p meter truncated to a Fock space. Operators live
/// in a (cutoff + 4)-dimensional space; the vacuum of the reference
/// oscillator with ground-state width sigma_x is the meter state, so the
/// initial readout variance is exactly sigma_x^2. The commutator identities
/// fail only in the top truncation levels, which the state never reaches.
inline MeterModel build_gaussian_cv_meter(double sigma_x, int cutoff, double hbar = 1.0) {
    if (sigma_x <= 0.0) {
        throw std::invalid_argument("build_gaussian_cv_meter: sigma_x must be positive");
    }
    if (cutoff < 2) {
        throw std::invalid_argument("build_gaussian_cv_meter: cutoff must be at least 2");
    }
    const Eigen::Index dim = cutoff + 4;
    QuantumState vacuum = QuantumState::pure(basis_state(dim, 0));
    const double tail = fock_tail_probability(vacuum, cutoff);
    if (tail > kTruncationLeakTol) {
        throw TruncationError("build_gaussian_cv_meter: state occupation above cutoff is " +
                              std::to_string(tail));
    }
    return MeterModel(position_quadrature(sigma_x, dim), momentum_quadrature(sigma_x, dim, hbar),
                      std::move(vacuum), fock_parity(dim), hbar, "gaussian_cv");
}

/// Arbitrary meter; the caller supplies the inversion unitary (or none, in
/// which case the inversion-based symmetry checks are reported as not
/// applicable). Invariant violations are rejected with the failing residual.
inline MeterModel build_custom_meter(ComplexMatrix readout, ComplexMatrix generator,
                                     QuantumState state,
                                     std::optional<ComplexMatrix> inversion = std::nullopt,
                                     double hbar = 1.0) {
    return MeterModel(std::move(readout), std::move(generator), std::move(state),
                      std::move(inversion), hbar, "custom");
}

//-------------------------------------------------------------------------
// Free-function surface.
//-------------------------------------------------------------------------

inline ComplexMatrix meter_response(const MeterModel &m) { return m.response(); }

inline ComplexMatrix meter_saturation(const MeterModel &m) { return m.saturation(); }

inline double meter_correlation_kmb(const MeterModel &m) { return m.correlation_kmb(); }

inline SymmetryReport validate_meter_symmetry(const MeterModel &m) {
    SymmetryReport report;
    report.mb_residual = std::abs(expectation(
        m.state(), anticommutator(m.generator(), m.readout())));
    report.unbiased_mb_ok = report.mb_residual < SymmetryReport::kTol;
    if (!m.inversion()) {
        return report;
    }
    report.inversion_present = true;
    const ComplexMatrix &u = *m.inversion();
    report.spectrum_residual = spectral_norm(u.adjoint() * m.readout() * u + m.readout());
    report.spectrum_symmetric = report.spectrum_residual < SymmetryReport::kTol;
    if (m.state().is_pure()) {
        report.state_residual = (u * m.state().vector() - m.state().vector()).norm();
    } else {
        report.state_residual = spectral_norm(u * m.state().density() * u.adjoint() -
                                              m.state().density());
    }
    report.state_parity_ok = report.state_residual < SymmetryReport::kTol;
    report.generator_residual = spectral_norm(u.adjoint() * m.generator() * u + m.generator());
    report.generator_odd_ok = report.generator_residual < SymmetryReport::kTol;
    return report;
}

} // namespace weakmeter

#endif // WEAKMETER_METER_HPP
