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
// Exact, non-perturbative evolution of the joint system (x) meter state
// under U(s) = exp(-(i/hbar) s A (x) B), and the unconditioned,
// post-selected and joint readout statistics extracted from it.
//
// A (x) B is diagonalized once per Scenario from the separate
// eigendecompositions of A and B (eigenvalues alpha_i * beta_j,
// eigenvectors v_i (x) w_j); every evaluation at a strength s is then a
// phase rotation in that frame. No Trotterization anywhere.
//=========================================================================

#ifndef WEAKMETER_DYNAMICS_HPP
#define WEAKMETER_DYNAMICS_HPP

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "weakmeter/meter.hpp"

namespace weakmeter {

/// Post-selection probabilities below this are treated as a hard error:
/// every conditional formula divides by <f|rho|f>.
inline constexpr double kDegenerateProbability = 1e-12;

/// Readout moments at one interaction strength. The probability field is
/// present exactly when the moments are conditioned on a post-selection.
struct MomentSet {
    double mean = 0.0;
    double second_moment = 0.0;
    double variance = 0.0;
    std::optional<double> postselection_probability;
};

/// One row of the joint (generator eigenvalue, post-selection outcome)
/// probability table.
struct JointOutcome {
    double generator_eigenvalue = 0.0;
    bool postselected = false;
    double probability = 0.0;
};

class Scenario {
  public:
    Scenario(ComplexMatrix system_observable, QuantumState system_state,
             std::optional<ComplexVector> postselection, MeterModel meter, double hbar = 1.0)
        : observable_(std::move(system_observable)),
          system_state_(std::move(system_state)),
          postselection_(std::move(postselection)),
          meter_(std::move(meter)),
          hbar_(hbar) {
        require_square(observable_, "Scenario");
        if (!is_hermitian(observable_)) {
            throw std::invalid_argument("Scenario: system observable is not Hermitian within 1e-10");
        }
        if (system_state_.dim() != observable_.rows()) {
            throw std::invalid_argument("Scenario: system state dimension does not match observable");
        }
        if (hbar_ <= 0.0) {
            throw std::invalid_argument("Scenario: hbar must be positive");
        }
        if (std::abs(hbar_ - meter_.hbar()) > 1e-12 * hbar_) {
            throw std::invalid_argument("Scenario: hbar differs from the meter's hbar; the response "
                                        "and correlation caches assume a single convention");
        }
        if (postselection_) {
            if (postselection_->size() != observable_.rows()) {
                throw std::invalid_argument("Scenario: postselection dimension does not match system");
            }
            const double n = postselection_->norm();
            if (std::abs(n - 1.0) > QuantumState::kNormTol) {
                throw std::invalid_argument("Scenario: postselection vector norm deviates from 1 by " +
                                            std::to_string(std::abs(n - 1.0)));
            }
            *postselection_ /= n;
        }
        build_frame();
    }

    const ComplexMatrix &system_observable() const { return observable_; }
    const QuantumState &system_state() const { return system_state_; }
    const std::optional<ComplexVector> &postselection() const { return postselection_; }
    const MeterModel &meter() const { return meter_; }
    double hbar() const { return hbar_; }
    bool has_postselection() const { return postselection_.has_value(); }
    Eigen::Index system_dim() const { return observable_.rows(); }
    Eigen::Index joint_dim() const { return observable_.rows() * meter_.dim(); }

    /// U(s) = exp(-(i/hbar) s A (x) B) on the joint space.
    ComplexMatrix unitary(double s) const {
        return joint_basis_ * phases(s).asDiagonal() * joint_basis_.adjoint();
    }

    /// Joint state after an interaction of strength s.
    QuantumState evolved_state(double s) const {
        if (joint_pure_) {
            return QuantumState::pure(joint_basis_ * evolved_frame_vector(s));
        }
        return QuantumState::mixed(joint_basis_ * evolved_frame_density(s) *
                                   joint_basis_.adjoint());
    }

    MomentSet unconditioned_moments(double s) const {
        MomentSet out;
        out.mean = frame_expectation(s, readout_frame_).real();
        out.second_moment = frame_expectation(s, readout_sq_frame_).real();
        out.variance = out.second_moment - out.mean * out.mean;
        return out;
    }

    double postselection_probability(double s) const {
        require_postselection();
        return frame_expectation(s, post_proj_frame_).real();
    }

    MomentSet conditional_moments(double s) const {
        require_postselection();
        const double pf = frame_expectation(s, post_proj_frame_).real();
        if (pf < kDegenerateProbability) {
            throw DegeneratePostselectionError(
                "conditional moments undefined: postselection probability " + std::to_string(pf) +
                " at s = " + std::to_string(s));
        }
        MomentSet out;
        out.mean = frame_expectation(s, post_read_frame_).real() / pf;
        out.second_moment = frame_expectation(s, post_read_sq_frame_).real() / pf;
        out.variance = out.second_moment - out.mean * out.mean;
        out.postselection_probability = pf;
        return out;
    }

    /// Joint probabilities of the post-selection outcome and a projective
    /// measurement of the generator, both taken after the interaction.
    /// Generator eigenvalues closer than 1e-9 are merged into one row.
    std::vector<JointOutcome> joint_outcome_table(double s) const {
        require_postselection();
        const Eigen::Index ds = system_dim();
        const Eigen::Index dm = meter_.dim();
        const RealVector &beta = meter_.generator_eigenvalues();
        const ComplexMatrix &vb = meter_.generator_eigenvectors();

        // Probabilities per generator eigenvector index b.
        RealVector with_f(dm);
        RealVector total(dm);
        if (joint_pure_) {
            const ComplexVector psi = joint_basis_ * evolved_frame_vector(s);
            Eigen::Map<const ComplexMatrix> amp(psi.data(), dm, ds); // column-major: (k, i)
            const ComplexMatrix in_b = vb.adjoint() * amp;           // (b, i)
            for (Eigen::Index b = 0; b < dm; ++b) {
                Complex proj = 0.0;
                double tot = 0.0;
                for (Eigen::Index i = 0; i < ds; ++i) {
                    proj += std::conj((*postselection_)(i)) * in_b(b, i);
                    tot += std::norm(in_b(b, i));
                }
                with_f(b) = std::norm(proj);
                total(b) = tot;
            }
        } else {
            const ComplexMatrix rho = joint_basis_ * evolved_frame_density(s) *
                                      joint_basis_.adjoint();
            for (Eigen::Index b = 0; b < dm; ++b) {
                ComplexMatrix reduced(ds, ds);
                for (Eigen::Index i = 0; i < ds; ++i) {
                    for (Eigen::Index j = 0; j < ds; ++j) {
                        Complex acc = 0.0;
                        for (Eigen::Index k = 0; k < dm; ++k) {
                            for (Eigen::Index l = 0; l < dm; ++l) {
                                acc += std::conj(vb(k, b)) * rho(i * dm + k, j * dm + l) * vb(l, b);
                            }
                        }
                        reduced(i, j) = acc;
                    }
                }
                with_f(b) = (postselection_->adjoint() * reduced * (*postselection_))(0).real();
                total(b) = reduced.trace().real();
            }
        }

        std::vector<JointOutcome> rows;
        Eigen::Index b = 0;
        while (b < dm) {
            Eigen::Index end = b + 1;
            while (end < dm && beta(end) - beta(end - 1) < kEigenvalueMergeTol) {
                ++end;
            }
            double eig = 0.0, pf = 0.0, tot = 0.0;
            for (Eigen::Index k = b; k < end; ++k) {
                eig += beta(k);
                pf += with_f(k);
                tot += total(k);
            }
            eig /= static_cast<double>(end - b);
            rows.push_back({eig, true, std::max(pf, 0.0)});
            rows.push_back({eig, false, std::max(tot - pf, 0.0)});
            b = end;
        }
        return rows;
    }

    /// <f| U_A(phi) rho U_A'(phi) |f> for the system-only dynamics
    /// U_A(phi) = exp(-(i/hbar) phi A). Its curvature in phi is what the
    /// post-selected growth formulas feed on.
    double phase_shifted_probability(double phi) const {
        require_postselection();
        const Eigen::Index ds = system_dim();
        ComplexVector rotated(ds);
        for (Eigen::Index i = 0; i < ds; ++i) {
            // U_A'(phi) |f> in the observable eigenframe
            rotated(i) = std::exp(Complex(0.0, alpha_(i) * phi / hbar_)) * post_frame_(i);
        }
        if (system_state_.is_pure()) {
            return std::norm(rotated.dot(system_frame_vector_));
        }
        return (rotated.adjoint() * system_frame_density_ * rotated)(0).real();
    }

    static constexpr double kEigenvalueMergeTol = 1e-9;

  private:
    void require_postselection() const {
        if (!postselection_) {
            throw std::logic_error("Scenario: operation requires a postselection vector");
        }
    }

    void build_frame() {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> sys_eig(observable_);
        alpha_ = sys_eig.eigenvalues();
        system_basis_ = sys_eig.eigenvectors();

        const Eigen::Index ds = system_dim();
        const Eigen::Index dm = meter_.dim();
        const RealVector &beta = meter_.generator_eigenvalues();
        const ComplexMatrix &vb = meter_.generator_eigenvectors();

        joint_basis_ = tensor_product(system_basis_, vb);
        joint_freq_.resize(ds * dm);
        for (Eigen::Index i = 0; i < ds; ++i) {
            for (Eigen::Index j = 0; j < dm; ++j) {
                joint_freq_(i * dm + j) = alpha_(i) * beta(j);
            }
        }

        joint_pure_ = system_state_.is_pure() && meter_.state().is_pure();
        if (joint_pure_) {
            frame_vector_ = joint_basis_.adjoint() *
                            tensor_product(system_state_.vector(), meter_.state().vector());
        } else {
            const ComplexMatrix rho0 =
                tensor_product(system_state_.density(), meter_.state().density());
            frame_density_ = joint_basis_.adjoint() * rho0 * joint_basis_;
        }

        // V'(X (x) Y)V factorizes into the small transformed pieces.
        const ComplexMatrix m_frame = vb.adjoint() * meter_.readout() * vb;
        const ComplexMatrix m2_frame =
            vb.adjoint() * (meter_.readout() * meter_.readout()) * vb;
        readout_frame_ = tensor_product(identity_matrix(ds), m_frame);
        readout_sq_frame_ = tensor_product(identity_matrix(ds), m2_frame);

        system_frame_vector_ = system_state_.is_pure()
                                   ? ComplexVector(system_basis_.adjoint() * system_state_.vector())
                                   : ComplexVector();
        system_frame_density_ = system_state_.is_pure()
                                    ? ComplexMatrix()
                                    : ComplexMatrix(system_basis_.adjoint() *
                                                    system_state_.density() * system_basis_);

        if (postselection_) {
            post_frame_ = system_basis_.adjoint() * (*postselection_);
            const ComplexMatrix proj = post_frame_ * post_frame_.adjoint();
            post_proj_frame_ = tensor_product(proj, identity_matrix(dm));
            post_read_frame_ = tensor_product(proj, m_frame);
            post_read_sq_frame_ = tensor_product(proj, m2_frame);
        }
    }

    ComplexVector phases(double s) const {
        ComplexVector ph(joint_freq_.size());
        for (Eigen::Index k = 0; k < joint_freq_.size(); ++k) {
            ph(k) = std::exp(Complex(0.0, -s * joint_freq_(k) / hbar_));
        }
        return ph;
    }

    ComplexVector evolved_frame_vector(double s) const {
        return phases(s).cwiseProduct(frame_vector_);
    }

    ComplexMatrix evolved_frame_density(double s) const {
        const ComplexVector ph = phases(s);
        return (ph * ph.adjoint()).cwiseProduct(frame_density_);
    }

    Complex frame_expectation(double s, const ComplexMatrix &obs) const {
        if (joint_pure_) {
            const ComplexVector y = evolved_frame_vector(s);
            return y.dot(obs * y);
        }
        return evolved_frame_density(s).transpose().cwiseProduct(obs).sum();
    }

    ComplexMatrix observable_;
    QuantumState system_state_;
    std::optional<ComplexVector> postselection_;
    MeterModel meter_;
    double hbar_;

    // cached frames
    RealVector alpha_;
    ComplexMatrix system_basis_;
    ComplexMatrix joint_basis_;
    RealVector joint_freq_;
    bool joint_pure_ = false;
    ComplexVector frame_vector_;
    ComplexMatrix frame_density_;
    ComplexVector system_frame_vector_;
    ComplexMatrix system_frame_density_;
    ComplexVector post_frame_;
    ComplexMatrix readout_frame_;
    ComplexMatrix readout_sq_frame_;
    ComplexMatrix post_proj_frame_;
    ComplexMatrix post_read_frame_;
    ComplexMatrix post_read_sq_frame_;
};

//-------------------------------------------------------------------------
// Free-function surface.
//-------------------------------------------------------------------------

inline ComplexMatrix interaction_unitary(const Scenario &sc, double s) { return sc.unitary(s); }

inline MomentSet readout_moments(const Scenario &sc, double s) {
    return sc.unconditioned_moments(s);
}

inline MomentSet conditional_readout_moments(const Scenario &sc, double s) {
    return sc.conditional_moments(s);
}

inline std::vector<JointOutcome> generator_joint_statistics(const Scenario &sc, double s) {
    return sc.joint_outcome_table(s);
}

inline double phase_shifted_postselection_probability(const Scenario &sc, double phi_a) {
    return sc.phase_shifted_probability(phi_a);
}

inline QuantumState evolved_joint_state(const Scenario &sc, double s) {
    return sc.evolved_state(s);
}

} // namespace weakmeter

#endif // WEAKMETER_DYNAMICS_HPP
