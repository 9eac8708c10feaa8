// SPDX-License-Identifier: Apache-2.0
//
// flexbeam: flexible beamforming for movable-antenna ISAC systems
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "flexbeam/fp_core.hpp"

#include <cmath>
#include <stdexcept>

namespace flexbeam {

QuadraticForm assemble_quadratic_form(const Scenario& scenario,
                                      const Eigen::VectorXd& positions,
                                      const AuxiliaryState& aux,
                                      const Weights& weights) {
    const int num_users = scenario.num_users();
    const Eigen::Index n = positions.size();
    const double wc = weights.comm;
    const double ws = weights.sense();

    QuadraticForm qf;
    qf.lambda_matrix = Eigen::MatrixXcd::Zero(n, n);
    qf.phi = Eigen::MatrixXcd::Zero(n, num_users + 1);

    const Eigen::VectorXcd a_s =
        steering_vector(positions, scenario.target_angle, scenario.wavelength);
    const double mu_s = aux.mu[num_users];

    for (int k = 0; k < num_users; ++k) {
        const Eigen::VectorXcd h = user_channel(scenario, k, positions);
        qf.lambda_matrix += wc * std::norm(aux.xi_c[k]) * (h * h.adjoint());
        qf.phi.col(k) = wc * std::sqrt(1.0 + aux.mu[k]) * std::conj(aux.xi_c[k]) * h;
    }

    const double xi_s_norm2 = aux.xi_s.squaredNorm();
    Eigen::MatrixXcd radar = std::norm(scenario.target_gain) * (a_s * a_s.adjoint());
    for (int c = 0; c < scenario.num_clutter(); ++c) {
        const Eigen::VectorXcd a_c =
            steering_vector(positions, scenario.clutter_angles[c], scenario.wavelength);
        radar += std::norm(scenario.clutter_gains[c]) * (a_c * a_c.adjoint());
    }
    qf.lambda_matrix += ws * xi_s_norm2 * radar;

    const Complex sense_scale =
        ws * std::sqrt(1.0 + mu_s) * std::conj(scenario.target_gain);
    for (int k = 0; k <= num_users; ++k)
        qf.phi.col(k) += sense_scale * std::conj(aux.xi_s[k]) * a_s;

    return qf;
}

double quadratic_form_constant(const Scenario& scenario, const AuxiliaryState& aux,
                               const Weights& weights) {
    const int num_users = scenario.num_users();
    double b = 0.0;
    for (int k = 0; k < num_users; ++k) {
        b += weights.comm * (std::log(1.0 + aux.mu[k]) - aux.mu[k]);
        b -= weights.comm * std::norm(aux.xi_c[k]) * scenario.user_noise[k];
    }
    const double mu_s = aux.mu[num_users];
    b += weights.sense() * (std::log(1.0 + mu_s) - mu_s);
    b -= weights.sense() * aux.xi_s.squaredNorm() * scenario.sensing_noise;
    return b;
}

namespace {

// Eigenvalues below this fraction of the largest one count as zero when
// forming the lambda = 0 pseudo-inverse.
constexpr double kRankTol = 1e-12;

struct SpectralForm {
    Eigen::MatrixXcd basis;   // U, unitary
    Eigen::VectorXd eigs;     // ascending, clamped at 0
    Eigen::MatrixXcd coeffs;  // U^H Phi
    double rank_cut = 0.0;    // eigenvalues <= this are treated as zero

    Beamformer beamformer(double lambda) const {
        Eigen::MatrixXcd scaled(coeffs.rows(), coeffs.cols());
        for (Eigen::Index i = 0; i < eigs.size(); ++i) {
            const double d = eigs[i] + lambda;
            if (lambda == 0.0 && eigs[i] <= rank_cut)
                scaled.row(i).setZero(); // pseudo-inverse drops the null space
            else
                scaled.row(i) = coeffs.row(i) / d;
        }
        return basis * scaled;
    }

    double power(double lambda) const {
        double p = 0.0;
        for (Eigen::Index i = 0; i < eigs.size(); ++i) {
            const double d = eigs[i] + lambda;
            if (lambda == 0.0 && eigs[i] <= rank_cut) continue;
            p += coeffs.row(i).squaredNorm() / (d * d);
        }
        return p;
    }

    // True if Phi has weight on (numerically) zero eigenvalues, in which
    // case the power blows up as lambda -> 0 and the constraint must bind.
    // Round-off-sized components of an in-range Phi do not count.
    bool null_space_excited() const {
        const double floor = 1e-26 * coeffs.squaredNorm();
        for (Eigen::Index i = 0; i < eigs.size(); ++i)
            if (eigs[i] <= rank_cut && coeffs.row(i).squaredNorm() > floor) return true;
        return false;
    }
};

SpectralForm decompose(const QuadraticForm& qf) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(qf.lambda_matrix);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("beamformer_update: eigendecomposition failed");

    SpectralForm sf;
    sf.basis = es.eigenvectors();
    sf.eigs = es.eigenvalues().cwiseMax(0.0); // PSD up to round-off
    sf.coeffs = sf.basis.adjoint() * qf.phi;
    sf.rank_cut = kRankTol * (sf.eigs.size() ? sf.eigs.maxCoeff() : 0.0);
    return sf;
}

} // namespace

Beamformer beamformer_at(const QuadraticForm& qf, double lambda) {
    return decompose(qf).beamformer(lambda);
}

BeamformerUpdate beamformer_update(const QuadraticForm& qf, double power_budget,
                                   const BisectionConfig& cfg) {
    if (!(power_budget > 0.0))
        throw std::invalid_argument("beamformer_update: power budget must be positive");

    const SpectralForm sf = decompose(qf);
    const double eps = cfg.tolerance > 0.0 ? cfg.tolerance : 1e-8 * power_budget;

    // Unconstrained (lambda = 0) optimum, valid when Phi has no null-space
    // component; with one, the power is unbounded as lambda -> 0+ and the
    // budget constraint necessarily binds.
    if (!sf.null_space_excited() && sf.power(0.0) <= power_budget)
        return {sf.beamformer(0.0), 0.0, 0};

    double lo = cfg.lambda_min;
    double hi = cfg.lambda_max;
    if (!std::isfinite(hi)) {
        // ||F(lambda)||_F <= ||Phi||_F / lambda, so this start already has
        // h(hi) <= 0 in exact arithmetic; the doubling loop is a guard.
        hi = std::max(qf.phi.norm() / std::sqrt(power_budget), 1e-300);
    }
    int doubles = 0;
    while (sf.power(hi) > power_budget && doubles++ < 120) hi *= 2.0;
    if (sf.power(hi) > power_budget)
        throw ConvergenceError("beamformer_update: failed to bracket the dual variable",
                               sf.beamformer(hi), hi);
    if (sf.power(lo) < power_budget - eps && lo > 0.0)
        throw std::invalid_argument(
            "beamformer_update: lambda_min already under the power budget");

    double lambda = hi;
    double h = sf.power(hi) - power_budget;
    for (int it = 0; it < cfg.max_iters; ++it) {
        lambda = 0.5 * (lo + hi);
        h = sf.power(lambda) - power_budget;
        if (std::abs(h) <= eps)
            return {sf.beamformer(lambda), lambda, it + 1};
        if (h > 0.0)
            lo = lambda;
        else
            hi = lambda;
    }
    throw ConvergenceError("beamformer_update: bisection exceeded max_iters",
                           sf.beamformer(lambda), lambda);
}

Eigen::VectorXd update_mu(const Beamformer& F, const Eigen::VectorXd& positions,
                          const AuxiliaryState& aux, const Scenario& scenario,
                          const Weights& /*weights*/) {
    const int num_users = scenario.num_users();
    Eigen::VectorXd mu(num_users + 1);

    for (int k = 0; k < num_users; ++k) {
        const Eigen::VectorXcd h = user_channel(scenario, k, positions);
        const Complex hf = (h.adjoint() * F.col(k)).value();
        const double r = std::real(aux.xi_c[k] * hf);
        mu[k] = r <= 0.0 ? 0.0 : 0.5 * (r * r + r * std::sqrt(r * r + 4.0));
    }

    const Eigen::VectorXcd a_s =
        steering_vector(positions, scenario.target_angle, scenario.wavelength);
    const Eigen::VectorXcd target_row =
        scenario.target_gain * (a_s.adjoint() * F).transpose();
    const double r = std::real((target_row.array() * aux.xi_s.array()).sum());
    mu[num_users] = r <= 0.0 ? 0.0 : 0.5 * (r * r + r * std::sqrt(r * r + 4.0));
    return mu;
}

XiUpdate update_xi(const Beamformer& F, const Eigen::VectorXd& positions,
                   const Eigen::VectorXd& mu, const Scenario& scenario,
                   const Weights& /*weights*/) {
    const int num_users = scenario.num_users();
    XiUpdate out;
    out.xi_c.resize(num_users);

    for (int k = 0; k < num_users; ++k) {
        const Eigen::VectorXcd h = user_channel(scenario, k, positions);
        const Eigen::VectorXcd received = (h.adjoint() * F).transpose();
        const double denom = received.squaredNorm() + scenario.user_noise[k];
        out.xi_c[k] = std::sqrt(1.0 + mu[k]) * std::conj(received[k]) / denom;
    }

    const Eigen::VectorXcd a_s =
        steering_vector(positions, scenario.target_angle, scenario.wavelength);
    const Eigen::VectorXcd target_row =
        scenario.target_gain * (a_s.adjoint() * F).transpose();
    double clutter = 0.0;
    for (int c = 0; c < scenario.num_clutter(); ++c) {
        const Eigen::VectorXcd a_c =
            steering_vector(positions, scenario.clutter_angles[c], scenario.wavelength);
        clutter += (scenario.clutter_gains[c] * (a_c.adjoint() * F).transpose()).squaredNorm();
    }
    const double denom = clutter + target_row.squaredNorm() + scenario.sensing_noise;
    out.xi_s = std::sqrt(1.0 + mu[num_users]) * target_row.conjugate() / denom;
    return out;
}

} // namespace flexbeam
