#include "cavity/propagator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "cavity/errors.hpp"

namespace cavity {

OneExcitationMatrix::OneExcitationMatrix(const BathSpec& bath) {
    const auto n = static_cast<Eigen::Index>(bath.size()) + 1;
    h_ = Eigen::MatrixXd::Zero(n, n);
    h_(0, 0) = bath.omega();
    for (Eigen::Index k = 1; k < n; ++k) {
        const auto& mode = bath.modes()[static_cast<std::size_t>(k - 1)];
        h_(k, k) = mode.frequency;
        h_(0, k) = h_(k, 0) = mode.coupling;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_);
    if (es.info() != Eigen::Success)
        throw NumericalError(NumericalError::Kind::Convergence, "one-excitation eigendecomposition failed");
    w_ = es.eigenvalues();
    v_ = es.eigenvectors();
}

OneExcitationMatrix assemble(const BathSpec& bath) { return OneExcitationMatrix(bath); }

SinglePropagator propagate(const OneExcitationMatrix& m, double t) {
    if (!(t >= 0.0)) throw ValidationError("t", "propagation time must be nonnegative");
    const auto& v = m.eigenvectors();
    const auto& w = m.eigenfrequencies();
    Eigen::VectorXcd phase(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) phase(i) = std::polar(1.0, -w(i) * t);
    Eigen::MatrixXcd vc = v.cast<cplx>();
    Eigen::MatrixXcd Z = vc * phase.asDiagonal() * vc.transpose();
    return {t, std::move(Z)};
}

PropagatorBlocks blocks(const SinglePropagator& p) {
    const auto& Z = p.Z;
    const Eigen::Index m = Z.rows() - 1;
    PropagatorBlocks b;
    b.eta = Z(0, 0);
    if (std::abs(b.eta) < kEtaVanishThreshold)
        throw NumericalError(NumericalError::Kind::EtaVanishes,
                             "eta-vanishes: |eta(t)| < 1e-12 at t = " + std::to_string(p.t));
    b.gamma = Z.block(0, 1, 1, m).transpose();
    b.Delta = Z.block(1, 0, m, 1);
    b.Gamma = Z.block(1, 1, m, m);
    b.eta_k = b.Delta / b.eta;
    b.gamma_kl = b.Gamma - (b.Delta * b.gamma.transpose()) / b.eta;
    return b;
}

BlockIdentityResiduals check_identities(const SinglePropagator& p, const PropagatorBlocks& b) {
    BlockIdentityResiduals r{};
    const auto n = p.Z.rows();
    r.unitarity = (p.Z.adjoint() * p.Z - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    r.gamma_norm = std::abs(b.gamma.squaredNorm() - (1.0 - std::norm(b.eta)));
    for (Eigen::Index k = 0; k < b.Delta.size(); ++k) {
        cplx s1 = 0.0, s2 = 0.0;
        for (Eigen::Index l = 0; l < b.gamma.size(); ++l) {
            s1 += b.gamma(l) * std::conj(b.Gamma(k, l));
            s2 += b.gamma(l) * std::conj(b.gamma_kl(k, l));
        }
        r.gamma_Gamma = std::max(r.gamma_Gamma, std::abs(s1 + b.eta * std::conj(b.Delta(k))));
        r.beta_k = std::max(r.beta_k, std::abs(s2 + std::conj(b.eta_k(k))));
    }
    return r;
}

}  // namespace cavity
