#pragma once

#include <complex>

#include <Eigen/Dense>

#include "cavity/bath.hpp"

namespace cavity {

using cplx = std::complex<double>;

/// Frequency/coupling matrix of the one-excitation sector: h(0,0) = omega,
/// h(k,k) = omega_k, h(0,k) = h(k,0) = c_k. Its eigenvalues are the exact
/// normal-mode frequencies; diagonalized once on construction.
class OneExcitationMatrix {
public:
    explicit OneExcitationMatrix(const BathSpec& bath);

    const Eigen::MatrixXd& matrix() const noexcept { return h_; }
    /// Normal-mode frequencies, ascending.
    const Eigen::VectorXd& eigenfrequencies() const noexcept { return w_; }
    /// Columns are the normal modes in the site basis.
    const Eigen::MatrixXd& eigenvectors() const noexcept { return v_; }
    Eigen::Index dim() const noexcept { return h_.rows(); }

private:
    Eigen::MatrixXd h_;
    Eigen::VectorXd w_;
    Eigen::MatrixXd v_;
};

OneExcitationMatrix assemble(const BathSpec& bath);

/// Z(t) = exp(-i h t): a_nu(t) = sum_sigma Z(nu, sigma) a_sigma(0).
struct SinglePropagator {
    double t;
    Eigen::MatrixXcd Z;

    cplx eta() const { return Z(0, 0); }
};

SinglePropagator propagate(const OneExcitationMatrix& m, double t);

/// Named blocks of Z and the couplings derived from them:
/// eta = Z00, gamma_k = Z0k, Delta_k = Zk0, Gamma_kl = Zkl,
/// eta_k = Delta_k / eta, gamma_kl = Gamma_kl - Delta_k gamma_l / eta.
struct PropagatorBlocks {
    cplx eta;
    Eigen::VectorXcd gamma;
    Eigen::VectorXcd Delta;
    Eigen::MatrixXcd Gamma;
    Eigen::VectorXcd eta_k;
    Eigen::MatrixXcd gamma_kl;
};

inline constexpr double kEtaVanishThreshold = 1e-12;

/// Throws NumericalError(EtaVanishes) when |eta| < 1e-12.
PropagatorBlocks blocks(const SinglePropagator& p);

/// Residuals of the unitarity-derived identities, all should be ~0.
struct BlockIdentityResiduals {
    double unitarity;       ///< ||Z^dag Z - I||_max
    double gamma_norm;      ///< |sum_l |gamma_l|^2 - (1 - |eta|^2)|
    double gamma_Gamma;     ///< max_k |sum_l gamma_l conj(Gamma_kl) + eta conj(Delta_k)|
    double beta_k;          ///< max_k |sum_l gamma_l conj(gamma_kl) + conj(eta_k)|
};

BlockIdentityResiduals check_identities(const SinglePropagator& p, const PropagatorBlocks& b);

}  // namespace cavity
