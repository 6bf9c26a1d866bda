#pragma once

#include <complex>

#include <Eigen/Dense>
#include <json.hpp>

namespace cavity {

using cplx = std::complex<double>;

/// Density matrix in the number basis |0>, ..., |cutoff>.
class FockDensityMatrix {
public:
    explicit FockDensityMatrix(int cutoff);
    /// Takes a (cutoff+1)^2 matrix; no physical validation (see validate()).
    explicit FockDensityMatrix(Eigen::MatrixXcd rho);

    int cutoff() const noexcept { return static_cast<int>(rho_.rows()) - 1; }
    int dim() const noexcept { return static_cast<int>(rho_.rows()); }
    const Eigen::MatrixXcd& matrix() const noexcept { return rho_; }
    Eigen::MatrixXcd& matrix() noexcept { return rho_; }
    cplx operator()(int m, int n) const { return rho_(m, n); }

    cplx trace() const { return rho_.trace(); }
    /// Population of the highest retained level(s): truncation indicator.
    double top_population(int levels = 1) const;
    double purity() const;
    double hermiticity_error() const;
    double min_eigenvalue() const;

    /// Throws ValidationError unless Hermitian to tol_herm, unit trace to tol_trace and
    /// eigenvalues >= -tol_pos.
    void validate(double tol_herm = 1e-12, double tol_trace = 1e-10, double tol_pos = 1e-10) const;

    /// Same state at another cutoff (zero padded or truncated, not renormalized).
    FockDensityMatrix resized(int cutoff) const;

private:
    Eigen::MatrixXcd rho_;
};

/// |m><m|
FockDensityMatrix number_state(int m, int cutoff);
FockDensityMatrix vacuum(int cutoff);
FockDensityMatrix from_ket(const Eigen::VectorXcd& ket);

/// Coefficients e^{-|s|^2/2} s^n / sqrt(n!) of |s>, n = 0..cutoff.
Eigen::VectorXcd coherent_ket(cplx sigma, int cutoff);

/// Exact matrix elements <m|D(beta)|n> of exp(beta a^dag - conj(beta) a), 0 <= m,n < dim.
Eigen::MatrixXcd displacement_matrix(cplx beta, int dim);

/// exp(G) for anti-Hermitian G, via the eigendecomposition of the Hermitian iG.
Eigen::MatrixXcd expm_antihermitian(const Eigen::MatrixXcd& generator);

/// S(zeta) = exp((zeta a^dag^2 - conj(zeta) a^2) / 4), low block, computed on dim + pad levels.
Eigen::MatrixXcd squeeze_matrix(cplx zeta, int dim, int pad = 60);

/// D(sigma) rho D(sigma)^dag, exact in the retained block; the output keeps rho's cutoff
/// unless out_cutoff >= 0.
FockDensityMatrix displace(const FockDensityMatrix& rho, cplx sigma, int out_cutoff = -1);
Eigen::MatrixXcd displace(const Eigen::MatrixXcd& rho, cplx sigma, int out_dim);

/// 1/2 ||a - b||_1 (Hermitian difference). Different cutoffs are compared after zero padding.
double trace_distance(const FockDensityMatrix& a, const FockDensityMatrix& b);

/// Binomial coefficient as double.
double binomial(int n, int k);

void to_json(nlohmann::json& j, const FockDensityMatrix& rho);
FockDensityMatrix density_from_json(const nlohmann::json& j);

}  // namespace cavity
