#pragma once

// Independent reference computations used only by the tests. Nothing here calls the
// library's numerical kernels.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cavity/bath.hpp"

namespace support {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;

/// exp(A) by scaling and squaring a 30-term Taylor series.
inline MatrixXcd expm_taylor(const MatrixXcd& A) {
    const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
    const MatrixXcd B = A / std::pow(2.0, squarings);
    MatrixXcd term = MatrixXcd::Identity(A.rows(), A.cols());
    MatrixXcd sum = term;
    for (int k = 1; k <= 30; ++k) {
        term = term * B / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

inline MatrixXcd lowering(int dim) {
    MatrixXcd a = MatrixXcd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

/// <m|D(beta)|n> for m, n < dim from the exponential of the generator on dim + pad levels.
inline MatrixXcd displacement_reference(cplx beta, int dim, int pad = 80) {
    const MatrixXcd a = lowering(dim + pad);
    const MatrixXcd D = expm_taylor(beta * a.adjoint() - std::conj(beta) * a);
    return D.topLeftCorner(dim, dim);
}

/// Right-hand side of the master equation with coefficients (w + delta, lambda, epsilon).
inline MatrixXcd lindblad_rhs(const MatrixXcd& rho, const MatrixXcd& a, double freq, double lambda, double eps) {
    const MatrixXcd ad = a.adjoint();
    const MatrixXcd n = ad * a;
    const MatrixXcd nn = a * ad;
    const cplx i(0.0, 1.0);
    return -i * freq * (n * rho - rho * n) + (lambda + eps) * (2.0 * a * rho * ad - n * rho - rho * n) +
           eps * (2.0 * ad * rho * a - nn * rho - rho * nn);
}

/// RK4 integration of the master equation over grid samples (t_i, w + delta_i, lambda_i, eps_i),
/// steps of 2 dt with the midpoint node as the half-step stage. Works on a padded space and
/// returns the top-left dim x dim block.
inline MatrixXcd integrate_master_equation(const MatrixXcd& rho0, const std::vector<double>& freq,
                                           const std::vector<double>& lambda, const std::vector<double>& eps,
                                           double dt, std::size_t steps, int pad = 20) {
    const int dim = static_cast<int>(rho0.rows());
    const int big = dim + pad;
    const MatrixXcd a = lowering(big);
    MatrixXcd rho = MatrixXcd::Zero(big, big);
    rho.topLeftCorner(dim, dim) = rho0;
    const double h = 2.0 * dt;
    for (std::size_t i = 0; i + 2 <= steps; i += 2) {
        const MatrixXcd k1 = lindblad_rhs(rho, a, freq[i], lambda[i], eps[i]);
        const MatrixXcd k2 = lindblad_rhs(rho + 0.5 * h * k1, a, freq[i + 1], lambda[i + 1], eps[i + 1]);
        const MatrixXcd k3 = lindblad_rhs(rho + 0.5 * h * k2, a, freq[i + 1], lambda[i + 1], eps[i + 1]);
        const MatrixXcd k4 = lindblad_rhs(rho + h * k3, a, freq[i + 2], lambda[i + 2], eps[i + 2]);
        rho += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return rho.topLeftCorner(dim, dim);
}

/// Wigner value of |n><n| in the normalization where the vacuum peaks at 2.
inline double wigner_number_state(int n, cplx alpha) {
    const double r2 = std::norm(alpha);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return 2.0 * sign * std::laguerre(static_cast<unsigned>(n), 4.0 * r2) * std::exp(-2.0 * r2);
}

/// Random stable bath: omega = 1, M modes in [0.5, 1.5], |c_k| <= cmax.
inline cavity::BathSpec random_bath(std::mt19937_64& rng, int M, double cmax, double beta) {
    std::uniform_real_distribution<double> wdist(0.5, 1.5), cdist(-cmax, cmax);
    std::vector<cavity::BathMode> modes;
    for (int k = 0; k < M; ++k) modes.push_back({wdist(rng), cdist(rng)});
    return cavity::BathSpec(1.0, modes, beta);
}

/// Trace distance computed from the eigenvalues of the Hermitian difference.
inline double trace_distance(const MatrixXcd& a, const MatrixXcd& b) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(a - b);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace support
