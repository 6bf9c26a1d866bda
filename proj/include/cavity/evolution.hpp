#pragma once

#include <vector>

#include "cavity/coefficients.hpp"
#include "cavity/fock.hpp"

namespace cavity {

/// Scalars of the factorized evolution superoperator
///   U(t) = v e^{wR} e^{xM} e^{yP} e^{zJ},  M = a^dag a ., P = . a^dag a, J = a . a^dag, R = a^dag . a
/// and of the reordered form U(t) = v e^{wR} e^{z'J} e^{xM} e^{yP}.
struct SuperoperatorParams {
    double v;
    double w;
    cplx x;
    cplx y;
    double z;
    double zprime;
    // Statistics the scalars were built from.
    double Omega;
    double Lambda;
    double Nexc;
};

/// v = 1/(1+N), w = N/(1+N), x = -i Omega - Lambda - ln(1+N) = conj(y),
/// z = 1 - e^{-2 Lambda}/(1+N), z' = z e^{-(x+y)}.
SuperoperatorParams superop_params(double Omega, double Lambda, double Nexc);

/// Interpolates the trajectory at t. Throws ValidationError on N < -1e-10.
SuperoperatorParams superop_params(const CoefficientTrajectory& traj, double t);

enum class Ordering { Default, Reordered };

/// Weight pushed above the cutoff by the raising factor e^{wR} (trace lost).
struct ApplyReport {
    double leakage = 0.0;
};

/// Action on an arbitrary operator in the number basis (not necessarily Hermitian).
Eigen::MatrixXcd apply_matrix(const SuperoperatorParams& p, const Eigen::MatrixXcd& op,
                              Ordering order = Ordering::Default, ApplyReport* report = nullptr);

FockDensityMatrix apply(const SuperoperatorParams& p, const FockDensityMatrix& rho,
                        Ordering order = Ordering::Default, ApplyReport* report = nullptr);

struct NaturalOrbit {
    double weight;
    Eigen::VectorXcd orbital;
};

/// Eigendecomposition of rho, weights descending.
std::vector<NaturalOrbit> natural_orbits(const FockDensityMatrix& rho);

struct Moments {
    cplx mean_a;         ///< <a>
    double mean_n;       ///< <a^dag a>
    cplx mean_a2;        ///< <a^2>
    double mean_anticomm;///< <a a^dag + a^dag a>
};

Moments moments(const FockDensityMatrix& rho);

/// Normally ordered characteristic function C(xi) = Tr e^{i xi a^dag} e^{i conj(xi) a} rho(t), evaluated
/// from the initial state as e^{-N |xi|^2} Tr e^{i xi e^{-Lambda + i Omega} a^dag} e^{i conj(xi) e^{-Lambda - i Omega} a} rho(0).
/// Moments: <a> = -i dC/dconj(xi), <a^dag a> = -d^2C/dxi dconj(xi) at xi = 0.
cplx characteristic_fn(const FockDensityMatrix& rho0, double Omega, double Lambda, double Nexc, cplx xi);
cplx characteristic_fn(const FockDensityMatrix& rho0, const CoefficientTrajectory& traj, double t, cplx xi);

/// Tr e^{u a^dag} e^{v a} rho (normally ordered exponential moment).
cplx normal_ordered_expectation(const FockDensityMatrix& rho, cplx u, cplx v);

}  // namespace cavity
