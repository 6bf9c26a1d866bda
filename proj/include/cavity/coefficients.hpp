#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cavity/bath.hpp"

namespace cavity {

/// Uniform grid t_i = i * dt, i = 0..n-1, with (n-1) dt = t_max (rounded down).
struct TimeGrid {
    double t_max;
    double dt;

    std::size_t size() const;
    double at(std::size_t i) const { return static_cast<double>(i) * dt; }
};

enum class Route { NormalMode, Volterra, BornMarkov };

const char* to_string(Route r);
Route route_from_string(std::string_view s);

/// Master-equation coefficients on a grid together with their integrals:
/// Omega = int (omega + delta), Lambda = int lambda,
/// Nexc = 2 exp(-2 Lambda) int epsilon exp(2 Lambda).
struct CoefficientTrajectory {
    Route route;
    double omega;
    double dt;
    std::vector<double> times;
    std::vector<double> delta;
    std::vector<double> lambda;
    std::vector<double> epsilon;
    /// Wigner diffusion coefficient computed independently of epsilon (normal-mode
    /// route only, empty otherwise). Satisfies lambda_prime = lambda + 2 epsilon.
    std::vector<double> lambda_prime;
    std::vector<double> Omega;
    std::vector<double> Lambda;
    std::vector<double> Nexc;
    /// Max |N_rk4 - Nexc| from the independent ODE integration of d<n>/dt = -2 lambda <n> + 2 epsilon.
    double rk4_deviation = 0.0;
    /// True when the trajectory stopped early (|eta| underflow).
    bool truncated = false;
    std::vector<std::string> warnings;

    std::size_t size() const { return times.size(); }
};

/// lambda + i delta = i sum_k c_k eta_k, epsilon = sum_kl n_k c_l Im(gamma_lk conj(gamma_k)),
/// integrals by composite trapezoid. Throws NumericalError(EtaVanishes) if |eta|
/// drops below 1e-12 on the grid.
CoefficientTrajectory coefficients_normal_mode(const BathSpec& bath, const TimeGrid& grid);

/// Steps eta' + i omega eta + int_0^t sum_k c_k^2 e^{-i omega_k (t - tau)} eta(tau) dtau = 0
/// with trapezoidal memory and trapezoidal time stepping (second order).
CoefficientTrajectory coefficients_volterra(const BathSpec& bath, const TimeGrid& grid);

/// Second-order (in c_k) closed form; epsilon and Nexc are zero (flagged in warnings
/// when the bath is at finite temperature).
CoefficientTrajectory coefficients_born_markov(const BathSpec& bath, const TimeGrid& grid);

CoefficientTrajectory compute_coefficients(const BathSpec& bath, const TimeGrid& grid, Route route);

struct Accumulated {
    std::vector<double> Omega;
    std::vector<double> Lambda;
    std::vector<double> Nexc;
    std::vector<double> Nexc_rk4;  ///< NaN at nodes the RK4 check does not visit
    double rk4_deviation;
};

/// Cumulative trapezoid integrals; Nexc_rk4 integrates the occupation equation from 0
/// with RK4 steps of 2 dt using grid nodes as stage points.
Accumulated accumulate(double omega, const std::vector<double>& delta, const std::vector<double>& lambda,
                       const std::vector<double>& epsilon, double dt);

/// Statistics at one instant straight from the propagator: Lambda = -ln|eta|,
/// Omega = -arg(eta) in (-pi, pi], Nexc = sum_k |gamma_k|^2 n_k.
struct PointStatistics {
    double Omega;
    double Lambda;
    double Nexc;
};

PointStatistics exact_statistics(const BathSpec& bath, double t);

/// Linear interpolation of (Omega, Lambda, Nexc, delta) at time t in [0, t_end].
struct TrajectorySample {
    double t;
    double Omega;
    double Lambda;
    double Nexc;
    double delta;
};

TrajectorySample sample(const CoefficientTrajectory& traj, double t);

/// CSV: a '# {json}' metadata line, then t,delta,lambda,epsilon,Omega,Lambda,N.
void write_csv(const CoefficientTrajectory& traj, std::ostream& out, std::string_view bath_hash);

}  // namespace cavity
