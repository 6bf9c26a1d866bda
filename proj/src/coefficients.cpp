#include "cavity/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "cavity/errors.hpp"
#include "cavity/propagator.hpp"
#include "numfmt.hpp"

namespace cavity {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUnderflow = 1e-14;

double wrap_to_pi(double x) {
    x = std::remainder(x, 2.0 * kPi);
    return x;
}

void check_grid(const TimeGrid& g) {
    if (!(g.dt > 0.0) || !std::isfinite(g.dt)) throw ValidationError("grid.dt", "dt must be positive");
    if (!(g.t_max >= 0.0) || !std::isfinite(g.t_max)) throw ValidationError("grid.t_max", "t_max must be >= 0");
}

void coarse_grid_warning(CoefficientTrajectory& traj) {
    if (traj.size() < 3) return;
    double max_rate = 0.0, max_abs = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        max_rate = std::max(max_rate, std::abs(traj.lambda[i] - traj.lambda[i - 1]) / traj.dt);
        max_abs = std::max(max_abs, std::abs(traj.lambda[i]));
    }
    if (max_abs > 0.0 && traj.dt * max_rate > 0.05 * max_abs)
        traj.warnings.push_back("grid may be too coarse: dt*max|dlambda/dt| = " + detail::fmt(traj.dt * max_rate));
}

void fill_integrals(CoefficientTrajectory& traj) {
    auto acc = accumulate(traj.omega, traj.delta, traj.lambda, traj.epsilon, traj.dt);
    traj.Omega = std::move(acc.Omega);
    traj.Lambda = std::move(acc.Lambda);
    traj.Nexc = std::move(acc.Nexc);
    traj.rk4_deviation = acc.rk4_deviation;
}

}  // namespace

std::size_t TimeGrid::size() const {
    return static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)) + 1;
}

const char* to_string(Route r) {
    switch (r) {
        case Route::NormalMode: return "normal-mode";
        case Route::Volterra: return "volterra";
        case Route::BornMarkov: return "born-markov";
    }
    return "?";
}

Route route_from_string(std::string_view s) {
    if (s == "normal-mode") return Route::NormalMode;
    if (s == "volterra") return Route::Volterra;
    if (s == "born-markov") return Route::BornMarkov;
    throw ValidationError("route", "unknown route '" + std::string(s) + "'");
}

CoefficientTrajectory coefficients_normal_mode(const BathSpec& bath, const TimeGrid& grid) {
    check_grid(grid);
    require_stable(bath);
    const auto occ = thermal_occupations(bath);
    const auto h = assemble(bath);
    const std::size_t n = grid.size();
    const std::size_t m = bath.size();

    CoefficientTrajectory traj;
    traj.route = Route::NormalMode;
    traj.omega = bath.omega();
    traj.dt = grid.dt;
    traj.times.resize(n);
    traj.delta.resize(n);
    traj.lambda.resize(n);
    traj.epsilon.resize(n);
    traj.lambda_prime.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const double t = grid.at(i);
        const auto b = blocks(propagate(h, t));
        cplx rate = 0.0;
        double eps = 0.0, lam_prime = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            const double c = bath.modes()[k].coupling;
            rate += cplx(0.0, 1.0) * c * b.eta_k(kk);
            // d/dt sum_k |gamma_k|^2 n_k = -2 lambda N + 2 eps
            cplx drive = 0.0;
            for (std::size_t l = 0; l < m; ++l)
                drive += bath.modes()[l].coupling * b.gamma_kl(static_cast<Eigen::Index>(l), kk);
            eps += occ[k] * (drive * std::conj(b.gamma(kk))).imag();
            // Diffusion coefficient: the occupation belongs to the initial bath operator a_l(0).
            for (std::size_t l = 0; l < m; ++l) {
                const auto ll = static_cast<Eigen::Index>(l);
                lam_prime -= c * (2.0 * occ[l] + 1.0) * (b.gamma(ll) * std::conj(b.gamma_kl(kk, ll))).imag();
            }
        }
        traj.times[i] = t;
        traj.lambda[i] = rate.real();
        traj.delta[i] = rate.imag();
        traj.epsilon[i] = eps;
        traj.lambda_prime[i] = lam_prime;
    }
    fill_integrals(traj);
    coarse_grid_warning(traj);
    return traj;
}

CoefficientTrajectory coefficients_volterra(const BathSpec& bath, const TimeGrid& grid) {
    check_grid(grid);
    require_stable(bath);
    const auto occ = thermal_occupations(bath);
    const std::size_t n = grid.size();
    const std::size_t m = bath.size();
    const double h = grid.dt;
    const double w0 = bath.omega();
    if (w0 * h >= kPi)
        throw NumericalError(NumericalError::Kind::PhaseStep, "dt too large: omega*dt >= pi, phase of eta is ambiguous");

    // Frame rotating at omega: eta = e^{-i omega t} xi,
    // xi' = -sum_k c_k^2 mem_k, mem_k(t) = int_0^t e^{-i d_k (t - tau)} xi(tau) dtau, d_k = omega_k - omega.
    // The trapezoid memory sum obeys mem_k(t+h) = e^{-i d_k h}(mem_k(t) + h/2 xi(t)) + h/2 xi(t+h).
    std::vector<double> c2(m);
    std::vector<cplx> step_phase(m);
    double c2_sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const auto& mode = bath.modes()[k];
        c2[k] = mode.coupling * mode.coupling;
        c2_sum += c2[k];
        step_phase[k] = std::polar(1.0, -(mode.frequency - w0) * h);
    }

    std::vector<cplx> mem(m, 0.0);
    cplx xi = 1.0;
    cplx force = 0.0;

    CoefficientTrajectory traj;
    traj.route = Route::Volterra;
    traj.omega = w0;
    traj.dt = h;
    traj.times.reserve(n);

    double phase = 0.0;  // unwrapped arg xi
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            cplx known = 0.0;
            for (std::size_t k = 0; k < m; ++k) known -= c2[k] * step_phase[k] * (mem[k] + 0.5 * h * xi);
            const cplx xi_next = (xi + 0.5 * h * (force + known)) / (1.0 + 0.25 * h * h * c2_sum);
            for (std::size_t k = 0; k < m; ++k) mem[k] = step_phase[k] * (mem[k] + 0.5 * h * xi) + 0.5 * h * xi_next;
            const double dphi = std::arg(xi_next / xi);
            if (std::abs(dphi) + w0 * h >= kPi)
                throw NumericalError(NumericalError::Kind::PhaseStep, "phase step exceeds pi; reduce dt");
            phase += dphi;
            xi = xi_next;
        }
        if (std::abs(xi) < kUnderflow) {
            traj.truncated = true;
            traj.warnings.push_back("|eta| below 1e-14 at t = " + detail::fmt(grid.at(i)) + "; trajectory truncated");
            break;
        }
        force = 0.0;
        double nw = 0.0, source = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            force -= c2[k] * mem[k];
            nw += c2[k] * std::norm(mem[k]) * occ[k];
            source += c2[k] * occ[k] * (std::conj(mem[k]) * xi).real();
        }
        const double t = grid.at(i);
        // lambda + i delta = -xi'/xi
        const cplx rate = -force / xi;
        traj.times.push_back(t);
        traj.lambda.push_back(rate.real());
        traj.delta.push_back(rate.imag());
        traj.Lambda.push_back(-std::log(std::abs(xi)));
        traj.Omega.push_back(w0 * t - phase);
        traj.Nexc.push_back(nw);
        // epsilon = e^{-2 Lambda}/2 d/dt [e^{2 Lambda} sum_k c_k^2 |mem_k|^2 n_k], with
        // d mem_k/dt = xi - i d_k mem_k taken analytically.
        traj.epsilon.push_back(rate.real() * nw + source);
    }

    const std::size_t len = traj.times.size();
    // Independent check of the occupation ODE against the directly computed N.
    if (len > 0) {
        auto acc = accumulate(w0, traj.delta, traj.lambda, traj.epsilon, h);
        double dev = 0.0;
        for (std::size_t i = 0; i < len; ++i)
            if (!std::isnan(acc.Nexc_rk4[i])) dev = std::max(dev, std::abs(acc.Nexc_rk4[i] - traj.Nexc[i]));
        traj.rk4_deviation = dev;
    }
    coarse_grid_warning(traj);
    return traj;
}

namespace {

// S(t) = c^2 int_0^t dt1 int_0^t1 dt2 e^{-i d t2} and dS/dt, per mode.
struct BornMarkovTerm {
    cplx S;
    cplx dS;
};

BornMarkovTerm born_markov_term(double c2, double d, double t) {
    const double x = d * t;
    const cplx I(0.0, 1.0);
    if (std::abs(x) < 1e-3) {
        const cplx s = 0.5 - I * x / 6.0 - x * x / 24.0 + I * x * x * x / 120.0 + x * x * x * x / 720.0;
        const cplx ds = 1.0 - I * x / 2.0 - x * x / 6.0 + I * x * x * x / 24.0 + x * x * x * x / 120.0;
        return {c2 * t * t * s, c2 * t * ds};
    }
    const cplx e = std::exp(-I * x);
    return {c2 * ((1.0 - e) / (d * d) - I * t / d), c2 * (-I / d) * (1.0 - e)};
}

}  // namespace

CoefficientTrajectory coefficients_born_markov(const BathSpec& bath, const TimeGrid& grid) {
    check_grid(grid);
    const std::size_t n = grid.size();
    CoefficientTrajectory traj;
    traj.route = Route::BornMarkov;
    traj.omega = bath.omega();
    traj.dt = grid.dt;
    traj.times.resize(n);
    traj.delta.resize(n);
    traj.lambda.resize(n);
    traj.epsilon.assign(n, 0.0);
    traj.Omega.resize(n);
    traj.Lambda.resize(n);
    traj.Nexc.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = grid.at(i);
        cplx S = 0.0, dS = 0.0;
        for (const auto& mode : bath.modes()) {
            const auto term = born_markov_term(mode.coupling * mode.coupling, mode.frequency - bath.omega(), t);
            S += term.S;
            dS += term.dS;
        }
        // -i Omega - Lambda = -i omega t - S
        traj.times[i] = t;
        traj.Lambda[i] = S.real();
        traj.Omega[i] = bath.omega() * t + S.imag();
        traj.lambda[i] = dS.real();
        traj.delta[i] = dS.imag();
    }
    traj.warnings.push_back("born-markov: epsilon and N omitted (zero-temperature approximation)");
    if (!bath.zero_temperature())
        traj.warnings.push_back("born-markov: bath is at finite temperature; thermal excitation ignored");
    return traj;
}

CoefficientTrajectory compute_coefficients(const BathSpec& bath, const TimeGrid& grid, Route route) {
    switch (route) {
        case Route::NormalMode: return coefficients_normal_mode(bath, grid);
        case Route::Volterra: return coefficients_volterra(bath, grid);
        case Route::BornMarkov: return coefficients_born_markov(bath, grid);
    }
    throw ValidationError("route", "unknown route");
}

Accumulated accumulate(double omega, const std::vector<double>& delta, const std::vector<double>& lambda,
                       const std::vector<double>& epsilon, double dt) {
    const std::size_t n = delta.size();
    if (lambda.size() != n || epsilon.size() != n)
        throw ValidationError("trajectory", "delta, lambda and epsilon must have the same length");
    if (!(dt > 0.0)) throw ValidationError("grid.dt", "dt must be positive");

    Accumulated out;
    out.Omega.assign(n, 0.0);
    out.Lambda.assign(n, 0.0);
    out.Nexc.assign(n, 0.0);
    out.Nexc_rk4.assign(n, std::numeric_limits<double>::quiet_NaN());
    out.rk4_deviation = 0.0;
    if (n == 0) return out;

    double source = 0.0;  // int_0^t epsilon e^{2 Lambda}
    for (std::size_t i = 1; i < n; ++i) {
        out.Omega[i] = out.Omega[i - 1] + 0.5 * dt * (2.0 * omega + delta[i - 1] + delta[i]);
        out.Lambda[i] = out.Lambda[i - 1] + 0.5 * dt * (lambda[i - 1] + lambda[i]);
        source += 0.5 * dt *
                  (epsilon[i - 1] * std::exp(2.0 * out.Lambda[i - 1]) + epsilon[i] * std::exp(2.0 * out.Lambda[i]));
        out.Nexc[i] = 2.0 * std::exp(-2.0 * out.Lambda[i]) * source;
    }

    // RK4 on y' = -2 lambda y + 2 epsilon, step 2dt, stages at nodes i, i+1, i+2.
    auto f = [&](std::size_t j, double y) { return -2.0 * lambda[j] * y + 2.0 * epsilon[j]; };
    double y = 0.0;
    out.Nexc_rk4[0] = 0.0;
    const double H = 2.0 * dt;
    for (std::size_t i = 0; i + 2 < n; i += 2) {
        const double k1 = f(i, y);
        const double k2 = f(i + 1, y + 0.5 * H * k1);
        const double k3 = f(i + 1, y + 0.5 * H * k2);
        const double k4 = f(i + 2, y + H * k3);
        y += H / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.Nexc_rk4[i + 2] = y;
        out.rk4_deviation = std::max(out.rk4_deviation, std::abs(y - out.Nexc[i + 2]));
    }
    return out;
}

PointStatistics exact_statistics(const BathSpec& bath, double t) {
    const auto p = propagate(assemble(bath), t);
    const auto occ = thermal_occupations(bath);
    const cplx eta = p.eta();
    double N = 0.0;
    for (std::size_t k = 0; k < occ.size(); ++k) N += std::norm(p.Z(0, static_cast<Eigen::Index>(k) + 1)) * occ[k];
    return {wrap_to_pi(-std::arg(eta)), -std::log(std::abs(eta)), N};
}

TrajectorySample sample(const CoefficientTrajectory& traj, double t) {
    const std::size_t n = traj.size();
    if (n == 0) throw ValidationError("trajectory", "empty trajectory");
    const double t_end = traj.times.back();
    if (t < -1e-12 || t > t_end + 1e-9 * std::max(1.0, t_end))
        throw ValidationError("t", "time " + detail::fmt(t) + " outside trajectory range [0, " + detail::fmt(t_end) + "]");
    t = std::clamp(t, 0.0, t_end);
    if (n == 1) return {t, traj.Omega[0], traj.Lambda[0], traj.Nexc[0], traj.delta[0]};
    auto i = std::min(static_cast<std::size_t>(t / traj.dt), n - 2);
    const double f = std::clamp((t - traj.times[i]) / traj.dt, 0.0, 1.0);
    auto lerp = [&](const std::vector<double>& v) { return (1.0 - f) * v[i] + f * v[i + 1]; };
    return {t, lerp(traj.Omega), lerp(traj.Lambda), lerp(traj.Nexc), lerp(traj.delta)};
}

void write_csv(const CoefficientTrajectory& traj, std::ostream& out, std::string_view bath_hash) {
    nlohmann::json meta;
    meta["bath_hash"] = std::string(bath_hash);
    meta["route"] = to_string(traj.route);
    meta["dt"] = traj.dt;
    meta["truncated"] = traj.truncated;
    out << "# " << meta.dump() << '\n';
    out << "t,delta,lambda,epsilon,Omega,Lambda,N\n";
    using detail::fmt;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << fmt(traj.times[i]) << ',' << fmt(traj.delta[i]) << ',' << fmt(traj.lambda[i]) << ','
            << fmt(traj.epsilon[i]) << ',' << fmt(traj.Omega[i]) << ',' << fmt(traj.Lambda[i]) << ','
            << fmt(traj.Nexc[i]) << '\n';
    }
}

}  // namespace cavity
