#include "cavity/states.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cavity/errors.hpp"

namespace cavity {

ComplexAmplitude evolve_coherent(cplx sigma0, double Omega, double Lambda) {
    return {sigma0 * std::exp(cplx(-Lambda, -Omega))};
}

std::vector<double> evolve_fock_zero_T(int m, double Lambda) {
    if (m < 0) throw ValidationError("m", "number state index must be nonnegative");
    const double T = std::exp(-2.0 * Lambda);
    const double Q = -std::expm1(-2.0 * Lambda);
    std::vector<double> p(static_cast<std::size_t>(m) + 1);
    for (int k = 0; k <= m; ++k) p[static_cast<std::size_t>(k)] = binomial(m, k) * std::pow(T, k) * std::pow(Q, m - k);
    return p;
}

std::vector<double> evolve_fock_finite_T(int m, double Lambda, double Nexc, double tail_tol, int s_cap) {
    if (m < 0) throw ValidationError("m", "number state index must be nonnegative");
    if (Nexc < 0.0) throw ValidationError("Nexc", "N must be nonnegative");
    if (Nexc == 0.0) return evolve_fock_zero_T(m, Lambda);
    // Sum over the j quanta that survive damping (binomial, p = T/(1+N)), each dressed by
    // a negative-binomial thermal admixture: C(s,j) N^{s-j} / (1+N)^{s+1}.
    const double onep = 1.0 + Nexc;
    const double p = std::exp(-2.0 * Lambda) / onep;
    const double q = 1.0 - p;
    const double lnN = std::log(Nexc), ln1pN = std::log1p(Nexc);
    std::vector<double> survive(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j) survive[static_cast<std::size_t>(j)] = binomial(m, j) * std::pow(p, j) * std::pow(q, m - j);

    std::vector<double> P;
    double total = 0.0;
    for (int s = 0; s <= s_cap; ++s) {
        double ps = 0.0;
        for (int j = 0; j <= std::min(m, s); ++j) {
            const double sj = survive[static_cast<std::size_t>(j)];
            if (sj == 0.0) continue;
            ps += sj * std::exp(std::log(binomial(s, j)) + (s - j) * lnN - (s + 1) * ln1pN);
        }
        P.push_back(ps);
        total += ps;
        if (s >= m && 1.0 - total < tail_tol) break;
    }
    return P;
}

GeneralizedCoherentEvolution evolve_generalized_coherent(int m, cplx sigma0, double Omega, double Lambda,
                                                         double Nexc) {
    return {evolve_coherent(sigma0, Omega, Lambda).sigma, evolve_fock_finite_T(m, Lambda, Nexc)};
}

GeneralizedCoherentEvolution evolve_generalized_coherent(int m, cplx sigma0, const CoefficientTrajectory& traj,
                                                         double t) {
    const auto s = sample(traj, t);
    return evolve_generalized_coherent(m, sigma0, s.Omega, s.Lambda, s.Nexc);
}

cplx log_coherent_overlap(cplx b, cplx a) { return -0.5 * std::norm(a) - 0.5 * std::norm(b) + std::conj(b) * a; }

OffDiagonalEvolution evolve_offdiagonal(cplx sigma0, cplx sigma0p, double Omega, double Lambda) {
    OffDiagonalEvolution ev{};
    ev.sigma_t = evolve_coherent(sigma0, Omega, Lambda).sigma;
    ev.sigmap_t = evolve_coherent(sigma0p, Omega, Lambda).sigma;
    const cplx log_pf = log_coherent_overlap(sigma0p, sigma0) - log_coherent_overlap(ev.sigmap_t, ev.sigma_t);
    ev.log_abs_prefactor = log_pf.real();
    ev.prefactor = std::exp(log_pf);
    return ev;
}

CatEvolution evolve_cat(const CatSpec& cat, double Omega, double Lambda) {
    const cplx s0 = cat.sigma0.sigma;
    if (cat.parity == Parity::Odd && s0 == cplx(0.0))
        throw ValidationError("state.sigma0", "odd cat with sigma0 = 0 is not normalizable");
    const cplx st = evolve_coherent(s0, Omega, Lambda).sigma;
    const double a0 = 2.0 * std::norm(s0), at = 2.0 * std::norm(st);
    // overlaps <-s|s> = e^{-2|s|^2}; r = <-s0|s0>/<-st|st>
    const double e0 = std::exp(-a0), et = std::exp(-at);
    const double r = std::exp(-(a0 - at));
    const double one_m_e0 = -std::expm1(-a0), one_m_et = -std::expm1(-at), one_m_r = -std::expm1(-(a0 - at));
    CatEvolution ev{};
    ev.sigma_t = st;
    if (cat.parity == Parity::Even) {
        ev.p_same = 0.5 * (1.0 + et) / (1.0 + e0) * (1.0 + r);
        ev.p_other = 0.5 * one_m_et / (1.0 + e0) * one_m_r;
    } else {
        ev.p_same = 0.5 * one_m_et / one_m_e0 * (1.0 + r);
        ev.p_other = 0.5 * (1.0 + et) / one_m_e0 * one_m_r;
    }
    return ev;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> geometric_orbit_weights(double gamma) {
    if (gamma == kInf) return {1.0};
    const double q = std::exp(-gamma);
    std::vector<double> w;
    double total = 0.0;
    for (int n = 0; n < 100000; ++n) {
        const double wn = std::pow(q, n) * (1.0 - q);
        w.push_back(wn);
        total += wn;
        if (1.0 - total < 1e-12) break;
    }
    return w;
}

}  // namespace

SqueezedEvolution evolve_squeezed(cplx sigma0, const SqueezeParams& zeta0, double Omega, double Lambda) {
    if (!(zeta0.xi >= 0.0)) throw ValidationError("state.xi", "squeeze magnitude must be nonnegative");
    if (!(Lambda >= 0.0)) throw NumericalError(NumericalError::Kind::Domain, "squeezed evolution needs Lambda >= 0");
    const double T = std::exp(-2.0 * Lambda);
    const double Q = -std::expm1(-2.0 * Lambda);
    const double c0 = std::cosh(zeta0.xi), s0 = std::sinh(zeta0.xi);

    SqueezedEvolution ev{};
    ev.sigma_t = evolve_coherent(sigma0, Omega, Lambda).sigma;

    // tanh xi(t) = sinh xi0 / (cosh xi0 + e^{2 Lambda} - 1)
    const double th = s0 / (c0 + std::expm1(2.0 * Lambda));
    if (!(th >= 0.0 && th < 1.0))
        throw NumericalError(NumericalError::Kind::Domain, "ArcTanh argument outside [0, 1)");
    ev.zeta_t.xi = std::atanh(th);
    ev.zeta_t.phi = zeta0.phi - 2.0 * Omega;

    // coth(gamma/2) = sqrt(T^2 + 2 cosh(xi0) T (1-T) + (1-T)^2)
    const double root = std::sqrt(T * T + 2.0 * c0 * T * Q + Q * Q);
    // root - 1 without cancellation: root^2 - 1 = 2 T Q (cosh xi0 - 1)
    const double root_m1 = 2.0 * T * Q * (c0 - 1.0) / (root + 1.0);
    if (root_m1 < 0.0) throw NumericalError(NumericalError::Kind::Domain, "ArcCoth argument below 1");
    ev.zeta_t.gamma = root_m1 == 0.0 ? kInf : std::log((root + 1.0) / root_m1);  // 2 arccoth(root)

    ev.mean_a2 = std::exp(cplx(-2.0 * Lambda, -2.0 * Omega)) * std::polar(0.5 * s0, zeta0.phi);
    ev.mean_anticomm = T * c0 + Q;
    ev.orbit_weights = geometric_orbit_weights(ev.zeta_t.gamma);
    return ev;
}

SqueezedEvolution evolve_squeezed(cplx sigma0, const SqueezeParams& zeta0, const CoefficientTrajectory& traj,
                                  double t) {
    const auto s = sample(traj, t);
    return evolve_squeezed(sigma0, zeta0, s.Omega, s.Lambda);
}

ThermalEvolution evolve_thermal(double nbar0, double Lambda, double Nexc, double instantaneous_frequency) {
    if (!(nbar0 >= 0.0)) throw ValidationError("state.nbar", "mean occupation must be nonnegative");
    ThermalEvolution ev{};
    ev.occupation = nbar0 * std::exp(-2.0 * Lambda) + Nexc;
    auto temp = [&](double n) { return n > 0.0 ? instantaneous_frequency / std::log1p(1.0 / n) : 0.0; };
    ev.temperature = temp(ev.occupation);
    ev.temperature_from_N = temp(Nexc);
    return ev;
}

FockDensityMatrix assemble_thermal(double nbar, int cutoff) {
    if (!(nbar >= 0.0)) throw ValidationError("state.nbar", "mean occupation must be nonnegative");
    FockDensityMatrix rho(cutoff);
    if (nbar == 0.0) {
        rho.matrix()(0, 0) = 1.0;
        return rho;
    }
    const double ratio = nbar / (1.0 + nbar);
    double p = 1.0 / (1.0 + nbar);
    for (int n = 0; n <= cutoff; ++n, p *= ratio) rho.matrix()(n, n) = p;
    return rho;
}

FockDensityMatrix asymptotic_state(double n_inf, int cutoff) { return assemble_thermal(n_inf, cutoff); }

FockDensityMatrix assemble_displaced_mixture(const std::vector<double>& weights, cplx sigma, int cutoff) {
    const int k = static_cast<int>(weights.size());
    const int big = std::max(k, cutoff + 1);
    const Eigen::MatrixXcd D = displacement_matrix(sigma, big).topLeftCorner(cutoff + 1, k);
    Eigen::VectorXd w(k);
    for (int i = 0; i < k; ++i) w(i) = weights[static_cast<std::size_t>(i)];
    return FockDensityMatrix(D * w.asDiagonal() * D.adjoint());
}

FockDensityMatrix assemble_coherent(cplx sigma, int cutoff) { return from_ket(coherent_ket(sigma, cutoff)); }

namespace {

Eigen::VectorXcd cat_ket(cplx sigma, Parity parity, int cutoff) {
    const double a = 2.0 * std::norm(sigma);
    const double norm2 = parity == Parity::Even ? 2.0 * (1.0 + std::exp(-a)) : -2.0 * std::expm1(-a);
    if (!(norm2 > 0.0)) throw ValidationError("state.sigma0", "odd cat with sigma = 0 is not normalizable");
    // |s> +- |-s> keeps only even (odd) number components, each doubled
    Eigen::VectorXcd ket = coherent_ket(sigma, cutoff);
    const int keep = parity == Parity::Even ? 0 : 1;
    for (int n = 0; n <= cutoff; ++n) ket(n) = (n % 2 == keep) ? 2.0 * ket(n) : cplx(0.0);
    return ket / std::sqrt(norm2);
}

}  // namespace

FockDensityMatrix assemble_cat(const CatSpec& cat, int cutoff) {
    return from_ket(cat_ket(cat.sigma0.sigma, cat.parity, cutoff));
}

FockDensityMatrix assemble(const CatEvolution& ev, Parity initial, int cutoff) {
    const Parity other = initial == Parity::Even ? Parity::Odd : Parity::Even;
    FockDensityMatrix rho(cutoff);
    auto add = [&](double weight, Parity parity) {
        if (weight == 0.0) return;
        if (parity == Parity::Odd && ev.sigma_t == cplx(0.0)) {
            if (weight > 1e-300) throw NumericalError(NumericalError::Kind::Domain, "odd cat weight at sigma = 0");
            return;
        }
        const auto ket = cat_ket(ev.sigma_t, parity, cutoff);
        rho.matrix() += weight * ket * ket.adjoint();
    };
    add(ev.p_same, initial);
    add(ev.p_other, other);
    return rho;
}

FockDensityMatrix assemble_squeezed(cplx sigma, const SqueezeParams& zeta, int cutoff) {
    if (!(zeta.gamma > 0.0)) throw ValidationError("state.gamma", "gamma must be positive");
    const int work = cutoff + 1 + 40;
    const Eigen::MatrixXcd S = squeeze_matrix(zeta.zeta(), work);
    Eigen::VectorXd th = Eigen::VectorXd::Zero(work);
    if (zeta.gamma == kInf) {
        th(0) = 1.0;
    } else {
        const double q = std::exp(-zeta.gamma);
        for (int n = 0; n < work; ++n) th(n) = -std::expm1(-zeta.gamma) * std::pow(q, n);
    }
    const Eigen::MatrixXcd centered = S * th.asDiagonal() * S.adjoint();
    return FockDensityMatrix(displace(centered, sigma, cutoff + 1));
}

FockDensityMatrix assemble(const SqueezedEvolution& ev, int cutoff) {
    return assemble_squeezed(ev.sigma_t, ev.zeta_t, cutoff);
}

FockDensityMatrix assemble(const GeneralizedCoherentEvolution& ev, int cutoff) {
    return assemble_displaced_mixture(ev.weights, ev.sigma_t, cutoff);
}

void check_leakage(const FockDensityMatrix& rho, double tol) {
    const double lost = 1.0 - rho.trace().real();
    if (lost > tol)
        throw NumericalError(NumericalError::Kind::Leakage,
                             "truncation leakage " + std::to_string(lost) + " exceeds " + std::to_string(tol));
}

}  // namespace cavity
