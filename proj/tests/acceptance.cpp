// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cavity/bath.hpp"
#include "cavity/coefficients.hpp"
#include "cavity/evolution.hpp"
#include "cavity/oracle.hpp"
#include "cavity/states.hpp"
#include "cavity/wigner.hpp"
#include "support.hpp"

using namespace cavity;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    const char* id;
    const char* title;
    double time_limit;  // seconds
    std::function<Outcome()> body;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Eigen::MatrixXcd pad(const Eigen::MatrixXcd& m, int dim) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    const int k = std::min<int>(dim, static_cast<int>(m.rows()));
    out.topLeftCorner(k, k) = m.topLeftCorner(k, k);
    return out;
}

FockDensityMatrix evolve(const FockDensityMatrix& rho, double Om, double La, double N, int dim) {
    return apply(superop_params(Om, La, N), FockDensityMatrix(pad(rho.matrix(), dim)));
}

Eigen::MatrixXcd random_density(std::mt19937_64& rng, int dim, int rank) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd A(dim, rank);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < rank; ++j) A(i, j) = cplx(g(rng), g(rng));
    Eigen::MatrixXcd rho = A * A.adjoint();
    return rho / rho.trace();
}

// ---------------------------------------------------------------------------------------

Outcome zero_temperature_identity() {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> count(1, 8);
    double worst = 0.0;
    for (int draw = 0; draw < 5; ++draw) {
        const auto bath = support::random_bath(rng, count(rng), 0.2, kZeroTemperature);
        const auto tr = coefficients_normal_mode(bath, {20.0, 0.01});
        for (std::size_t i = 0; i < tr.size(); ++i) worst = std::max(worst, std::abs(tr.lambda_prime[i] - tr.lambda[i]));
    }
    return {worst < 1e-10, fmt("max |lambda' - lambda| = %.2e over 5 baths (limit 1e-10)", worst)};
}

Outcome route_agreement() {
    const BathSpec bath(1.0, {{0.9, 0.05}, {1.0, 0.05}, {1.1, 0.05}, {1.25, -0.04}}, 1.0);
    const double t_end = 20.0;
    std::vector<double> err;
    for (double dt : {0.01, 0.005, 0.0025}) {
        const auto nm = coefficients_normal_mode(bath, {t_end, dt});
        const auto vo = coefficients_volterra(bath, {t_end, dt});
        double m = 0.0;
        for (double t = 1.0; t <= t_end + 1e-9; t += 1.0) {
            const auto a = sample(nm, t), b = sample(vo, t);
            m = std::max({m, std::abs(a.Omega - b.Omega), std::abs(a.Lambda - b.Lambda), std::abs(a.Nexc - b.Nexc)});
        }
        err.push_back(m);
    }
    const double order = std::log2(err[1] / err[2]);
    return {err[2] < 1e-6 && order >= 1.9,
            fmt("deviation %.2e at dt = 0.0025 (limit 1e-6), observed order %.3f (min 1.9), dt = 0.01 gives %.2e",
                err[2], order, err[0])};
}

Outcome master_equation_exactness() {
    const int cutoff = 25;
    const std::vector<BathSpec> geometries = {BathSpec(1.0, {{0.9, 0.2}}),
                                              BathSpec(1.0, {{0.8, 0.2}, {1.3, -0.15}})};
    const std::vector<std::pair<const char*, FockDensityMatrix>> states = {
        {"vacuum", vacuum(cutoff)},
        {"|1>", number_state(1, cutoff)},
        {"|2>", number_state(2, cutoff)},
        {"coherent", assemble_coherent(1.0, cutoff)},
        {"even cat", assemble_cat({{cplx(1.0, 0.0)}, Parity::Even}, cutoff)}};
    const std::vector<double> times = {1.0, 2.0, 3.0, 4.0, 5.0};

    double worst = 0.0;
    std::string where;
    for (std::size_t g = 0; g < geometries.size(); ++g)
        for (double beta : {kZeroTemperature, 1.0}) {
            const auto bath = geometries[g].with_inverse_temperature(beta);
            const auto traj = coefficients_normal_mode(bath, {5.0, 0.001});
            const ManyBodyOracle oracle(
                {bath, states[0].second, beta == kZeroTemperature ? BathState::Vacuum : BathState::Thermal});
            for (const auto& [name, rho0] : states)
                for (double t : times) {
                    const auto reduced = oracle.reduce(rho0, t);
                    const auto me = evolve(rho0, sample(traj, t).Omega, sample(traj, t).Lambda,
                                           sample(traj, t).Nexc, cutoff + 60);
                    const double d = trace_distance(reduced, FockDensityMatrix(pad(me.matrix(), cutoff + 1)));
                    if (d > worst) {
                        worst = d;
                        where = std::string(name) + ", " + std::to_string(g + 1) + "-mode, beta=" +
                                (beta == kZeroTemperature ? "inf" : "1") + fmt(", t=%.0f", t);
                    }
                }
        }
    return {worst < 1e-6, fmt("max trace distance %.2e over 100 comparisons (limit 1e-6)", worst) + " at " + where};
}

Outcome closed_form_equivalence() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi), rate(0.05, 1.0), occ(0.0, 0.5), amp(-1.2, 1.2);
    const int dim = 90, cut = 40;
    double worst = 0.0;
    std::string which;
    auto record = [&](const char* name, double d) {
        if (d > worst) {
            worst = d;
            which = name;
        }
    };
    auto td = [&](const FockDensityMatrix& a, const FockDensityMatrix& b) {
        return trace_distance(FockDensityMatrix(pad(a.matrix(), cut + 1)), FockDensityMatrix(pad(b.matrix(), cut + 1)));
    };

    for (int draw = 0; draw < 3; ++draw) {
        const double Om = phase(rng), La = rate(rng), N = occ(rng);
        const cplx s0(amp(rng), amp(rng));

        // coherent
        record("coherent", td(evolve(assemble_coherent(s0, cut), Om, La, 0.0, dim),
                              assemble_coherent(evolve_coherent(s0, Om, La).sigma, cut)));
        // Fock, zero and finite temperature
        const int m = 1 + draw;
        const auto w0 = evolve_fock_zero_T(m, La);
        record("fock zero-T", td(evolve(number_state(m, cut), Om, La, 0.0, dim), assemble_displaced_mixture(w0, 0.0, cut)));
        const auto wN = evolve_fock_finite_T(m, La, N);
        record("fock finite-T", td(evolve(number_state(m, cut), Om, La, N, dim), assemble_displaced_mixture(wN, 0.0, cut)));
        // generalized coherent
        {
            const Eigen::MatrixXcd D = displacement_matrix(s0, dim);
            const FockDensityMatrix rho0(Eigen::MatrixXcd(D * number_state(m, dim - 1).matrix() * D.adjoint()));
            record("generalized coherent",
                   td(evolve(rho0, Om, La, N, dim), assemble(evolve_generalized_coherent(m, s0, Om, La, N), cut)));
        }
        // off-diagonal dyad: trace norm of the difference
        {
            const cplx s0p(amp(rng), amp(rng));
            const auto ev = evolve_offdiagonal(s0, s0p, Om, La);
            const Eigen::MatrixXcd dyad = coherent_ket(s0, dim - 1) * coherent_ket(s0p, dim - 1).adjoint();
            const Eigen::MatrixXcd out = apply_matrix(superop_params(Om, La, 0.0), dyad);
            const Eigen::MatrixXcd closed = ev.prefactor * coherent_ket(ev.sigma_t, dim - 1) *
                                            coherent_ket(ev.sigmap_t, dim - 1).adjoint();
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd((out - closed).topLeftCorner(cut + 1, cut + 1));
            record("off-diagonal dyad", 0.5 * svd.singularValues().sum());
        }
        // cats
        for (Parity par : {Parity::Even, Parity::Odd}) {
            const CatSpec cat{{s0}, par};
            record("cat", td(evolve(assemble_cat(cat, cut), Om, La, 0.0, dim), assemble(evolve_cat(cat, Om, La), par, cut)));
        }
        // squeezed
        {
            const SqueezeParams z0{0.3 + 0.3 * draw, phase(rng)};
            record("squeezed", td(evolve(assemble_squeezed(s0, z0, cut), Om, La, 0.0, dim),
                                  assemble(evolve_squeezed(s0, z0, Om, La), cut)));
        }
        // thermal
        {
            const double nbar = 0.2 + occ(rng);
            record("thermal", td(evolve(assemble_thermal(nbar, dim - 1), Om, La, N, dim),
                                 assemble_thermal(evolve_thermal(nbar, La, N, 1.0).occupation, cut)));
        }
        // asymptotic state
        {
            const auto rho0 = FockDensityMatrix(random_density(rng, 5, 2));
            record("asymptotic", td(evolve(rho0, Om, 16.0 + La, N, dim), asymptotic_state(N, cut)));
        }
    }
    return {worst < 1e-6, fmt("max trace distance %.2e over 3 draws of each closed form (limit 1e-6), worst: ", worst) + which};
}

Outcome moment_laws() {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi), rate(0.05, 1.2), occ(0.0, 0.6), amp(-1.0, 1.0);
    const int dim = 100, cut = 30;
    double worst = 0.0;
    for (int draw = 0; draw < 10; ++draw) {
        const double Om = phase(rng), La = rate(rng), N = occ(rng);
        const cplx s0(amp(rng), amp(rng));
        const Eigen::MatrixXcd D = displacement_matrix(s0, cut + 1);
        const std::vector<FockDensityMatrix> initial = {
            assemble_coherent(s0, cut),
            assemble_cat({{s0}, Parity::Even}, cut),
            assemble_cat({{s0}, Parity::Odd}, cut),
            assemble_squeezed(s0, {0.5, phase(rng)}, cut),
            number_state(draw % 4, cut),
            assemble_thermal(0.4, cut),
            FockDensityMatrix(Eigen::MatrixXcd(D * number_state(2, cut).matrix() * D.adjoint())),
            FockDensityMatrix(pad(random_density(rng, 6, 3), cut + 1))};
        for (const auto& rho0 : initial) {
            const auto m0 = moments(rho0);
            const auto m = moments(evolve(rho0, Om, La, N, dim));
            worst = std::max(worst, std::abs(m.mean_a - m0.mean_a * std::exp(cplx(-La, -Om))));
            worst = std::max(worst, std::abs(m.mean_n - (std::exp(-2.0 * La) * m0.mean_n + N)));
        }
    }
    // Same geometry at two temperatures: identical first moment.
    const BathSpec cold(1.0, {{0.8, 0.2}, {1.3, -0.15}, {1.05, 0.1}});
    const auto a = coefficients_normal_mode(cold, {10.0, 0.01});
    const auto b = coefficients_normal_mode(cold.with_inverse_temperature(0.7), {10.0, 0.01});
    double beta_dev = 0.0;
    const auto rho0 = assemble_coherent(cplx(0.8, -0.3), cut);
    for (double t : {2.0, 5.0, 10.0}) {
        const auto sa = sample(a, t), sb = sample(b, t);
        const auto ma = moments(evolve(rho0, sa.Omega, sa.Lambda, sa.Nexc, dim));
        const auto mb = moments(evolve(rho0, sb.Omega, sb.Lambda, sb.Nexc, dim));
        beta_dev = std::max(beta_dev, std::abs(ma.mean_a - mb.mean_a));
    }
    return {worst < 1e-8 && beta_dev < 1e-8,
            fmt("max moment-law deviation %.2e over 80 evolved states (limit 1e-8), <a> change with beta %.2e", worst,
                beta_dev)};
}

Outcome protocol_recovery() {
    const double sigma0 = 2.0;
    const BathSpec bath(1.0, {{0.85, 0.12}, {1.2, -0.1}});
    const auto traj = coefficients_normal_mode(bath, {20.0, 0.001});
    const int cut = 30;
    std::vector<double> times, Lambda;
    std::vector<FockDensityMatrix> states;
    for (int i = 1; i <= 50; ++i) {
        const double t = 0.4 * i;
        const auto s = sample(traj, t);
        times.push_back(t);
        Lambda.push_back(s.Lambda);
        states.push_back(evolve(assemble_coherent(sigma0, cut), s.Omega, s.Lambda, s.Nexc, cut + 40));
    }
    const DeltaPSource source = [&](double t, cplx alpha) {
        const auto i = static_cast<std::size_t>(std::lround(t / 0.4)) - 1;
        return protocol_deltaP(FockDensityMatrix(pad(states[i].matrix(), cut + 1)), alpha, t).deltaP;
    };
    const auto est = fit_omega(sigma0, times, Lambda, source, 1e-3);
    double worst = 0.0;
    int failed = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        if (est[i].status != FitStatus::Ok) {
            ++failed;
            continue;
        }
        worst = std::max(worst, phase_distance(*est[i].omega_wrapped, sample(traj, times[i]).Omega));
    }

    // Delta P against the displayed formula on a Phi grid.
    double formula = 0.0;
    for (std::size_t i : {4u, 24u, 49u}) {
        const auto s = sample(traj, times[i]);
        const auto rho = FockDensityMatrix(pad(states[i].matrix(), cut + 1));
        for (int k = 0; k < 64; ++k) {
            const double Phi = kTwoPi * k / 64.0;
            const cplx alpha = -sigma0 * std::exp(-s.Lambda) * std::polar(1.0, -Phi);
            const double expect =
                std::exp(-8.0 * sigma0 * sigma0 * std::exp(-2.0 * s.Lambda) * std::pow(std::sin((s.Omega - Phi) / 2.0), 2));
            formula = std::max(formula, std::abs(protocol_deltaP(rho, alpha).deltaP - expect));
        }
    }
    return {failed == 0 && worst < 1e-5 && formula < 1e-8,
            fmt("phase error %.2e on 50 times (limit 1e-5), Delta P formula deviation %.2e (limit 1e-8), failed fits %.0f",
                worst, formula, failed)};
}

Outcome born_markov_window() {
    const BathSpec base(1.0, {{0.8, 1.0}, {1.1, 1.0}, {1.3, 1.0}});
    const double t = 5.0;
    std::vector<double> s = {0.04, 0.02, 0.01}, err;
    for (double k : s) {
        const auto b = base.scaled_couplings(k);
        const auto bm = coefficients_born_markov(b, {t, 0.01});
        err.push_back(std::abs(sample(bm, t).Lambda - exact_statistics(b, t).Lambda));
    }
    const double p = std::log(err[0] / err[2]) / std::log(s[0] / s[2]);
    return {std::abs(p - 4.0) <= 0.8, fmt("error %.2e at s = 0.04, %.2e at s = 0.01, exponent %.3f (4 +- 0.8)", err[0],
                                          err[2], p)};
}

Outcome invariant_suite() {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int dim = 70;
    double trace_dev = 0.0, min_eig = 1.0, weight_dev = 0.0, parity_res = 0.0, cov_dev = 0.0;
    auto weight_check = [&](const std::vector<double>& w) {
        double s = 0.0;
        for (double x : w) {
            s += x;
            if (x < 0.0) weight_dev = std::max(weight_dev, -x);
        }
        weight_dev = std::max(weight_dev, std::abs(s - 1.0));
    };
    for (int draw = 0; draw < 100; ++draw) {
        const double Om = kTwoPi * u(rng), La = 1.5 * u(rng), N = 0.5 * u(rng);
        const auto p = superop_params(Om, La, N);
        const int small = 1 + draw % 6;
        const Eigen::MatrixXcd rho0 = random_density(rng, small, 1 + draw % 3);
        const auto out = apply(p, FockDensityMatrix(pad(rho0, dim)));
        trace_dev = std::max(trace_dev, std::abs(out.trace() - 1.0));
        min_eig = std::min(min_eig, out.min_eigenvalue());

        const auto orbits = natural_orbits(out);
        double orbit_sum = 0.0;
        for (const auto& o : orbits) orbit_sum += o.weight;
        weight_dev = std::max(weight_dev, std::abs(orbit_sum - out.trace().real()));
        weight_check(evolve_fock_zero_T(small, La));
        weight_check(evolve_fock_finite_T(small, La, N));
        weight_check(evolve_squeezed(0.3, {0.6 * u(rng), 0.0}, Om, La).orbit_weights);

        const cplx s0(2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0);
        const Parity par = draw % 2 ? Parity::Odd : Parity::Even;
        const auto ev = evolve_cat({{s0}, par}, Om, La);
        weight_check({ev.p_same, ev.p_other});
        const auto cat_out = apply(superop_params(Om, La, 0.0), assemble_cat({{s0}, par}, 40));
        parity_res = std::max(parity_res, (cat_out.matrix() - assemble(ev, par, 40).matrix()).cwiseAbs().maxCoeff());

        // displacement covariance on one matrix unit per draw
        const int mrow = draw % 4, ncol = (draw / 4) % 4;
        const cplx st = s0 * std::exp(cplx(-La, -Om));
        const Eigen::MatrixXcd D0 = displacement_matrix(s0, dim), Dt = displacement_matrix(st, dim);
        Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(dim, dim);
        E(mrow, ncol) = 1.0;
        const Eigen::MatrixXcd lhs = apply_matrix(p, D0 * E * D0.adjoint());
        const Eigen::MatrixXcd rhs = Dt * apply_matrix(p, E) * Dt.adjoint();
        cov_dev = std::max(cov_dev, (lhs - rhs).topLeftCorner(12, 12).cwiseAbs().maxCoeff());
    }
    const bool pass = trace_dev < 1e-8 && min_eig >= -1e-9 && weight_dev < 1e-10 && parity_res < 1e-10 && cov_dev < 1e-7;
    return {pass, fmt("100 draws: trace %.1e (1e-8), min eigenvalue %.1e (-1e-9), ", trace_dev, min_eig) +
                      fmt("weights %.1e (1e-10), parity residual %.1e (1e-10), ", weight_dev, parity_res) +
                      fmt("covariance %.1e (1e-7)", cov_dev)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"AC1", "zero-temperature coefficient identity", 10.0, zero_temperature_identity},
        {"AC2", "route agreement", 60.0, route_agreement},
        {"AC3", "master-equation exactness", 120.0, master_equation_exactness},
        {"AC4", "closed-form equivalence", 120.0, closed_form_equivalence},
        {"AC5", "moment laws", 1e9, moment_laws},
        {"AC6", "protocol recovery", 30.0, protocol_recovery},
        {"AC7", "Born-Markov validity window", 1e9, born_markov_window},
        {"AC8", "invariant suite", 60.0, invariant_suite},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = c.body();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.time_limit;
        const bool pass = r.pass && in_time;
        if (!pass) ++failures;
        std::string timing = fmt("%.1f s", secs);
        if (c.time_limit < 1e8) timing += fmt(", limit %.0f s", c.time_limit);
        std::printf("%s %s  %s: %s [%s]\n", pass ? "PASS" : "FAIL", c.id, c.title, r.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
