#include "cavity/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "cavity/errors.hpp"
#include "cavity/parallel.hpp"
#include "numfmt.hpp"

namespace cavity {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wigner_value(const FockDensityMatrix& rho, cplx alpha) {
    // D(alpha) P D(alpha)^dag = D(2 alpha) P
    const int d = rho.dim();
    const Eigen::MatrixXcd D = displacement_matrix(2.0 * alpha, d);
    cplx acc = 0.0;
    for (int m = 0; m < d; ++m) {
        cplx col = 0.0;
        for (int n = 0; n < d; ++n) col += rho(m, n) * D(n, m);
        acc += (m % 2 == 0) ? col : -col;
    }
    return 2.0 * acc.real();
}

double displaced_leakage(const FockDensityMatrix& rho, cplx alpha) {
    const Eigen::MatrixXcd D = displacement_matrix(-alpha, rho.dim());
    return 1.0 - (D * rho.matrix() * D.adjoint()).trace().real() / rho.trace().real();
}

double wigner_coherent_closed(cplx sigma, cplx alpha) { return 2.0 * std::exp(-2.0 * std::norm(sigma - alpha)); }

std::size_t PhaseGrid::re_count() const {
    return static_cast<std::size_t>(std::floor((re_max - re_min) / step + 1e-9)) + 1;
}
std::size_t PhaseGrid::im_count() const {
    return static_cast<std::size_t>(std::floor((im_max - im_min) / step + 1e-9)) + 1;
}
cplx PhaseGrid::point(std::size_t ire, std::size_t iim) const {
    return {re_min + static_cast<double>(ire) * step, im_min + static_cast<double>(iim) * step};
}

void validate(const PhaseGrid& g) {
    if (!(g.step > 0.0) || !std::isfinite(g.step)) throw ValidationError("wigner.step", "step must be positive");
    for (double v : {g.re_min, g.re_max, g.im_min, g.im_max})
        if (!std::isfinite(v)) throw ValidationError("wigner.range", "grid extent must be finite");
    if (g.re_max < g.re_min || g.im_max < g.im_min) throw ValidationError("wigner.range", "empty grid range");
}

std::vector<double> wigner_scan(const FockDensityMatrix& rho, const PhaseGrid& grid, std::size_t threads) {
    validate(grid);
    const std::size_t nr = grid.re_count(), ni = grid.im_count();
    std::vector<double> out(nr * ni);
    parallel_for(
        ni, [&](std::size_t iim) {
            for (std::size_t ire = 0; ire < nr; ++ire) out[iim * nr + ire] = wigner_value(rho, grid.point(ire, iim));
        },
        threads);
    return out;
}

void write_scan_csv(const PhaseGrid& grid, const std::vector<double>& values, std::ostream& out) {
    out << "re,im,W\n";
    const std::size_t nr = grid.re_count(), ni = grid.im_count();
    for (std::size_t iim = 0; iim < ni; ++iim)
        for (std::size_t ire = 0; ire < nr; ++ire) {
            const cplx a = grid.point(ire, iim);
            out << detail::fmt(a.real()) << ',' << detail::fmt(a.imag()) << ',' << detail::fmt(values[iim * nr + ire])
                << '\n';
        }
}

ProtocolReading protocol_deltaP(const FockDensityMatrix& rho, cplx alpha, double t) {
    return {t, alpha, 0.5 * wigner_value(rho, -alpha)};
}

const char* to_string(FitStatus s) {
    switch (s) {
        case FitStatus::Ok: return "ok";
        case FitStatus::ContrastUnderflow: return "contrast-underflow";
        case FitStatus::NotUnimodal: return "not-unimodal";
        case FitStatus::Tie: return "tie";
    }
    return "?";
}

double phase_distance(double a, double b) { return std::abs(std::remainder(a - b, kTwoPi)); }

namespace {

PhaseEstimate fit_one(double sigma0, double t, double Lambda, const DeltaPSource& source, double res) {
    const auto n = static_cast<std::size_t>(std::llround(kTwoPi / res));
    const double h = kTwoPi / static_cast<double>(n);
    const double amp = sigma0 * std::exp(-Lambda);
    std::vector<double> scan(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = h * static_cast<double>(i);
        scan[i] = source(t, -amp * std::polar(1.0, -phi));
    }
    PhaseEstimate est{t, FitStatus::Ok, std::nullopt, std::nullopt, 0.0, 0.0};
    const auto [lo, hi] = std::minmax_element(scan.begin(), scan.end());
    est.peak_deltaP = *hi;
    est.contrast = *hi - *lo;
    if (est.contrast < 1e-6 || *hi <= 0.0) {
        est.status = FitStatus::ContrastUnderflow;
        return est;
    }
    const auto best = static_cast<std::size_t>(hi - scan.begin());
    auto at = [&](std::ptrdiff_t i) { return scan[static_cast<std::size_t>((i % static_cast<std::ptrdiff_t>(n) + static_cast<std::ptrdiff_t>(n)) % static_cast<std::ptrdiff_t>(n))]; };

    // Ties: another node, not adjacent to the best, with the same value.
    const double tie_tol = 1e-14 * std::abs(*hi);
    std::size_t local_max = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<std::ptrdiff_t>(i);
        if (i != best && phase_distance(h * static_cast<double>(i), h * static_cast<double>(best)) > 1.5 * h &&
            std::abs(scan[i] - *hi) <= tie_tol) {
            est.status = FitStatus::Tie;
            return est;
        }
        // significant strict local maxima on the circle
        if (scan[i] > at(ii - 1) && scan[i] >= at(ii + 1) && scan[i] - *lo > 1e-3 * est.contrast) ++local_max;
    }
    if (local_max > 1) {
        est.status = FitStatus::NotUnimodal;
        return est;
    }

    const auto b = static_cast<std::ptrdiff_t>(best);
    const double ym = at(b - 1), y0 = at(b), yp = at(b + 1);
    double offset = 0.0;
    if (ym > 0.0 && yp > 0.0) {
        const double lm = std::log(ym), l0 = std::log(y0), lp = std::log(yp);
        const double denom = lm - 2.0 * l0 + lp;
        if (denom < 0.0) offset = 0.5 * h * (lm - lp) / denom;
    }
    double phi = h * static_cast<double>(best) + offset;
    phi = std::fmod(phi, kTwoPi);
    if (phi < 0.0) phi += kTwoPi;
    est.omega_wrapped = phi;
    return est;
}

}  // namespace

std::vector<PhaseEstimate> fit_omega(double sigma0, const std::vector<double>& times, const std::vector<double>& Lambda,
                                     const DeltaPSource& source, double phase_resolution, std::size_t threads) {
    if (!(sigma0 > 0.0)) throw ValidationError("protocol.sigma0", "sigma0 must be positive");
    if (!(phase_resolution > 0.0 && phase_resolution < 1.0))
        throw ValidationError("protocol.resolution", "phase resolution must be in (0, 1)");
    if (times.size() != Lambda.size()) throw ValidationError("protocol.times", "times and Lambda lengths differ");
    std::vector<PhaseEstimate> out(times.size());
    parallel_for(
        times.size(), [&](std::size_t i) { out[i] = fit_one(sigma0, times[i], Lambda[i], source, phase_resolution); },
        threads);
    std::optional<double> prev;
    for (auto& e : out) {
        if (!e.omega_wrapped) continue;
        double u = *e.omega_wrapped;
        if (prev) u = *prev + std::remainder(u - *prev, kTwoPi);
        e.omega_unwrapped = u;
        prev = u;
    }
    return out;
}

}  // namespace cavity
