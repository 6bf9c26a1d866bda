#include "cavity/bath.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cavity/errors.hpp"

namespace cavity {

const char* to_string(NumericalError::Kind kind) {
    switch (kind) {
        case NumericalError::Kind::EtaVanishes: return "eta-vanishes";
        case NumericalError::Kind::Underflow: return "underflow";
        case NumericalError::Kind::Leakage: return "leakage";
        case NumericalError::Kind::PhaseStep: return "phase-step";
        case NumericalError::Kind::Domain: return "domain";
        case NumericalError::Kind::Convergence: return "convergence";
        case NumericalError::Kind::Other: break;
    }
    return "numerical";
}

BathSpec::BathSpec(double omega, std::vector<BathMode> modes, double inverse_temperature)
    : omega_(omega), modes_(std::move(modes)), beta_(inverse_temperature) {
    if (!(omega_ > 0.0) || !std::isfinite(omega_))
        throw ValidationError("omega", "system frequency must be positive and finite");
    if (!(beta_ > 0.0))
        throw ValidationError("beta", "inverse temperature must be positive (or infinity)");
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        const auto& m = modes_[k];
        if (!(m.frequency > 0.0) || !std::isfinite(m.frequency))
            throw ValidationError("modes[" + std::to_string(k) + "]", "mode frequency must be positive and finite");
        if (!std::isfinite(m.coupling))
            throw ValidationError("modes[" + std::to_string(k) + "]", "coupling must be finite");
    }
}

BathSpec BathSpec::with_inverse_temperature(double beta) const { return BathSpec(omega_, modes_, beta); }

BathSpec BathSpec::scaled_couplings(double s) const {
    auto modes = modes_;
    for (auto& m : modes) m.coupling *= s;
    return BathSpec(omega_, std::move(modes), beta_);
}

namespace {

struct StrengthVisitor {
    double w;

    double operator()(const spectral::Ohmic& j) const { return j.strength * w * std::exp(-w / j.cutoff); }
    double operator()(const spectral::Lorentzian& j) const {
        const double hw = 0.5 * j.width;
        const double d = w - j.center;
        return j.peak * hw * hw / (d * d + hw * hw);
    }
    double operator()(const spectral::FlatBand& j) const { return j.g * j.g; }
    double operator()(const spectral::Table& j) const {
        const auto& p = j.points;
        if (p.empty() || w < p.front().first || w > p.back().first) return 0.0;
        auto hi = std::lower_bound(p.begin(), p.end(), w,
                                   [](const auto& pt, double x) { return pt.first < x; });
        if (hi == p.begin()) return hi->second;
        auto lo = hi - 1;
        const double span = hi->first - lo->first;
        if (span <= 0.0) return hi->second;
        const double f = (w - lo->first) / span;
        return (1.0 - f) * lo->second + f * hi->second;
    }
};

struct ParamCheck {
    void operator()(const spectral::Ohmic& j) const {
        if (!(j.strength >= 0.0)) throw ValidationError("strength", "must be nonnegative");
        if (!(j.cutoff > 0.0)) throw ValidationError("cutoff", "must be positive");
    }
    void operator()(const spectral::Lorentzian& j) const {
        if (!(j.peak >= 0.0)) throw ValidationError("peak", "must be nonnegative");
        if (!(j.center > 0.0)) throw ValidationError("center", "must be positive");
        if (!(j.width > 0.0)) throw ValidationError("width", "must be positive");
    }
    void operator()(const spectral::FlatBand& j) const {
        if (!std::isfinite(j.g)) throw ValidationError("g", "must be finite");
    }
    void operator()(const spectral::Table& j) const {
        if (j.points.empty()) throw ValidationError("points", "table is empty");
        for (std::size_t i = 0; i < j.points.size(); ++i) {
            if (!(j.points[i].second >= 0.0))
                throw ValidationError("points", "weights must be nonnegative");
            if (i > 0 && !(j.points[i].first > j.points[i - 1].first))
                throw ValidationError("points", "table frequencies must be strictly increasing");
        }
    }
};

}  // namespace

double strength_function(const spectral::Kind& kind, double w) { return std::visit(StrengthVisitor{w}, kind); }

void validate(const SpectralDensitySpec& spec) {
    if (!(spec.band_min > 0.0)) throw ValidationError("band", "band edges must be positive");
    if (!(spec.band_max > spec.band_min)) throw ValidationError("band", "band must have positive width");
    if (spec.mode_count < 1) throw ValidationError("mode_count", "mode_count must be at least 1");
    std::visit(ParamCheck{}, spec.kind);
}

BathSpec build_bath(const SpectralDensitySpec& spec, double omega, double beta) {
    validate(spec);
    const int m = spec.mode_count;
    const double dw = (spec.band_max - spec.band_min) / m;
    std::vector<BathMode> modes;
    modes.reserve(m);
    for (int k = 0; k < m; ++k) {
        const double wk = spec.band_min + (k + 0.5) * dw;
        const double j = std::max(0.0, strength_function(spec.kind, wk));
        modes.push_back({wk, std::sqrt(j * dw)});
    }
    return BathSpec(omega, std::move(modes), beta);
}

ValidityReport validate_bath(const BathSpec& bath) {
    double shift = 0.0;
    for (const auto& m : bath.modes()) shift += m.coupling * m.coupling / m.frequency;
    const double margin = bath.omega() - shift;
    return {margin, margin > 0.0};
}

void require_stable(const BathSpec& bath) {
    const auto report = validate_bath(bath);
    if (!report.pass)
        throw ValidationError("modes", "inverted oscillator: omega - sum c_k^2/omega_k = " +
                                           std::to_string(report.margin) + " is not positive");
}

double bose_occupation(double beta, double frequency) {
    if (!(beta > 0.0)) throw ValidationError("beta", "inverse temperature must be positive");
    if (beta == kZeroTemperature) return 0.0;
    return 1.0 / std::expm1(beta * frequency);
}

std::vector<double> thermal_occupations(const BathSpec& bath) {
    std::vector<double> n;
    n.reserve(bath.size());
    for (const auto& m : bath.modes()) n.push_back(bose_occupation(bath.inverse_temperature(), m.frequency));
    return n;
}

}  // namespace cavity
