#pragma once

#include <limits>
#include <utility>
#include <variant>
#include <vector>

namespace cavity {

// Units: hbar = k_B = 1, all frequencies angular.

inline constexpr double kZeroTemperature = std::numeric_limits<double>::infinity();

struct BathMode {
    double frequency;  ///< omega_k > 0
    double coupling;   ///< c_k, real
};

/// Microscopic model: one system oscillator linearly coupled (RWA) to discrete modes,
/// bath initially thermal at inverse temperature beta (infinity = vacuum).
class BathSpec {
public:
    BathSpec(double omega, std::vector<BathMode> modes, double inverse_temperature = kZeroTemperature);

    double omega() const noexcept { return omega_; }
    const std::vector<BathMode>& modes() const noexcept { return modes_; }
    std::size_t size() const noexcept { return modes_.size(); }
    double inverse_temperature() const noexcept { return beta_; }
    bool zero_temperature() const noexcept { return beta_ == kZeroTemperature; }

    /// Same geometry, different temperature.
    BathSpec with_inverse_temperature(double beta) const;
    /// Same geometry, every coupling multiplied by `s`.
    BathSpec scaled_couplings(double s) const;

private:
    double omega_;
    std::vector<BathMode> modes_;
    double beta_;
};

namespace spectral {

/// J(w) = strength * w * exp(-w / cutoff)
struct Ohmic {
    double strength;
    double cutoff;
};

/// J(w) = peak * (width/2)^2 / ((w - center)^2 + (width/2)^2)
struct Lorentzian {
    double peak;
    double center;
    double width;
};

/// J(w) = g^2
struct FlatBand {
    double g;
};

/// Piecewise-linear J through sorted (w, J) samples, zero outside the table.
struct Table {
    std::vector<std::pair<double, double>> points;
};

using Kind = std::variant<Ohmic, Lorentzian, FlatBand, Table>;

}  // namespace spectral

struct SpectralDensitySpec {
    spectral::Kind kind;
    double band_min;
    double band_max;
    int mode_count;
};

/// J(w) for the given spectral kind.
double strength_function(const spectral::Kind& kind, double w);

/// Throws ValidationError if the spectral description is unusable.
void validate(const SpectralDensitySpec& spec);

/// Midpoint discretization: M equal bins on the band, w_k the bin centres and
/// c_k = sqrt(J(w_k) * dw).
BathSpec build_bath(const SpectralDensitySpec& spec, double omega, double beta);

struct ValidityReport {
    double margin;  ///< omega - sum_k c_k^2 / omega_k
    bool pass;      ///< margin > 0: no inverted normal mode
};

ValidityReport validate_bath(const BathSpec& bath);

/// Throws ValidationError when validate_bath fails.
void require_stable(const BathSpec& bath);

/// n_k = 1 / (exp(beta omega_k) - 1); zeros at beta = infinity.
std::vector<double> thermal_occupations(const BathSpec& bath);

/// Scalar form of the Bose occupation, same conventions.
double bose_occupation(double beta, double frequency);

}  // namespace cavity
