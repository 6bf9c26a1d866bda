#pragma once

#include <map>
#include <memory>
#include <vector>

#include "cavity/bath.hpp"
#include "cavity/evolution.hpp"
#include "cavity/fock.hpp"

namespace cavity {

// Brute-force reference: the full system + bath Hamiltonian
//   H = omega a^dag a + sum_k omega_k b_k^dag b_k + sum_k c_k (a^dag b_k + b_k^dag a)
// propagated in the number basis. H conserves the total excitation number K, so each
// K-block is diagonalized separately.

enum class BathState { Vacuum, Thermal };

struct ManyBodyConfig {
    BathSpec bath;                ///< at most 4 modes
    FockDensityMatrix initial;    ///< system state; its cutoff is the output cutoff
    BathState bath_state = BathState::Vacuum;
    /// Per-bath-mode cap on occupation, -1 = none (blocks are then exact).
    int mode_cutoff = -1;
    /// Thermal configurations are added in descending weight until the remaining mass is below this.
    double thermal_tail = 1e-8;
};

inline constexpr std::size_t kMaxOracleModes = 4;
inline constexpr std::size_t kMaxOracleDimension = 1'000'000;

/// Throws ValidationError on too many modes, a bad tail, or a Hilbert space above the guard.
void validate(const ManyBodyConfig& cfg);

class ManyBodyOracle {
public:
    explicit ManyBodyOracle(ManyBodyConfig cfg);
    ~ManyBodyOracle();
    ManyBodyOracle(ManyBodyOracle&&) noexcept;
    ManyBodyOracle& operator=(ManyBodyOracle&&) noexcept;

    /// Reduced system state at t, at the initial state's cutoff.
    FockDensityMatrix reduce(double t, std::size_t threads = 0) const;
    /// Same bath and blocks, another initial system state of the same cutoff.
    FockDensityMatrix reduce(const FockDensityMatrix& initial, double t, std::size_t threads = 0) const;

    /// Largest |1 - norm| of any propagated many-body ket at the last reduce() call
    /// (whole-space trace before the partial trace).
    double last_norm_error() const { return last_norm_error_; }
    /// Number of bath configurations in the thermal mixture and their summed weight.
    std::size_t configuration_count() const;
    double configuration_weight() const;
    /// Sum of the dimensions of all excitation blocks in use.
    std::size_t total_dimension() const;

    const ManyBodyConfig& config() const { return cfg_; }

private:
    struct Impl;
    ManyBodyConfig cfg_;
    std::unique_ptr<Impl> impl_;
    mutable double last_norm_error_ = 0.0;
};

FockDensityMatrix reduce_exact(const ManyBodyConfig& cfg, double t);

/// Heisenberg-picture moments from the single-particle propagator blocks.
Moments gaussian_moments(const ManyBodyConfig& cfg, double t);

struct ComparisonReport {
    double trace_distance;
    double max_entry_deviation;
    double mean_a_deviation;
    double mean_n_deviation;
    double mean_a2_deviation;
    double mean_anticomm_deviation;
};

/// Requires equal cutoffs.
ComparisonReport compare(const FockDensityMatrix& reduced, const FockDensityMatrix& candidate);

}  // namespace cavity
