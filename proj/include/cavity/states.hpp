#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "cavity/coefficients.hpp"
#include "cavity/fock.hpp"

namespace cavity {

// Closed-form evolutions of special initial states. Everything is expressed through
// the environment statistics (Omega, Lambda, N) at the evaluation time.

struct ComplexAmplitude {
    cplx sigma;
};

/// zeta = xi e^{i phi}; gamma is the inverse thermal-squeeze temperature (infinity = pure).
struct SqueezeParams {
    double xi;
    double phi;
    double gamma = std::numeric_limits<double>::infinity();

    cplx zeta() const { return std::polar(xi, phi); }
};

enum class Parity { Even, Odd };

struct CatSpec {
    ComplexAmplitude sigma0;
    Parity parity;
};

/// sigma(t) = sigma0 e^{-i Omega - Lambda}
ComplexAmplitude evolve_coherent(cplx sigma0, double Omega, double Lambda);

/// Zero-temperature Fock evolution: p_{k,m} = C(m,k) T^k (1-T)^{m-k}, T = e^{-2 Lambda}.
std::vector<double> evolve_fock_zero_T(int m, double Lambda);

/// Finite-temperature Fock evolution weights P_{m,s}, s = 0..s_max, with s_max the first
/// level where the remaining tail drops below tail_tol (or s_cap).
std::vector<double> evolve_fock_finite_T(int m, double Lambda, double Nexc, double tail_tol = 1e-12, int s_cap = 4000);

struct GeneralizedCoherentEvolution {
    cplx sigma_t;
    std::vector<double> weights;  ///< over displaced number states D(sigma_t)|s>
};

GeneralizedCoherentEvolution evolve_generalized_coherent(int m, cplx sigma0, double Omega, double Lambda,
                                                         double Nexc);
GeneralizedCoherentEvolution evolve_generalized_coherent(int m, cplx sigma0, const CoefficientTrajectory& traj,
                                                         double t);

/// U |s0><s0'| = prefactor |s(t)><s'(t)|, prefactor = <s0'|s0> / <s'(t)|s(t)> (zero temperature).
struct OffDiagonalEvolution {
    cplx prefactor;
    double log_abs_prefactor;
    cplx sigma_t;
    cplx sigmap_t;
};

OffDiagonalEvolution evolve_offdiagonal(cplx sigma0, cplx sigma0p, double Omega, double Lambda);

/// Zero-temperature cat evolution as a mixture of the same- and other-parity cats at sigma(t).
struct CatEvolution {
    double p_same;
    double p_other;
    cplx sigma_t;
};

CatEvolution evolve_cat(const CatSpec& cat, double Omega, double Lambda);

/// Zero-temperature evolution of D(sigma0) S(zeta0) |0>.
struct SqueezedEvolution {
    cplx sigma_t;
    SqueezeParams zeta_t;  ///< with gamma(t)
    // Second moments evolved directly (about the mean).
    cplx mean_a2;
    double mean_anticomm;
    /// Natural-orbit weights e^{-n gamma}(1 - e^{-gamma}), n = 0.. until tail < 1e-12.
    std::vector<double> orbit_weights;
};

SqueezedEvolution evolve_squeezed(cplx sigma0, const SqueezeParams& zeta0, double Omega, double Lambda);
SqueezedEvolution evolve_squeezed(cplx sigma0, const SqueezeParams& zeta0, const CoefficientTrajectory& traj,
                                  double t);

/// Initial thermal state with mean nbar0 stays thermal with M(t) = nbar0 e^{-2 Lambda} + N.
struct ThermalEvolution {
    double occupation;        ///< M(t)
    double temperature;       ///< (omega + delta) / ln(1 + 1/M)
    double temperature_from_N;///< (omega + delta) / ln(1 + 1/N), the ground-state-seeded definition
};

ThermalEvolution evolve_thermal(double nbar0, double Lambda, double Nexc, double instantaneous_frequency);

/// Geometric thermal state with mean n_inf.
FockDensityMatrix asymptotic_state(double n_inf, int cutoff);

// --- materialization ---------------------------------------------------------------

/// Diagonal mixture sum_s w_s D(sigma)|s><s|D(sigma)^dag.
FockDensityMatrix assemble_displaced_mixture(const std::vector<double>& weights, cplx sigma, int cutoff);
FockDensityMatrix assemble_coherent(cplx sigma, int cutoff);
FockDensityMatrix assemble_cat(const CatSpec& cat, int cutoff);
/// D(sigma) S(zeta) (1 - e^{-gamma}) e^{-gamma a^dag a} S^dag D^dag.
FockDensityMatrix assemble_squeezed(cplx sigma, const SqueezeParams& zeta, int cutoff);
FockDensityMatrix assemble_thermal(double nbar, int cutoff);
/// Cat-mixture p_same * cat(parity) + p_other * cat(other parity) at sigma_t.
FockDensityMatrix assemble(const CatEvolution& ev, Parity initial, int cutoff);
FockDensityMatrix assemble(const SqueezedEvolution& ev, int cutoff);
FockDensityMatrix assemble(const GeneralizedCoherentEvolution& ev, int cutoff);

/// <b|a> = exp(-|a|^2/2 - |b|^2/2 + conj(b) a), in log form.
cplx log_coherent_overlap(cplx b, cplx a);

/// Throws NumericalError(Leakage) when 1 - Tr(rho) > tol.
void check_leakage(const FockDensityMatrix& rho, double tol = 1e-6);

}  // namespace cavity
