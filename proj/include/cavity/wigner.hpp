#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cavity/fock.hpp"

namespace cavity {

// Wigner function normalized so that a coherent state peaks at 2
// (W = 2 Tr[D(-alpha) rho D(alpha) Parity], i.e. pi times the usual density).

/// W(alpha) = 2 sum_{m,n} rho(m,n) (-1)^m <n|D(2 alpha)|m>, exact for the stored matrix.
double wigner_value(const FockDensityMatrix& rho, cplx alpha);

/// 1 - Tr[D(-alpha) rho D(alpha)] within the cutoff: weight the displacement pushes out.
double displaced_leakage(const FockDensityMatrix& rho, cplx alpha);

/// 2 exp(-2 |sigma - alpha|^2)
double wigner_coherent_closed(cplx sigma, cplx alpha);

struct PhaseGrid {
    double re_min, re_max;
    double im_min, im_max;
    double step;

    std::size_t re_count() const;
    std::size_t im_count() const;
    cplx point(std::size_t ire, std::size_t iim) const;
};

void validate(const PhaseGrid& grid);

/// Row-major: W[iim * re_count + ire].
std::vector<double> wigner_scan(const FockDensityMatrix& rho, const PhaseGrid& grid, std::size_t threads = 0);

/// CSV with header re,im,W in row-major order.
void write_scan_csv(const PhaseGrid& grid, const std::vector<double>& values, std::ostream& out);

struct ProtocolReading {
    double t;
    cplx alpha;
    double deltaP;
};

/// Delta P = P_e - P_g = W(-alpha)/2 for probe displacement alpha.
ProtocolReading protocol_deltaP(const FockDensityMatrix& rho, cplx alpha, double t = 0.0);

/// Black-box measurement: Delta P at exit time t for displacement alpha.
using DeltaPSource = std::function<double(double t, cplx alpha)>;

enum class FitStatus { Ok, ContrastUnderflow, NotUnimodal, Tie };

const char* to_string(FitStatus s);

struct PhaseEstimate {
    double t;
    FitStatus status;
    std::optional<double> omega_wrapped;    ///< in [0, 2 pi)
    std::optional<double> omega_unwrapped;  ///< nearest-branch continuation across times
    double peak_deltaP;                     ///< best scanned Delta P
    double contrast;                        ///< max - min of the scan
};

/// For each t: alpha(Phi) = -sigma0 e^{-Lambda(t)} e^{-i Phi}, scan Phi over [0, 2pi) at the given
/// resolution, refine the maximum by a three-point parabola on ln Delta P.
std::vector<PhaseEstimate> fit_omega(double sigma0, const std::vector<double>& times,
                                     const std::vector<double>& Lambda, const DeltaPSource& source,
                                     double phase_resolution, std::size_t threads = 0);

/// Minimal circular distance between two phases.
double phase_distance(double a, double b);

}  // namespace cavity
