#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cavity/bath.hpp"
#include "cavity/coefficients.hpp"
#include "cavity/fock.hpp"
#include "cavity/states.hpp"
#include "cavity/wigner.hpp"

namespace cavity {

// JSON run configuration. Every ValidationError thrown while parsing carries the dotted
// key of the offending field (e.g. "grid.dt", "bath.modes[2]").

struct BathSection {
    double omega = 1.0;
    double beta = kZeroTemperature;
    std::optional<std::vector<BathMode>> modes;
    std::optional<SpectralDensitySpec> spectral;

    BathSpec build() const;
};

enum class StateKind { Coherent, Fock, Cat, Squeezed, Thermal, Custom };

struct StateSection {
    StateKind kind = StateKind::Coherent;
    cplx sigma = 0.0;           ///< coherent, cat, squeezed
    int n = 0;                  ///< fock
    Parity parity = Parity::Even;
    double xi = 0.0, phi = 0.0; ///< squeezed
    double nbar = 0.0;          ///< thermal
    std::optional<FockDensityMatrix> custom;

    FockDensityMatrix build(int cutoff) const;
};

struct EvolveSection {
    std::vector<double> times;
};

struct WignerSection {
    double time = 0.0;
    PhaseGrid grid{-3.0, 3.0, -3.0, 3.0, 0.1};
};

struct ProtocolSection {
    double sigma0 = 2.0;
    std::vector<double> times;
    double resolution = 1e-3;
};

struct OracleSection {
    std::vector<double> times;
    bool thermal = true;  ///< bath in its thermal state (vacuum if false or beta = inf)
};

enum class Task { Coefficients, Evolve, WignerScan, Protocol, OracleCheck };

const char* to_string(Task t);

struct RunConfig {
    BathSection bath;
    Route route = Route::NormalMode;
    TimeGrid grid{10.0, 0.01};
    StateSection state;
    std::vector<Task> tasks;
    int cutoff = 25;
    std::string output = "out";
    EvolveSection evolve;
    WignerSection wigner;
    ProtocolSection protocol;
    OracleSection oracle;
};

RunConfig parse_config(const nlohmann::json& j);
nlohmann::json serialize(const RunConfig& cfg);

/// 64-bit FNV-1a of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace cavity
