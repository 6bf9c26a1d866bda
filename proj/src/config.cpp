#include "cavity/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "cavity/errors.hpp"

namespace cavity {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& require(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw ValidationError(join(path, key), "missing required field");
    return j.at(key);
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ValidationError(path.empty() ? "<root>" : path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw ValidationError(join(path, k), "unknown field");
}

double number(const json& j, const std::string& key) {
    if (!j.is_number()) throw ValidationError(key, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(key, "expected a finite number");
    return v;
}

double positive(const json& j, const std::string& key) {
    const double v = number(j, key);
    if (!(v > 0.0)) throw ValidationError(key, "must be positive");
    return v;
}

int integer(const json& j, const std::string& key, int lo) {
    if (!j.is_number_integer()) throw ValidationError(key, "expected an integer");
    const auto v = j.get<long long>();
    if (v < lo || v > 1'000'000) throw ValidationError(key, "integer out of range");
    return static_cast<int>(v);
}

double inverse_temperature(const json& j, const std::string& key) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return kZeroTemperature;
        throw ValidationError(key, "expected a positive number or \"inf\"");
    }
    return positive(j, key);
}

json beta_to_json(double beta) { return beta == kZeroTemperature ? json("inf") : json(beta); }

cplx complex_value(const json& j, const std::string& key) {
    if (j.is_number()) return {number(j, key), 0.0};
    if (j.is_array() && j.size() == 2) return {number(j[0], index(key, 0)), number(j[1], index(key, 1))};
    throw ValidationError(key, "expected a number or [re, im]");
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

std::vector<double> time_list(const json& j, const std::string& key, double t_max) {
    if (!j.is_array()) throw ValidationError(key, "expected an array of times");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const double t = number(j[i], index(key, i));
        if (t < 0.0 || t > t_max * (1.0 + 1e-12)) throw ValidationError(index(key, i), "time outside [0, grid.t_max]");
        out.push_back(t);
    }
    return out;
}

std::pair<double, double> range(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 2) throw ValidationError(key, "expected [min, max]");
    return {number(j[0], index(key, 0)), number(j[1], index(key, 1))};
}

SpectralDensitySpec parse_spectral(const json& j, const std::string& path) {
    require_object(j, path);
    const json& kind = require(j, "kind", path);
    if (!kind.is_string()) throw ValidationError(join(path, "kind"), "expected a string");
    const std::string k = kind.get<std::string>();
    SpectralDensitySpec spec{spectral::FlatBand{0.0}, 0.0, 0.0, 0};
    const auto band = range(require(j, "band", path), join(path, "band"));
    spec.band_min = band.first;
    spec.band_max = band.second;
    spec.mode_count = integer(require(j, "mode_count", path), join(path, "mode_count"), 1);
    auto param = [&](const char* name) { return number(require(j, name, path), join(path, name)); };
    if (k == "ohmic") {
        reject_unknown(j, path, {"kind", "band", "mode_count", "strength", "cutoff"});
        spec.kind = spectral::Ohmic{param("strength"), param("cutoff")};
    } else if (k == "lorentzian") {
        reject_unknown(j, path, {"kind", "band", "mode_count", "peak", "center", "width"});
        spec.kind = spectral::Lorentzian{param("peak"), param("center"), param("width")};
    } else if (k == "flat-band") {
        reject_unknown(j, path, {"kind", "band", "mode_count", "g"});
        spec.kind = spectral::FlatBand{param("g")};
    } else if (k == "table") {
        reject_unknown(j, path, {"kind", "band", "mode_count", "points"});
        const json& pts = require(j, "points", path);
        const std::string key = join(path, "points");
        if (!pts.is_array()) throw ValidationError(key, "expected [[w, J], ...]");
        spectral::Table table;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto p = range(pts[i], index(key, i));
            table.points.emplace_back(p.first, p.second);
        }
        spec.kind = std::move(table);
    } else {
        throw ValidationError(join(path, "kind"), "unknown spectral kind '" + k + "'");
    }
    try {
        validate(spec);
    } catch (const ValidationError& e) {
        throw ValidationError(join(path, e.key()), e.what());
    }
    return spec;
}

json spectral_to_json(const SpectralDensitySpec& s) {
    json j;
    std::visit(
        [&](const auto& kind) {
            using K = std::decay_t<decltype(kind)>;
            if constexpr (std::is_same_v<K, spectral::Ohmic>) {
                j = {{"kind", "ohmic"}, {"strength", kind.strength}, {"cutoff", kind.cutoff}};
            } else if constexpr (std::is_same_v<K, spectral::Lorentzian>) {
                j = {{"kind", "lorentzian"}, {"peak", kind.peak}, {"center", kind.center}, {"width", kind.width}};
            } else if constexpr (std::is_same_v<K, spectral::FlatBand>) {
                j = {{"kind", "flat-band"}, {"g", kind.g}};
            } else {
                json pts = json::array();
                for (const auto& [w, v] : kind.points) pts.push_back({w, v});
                j = {{"kind", "table"}, {"points", pts}};
            }
        },
        s.kind);
    j["band"] = {s.band_min, s.band_max};
    j["mode_count"] = s.mode_count;
    return j;
}

BathSection parse_bath(const json& j) {
    const std::string path = "bath";
    require_object(j, path);
    reject_unknown(j, path, {"omega", "beta", "modes", "spectral"});
    BathSection b;
    b.omega = positive(require(j, "omega", path), "bath.omega");
    if (j.contains("beta")) b.beta = inverse_temperature(j["beta"], "bath.beta");
    if (j.contains("modes") == j.contains("spectral"))
        throw ValidationError("bath.modes", "give exactly one of bath.modes or bath.spectral");
    if (j.contains("modes")) {
        const json& m = j["modes"];
        if (!m.is_array()) throw ValidationError("bath.modes", "expected [[omega_k, c_k], ...]");
        std::vector<BathMode> modes;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const std::string key = index("bath.modes", i);
            const auto p = range(m[i], key);
            if (!(p.first > 0.0)) throw ValidationError(index(key, 0), "mode frequency must be positive");
            modes.push_back({p.first, p.second});
        }
        b.modes = std::move(modes);
    } else {
        b.spectral = parse_spectral(j["spectral"], "bath.spectral");
    }
    try {
        require_stable(b.build());
    } catch (const ValidationError& e) {
        throw ValidationError(b.spectral ? "bath.spectral" : "bath.modes", e.what());
    }
    return b;
}

StateSection parse_state(const json& j, int cutoff) {
    const std::string path = "state";
    require_object(j, path);
    const json& type = require(j, "type", path);
    if (!type.is_string()) throw ValidationError("state.type", "expected a string");
    const std::string t = type.get<std::string>();
    StateSection s;
    if (t == "coherent") {
        reject_unknown(j, path, {"type", "sigma"});
        s.kind = StateKind::Coherent;
        s.sigma = complex_value(require(j, "sigma", path), "state.sigma");
    } else if (t == "fock") {
        reject_unknown(j, path, {"type", "n"});
        s.kind = StateKind::Fock;
        s.n = integer(require(j, "n", path), "state.n", 0);
        if (s.n > cutoff) throw ValidationError("state.n", "number state above the cutoff");
    } else if (t == "cat") {
        reject_unknown(j, path, {"type", "sigma", "parity"});
        s.kind = StateKind::Cat;
        s.sigma = complex_value(require(j, "sigma", path), "state.sigma");
        const json& p = require(j, "parity", path);
        if (p == "even") s.parity = Parity::Even;
        else if (p == "odd") s.parity = Parity::Odd;
        else throw ValidationError("state.parity", "expected \"even\" or \"odd\"");
        if (s.parity == Parity::Odd && s.sigma == cplx(0.0))
            throw ValidationError("state.sigma", "odd cat needs a nonzero amplitude");
    } else if (t == "squeezed") {
        reject_unknown(j, path, {"type", "sigma", "xi", "phi"});
        s.kind = StateKind::Squeezed;
        s.sigma = j.contains("sigma") ? complex_value(j["sigma"], "state.sigma") : cplx(0.0);
        s.xi = number(require(j, "xi", path), "state.xi");
        if (s.xi < 0.0) throw ValidationError("state.xi", "squeeze magnitude must be non-negative");
        s.phi = j.contains("phi") ? number(j["phi"], "state.phi") : 0.0;
    } else if (t == "thermal") {
        reject_unknown(j, path, {"type", "nbar"});
        s.kind = StateKind::Thermal;
        s.nbar = number(require(j, "nbar", path), "state.nbar");
        if (s.nbar < 0.0) throw ValidationError("state.nbar", "mean occupation must be non-negative");
    } else if (t == "custom") {
        reject_unknown(j, path, {"type", "rho"});
        s.kind = StateKind::Custom;
        try {
            s.custom = density_from_json(require(j, "rho", path));
        } catch (const ValidationError& e) {
            throw ValidationError(join("state.rho", e.key()), e.what());
        }
        if (s.custom->cutoff() != cutoff) throw ValidationError("state.rho.cutoff", "must equal the run cutoff");
        try {
            s.custom->validate(1e-10, 1e-8, 1e-10);
        } catch (const ValidationError& e) {
            throw ValidationError("state.rho", e.what());
        }
    } else {
        throw ValidationError("state.type", "unknown state type '" + t + "'");
    }
    return s;
}

json state_to_json(const StateSection& s) {
    switch (s.kind) {
        case StateKind::Coherent: return {{"type", "coherent"}, {"sigma", complex_to_json(s.sigma)}};
        case StateKind::Fock: return {{"type", "fock"}, {"n", s.n}};
        case StateKind::Cat:
            return {{"type", "cat"},
                    {"sigma", complex_to_json(s.sigma)},
                    {"parity", s.parity == Parity::Even ? "even" : "odd"}};
        case StateKind::Squeezed:
            return {{"type", "squeezed"}, {"sigma", complex_to_json(s.sigma)}, {"xi", s.xi}, {"phi", s.phi}};
        case StateKind::Thermal: return {{"type", "thermal"}, {"nbar", s.nbar}};
        case StateKind::Custom: {
            json rho;
            to_json(rho, *s.custom);
            return {{"type", "custom"}, {"rho", rho}};
        }
    }
    return {};
}

Task task_from_string(const json& j, const std::string& key) {
    if (!j.is_string()) throw ValidationError(key, "expected a task name");
    const std::string s = j.get<std::string>();
    if (s == "coefficients") return Task::Coefficients;
    if (s == "evolve") return Task::Evolve;
    if (s == "wigner-scan") return Task::WignerScan;
    if (s == "protocol") return Task::Protocol;
    if (s == "oracle-check") return Task::OracleCheck;
    throw ValidationError(key, "unknown task '" + s + "'");
}

}  // namespace

BathSpec BathSection::build() const {
    if (spectral) return build_bath(*spectral, omega, beta);
    return BathSpec(omega, modes.value_or(std::vector<BathMode>{}), beta);
}

FockDensityMatrix StateSection::build(int cutoff) const {
    switch (kind) {
        case StateKind::Coherent: return assemble_coherent(sigma, cutoff);
        case StateKind::Fock: return number_state(n, cutoff);
        case StateKind::Cat: return assemble_cat({{sigma}, parity}, cutoff);
        case StateKind::Squeezed: return assemble_squeezed(sigma, {xi, phi}, cutoff);
        case StateKind::Thermal: return assemble_thermal(nbar, cutoff);
        case StateKind::Custom: return *custom;
    }
    throw ValidationError("state.type", "unknown state type");
}

const char* to_string(Task t) {
    switch (t) {
        case Task::Coefficients: return "coefficients";
        case Task::Evolve: return "evolve";
        case Task::WignerScan: return "wigner-scan";
        case Task::Protocol: return "protocol";
        case Task::OracleCheck: return "oracle-check";
    }
    return "?";
}

RunConfig parse_config(const json& j) {
    require_object(j, "");
    reject_unknown(j, "",
                   {"bath", "route", "grid", "state", "tasks", "cutoff", "output", "evolve", "wigner", "protocol", "oracle"});
    RunConfig cfg;
    cfg.bath = parse_bath(require(j, "bath", ""));

    if (j.contains("route")) {
        if (!j["route"].is_string()) throw ValidationError("route", "expected a string");
        cfg.route = route_from_string(j["route"].get<std::string>());
    }

    const json& grid = require(j, "grid", "");
    require_object(grid, "grid");
    reject_unknown(grid, "grid", {"t_max", "dt"});
    cfg.grid.t_max = number(require(grid, "t_max", "grid"), "grid.t_max");
    if (cfg.grid.t_max < 0.0) throw ValidationError("grid.t_max", "must be non-negative");
    cfg.grid.dt = positive(require(grid, "dt", "grid"), "grid.dt");
    if (cfg.grid.t_max / cfg.grid.dt > 1e8) throw ValidationError("grid.dt", "grid has more than 1e8 points");

    if (j.contains("cutoff")) cfg.cutoff = integer(j["cutoff"], "cutoff", 1);
    if (cfg.cutoff > 400) throw ValidationError("cutoff", "cutoff above 400 is not supported");
    if (j.contains("output")) {
        if (!j["output"].is_string() || j["output"].get<std::string>().empty())
            throw ValidationError("output", "expected a directory path");
        cfg.output = j["output"].get<std::string>();
    }
    if (j.contains("state")) {
        cfg.state = parse_state(j["state"], cfg.cutoff);
    }

    const json& tasks = require(j, "tasks", "");
    if (!tasks.is_array() || tasks.empty()) throw ValidationError("tasks", "expected a nonempty list of tasks");
    for (std::size_t i = 0; i < tasks.size(); ++i) cfg.tasks.push_back(task_from_string(tasks[i], index("tasks", i)));

    const double t_max = cfg.grid.t_max;
    if (j.contains("evolve")) {
        const json& e = j["evolve"];
        require_object(e, "evolve");
        reject_unknown(e, "evolve", {"times"});
        cfg.evolve.times = time_list(require(e, "times", "evolve"), "evolve.times", t_max);
    } else {
        cfg.evolve.times = {t_max};
    }
    if (j.contains("wigner")) {
        const json& w = j["wigner"];
        require_object(w, "wigner");
        reject_unknown(w, "wigner", {"time", "re", "im", "step"});
        cfg.wigner.time = w.contains("time") ? time_list(json::array({w["time"]}), "wigner.time", t_max)[0] : t_max;
        if (w.contains("re")) std::tie(cfg.wigner.grid.re_min, cfg.wigner.grid.re_max) = range(w["re"], "wigner.re");
        if (w.contains("im")) std::tie(cfg.wigner.grid.im_min, cfg.wigner.grid.im_max) = range(w["im"], "wigner.im");
        if (w.contains("step")) cfg.wigner.grid.step = positive(w["step"], "wigner.step");
        const double cells = (cfg.wigner.grid.re_max - cfg.wigner.grid.re_min) *
                             (cfg.wigner.grid.im_max - cfg.wigner.grid.im_min) /
                             (cfg.wigner.grid.step * cfg.wigner.grid.step);
        if (cells > 1e7) throw ValidationError("wigner.step", "grid has more than 1e7 points");
    } else {
        cfg.wigner.time = t_max;
    }
    validate(cfg.wigner.grid);
    if (j.contains("protocol")) {
        const json& p = j["protocol"];
        require_object(p, "protocol");
        reject_unknown(p, "protocol", {"sigma0", "times", "resolution"});
        if (p.contains("sigma0")) cfg.protocol.sigma0 = positive(p["sigma0"], "protocol.sigma0");
        if (p.contains("times")) cfg.protocol.times = time_list(p["times"], "protocol.times", t_max);
        if (p.contains("resolution")) {
            cfg.protocol.resolution = positive(p["resolution"], "protocol.resolution");
            if (cfg.protocol.resolution >= 1.0) throw ValidationError("protocol.resolution", "must be below 1");
        }
    }
    if (cfg.protocol.times.empty()) {
        // 50 exit times spread over (0, t_max]
        for (int i = 1; i <= 50; ++i) cfg.protocol.times.push_back(t_max * i / 50.0);
    }
    if (j.contains("oracle")) {
        const json& o = j["oracle"];
        require_object(o, "oracle");
        reject_unknown(o, "oracle", {"times", "thermal"});
        if (o.contains("times")) cfg.oracle.times = time_list(o["times"], "oracle.times", t_max);
        if (o.contains("thermal")) {
            if (!o["thermal"].is_boolean()) throw ValidationError("oracle.thermal", "expected true or false");
            cfg.oracle.thermal = o["thermal"].get<bool>();
        }
    }
    if (cfg.oracle.times.empty()) {
        for (int i = 0; i <= 4; ++i) cfg.oracle.times.push_back(t_max * i / 4.0);
    }
    return cfg;
}

json serialize(const RunConfig& cfg) {
    json bath = {{"omega", cfg.bath.omega}, {"beta", beta_to_json(cfg.bath.beta)}};
    if (cfg.bath.spectral) {
        bath["spectral"] = spectral_to_json(*cfg.bath.spectral);
    } else {
        json modes = json::array();
        for (const auto& m : cfg.bath.modes.value_or(std::vector<BathMode>{})) modes.push_back({m.frequency, m.coupling});
        bath["modes"] = modes;
    }
    json tasks = json::array();
    for (Task t : cfg.tasks) tasks.push_back(to_string(t));
    const auto& g = cfg.wigner.grid;
    return {{"bath", bath},
            {"route", to_string(cfg.route)},
            {"grid", {{"t_max", cfg.grid.t_max}, {"dt", cfg.grid.dt}}},
            {"state", state_to_json(cfg.state)},
            {"tasks", tasks},
            {"cutoff", cfg.cutoff},
            {"output", cfg.output},
            {"evolve", {{"times", cfg.evolve.times}}},
            {"wigner", {{"time", cfg.wigner.time}, {"re", {g.re_min, g.re_max}}, {"im", {g.im_min, g.im_max}}, {"step", g.step}}},
            {"protocol",
             {{"sigma0", cfg.protocol.sigma0}, {"times", cfg.protocol.times}, {"resolution", cfg.protocol.resolution}}},
            {"oracle", {{"times", cfg.oracle.times}, {"thermal", cfg.oracle.thermal}}}};
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace cavity
