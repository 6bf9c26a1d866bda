#include "cavity/run.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cavity/errors.hpp"
#include "cavity/evolution.hpp"
#include "cavity/oracle.hpp"
#include "cavity/parallel.hpp"
#include "numfmt.hpp"

namespace cavity {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Acceptance thresholds echoed by summarize().
constexpr double kOracleTraceDistance = 1e-6;
constexpr double kProtocolPhaseError = 1e-5;
constexpr double kLeakageLimit = 1e-6;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("output", "cannot write " + path.string());
    f << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json moments_json(const Moments& m) {
    return {{"mean_a", complex_json(m.mean_a)},
            {"mean_n", m.mean_n},
            {"mean_a2", complex_json(m.mean_a2)},
            {"mean_anticomm", m.mean_anticomm}};
}

double wrap_phase(double x) {
    const double two_pi = 2.0 * std::numbers::pi;
    x = std::fmod(x, two_pi);
    return x < 0.0 ? x + two_pi : x;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

// Requested times past an early-stopped trajectory are a numerical failure, not a config error.
void require_covered(const CoefficientTrajectory& traj, double t, const std::string& key) {
    const double end = traj.times.back();
    if (t <= end + 1e-9 * std::max(1.0, end)) return;
    if (traj.truncated)
        throw NumericalError(NumericalError::Kind::EtaVanishes,
                             key + ": trajectory stopped at t = " + detail::fmt(end) + " (|eta| underflow)");
    throw ValidationError(key, "time " + detail::fmt(t) + " beyond the last grid point " + detail::fmt(end));
}

struct Evolved {
    SuperoperatorParams params;
    FockDensityMatrix rho;
    double leakage;
};

Evolved evolve_at(const CoefficientTrajectory& traj, const FockDensityMatrix& rho0, double t) {
    const auto p = superop_params(traj, t);
    ApplyReport report;
    auto rho = apply(p, rho0, Ordering::Default, &report);
    if (report.leakage > kLeakageLimit)
        throw NumericalError(NumericalError::Kind::Leakage, "evolved state loses " + detail::fmt(report.leakage) +
                                                                " of its trace above the cutoff at t = " +
                                                                detail::fmt(t) + "; raise the cutoff");
    return {p, std::move(rho), report.leakage};
}

json evolve_task(const RunConfig& cfg, const CoefficientTrajectory& traj, const FockDensityMatrix& rho0) {
    json steps = json::array();
    for (std::size_t i = 0; i < cfg.evolve.times.size(); ++i) {
        const double t = cfg.evolve.times[i];
        require_covered(traj, t, "evolve.times[" + std::to_string(i) + "]");
        const auto ev = evolve_at(traj, rho0, t);
        json weights = json::array();
        for (const auto& o : natural_orbits(ev.rho)) {
            if (weights.size() == 8) break;
            weights.push_back(o.weight);
        }
        json rho;
        to_json(rho, ev.rho);
        steps.push_back({{"t", t},
                         {"Omega", ev.params.Omega},
                         {"Lambda", ev.params.Lambda},
                         {"N", ev.params.Nexc},
                         {"trace", ev.rho.trace().real()},
                         {"leakage", ev.leakage},
                         {"min_eigenvalue", ev.rho.min_eigenvalue()},
                         {"purity", ev.rho.purity()},
                         {"moments", moments_json(moments(ev.rho))},
                         {"orbit_weights", weights},
                         {"rho", rho}});
    }
    return {{"cutoff", cfg.cutoff}, {"steps", steps}};
}

json protocol_task(const RunConfig& cfg, const CoefficientTrajectory& traj, std::size_t threads) {
    const auto& pc = cfg.protocol;
    const FockDensityMatrix rho0 = assemble_coherent(pc.sigma0, cfg.cutoff);
    std::vector<FockDensityMatrix> states;
    std::vector<double> lambdas, omegas;
    for (std::size_t i = 0; i < pc.times.size(); ++i) {
        require_covered(traj, pc.times[i], "protocol.times[" + std::to_string(i) + "]");
        auto ev = evolve_at(traj, rho0, pc.times[i]);
        lambdas.push_back(ev.params.Lambda);
        omegas.push_back(ev.params.Omega);
        states.push_back(std::move(ev.rho));
    }
    // fit_omega queries by time; the times are distinct grid inputs, so look them up by index.
    auto source = [&](double t, cplx alpha) {
        const auto it = std::find(pc.times.begin(), pc.times.end(), t);
        return protocol_deltaP(states[static_cast<std::size_t>(it - pc.times.begin())], alpha, t).deltaP;
    };
    const auto est = fit_omega(pc.sigma0, pc.times, lambdas, source, pc.resolution, threads);
    json rows = json::array(), readings = json::array();
    double max_err = 0.0;
    bool all_ok = true;
    for (std::size_t i = 0; i < est.size(); ++i) {
        const auto& e = est[i];
        json row = {{"t", e.t},
                    {"status", to_string(e.status)},
                    {"Omega", wrap_phase(omegas[i])},
                    {"peak_deltaP", e.peak_deltaP},
                    {"contrast", e.contrast}};
        if (e.omega_wrapped) {
            const double err = phase_distance(*e.omega_wrapped, omegas[i]);
            max_err = std::max(max_err, err);
            row["omega_wrapped"] = *e.omega_wrapped;
            row["omega_unwrapped"] = *e.omega_unwrapped;
            row["error"] = err;
            const cplx alpha = -pc.sigma0 * std::exp(-lambdas[i]) * std::polar(1.0, -*e.omega_wrapped);
            const auto r = protocol_deltaP(states[i], alpha, e.t);
            readings.push_back({{"t", r.t}, {"alpha", complex_json(r.alpha)}, {"deltaP", r.deltaP}});
        } else {
            all_ok = false;
        }
        rows.push_back(row);
    }
    json checks = json::array();
    checks.push_back({{"name", "phase recovery"},
                      {"value", max_err},
                      {"threshold", kProtocolPhaseError},
                      {"pass", all_ok && max_err < kProtocolPhaseError}});
    return {{"sigma0", pc.sigma0},
            {"resolution", pc.resolution},
            {"estimates", rows},
            {"readings", readings},
            {"checks", checks}};
}

json oracle_task(const RunConfig& cfg, const BathSpec& bath, const CoefficientTrajectory& traj,
                 const FockDensityMatrix& rho0, std::size_t threads) {
    const bool thermal = cfg.oracle.thermal && !bath.zero_temperature();
    ManyBodyOracle oracle({bath, rho0, thermal ? BathState::Thermal : BathState::Vacuum});
    // The oracle always propagates the bath as configured; a vacuum bath at finite beta
    // needs the trajectory of the zero-temperature bath.
    const CoefficientTrajectory* ref = &traj;
    CoefficientTrajectory vac;
    if (!thermal && !bath.zero_temperature()) {
        vac = compute_coefficients(bath.with_inverse_temperature(kZeroTemperature), cfg.grid, cfg.route);
        ref = &vac;
    }
    json rows = json::array();
    double worst = 0.0, worst_norm = 0.0;
    for (std::size_t i = 0; i < cfg.oracle.times.size(); ++i) {
        const double t = cfg.oracle.times[i];
        require_covered(*ref, t, "oracle.times[" + std::to_string(i) + "]");
        const auto exact = oracle.reduce(t, threads);
        worst_norm = std::max(worst_norm, oracle.last_norm_error());
        const auto ev = evolve_at(*ref, rho0, t);
        const auto r = compare(exact, ev.rho);
        worst = std::max(worst, r.trace_distance);
        rows.push_back({{"t", t},
                        {"trace_distance", r.trace_distance},
                        {"max_entry_deviation", r.max_entry_deviation},
                        {"mean_a_deviation", r.mean_a_deviation},
                        {"mean_n_deviation", r.mean_n_deviation},
                        {"mean_a2_deviation", r.mean_a2_deviation},
                        {"mean_anticomm_deviation", r.mean_anticomm_deviation}});
    }
    json checks = json::array();
    checks.push_back({{"name", "master equation vs many-body trace distance"},
                      {"value", worst},
                      {"threshold", kOracleTraceDistance},
                      {"pass", worst < kOracleTraceDistance}});
    checks.push_back({{"name", "many-body norm conservation"},
                      {"value", worst_norm},
                      {"threshold", 1e-12},
                      {"pass", worst_norm < 1e-12}});
    return {{"bath_state", thermal ? "thermal" : "vacuum"},
            {"configurations", oracle.configuration_count()},
            {"dimension", oracle.total_dimension()},
            {"comparisons", rows},
            {"checks", checks}};
}

}  // namespace

void execute(const RunConfig& cfg, const std::string& dir, bool verbose, std::ostream& log) {
    const fs::path out(dir);
    fs::create_directories(out);
    const BathSpec bath = cfg.bath.build();
    const std::string config_text = serialize(cfg).dump();
    const std::string bath_hash = fnv1a_hex(serialize(cfg)["bath"].dump());
    const FockDensityMatrix rho0 = cfg.state.build(cfg.cutoff);
    check_leakage(rho0, kLeakageLimit);
    const std::size_t threads = default_threads();

    auto note = [&](const std::string& s) {
        if (verbose) log << "[cavity] " << s << '\n';
    };
    note("route " + std::string(to_string(cfg.route)) + ", " + std::to_string(cfg.grid.size()) + " grid points");
    const CoefficientTrajectory traj = compute_coefficients(bath, cfg.grid, cfg.route);
    for (const auto& w : traj.warnings) note("warning: " + w);

    json artifacts = json::array();
    for (Task task : cfg.tasks) {
        note(std::string("task ") + to_string(task));
        switch (task) {
            case Task::Coefficients: {
                std::ostringstream s;
                write_csv(traj, s, bath_hash);
                write_text(out / "coefficients.csv", s.str());
                artifacts.push_back("coefficients.csv");
                break;
            }
            case Task::Evolve:
                write_json(out / "evolve.json", evolve_task(cfg, traj, rho0));
                artifacts.push_back("evolve.json");
                break;
            case Task::WignerScan: {
                require_covered(traj, cfg.wigner.time, "wigner.time");
                const auto ev = evolve_at(traj, rho0, cfg.wigner.time);
                const auto values = wigner_scan(ev.rho, cfg.wigner.grid, threads);
                std::ostringstream s;
                write_scan_csv(cfg.wigner.grid, values, s);
                write_text(out / "wigner.csv", s.str());
                double leak = 0.0;
                const auto& g = cfg.wigner.grid;
                for (cplx corner : {cplx(g.re_min, g.im_min), cplx(g.re_min, g.im_max), cplx(g.re_max, g.im_min),
                                    cplx(g.re_max, g.im_max)})
                    leak = std::max(leak, displaced_leakage(ev.rho, corner));
                write_json(out / "wigner.json", {{"t", cfg.wigner.time},
                                                 {"re_count", g.re_count()},
                                                 {"im_count", g.im_count()},
                                                 {"max_displaced_leakage", leak},
                                                 {"leakage_ok", leak <= kLeakageLimit}});
                if (leak > kLeakageLimit) note("warning: displaced-state leakage " + detail::fmt(leak) + " at grid corners");
                artifacts.push_back("wigner.csv");
                artifacts.push_back("wigner.json");
                break;
            }
            case Task::Protocol:
                write_json(out / "protocol.json", protocol_task(cfg, traj, threads));
                artifacts.push_back("protocol.json");
                break;
            case Task::OracleCheck:
                write_json(out / "oracle.json", oracle_task(cfg, bath, traj, rho0, threads));
                artifacts.push_back("oracle.json");
                break;
        }
    }
    json tasks = json::array();
    for (Task t : cfg.tasks) tasks.push_back(to_string(t));
    write_json(out / "manifest.json", {{"tool", "cavity"},
                                       {"version", kToolVersion},
                                       {"config_hash", fnv1a_hex(config_text)},
                                       {"bath_hash", bath_hash},
                                       {"config", serialize(cfg)},
                                       {"tasks", tasks},
                                       {"artifacts", artifacts},
                                       {"wall_clock", utc_now()}});
}

int run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
    std::optional<std::string> dir = opts.output;
    auto fail = [&](int code, json body) {
        body["exit_code"] = code;
        err << "error: " << body.value("message", "") << '\n';
        if (dir) {
            try {
                fs::create_directories(*dir);
                write_json(fs::path(*dir) / "error.json", body);
            } catch (const std::exception& e) {
                err << "error: cannot write error.json: " << e.what() << '\n';
            }
        } else {
            out << body.dump() << '\n';
        }
        return code;
    };
    if (opts.threads > 0) set_default_threads(opts.threads);
    try {
        std::ifstream f(opts.config_path);
        if (!f) throw ValidationError("config", "cannot open " + opts.config_path);
        json doc;
        try {
            doc = json::parse(f);
        } catch (const json::parse_error& e) {
            throw ValidationError("<document>", std::string("malformed JSON: ") + e.what());
        }
        if (!dir && doc.is_object() && doc.contains("output") && doc["output"].is_string())
            dir = doc["output"].get<std::string>();
        RunConfig cfg = parse_config(doc);
        if (opts.output) cfg.output = *opts.output;
        dir = cfg.output;
        execute(cfg, cfg.output, opts.verbose, err);
        if (opts.verbose) err << "[cavity] artifacts in " << cfg.output << '\n';
        return kExitOk;
    } catch (const ValidationError& e) {
        return fail(kExitValidation, {{"error", "validation"}, {"key", e.key()}, {"message", e.what()}});
    } catch (const NumericalError& e) {
        return fail(kExitNumerical, {{"error", "numerical"}, {"kind", to_string(e.kind())}, {"message", e.what()}});
    } catch (const fs::filesystem_error& e) {
        return fail(kExitValidation, {{"error", "validation"}, {"key", "output"}, {"message", e.what()}});
    }
}

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const fs::path& path) {
    std::ifstream f(path);
    CsvTable t;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream s(line);
        std::string cell;
        if (t.header.empty()) {
            while (std::getline(s, cell, ',')) t.header.push_back(cell);
            continue;
        }
        std::vector<double> row;
        while (std::getline(s, cell, ',')) row.push_back(std::stod(cell));
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string fixed(double v, int prec = 6) {
    std::ostringstream s;
    s << std::setprecision(prec) << std::fixed << v;
    std::string r = s.str();
    if (r.find_first_not_of("-0.") == std::string::npos && r.front() == '-') r.erase(0, 1);
    return r;
}

void print_checks(const json& doc, const std::string& label, std::ostream& out) {
    for (const auto& c : doc.value("checks", json::array())) {
        out << (c.value("pass", false) ? "PASS" : "FAIL") << "  " << label << ": " << c.value("name", "")
            << "  value=" << std::setprecision(3) << std::scientific << c.value("value", 0.0)
            << "  threshold=" << c.value("threshold", 0.0) << std::defaultfloat << '\n';
    }
}

}  // namespace

int summarize(const std::string& dir, std::ostream& out, std::ostream& err) {
    const fs::path root(dir);
    const fs::path manifest_path = root / "manifest.json";
    if (!fs::exists(manifest_path)) {
        err << "error: no manifest.json in " << dir << '\n';
        return kExitValidation;
    }
    json manifest;
    try {
        std::ifstream f(manifest_path);
        manifest = json::parse(f);
    } catch (const json::exception& e) {
        err << "error: unreadable manifest: " << e.what() << '\n';
        return kExitValidation;
    }
    out << "cavity " << manifest.value("version", "?") << "  config " << manifest.value("config_hash", "?") << '\n';

    bool any = false;
    if (fs::exists(root / "coefficients.csv")) {
        any = true;
        const auto table = read_csv(root / "coefficients.csv");
        auto col = [&](const std::string& name) {
            const auto it = std::find(table.header.begin(), table.header.end(), name);
            return static_cast<std::size_t>(it - table.header.begin());
        };
        const std::size_t ct = col("t"), cO = col("Omega"), cL = col("Lambda"), cN = col("N");
        out << "coefficients (" << table.rows.size() << " rows)\n";
        out << std::setw(12) << "t" << std::setw(16) << "Omega" << std::setw(16) << "Lambda" << std::setw(16) << "N"
            << '\n';
        if (!table.rows.empty()) {
            const std::size_t last = table.rows.size() - 1;
            std::vector<std::size_t> picks;
            for (int q = 0; q <= 4; ++q) {
                const std::size_t i = last * static_cast<std::size_t>(q) / 4;
                if (picks.empty() || picks.back() != i) picks.push_back(i);
            }
            for (std::size_t i : picks) {
                const auto& r = table.rows[i];
                out << std::setw(12) << fixed(r[ct], 4) << std::setw(16) << fixed(r[cO]) << std::setw(16)
                    << fixed(r[cL]) << std::setw(16) << fixed(r[cN]) << '\n';
            }
            const auto& r = table.rows[last];
            out << "final t=" << fixed(r[ct], 4) << "  Lambda=" << fixed(r[cL], 10) << "  Omega=" << fixed(r[cO], 10)
                << "  N=" << fixed(r[cN], 10) << '\n';
        }
    }
    if (fs::exists(root / "evolve.json")) {
        any = true;
        std::ifstream f(root / "evolve.json");
        const json doc = json::parse(f);
        out << "evolve\n";
        for (const auto& s : doc["steps"])
            out << "  t=" << fixed(s["t"].get<double>(), 4) << "  trace=" << fixed(s["trace"].get<double>(), 10)
                << "  <n>=" << fixed(s["moments"]["mean_n"].get<double>()) << "  purity=" << fixed(s["purity"].get<double>())
                << '\n';
    }
    if (fs::exists(root / "wigner.json")) {
        std::ifstream f(root / "wigner.json");
        const json doc = json::parse(f);
        out << "wigner scan " << doc["re_count"] << " x " << doc["im_count"] << " at t=" << doc["t"]
            << (doc.value("leakage_ok", true) ? "" : "  (displaced-state leakage above 1e-6)") << '\n';
    }
    if (fs::exists(root / "protocol.json")) {
        any = true;
        std::ifstream f(root / "protocol.json");
        print_checks(json::parse(f), "protocol", out);
    }
    if (fs::exists(root / "oracle.json")) {
        any = true;
        std::ifstream f(root / "oracle.json");
        print_checks(json::parse(f), "oracle", out);
    }
    if (!any) out << "no trajectories: the artifact directory holds no task output\n";
    return kExitOk;
}

}  // namespace cavity
