#pragma once

// Experiment configuration: a flat sectioned key-value text format.
//
//   # comment
//   [moduli.eta]
//   family = LogReciprocal
//   param  = 1
//
// A key `k` under section `[s]` is addressed as "s.k". Values keep the line
// they came from so validation errors can point at it.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hypolab/coefficients.hpp"
#include "hypolab/energy_lab.hpp"
#include "hypolab/errors.hpp"
#include "hypolab/hyperbolic_symbol.hpp"
#include "hypolab/moduli.hpp"
#include "hypolab/symbol_classes.hpp"
#include "hypolab/zygmund.hpp"

namespace hypolab {

struct ConfigEntry {
    std::string value;
    int line = 0;
};

class KeyValueFile {
public:
    static KeyValueFile parse(std::istream& is) {
        KeyValueFile f;
        std::string raw, section;
        int line = 0;
        while (std::getline(is, raw)) {
            ++line;
            std::string s = trim(strip_comment(raw));
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']') throw ConfigError("unterminated section header", line);
                section = trim(s.substr(1, s.size() - 2));
                if (section.empty()) throw ConfigError("empty section name", line);
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("expected key = value", line);
            const std::string key = trim(s.substr(0, eq));
            if (key.empty()) throw ConfigError("missing key", line);
            const std::string full = section.empty() ? key : section + "." + key;
            if (f.entries_.count(full)) throw ConfigError("duplicate key " + full, line);
            f.entries_[full] = {trim(s.substr(eq + 1)), line};
        }
        return f;
    }

    static KeyValueFile parse_string(const std::string& text) {
        std::istringstream is(text);
        return parse(is);
    }

    static KeyValueFile load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw ConfigError("cannot open config file " + path);
        return parse(is);
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    int line_of(const std::string& key) const { return has(key) ? entries_.at(key).line : 0; }

    std::optional<std::string> get(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        used_.insert(key);
        return it->second.value;
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto v = get(key);
        return v ? *v : fallback;
    }

    double get_double(const std::string& key, double fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        return to_double(key, *v);
    }

    int get_int(const std::string& key, int fallback) const {
        const double d = get_double(key, fallback);
        if (d != std::floor(d)) throw ConfigError(key + " must be an integer", line_of(key));
        return static_cast<int>(d);
    }

    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        std::vector<double> out;
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
        if (out.empty()) throw ConfigError(key + " is an empty list", line_of(key));
        return out;
    }

    /// Keys present in the file but never read.
    std::vector<std::string> unused_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }

    /// Distinct values of the path component after `prefix.` (e.g. coefficient indices).
    std::set<std::string> children(const std::string& prefix) const {
        std::set<std::string> out;
        const std::string p = prefix + ".";
        for (const auto& [k, v] : entries_)
            if (k.rfind(p, 0) == 0) {
                const std::string rest = k.substr(p.size());
                out.insert(rest.substr(0, rest.find('.')));
            }
        return out;
    }

private:
    std::map<std::string, ConfigEntry> entries_;
    mutable std::set<std::string> used_;

    static std::string strip_comment(const std::string& s) {
        const auto h = s.find('#');
        return h == std::string::npos ? s : s.substr(0, h);
    }
    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }
    double to_double(const std::string& key, const std::string& v) const {
        if (v == "inf") return INFINITY;
        std::size_t pos = 0;
        double d = 0;
        try {
            d = std::stod(v, &pos);
        } catch (const std::exception&) {
            throw ConfigError(key + ": '" + v + "' is not a number", line_of(key));
        }
        if (pos != v.size()) throw ConfigError(key + ": '" + v + "' is not a number", line_of(key));
        return d;
    }
};

struct GridSettings {
    double xi_min = 0;  // 0: use the zone floor M
    double xi_max = 0;  // 0: 1000 xi_min
    int points_per_decade = 8;
    int t_samples = 64;
    double t_min = 1e-3;
};

struct FitSettings {
    double eps = 0.01;
    std::optional<double> force_m0;
    std::vector<double> gamma_sweep = {0.0, 0.5, 1.0, 1.5};
};

/// Catalog parameters for the tables command.
struct TableSettings {
    double alpha = 0.5;  // Hoelder modulus r^alpha
    double beta = 0.5;   // rho(r) = r^beta
};

struct ExperimentConfig {
    AuxiliaryFunction eta = AuxiliaryFunction::log_reciprocal(1.0);
    AuxiliaryFunction rho = AuxiliaryFunction::power_law(1.0, AuxRole::Rho);
    ZoneParams zone;
    HyperbolicOperatorSpec op = HyperbolicOperatorSpec::wave(CoefficientSpec::log_power(2.0, 0.5, 0.0));
    GridSettings grids;
    FitSettings fits;
    TableSettings tables;
    IntegratorSpec integrator;
    InitialData initial = InitialData::FirstBasis;
    std::string output_dir = "out";
    std::uint64_t seed = 1;

    std::vector<double> xi_grid() const {
        const double lo = grids.xi_min > 0 ? grids.xi_min : zone.M;
        const double hi = grids.xi_max > 0 ? grids.xi_max : 1000 * lo;
        return log_grid(lo, hi, grids.points_per_decade);
    }

    /// Log-spaced times on [t_min, T].
    std::vector<double> t_grid() const { return log_grid_n(grids.t_min, zone.T, grids.t_samples); }

    FrequencyExperiment experiment() const {
        FrequencyExperiment ex;
        ex.op = op;
        ex.xi_grid = xi_grid();
        ex.T = zone.T;
        ex.integrator = integrator;
        ex.zone = zone;
        ex.eta = eta;
        ex.rho = rho;
        ex.initial = initial;
        ex.seed = seed;
        return ex;
    }

    ThetaSpec theta_spec() const { return {1.0, eta, rho, zone}; }
};

namespace detail {

inline AuxiliaryFunction parse_aux(const KeyValueFile& f, const std::string& sec, AuxRole default_role,
                                   const AuxiliaryFunction& fallback) {
    if (!f.has(sec + ".family") && !f.has(sec + ".param")) return fallback;
    const std::string fam = f.get_string(sec + ".family", to_string(fallback.family));
    const double param = f.get_double(sec + ".param", fallback.param);
    const std::string role_s = f.get_string(sec + ".role", default_role == AuxRole::Eta ? "Eta" : "Rho");
    AuxRole role;
    if (role_s == "Eta")
        role = AuxRole::Eta;
    else if (role_s == "Rho")
        role = AuxRole::Rho;
    else
        throw ConfigError(sec + ".role must be Eta or Rho", f.line_of(sec + ".role"));
    const double r0 = f.get_double(sec + ".r0", 0.0);
    const int line = f.line_of(sec + ".family") ? f.line_of(sec + ".family") : f.line_of(sec + ".param");
    try {
        if (fam == "LogReciprocal") return AuxiliaryFunction::log_reciprocal(param, role, r0 > 0 ? r0 : 0.5);
        if (fam == "PowerLaw") return AuxiliaryFunction::power_law(param, role, r0 > 0 ? r0 : 1.0);
        if (fam == "IteratedLogReciprocal") {
            if (param != std::floor(param)) throw DomainError("depth must be an integer");
            return AuxiliaryFunction::iterated_log(static_cast<int>(param), role, r0);
        }
    } catch (const DomainError& e) {
        throw ConfigError(sec + ": " + e.what(), line);
    }
    throw ConfigError(sec + ".family: unknown family '" + fam + "'", f.line_of(sec + ".family"));
}

inline CoefficientSpec parse_coefficient(const KeyValueFile& f, const std::string& sec) {
    CoefficientSpec c;
    const std::string prof = f.get_string(sec + ".profile", "constant");
    if (prof == "constant")
        c.profile = TimeProfile::Constant;
    else if (prof == "log_power")
        c.profile = TimeProfile::LogPowerOscillation;
    else if (prof == "holder")
        c.profile = TimeProfile::HolderRough;
    else
        throw ConfigError(sec + ".profile: unknown profile '" + prof + "'", f.line_of(sec + ".profile"));
    c.base = f.get_double(sec + ".base", 2.0);
    c.delta = f.get_double(sec + ".delta", 0.0);
    c.gamma_osc = f.get_double(sec + ".gamma_osc", 0.0);
    c.alpha = f.get_double(sec + ".alpha", 0.5);
    c.lacunary_depth = f.get_int(sec + ".depth", 18);
    c.t_floor = f.get_double(sec + ".t_floor", 1e-6);
    if (f.has(sec + ".spatial.family")) {
        SpatialProfile sp;
        const std::string fam = f.get_string(sec + ".spatial.family", "zero");
        if (fam == "zero")
            sp.family = SpatialFamily::Zero;
        else if (fam == "lacunary")
            sp.family = SpatialFamily::Lacunary;
        else if (fam == "smooth")
            sp.family = SpatialFamily::Smooth;
        else
            throw ConfigError(sec + ".spatial.family: unknown family '" + fam + "'",
                              f.line_of(sec + ".spatial.family"));
        sp.s = f.get_double(sec + ".spatial.s", 1.0);
        sp.amplitude = f.get_double(sec + ".spatial.amplitude", 0.25);
        c.spatial = sp;
    }
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw ConfigError(sec + ": " + e.what(), f.line_of(sec + ".profile"));
    }
    return c;
}

}  // namespace detail

/// Builds and validates a configuration. Unknown keys are rejected so typos
/// cannot silently fall back to defaults.
inline ExperimentConfig parse_config(const KeyValueFile& f) {
    ExperimentConfig cfg;
    cfg.eta = detail::parse_aux(f, "moduli.eta", AuxRole::Eta, cfg.eta);
    cfg.rho = detail::parse_aux(f, "moduli.rho", AuxRole::Rho, cfg.rho);
    if (cfg.eta.role != AuxRole::Eta) throw ConfigError("moduli.eta must have role Eta", f.line_of("moduli.eta.role"));
    if (cfg.rho.role != AuxRole::Rho) throw ConfigError("moduli.rho must have role Rho", f.line_of("moduli.rho.role"));

    cfg.zone.N = f.get_double("zone.N", 2.0);
    cfg.zone.T = f.get_double("zone.T", 1.0);
    const std::string M = f.get_string("zone.M", "auto");
    if (M != "auto") cfg.zone.M = f.get_double("zone.M", 0.0);
    try {
        cfg.zone = resolve_zone(cfg.eta, cfg.zone);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("zone: ") + e.what(), f.line_of("zone.M") ? f.line_of("zone.M") : f.line_of("zone.N"));
    }
    if (cfg.zone.T > range_end(cfg.eta))
        throw ConfigError("zone.T exceeds the range of eta", f.line_of("zone.T"));
    if (inverse(cfg.eta, cfg.zone.T) > cfg.rho.r0 * (1 + 1e-12))
        throw ConfigError("zone.T too large: eta^-1(T) lies outside the domain of rho", f.line_of("zone.T"));

    const int m = f.get_int("operator.m", 2);
    if (m < 1 || m > kMaxOrder) throw ConfigError("operator.m must lie in 1.." + std::to_string(kMaxOrder), f.line_of("operator.m"));
    if (!f.children("operator.coeff").empty() || f.has("operator.m")) {
        cfg.op = HyperbolicOperatorSpec{};
        cfg.op.m = m;
        for (int j = 0; j < m; ++j) cfg.op.coeffs.push_back(detail::parse_coefficient(f, "operator.coeff." + std::to_string(j)));
        for (const auto& child : f.children("operator.coeff")) {
            const bool ok = !child.empty() && std::all_of(child.begin(), child.end(), ::isdigit) && std::stoi(child) < m;
            if (!ok) throw ConfigError("operator.coeff." + child + " does not match operator.m = " + std::to_string(m),
                                       f.line_of("operator.coeff." + child + ".profile"));
        }
    }
    cfg.op.delta_sep = f.get_double("operator.delta_sep", 1e-6);
    cfg.op.mollifier.nodes = f.get_int("operator.mollifier_nodes", 256);
    cfg.op.mollifier.horizon = cfg.zone.T;
    try {
        cfg.op.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("operator: ") + e.what(), f.line_of("operator.m"));
    }

    cfg.grids.xi_min = f.get_double("grids.xi_min", 0.0);
    cfg.grids.xi_max = f.get_double("grids.xi_max", 0.0);
    cfg.grids.points_per_decade = f.get_int("grids.points_per_decade", 8);
    cfg.grids.t_samples = f.get_int("grids.t_samples", 64);
    cfg.grids.t_min = f.get_double("grids.t_min", 1e-3);
    if (cfg.grids.xi_min > 0 && cfg.grids.xi_min < cfg.zone.M)
        throw ConfigError("grids.xi_min lies below the frequency floor M = " + std::to_string(cfg.zone.M),
                          f.line_of("grids.xi_min"));
    const double lo = cfg.grids.xi_min > 0 ? cfg.grids.xi_min : cfg.zone.M;
    const double hi = cfg.grids.xi_max > 0 ? cfg.grids.xi_max : 1000 * lo;
    if (!(hi >= 100 * lo)) throw ConfigError("xi grid must span at least two decades", f.line_of("grids.xi_max"));
    if (cfg.grids.points_per_decade < 4)
        throw ConfigError("grids.points_per_decade must be >= 4", f.line_of("grids.points_per_decade"));
    if (cfg.grids.t_samples < 2) throw ConfigError("grids.t_samples must be >= 2", f.line_of("grids.t_samples"));
    if (!(cfg.grids.t_min > 0 && cfg.grids.t_min < cfg.zone.T))
        throw ConfigError("grids.t_min must lie in (0, T)", f.line_of("grids.t_min"));

    cfg.fits.eps = f.get_double("fits.eps", 0.01);
    if (!(cfg.fits.eps > 0)) throw ConfigError("fits.eps must be positive", f.line_of("fits.eps"));
    if (f.has("fits.force_m0")) {
        const double v = f.get_double("fits.force_m0", 1.0);
        if (!(v > 0 && v <= 1)) throw ConfigError("fits.force_m0 must lie in (0, 1]", f.line_of("fits.force_m0"));
        cfg.fits.force_m0 = v;
    }
    cfg.fits.gamma_sweep = f.get_list("fits.gamma_sweep", cfg.fits.gamma_sweep);
    for (double g : cfg.fits.gamma_sweep)
        if (!(g >= 0)) throw ConfigError("fits.gamma_sweep entries must be >= 0", f.line_of("fits.gamma_sweep"));

    cfg.tables.alpha = f.get_double("tables.alpha", cfg.tables.alpha);
    cfg.tables.beta = f.get_double("tables.beta", cfg.tables.beta);
    if (!(cfg.tables.alpha > 0 && cfg.tables.alpha < 1))
        throw ConfigError("tables.alpha must lie in (0, 1)", f.line_of("tables.alpha"));
    if (!(cfg.tables.beta > 0 && cfg.tables.beta < 1))
        throw ConfigError("tables.beta must lie in (0, 1)", f.line_of("tables.beta"));

    cfg.integrator.c_h = f.get_double("integrator.c_h", cfg.integrator.c_h);
    cfg.integrator.samples_per_period = f.get_double("integrator.samples_per_period", cfg.integrator.samples_per_period);
    if (!(cfg.integrator.c_h > 0 && cfg.integrator.c_h <= 1))
        throw ConfigError("integrator.c_h must lie in (0, 1]", f.line_of("integrator.c_h"));
    if (!(cfg.integrator.samples_per_period > 0))
        throw ConfigError("integrator.samples_per_period must be positive", f.line_of("integrator.samples_per_period"));
    const std::string init = f.get_string("integrator.initial", "first_basis");
    if (init == "first_basis")
        cfg.initial = InitialData::FirstBasis;
    else if (init == "random")
        cfg.initial = InitialData::Random;
    else if (init == "worst_case")
        cfg.initial = InitialData::WorstCase;
    else
        throw ConfigError("integrator.initial must be first_basis, random or worst_case",
                          f.line_of("integrator.initial"));

    const double seed = f.get_double("integrator.seed", 1.0);
    if (!(seed >= 0 && seed == std::floor(seed) && seed < 9.007199254740992e15))
        throw ConfigError("integrator.seed must be a nonnegative integer", f.line_of("integrator.seed"));
    cfg.seed = static_cast<std::uint64_t>(seed);

    cfg.output_dir = f.get_string("output.dir", cfg.output_dir);

    const auto unused = f.unused_keys();
    if (!unused.empty()) throw ConfigError("unknown key " + unused.front(), f.line_of(unused.front()));
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) { return parse_config(KeyValueFile::load(path)); }

}  // namespace hypolab
