#pragma once

// Subcommand implementations behind the hypolab executable. Each command
// takes a validated configuration and writes plain-text outputs into the
// output directory; nothing here depends on argument parsing.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hypolab/config.hpp"

namespace hypolab::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kConfigFailure = 2, kVerificationFailure = 3 };

struct RunOptions {
    std::optional<std::string> out_dir;  // overrides output.dir
    int jobs = 1;
    std::optional<std::uint64_t> seed;   // overrides integrator.seed
    std::optional<double> force_m0;      // overrides fits.force_m0
    std::ostream* log = &std::cout;
};

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

inline std::filesystem::path output_dir(const ExperimentConfig& cfg, const RunOptions& opt) {
    std::filesystem::path p = opt.out_dir ? *opt.out_dir : cfg.output_dir;
    std::filesystem::create_directories(p);
    return p;
}

inline void write_csv(const std::filesystem::path& path, const std::string& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << header << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << '\n';
    }
}

/// Config with the command-line overrides applied.
inline ExperimentConfig effective_config(ExperimentConfig cfg, const RunOptions& opt) {
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.force_m0) {
        if (!(*opt.force_m0 > 0 && *opt.force_m0 <= 1)) throw ConfigError("--force-m0 must lie in (0, 1]");
        cfg.fits.force_m0 = *opt.force_m0;
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// tables

struct TableRow {
    std::string family;
    std::string param;
    std::optional<double> closed_form;  // nullopt: excluded by the admissibility assumptions
    double fitted = 0;
};

inline std::vector<std::string> render(const TableRow& r) {
    if (!r.closed_form) return {r.family, r.param, "excluded", "excluded", ""};
    const double c = *r.closed_form;
    // A closed-form target of 0 has no relative scale; the absolute error is reported.
    const double err = c != 0 ? std::abs(r.fitted - c) / std::abs(c) : std::abs(r.fitted - c);
    return {r.family, r.param, fmt(c), fmt(r.fitted), fmt(err)};
}

namespace detail {

inline std::string name(const AuxiliaryFunction& f) {
    std::ostringstream os;
    os << to_string(f.family) << '(' << std::setprecision(6) << f.param << ')';
    return os.str();
}

/// How a t-profile is summarized by one number: the power p in t^p, or the
/// rate c in t^-k exp(c / t).
struct Shape {
    bool exponential = false;
    int t_power = 0;  // k, exponential shapes only
};

inline double fit_shape(const std::function<double(double)>& g, const std::vector<double>& ts, Shape shape) {
    std::vector<double> x, y;
    for (double t : ts) {
        const double v = g(t);
        if (shape.exponential) {
            x.push_back(1.0 / t);
            y.push_back(std::log(v) + shape.t_power * std::log(t));
        } else {
            x.push_back(std::log(t));
            y.push_back(std::log(v));
        }
    }
    return linear_fit(x, y).slope;
}

/// -d/dt (1 / rho(eta^-1(t))) by central differences on the bisection inverse.
inline double numeric_local_rate(const AuxiliaryFunction& eta, const AuxiliaryFunction& rho, double t) {
    auto g = [&](double u) { return 1.0 / eval(rho, inverse_bisect(eta, u)); };
    return -central_derivative(g, t, 1e-4 * t);
}

}  // namespace detail

struct TablesResult {
    std::vector<TableRow> local, local_rho, weights, summary;
};

/// Rebuilds the four catalog tables with fitted numbers next to closed forms.
inline TablesResult compute_tables(const ExperimentConfig& cfg, int jobs = 1) {
    const double a = cfg.tables.alpha, b = cfg.tables.beta;
    const auto loglip = AuxiliaryFunction::log_reciprocal(1.0);
    const auto holder = AuxiliaryFunction::power_law(1 - a);
    const auto identity = AuxiliaryFunction::power_law(1.0, AuxRole::Rho);
    const std::string pa = "alpha=" + fmt(a);
    TablesResult out;

    // sqrt(-d/dt 1/eta^-1(t)).
    {
        const auto lipschitz = AuxiliaryFunction::power_law(1.0, AuxRole::Eta);
        TableRow row{"Lipschitz", "eta=" + detail::name(lipschitz), std::nullopt, 0};
        if (admissibility_check(lipschitz, default_admissibility_grid(lipschitz)).pass())
            throw std::logic_error("Lipschitz eta unexpectedly admissible");
        out.local.push_back(row);
        auto sq = [&](const AuxiliaryFunction& eta) {
            return [&eta, &identity](double t) { return std::sqrt(detail::numeric_local_rate(eta, identity, t)); };
        };
        out.local.push_back({"LogLipschitz", "exp_rate", 0.5,
                             detail::fit_shape(sq(loglip), log_grid_n(0.05, 0.5, 32), {true, 1})});
        out.local.push_back({"Hoelder", pa + ";t_exponent", -(2 - a) / (2 * (1 - a)),
                             detail::fit_shape(sq(holder), log_grid_n(0.01, 0.5, 32), {false, 0})});
    }

    // -d/dt 1/rho(eta^-1(t)) over the rho x eta grid.
    {
        const std::vector<AuxiliaryFunction> rhos = {AuxiliaryFunction::log_reciprocal(1.0, AuxRole::Rho),
                                                     AuxiliaryFunction::power_law(b, AuxRole::Rho), identity};
        for (std::size_t k = 0; k < rhos.size(); ++k) {
            const auto& rho = rhos[k];
            auto rate = [&](const AuxiliaryFunction& eta) {
                return [&eta, &rho](double t) { return detail::numeric_local_rate(eta, rho, t); };
            };
            const std::string fam = "rho=" + detail::name(rho);
            if (k == 0)
                out.local_rho.push_back({fam + ";eta=LogLipschitz", "t_exponent", -2.0,
                                         detail::fit_shape(rate(loglip), log_grid_n(0.05, 0.5, 32), {false, 0})});
            else
                out.local_rho.push_back({fam + ";eta=LogLipschitz", "exp_rate", k == 1 ? b : 1.0,
                                         detail::fit_shape(rate(loglip), log_grid_n(0.05, 0.5, 32), {true, 2})});
            const double target = k == 0 ? -1.0 : k == 1 ? -(1 - a + b) / (1 - a) : -(2 - a) / (1 - a);
            out.local_rho.push_back({fam + ";eta=Hoelder", pa + ";t_exponent", target,
                                     detail::fit_shape(rate(holder), log_grid_n(0.01, 0.5, 32), {false, 0})});
        }
    }

    // Fitted symbol orders of the three weights. The log-Lipschitz weights
    // lie in every S^eps, so their target order is 0.
    {
        auto order = [&](WeightKind kind, const AuxiliaryFunction& eta, const AuxiliaryFunction& rho) {
            // rho is only defined on (0, r0], which caps the time sweep at eta(r0).
            ZoneParams zp{cfg.zone.N, 0, std::min(cfg.zone.T, eval(eta, std::min(rho.r0, eta.r0)))};
            zp = resolve_zone(eta, zp);
            const auto grid = log_grid(zp.M, 1000 * zp.M, cfg.grids.points_per_decade);
            return estimate_order({kind, eta, rho, zp}, grid, zp.T, jobs).m0_hat;
        };
        const std::vector<std::pair<AuxiliaryFunction, std::string>> etas = {{loglip, "LogLipschitz"},
                                                                             {holder, "Hoelder"}};
        for (const auto& [eta, label] : etas) {
            const double target = eta.family == AuxFamily::PowerLaw ? 1 - a : 0.0;
            const std::string param = eta.family == AuxFamily::PowerLaw ? pa : "-";
            out.weights.push_back({"W1;eta=" + label, param, target, order(WeightKind::W1, eta, identity)});
            out.weights.push_back({"W2;eta=" + label, param, target, order(WeightKind::W2, eta, identity)});
            for (const auto& rho : {AuxiliaryFunction::log_reciprocal(1.0, AuxRole::Rho),
                                    AuxiliaryFunction::power_law(b, AuxRole::Rho), identity})
                out.weights.push_back({"W3;eta=" + label + ";rho=" + detail::name(rho), param, target,
                                       order(WeightKind::W3, eta, rho)});
        }
    }

    // Minimal Zygmund index s.
    {
        const double eps = cfg.fits.eps;
        auto s_of = [&](const AuxiliaryFunction& eta) {
            ZoneParams zp{cfg.zone.N, 0, cfg.zone.T};
            zp = resolve_zone(eta, zp);
            const auto grid = log_grid(zp.M, 1000 * zp.M, cfg.grids.points_per_decade);
            return classify(eta, identity, zp, grid, eps, jobs).s_min;
        };
        out.summary.push_back({"LogLipschitz", "eps=" + fmt(eps), 1 + eps, s_of(loglip)});
        std::vector<double> alphas = {0.2, 1.0 / 3.0, 0.5};
        if (std::none_of(alphas.begin(), alphas.end(), [&](double v) { return std::abs(v - a) < 1e-12; }))
            alphas.push_back(a);
        for (double al : alphas)
            out.summary.push_back({"Hoelder", "alpha=" + fmt(al) + ";eps=" + fmt(eps),
                                   std::max(1 + eps, 2 * (1 - al) / (1 + al)),
                                   s_of(AuxiliaryFunction::power_law(1 - al))});
        // (log 1/r)^-alpha moduli need the m0 = 1 fallback.
        out.summary.push_back(
            {"LogPowerModulus", "forced_m0=1;eps=" + fmt(eps), 2.0, classification_from_order(1.0, eps).s_min});
    }
    return out;
}

inline int cmd_tables(const ExperimentConfig& cfg, const RunOptions& opt) {
    const auto dir = output_dir(cfg, opt);
    const auto t = compute_tables(cfg, opt.jobs);
    const std::string header = "family,param,closed_form,fitted,rel_err";
    const std::vector<std::pair<std::string, const std::vector<TableRow>*>> files = {
        {"table_local.csv", &t.local},
        {"table_local_rho.csv", &t.local_rho},
        {"table_weights.csv", &t.weights},
        {"table_summary.csv", &t.summary}};
    for (const auto& [name, rows] : files) {
        std::vector<std::vector<std::string>> cells;
        for (const auto& r : *rows) cells.push_back(render(r));
        write_csv(dir / name, header, cells);
        *opt.log << "wrote " << (dir / name).string() << '\n';
    }
    return kSuccess;
}

// ---------------------------------------------------------------------------
// classify

inline ClassificationReport compute_classification(const ExperimentConfig& cfg, int jobs = 1) {
    if (cfg.fits.force_m0) return classification_from_order(*cfg.fits.force_m0, cfg.fits.eps);
    // Orders are fitted over three decades above the frequency floor.
    const auto grid = log_grid(cfg.zone.M, 1000 * cfg.zone.M, cfg.grids.points_per_decade);
    return classify(cfg.eta, cfg.rho, cfg.zone, grid, cfg.fits.eps, jobs);
}

inline int cmd_classify(const ExperimentConfig& cfg, const RunOptions& opt) {
    const auto dir = output_dir(cfg, opt);
    const std::string json = compute_classification(cfg, opt.jobs).to_json();
    std::ofstream(dir / "classify.json") << json << '\n';
    *opt.log << json << '\n';
    return kSuccess;
}

// ---------------------------------------------------------------------------
// energy / loss

/// Traces are written on the shared base grid of kBaseSamples + 1 times.
inline int cmd_energy(const ExperimentConfig& cfg, const RunOptions& opt) {
    const auto dir = output_dir(cfg, opt);
    const auto traces = run_experiment(cfg.experiment(), opt.jobs);
    std::vector<std::vector<std::string>> rows;
    for (const auto& tr : traces) {
        const std::size_t stride = (tr.times.size() - 1) / kBaseSamples;
        for (std::size_t i = 0; i < tr.times.size(); i += stride)
            rows.push_back({fmt(tr.xi), fmt(tr.times[i]), fmt(tr.norms[i])});
    }
    write_csv(dir / "traces.csv", "xi,t,norm", rows);
    *opt.log << "wrote " << (dir / "traces.csv").string() << " (" << traces.size() << " frequencies)\n";
    return kSuccess;
}

struct LossRow {
    double gamma = 0;
    LossEstimate estimate;
};

/// One loss fit per sweep value, applied to every LogPowerOscillation
/// coefficient. Without such a coefficient there is nothing to sweep and a
/// single row with gamma = 0 is produced.
inline std::vector<LossRow> compute_loss(const ExperimentConfig& cfg, int jobs = 1) {
    const bool sweepable = std::any_of(cfg.op.coeffs.begin(), cfg.op.coeffs.end(), [](const CoefficientSpec& c) {
        return c.profile == TimeProfile::LogPowerOscillation;
    });
    const std::vector<double> gammas = sweepable ? cfg.fits.gamma_sweep : std::vector<double>{0.0};
    std::vector<LossRow> out;
    for (double g : gammas) {
        auto ex = cfg.experiment();
        for (auto& c : ex.op.coeffs)
            if (c.profile == TimeProfile::LogPowerOscillation) c.gamma_osc = g;
        out.push_back({g, estimate_loss(run_experiment(ex, jobs))});
    }
    return out;
}

inline int cmd_loss(const ExperimentConfig& cfg, const RunOptions& opt) {
    const auto dir = output_dir(cfg, opt);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : compute_loss(cfg, opt.jobs)) {
        rows.push_back({fmt(r.gamma), fmt(r.estimate.nu0_hat), fmt(r.estimate.stderr_), fmt(r.estimate.xi_min),
                        fmt(r.estimate.xi_max)});
        *opt.log << "gamma " << fmt(r.gamma) << ": nu0_hat " << fmt(r.estimate.nu0_hat) << " +- "
                 << fmt(r.estimate.stderr_) << '\n';
    }
    write_csv(dir / "loss.csv", "gamma,nu0_hat,stderr,xi_min,xi_max", rows);
    return kSuccess;
}

// ---------------------------------------------------------------------------
// verify

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

/// Runs one check; a module error becomes a failed check carrying its message.
inline void run_check(std::vector<Check>& out, const std::string& name, const std::function<Check()>& fn) {
    try {
        Check c = fn();
        c.name = name;
        out.push_back(std::move(c));
    } catch (const std::exception& e) {
        out.push_back({name, false, std::string("error: ") + e.what()});
    }
}

/// max over the top decade / max below it.
inline double top_decade_growth(const std::vector<double>& xi, const std::vector<double>& v) {
    const double top = *std::max_element(xi.begin(), xi.end());
    double hi = 0, lo = 0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        double& bucket = xi[i] >= top / 10 ? hi : lo;
        bucket = std::max(bucket, v[i]);
    }
    return lo > 0 ? hi / lo : (hi > 0 ? INFINITY : 1.0);
}

}  // namespace detail

inline std::vector<Check> compute_verification(const ExperimentConfig& cfg, int jobs = 1) {
    std::vector<Check> checks;
    const auto xi_grid = cfg.xi_grid();

    for (const auto* f : {&cfg.eta, &cfg.rho}) {
        detail::run_check(checks, "admissibility " + detail::name(*f) + " as " + to_string(f->role), [&] {
            const auto rep = admissibility_check(*f, default_admissibility_grid(*f));
            std::string d = "C1=" + fmt(rep.fitted_constants[0]) + " C2=" + fmt(rep.fitted_constants[1]) +
                            " C3=" + fmt(rep.fitted_constants[2]);
            if (!rep.violations.empty())
                d += "; first violation " + rep.violations.front().clause + " at r=" + fmt(rep.violations.front().r);
            return Check{"", rep.pass(), d};
        });
    }

    detail::run_check(checks, "classification", [&] {
        const auto rep = compute_classification(cfg, jobs);
        return Check{"", std::isfinite(rep.s_min) && rep.s_min >= 1 + rep.eps, rep.to_json()};
    });

    for (int j = 0; j < cfg.op.m; ++j) {
        const auto& c = cfg.op.coeffs[j];
        detail::run_check(checks, "regularization bounds coeff " + std::to_string(j), [&] {
            const auto rep =
                verify_reg_bounds(c, cfg.eta, cfg.rho, cfg.zone, xi_grid, cfg.t_grid(), cfg.op.mollifier, jobs);
            std::ostringstream d;
            for (const auto& cr : rep.clauses)
                d << (cr.clause == RegClause::I ? "" : " ") << to_string(cr.clause) << ":" << fmt(cr.max_ratio)
                  << "/x" << fmt(cr.top_decade_growth) << (cr.verified ? "" : "!");
            return Check{"", rep.pass(), d.str()};
        });
    }

    detail::run_check(checks, "M3 weights", [&] {
        const auto sups = parallel_map(
            xi_grid,
            [&](double xi) {
                double s = 0;
                for (const auto& v : m3_weights(cfg.op, std::nullopt, xi, cfg.zone.T).integral)
                    s = std::max(s, std::abs(v));
                return s;
            },
            jobs);
        const double g = detail::top_decade_growth(xi_grid, sups);
        const double sup = *std::max_element(sups.begin(), sups.end());
        return Check{"", std::isfinite(sup) && g <= 2.0,
                     "sup |integral|=" + fmt(sup) + " top-decade growth=" + fmt(g)};
    });

    detail::run_check(checks, "conjugation weight integral", [&] {
        const auto rep = theta_integral_bound(cfg.theta_spec(), xi_grid, cfg.zone.T, jobs);
        return Check{"", rep.bounded(), "slope=" + fmt(rep.slope) + " sup=" + fmt(rep.sup)};
    });

    // Spatial profiles from the operator; a lacunary s = 1.2 profile stands in
    // when the operator is x-independent so the estimators still run.
    std::vector<SpatialProfile> profiles;
    for (const auto& c : cfg.op.coeffs)
        if (c.spatial && c.spatial->family != SpatialFamily::Zero) profiles.push_back(*c.spatial);
    if (profiles.empty()) profiles.push_back({SpatialFamily::Lacunary, 1.2, 0.25});
    for (const auto& p : profiles) {
        const std::string tag = to_string(p.family) + " s=" + fmt(p.s);
        detail::run_check(checks, "norm equivalence " + tag, [&] {
            const auto ne = norm_equivalence_report(sample_profile(p, kProfileResolution), p.s);
            return Check{"", ne.within(), "direct=" + fmt(ne.direct) + " dyadic=" + fmt(ne.dyadic) +
                                              " ratio=" + fmt(ne.ratio)};
        });
        detail::run_check(checks, "profile stability " + tag, [&] {
            const auto st = profile_norm_stability(p, p.s);
            return Check{"", st.stable, "relative change=" + fmt(st.relative_change)};
        });
    }
    return checks;
}

inline int cmd_verify(const ExperimentConfig& cfg, const RunOptions& opt) {
    const auto dir = output_dir(cfg, opt);
    const auto checks = compute_verification(cfg, opt.jobs);
    std::ofstream os(dir / "verify.txt");
    bool ok = true;
    for (const auto& c : checks) {
        const std::string line = std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail;
        os << line << '\n';
        *opt.log << line << '\n';
        ok = ok && c.passed;
    }
    return ok ? kSuccess : kVerificationFailure;
}

}  // namespace hypolab::cli
