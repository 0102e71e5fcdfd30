#pragma once

// Command-line front end. Kept in a header so tests can drive run_cli() in-process.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "thinlevy/density.hpp"
#include "thinlevy/errors.hpp"
#include "thinlevy/model.hpp"
#include "thinlevy/montecarlo.hpp"
#include "thinlevy/numerics/zeta.hpp"
#include "thinlevy/params.hpp"
#include "thinlevy/rate.hpp"
#include "thinlevy/tilt.hpp"

namespace thinlevy::cli {

inline constexpr int schema_version = 1;

enum ExitCode { exit_ok = 0, exit_validation = 2, exit_numerical = 3 };

struct RunConfig {
    std::string command;
    double tau = 3.5;
    double beta_tilde = 0.0;
    std::optional<double> u;
    std::string u_grid;            // lo:hi:n
    std::string a_grid;            // lo:hi:n
    std::string s_grid;            // lo:hi:n (density)
    std::optional<double> t;       // density time, default u
    std::uint64_t n_samples = 100000;
    std::uint64_t n_naive = 1000000;
    std::uint64_t seed = 1;
    int threads = 1;
    double trunc_k = 8.0;
    double tol = 1e-13;
    std::string out;
    std::string format = "csv";

    ModelParams model() const { return ModelParams::make(tau, beta_tilde); }
    TruncationPolicy trunc() const {
        TruncationPolicy tr;
        tr.K = trunc_k;
        return tr;
    }
    QuadratureSpec quad() const { return {1e-14, tol, 2000}; }

    // everything that determines the output; threads and the output path do not
    std::vector<std::pair<std::string, std::string>> echo() const {
        auto num = [](double v) {
            char b[40];
            std::snprintf(b, sizeof b, "%.17g", v);
            return std::string(b);
        };
        std::vector<std::pair<std::string, std::string>> kv = {
            {"command", command},         {"tau", num(tau)},
            {"beta-tilde", num(beta_tilde)}, {"u", u ? num(*u) : ""},
            {"u-grid", u_grid},           {"a-grid", a_grid},
            {"s-grid", s_grid},           {"t", t ? num(*t) : ""},
            {"n-samples", std::to_string(n_samples)}, {"n-naive", std::to_string(n_naive)},
            {"seed", std::to_string(seed)}, {"trunc-k", num(trunc_k)},
            {"tol", num(tol)},            {"format", format},
        };
        return kv;
    }
};

inline std::vector<double> parse_grid(const std::string& spec, const std::string& name) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw ValidationError("cli", name + " must have the form lo:hi:n");
    double lo, hi;
    long n;
    try {
        lo = std::stod(parts[0]);
        hi = std::stod(parts[1]);
        n = std::stol(parts[2]);
    } catch (const std::exception&) {
        throw ValidationError("cli", name + " must have the form lo:hi:n");
    }
    if (n < 1 || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
        throw ValidationError("cli", name + " needs lo <= hi and n >= 1");
    std::vector<double> g(n);
    for (long j = 0; j < n; ++j) g[j] = n == 1 ? lo : lo + (hi - lo) * j / (n - 1);
    if (n > 1) g.back() = hi;
    return g;
}

// A table with named columns; empty optionals print as empty CSV fields / JSON null.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> rows;
    std::vector<std::pair<std::string, double>> report;   // scalar results
    std::vector<std::pair<std::string, std::string>> notes;
    std::vector<std::vector<std::string>> text_rows;       // used instead of rows when set
};

inline std::string fmt17(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

inline void write_csv(const RunConfig& cfg, const Table& t, std::ostream& os) {
    os << "# thinlevy " << cfg.command << " schema=" << schema_version << "\n";
    for (const auto& [k, v] : cfg.echo()) os << "# " << k << "=" << v << "\n";
    for (const auto& [k, v] : t.report) os << "# result " << k << "=" << fmt17(v) << "\n";
    for (const auto& [k, v] : t.notes) os << "# note " << k << "=" << v << "\n";
    for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << t.columns[j];
    os << "\n";
    for (const auto& r : t.text_rows) {
        for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << r[j];
        os << "\n";
    }
    for (const auto& r : t.rows) {
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j) os << ",";
            if (r[j]) os << fmt17(*r[j]);
        }
        os << "\n";
    }
}

inline void write_json(const RunConfig& cfg, const Table& t, std::ostream& os) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["command"] = cfg.command;
    j["schema"] = schema_version;
    ordered_json c = ordered_json::object();
    for (const auto& [k, v] : cfg.echo()) c[k] = v;
    j["config"] = c;
    ordered_json rep = ordered_json::object();
    for (const auto& [k, v] : t.report) rep[k] = v;
    j["report"] = rep;
    ordered_json notes = ordered_json::object();
    for (const auto& [k, v] : t.notes) notes[k] = v;
    j["notes"] = notes;
    j["columns"] = t.columns;
    ordered_json rows = ordered_json::array();
    for (const auto& r : t.text_rows) {
        ordered_json o = ordered_json::object();
        for (std::size_t k = 0; k < r.size(); ++k) o[t.columns[k]] = r[k];
        rows.push_back(o);
    }
    for (const auto& r : t.rows) {
        ordered_json o = ordered_json::object();
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (r[k]) o[t.columns[k]] = *r[k];
            else o[t.columns[k]] = nullptr;
        }
        rows.push_back(o);
    }
    j["rows"] = rows;
    os << j.dump(2) << "\n";
}

namespace detail {

inline std::vector<double> u_values(const RunConfig& cfg, const std::string& fallback) {
    std::vector<double> us;
    if (!cfg.u_grid.empty()) us = parse_grid(cfg.u_grid, "--u-grid");
    else if (cfg.u) us = {*cfg.u};
    else us = parse_grid(fallback, "--u-grid");
    for (double u : us)
        if (!(u > 0)) throw ValidationError("cli", "u must be positive");
    return us;
}

inline double single_u(const RunConfig& cfg, double fallback) {
    double u = cfg.u ? *cfg.u : fallback;
    if (!(u > 0)) throw ValidationError("cli", "u must be positive");
    return u;
}

} // namespace detail

inline Table cmd_rate(const RunConfig& cfg) {
    ModelParams p = cfg.model();
    RateSolution rs = solve_theta_star(p, cfg.quad());
    KappaLeading kl = kappa_leading(p, rs);
    BDConstants bd = constants_B_D(rs, shape_IV(1.0, rs.theta_star, p, cfg.quad()));
    Table t;
    t.report = {{"theta_star", rs.theta_star}, {"I", rs.big_I},        {"lambda_pp_at_star", rs.lambda_pp_at_star},
                {"lambda_p_at_zero", rs.lambda_p_at_zero}, {"kappa_10", kl.kappa_10}, {"kappa_01", kl.kappa_01},
                {"B", bd.B}, {"D", bd.D}};
    t.columns = {"u", "eps_u", "theta_star_u", "exponent", "log_P_asymptotic"};
    for (double u : detail::u_values(cfg, "10:100:10")) {
        RefinedTilt rt = solve_theta_star_u(u, p, rs);
        t.rows.push_back({u, rt.eps_u, rt.theta_star_u, rt.exponent, log_tail_probability_asymptotic(rt, p, bd.D)});
    }
    return t;
}

inline Table cmd_shapes(const RunConfig& cfg) {
    ModelParams p = cfg.model();
    RateSolution rs = solve_theta_star(p, cfg.quad());
    Table t;
    t.report = {{"theta", rs.theta_star}};
    t.columns = {"a", "I_E", "I_V", "J_V", "G_V"};
    std::vector<double> grid;
    if (cfg.a_grid.empty()) {
        ShapeTable st(rs.theta_star, p, ShapeTable::default_points, cfg.quad());
        for (std::size_t j = 0; j < st.grid().size(); ++j)
            t.rows.push_back({st.grid()[j], st.IE_values()[j], st.IV_values()[j], st.JV_values()[j], st.GV_values()[j]});
        return t;
    }
    for (double a : parse_grid(cfg.a_grid, "--a-grid")) {
        if (!(a >= 0 && a <= 1)) throw ValidationError("cli", "a-grid must lie in [0,1]");
        double th = rs.theta_star;
        t.rows.push_back({a, shape_IE(a, th, p, cfg.quad()), shape_IV(a, th, p, cfg.quad()),
                          shape_JV(a, th, p, cfg.quad()), shape_GV(a, th, p, cfg.quad())});
    }
    return t;
}

inline Table cmd_tail(const RunConfig& cfg) {
    ModelParams p = cfg.model();
    RateSolution rs = solve_theta_star(p, cfg.quad());
    BDConstants bd = constants_B_D(rs, shape_IV(1.0, rs.theta_star, p, cfg.quad()));
    SimulationSpec sim;
    sim.trunc = cfg.trunc();
    Table t;
    t.report = {{"theta_star", rs.theta_star}, {"I", rs.big_I}, {"D", bd.D}};
    t.notes = {{"naive", "blank when fewer than 10 hits are expected at n-naive"}};
    t.columns = {"u", "P_asymptotic", "P_is", "se_is", "P_naive", "se_naive",
                 "log_P_asymptotic", "log_P_is", "log_rel_se_is"};
    for (double u : detail::u_values(cfg, "2:6:5")) {
        RefinedTilt rt = solve_theta_star_u(u, p, rs);
        double la = log_tail_probability_asymptotic(rt, p, bd.D);
        Estimate is = estimate_tail_is(rt, p, cfg.n_samples, cfg.seed, cfg.threads, sim);
        std::optional<double> pn, sn;
        if (!is.degenerate && is.value * static_cast<double>(cfg.n_naive) >= 10.0) {
            Estimate nv = estimate_tail_naive(u, p, cfg.n_naive, cfg.seed, cfg.threads, sim);
            pn = nv.value;
            sn = nv.std_error;
        }
        std::optional<double> pis, sis, lis, lrs;
        if (!is.degenerate) {
            pis = is.value;
            sis = is.std_error;
            lis = is.log_value;
            lrs = is.rel_error;
        }
        t.rows.push_back({u, std::exp(la), pis, sis, pn, sn, la, lis, lrs});
    }
    return t;
}

inline Table cmd_profile(const RunConfig& cfg) {
    ModelParams p = cfg.model();
    RateSolution rs = solve_theta_star(p, cfg.quad());
    double u = detail::single_u(cfg, 30.0);
    RefinedTilt rt = solve_theta_star_u(u, p, rs);
    std::vector<double> as = cfg.a_grid.empty() ? parse_grid("0:1:5", "--a-grid") : parse_grid(cfg.a_grid, "--a-grid");
    for (double a : as)
        if (!(a >= 0 && a <= 1)) throw ValidationError("cli", "a-grid must lie in [0,1]");
    SimulationSpec sim;
    sim.trunc = cfg.trunc();
    auto prof = conditional_profile(rt, p, as, cfg.n_samples, cfg.seed, cfg.threads, sim);
    ShapeTable st(rs.theta_star, p, ShapeTable::default_points, cfg.quad());
    const double scale = std::pow(u, p.tau - 2.0);
    Table t;
    t.report = {{"u", u}, {"theta_star_u", rt.theta_star_u}, {"scale_u_pow_tau_minus_2", scale}};
    t.columns = {"a", "profile_estimate", "bootstrap_se", "profile_scaled", "I_E_reference", "ess"};
    for (const auto& pp : prof)
        t.rows.push_back({pp.a, pp.est.value, pp.est.std_error, pp.est.value / scale, st.IE(pp.a), pp.est.ess});
    return t;
}

inline Table cmd_density(const RunConfig& cfg) {
    ModelParams p = cfg.model();
    RateSolution rs = solve_theta_star(p, cfg.quad());
    double u = detail::single_u(cfg, 50.0);
    double tt = cfg.t ? *cfg.t : u;
    if (!(tt > 0 && tt <= u)) throw ValidationError("cli", "t must lie in (0,u]");
    RefinedTilt rt = solve_theta_star_u(u, p, rs);
    DensityInverter inv(tt, u, rt.theta_star_u, p, cfg.trunc());
    BDConstants bd = constants_B_D(rs, shape_IV(1.0, rs.theta_star, p, cfg.quad()));
    Table t;
    t.report = {{"u", u}, {"t", tt}, {"theta_star_u", rt.theta_star_u}, {"B", bd.B},
                {"B_prediction_at_zero", bd.B * std::pow(u, -(p.tau - 3.0) / 2.0)},
                {"k_max", inv.spec().k_max}, {"decay_c", inv.spec().decay_c}};
    t.notes = {{"window", inv.outside_proven_window() ? "outside proven window (t < u/2)" : "inside proven window"}};
    t.columns = {"s", "density"};
    std::string sg = cfg.s_grid.empty() ? "-20:20:81" : cfg.s_grid;
    for (double s : parse_grid(sg, "--s-grid")) t.rows.push_back({s, inv.density(s)});
    return t;
}

// Fast invariant checks; one row per check.
inline Table cmd_validate(const RunConfig& cfg, bool& all_pass) {
    ModelParams p = cfg.model();
    Table t;
    t.columns = {"check", "module", "status", "value", "tolerance"};
    all_pass = true;
    auto add = [&](const std::string& name, const std::string& mod, bool ok, double value, double tol) {
        all_pass = all_pass && ok;
        t.text_rows.push_back({name, mod, ok ? "PASS" : "FAIL", fmt17(value), fmt17(tol)});
    };
    auto z0 = zeta_continued(0.0).value;
    add("zeta_at_zero", "numerics", z0 == -0.5, z0, 0);
    double z2 = zeta_continued(2.0).value;
    add("zeta_at_two", "numerics", std::abs(z2 - std::numbers::pi * std::numbers::pi / 6) <= 1e-8,
        z2 - std::numbers::pi * std::numbers::pi / 6, 1e-8);
    add("zeta_negative_on_unit_interval", "numerics", p.zeta_alpha < 0 && p.zeta_2alpha < 0, p.zeta_alpha, 0);

    add("log_mgf_at_zero_tilt", "model", log_mgf_exact(10.0, 0.0, p).value == 0.0, log_mgf_exact(10.0, 0.0, p).value, 0);
    add("mean_at_time_zero", "model", mean_original_exact(0.0, p) == 1.0, mean_original_exact(0.0, p), 0);

    RateSolution rs = solve_theta_star(p, cfg.quad());
    add("lambda_at_zero", "rate", lambda(0.0, p) == 0.0, lambda(0.0, p), 1e-10);
    add("lambda_prime_at_zero_negative", "rate", rs.lambda_p_at_zero < 0, rs.lambda_p_at_zero, 0);
    double d1 = lambda_deriv(rs.theta_star, 1, p, cfg.quad());
    add("lambda_prime_at_theta_star", "rate", std::abs(d1) <= 1e-10, d1, 1e-10);
    add("rate_I_positive", "rate", rs.big_I > 0, rs.big_I, 0);
    double minpp = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 50; ++k) minpp = std::min(minpp, lambda_deriv(0.2 * k, 2, p, cfg.quad()));
    add("lambda_convex_on_grid", "rate", minpp > 0, minpp, 0);
    RefinedTilt rt = solve_theta_star_u(100.0, p, rs);
    double res = lambda_deriv(rt.theta_star_u, 1, p, cfg.quad()) + rt.eps_u;
    add("refined_tilt_residual_u100", "rate", std::abs(res) <= 1e-10, res, 1e-10);

    double ie1 = shape_IE(1.0, rs.theta_star, p, cfg.quad());
    add("I_E_at_one", "tilt", std::abs(ie1) <= 1e-8, ie1, 1e-8);
    double jv1 = shape_JV(1.0, rs.theta_star, p, cfg.quad());
    add("J_V_at_one", "tilt", std::abs(jv1) <= 1e-8, jv1, 1e-8);
    add("I_E_I_V_at_zero", "tilt", shape_IE(0.0, rs.theta_star, p) == 0 && shape_IV(0.0, rs.theta_star, p) == 0, 0, 0);
    double lft = tilted_cdf(2, 10.0, 10.0, rs.theta_star, p);
    double rgt = TiltedIndicatorLaw::make(2, 10.0, rs.theta_star, p).p_hit;
    add("tilted_cdf_continuous_at_u", "tilt", std::abs(lft - rgt) <= 1e-15, lft - rgt, 1e-15);
    RefinedTilt r20 = solve_theta_star_u(20.0, p, rs);
    double add_res = tilted_var_exact(10, r20, p) + tilted_var_increment_exact(10, r20, p) +
                     2 * tilted_cov_exact(10, r20, p) - tilted_var_exact(20, r20, p);
    add("variance_additivity_u20", "tilt", std::abs(add_res) <= 1e-9, add_res, 1e-9);

    cplx c0 = char_fn_tilted(0.0, 20.0, r20, p);
    add("char_fn_at_zero", "density", c0 == cplx(1.0, 0.0), std::abs(c0 - 1.0), 0);
    double m1 = std::abs(char_fn_tilted(0.5, 20.0, r20, p));
    add("char_fn_modulus_below_one", "density", m1 < 1.0, m1, 1);
    BDConstants bd = constants_B_D(rs, shape_IV(1.0, rs.theta_star, p, cfg.quad()));
    add("D_times_theta_star_is_B", "density", std::abs(bd.D * rs.theta_star - bd.B) <= 1e-15, bd.D * rs.theta_star - bd.B, 1e-15);
    return t;
}

// Parses argv, dispatches, writes the output. Returns the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"thinlevy: large-deviation asymptotics of the power-law thinned Levy process"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value file; command-line flags override it");
    app.add_option("--tau", cfg.tau, "power-law exponent in (3,4)");
    app.add_option("--beta-tilde", cfg.beta_tilde, "drift coefficient");
    double u_in = 0;
    auto* uopt = app.add_option("--u", u_in, "time horizon");
    app.add_option("--u-grid", cfg.u_grid, "horizon grid lo:hi:n");
    app.add_option("--a-grid", cfg.a_grid, "fraction grid lo:hi:n in [0,1]");
    app.add_option("--s-grid", cfg.s_grid, "density evaluation grid lo:hi:n");
    double t_in = 0;
    auto* topt = app.add_option("--t", t_in, "density time (default u)");
    app.add_option("--n-samples", cfg.n_samples, "Monte Carlo sample count");
    app.add_option("--n-naive", cfg.n_naive, "sample count of the naive estimator");
    app.add_option("--seed", cfg.seed, "master seed");
    app.add_option("--threads", cfg.threads, "worker threads (results do not depend on it)");
    app.add_option("--trunc-k", cfg.trunc_k, "truncation constant K in N(u) = ceil(K u^(tau-1))");
    app.add_option("--tol", cfg.tol, "relative quadrature tolerance");
    app.add_option("--out", cfg.out, "output file (default stdout)");
    app.add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.fallthrough();
    for (const char* name : {"rate", "shapes", "tail", "profile", "density", "validate"}) app.add_subcommand(name);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error in module cli: " << e.what() << "\n";
        return exit_validation;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (uopt->count()) cfg.u = u_in;
    if (topt->count()) cfg.t = t_in;

    try {
        if (!(cfg.tau > 3.0 && cfg.tau < 4.0)) throw ValidationError("cli", "--tau must lie strictly inside (3,4)");
        if (!std::isfinite(cfg.beta_tilde)) throw ValidationError("cli", "--beta-tilde must be finite");
        if (cfg.n_samples < 2 || cfg.n_naive < 2) throw ValidationError("cli", "sample counts must be >= 2");
        if (cfg.threads < 1) throw ValidationError("cli", "--threads must be >= 1");
        if (!(cfg.trunc_k >= 1)) throw ValidationError("cli", "--trunc-k must be >= 1");
        if (!(cfg.tol > 0)) throw ValidationError("cli", "--tol must be positive");
        if (cfg.u && !(*cfg.u > 0)) throw ValidationError("cli", "--u must be positive");
    } catch (const ValidationError& e) {
        err << "error in module " << e.module() << ": " << e.what() << "\n";
        return exit_validation;
    }

    Table t;
    bool ok = true;
    try {
        const std::string& c = cfg.command;
        if (c == "rate") t = cmd_rate(cfg);
        else if (c == "shapes") t = cmd_shapes(cfg);
        else if (c == "tail") t = cmd_tail(cfg);
        else if (c == "profile") t = cmd_profile(cfg);
        else if (c == "density") t = cmd_density(cfg);
        else t = cmd_validate(cfg, ok);
    } catch (const ValidationError& e) {
        err << "error in module " << e.module() << ": " << e.what() << "\n";
        return exit_validation;
    } catch (const DomainError& e) {
        err << "error in module " << e.module() << ": " << e.what() << "\n";
        return exit_validation;
    } catch (const Error& e) {
        err << "error in module " << e.module() << ": " << e.what() << "\n";
        return exit_numerical;
    }

    std::ofstream file;
    std::ostream* os = &out;
    if (!cfg.out.empty()) {
        file.open(cfg.out);
        if (!file) {
            err << "error in module cli: cannot open " << cfg.out << "\n";
            return exit_validation;
        }
        os = &file;
    }
    if (cfg.format == "json") write_json(cfg, t, *os);
    else write_csv(cfg, t, *os);
    if (!ok) {
        err << "error in module validate: invariant check failed\n";
        return exit_numerical;
    }
    return exit_ok;
}

inline int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, out, err);
}

} // namespace thinlevy::cli
