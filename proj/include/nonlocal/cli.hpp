#pragma once

#include <cstddef>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "nonlocal/coefficients.hpp"
#include "nonlocal/csv.hpp"
#include "nonlocal/diagnostics.hpp"
#include "nonlocal/errors.hpp"
#include "nonlocal/experiments.hpp"
#include "nonlocal/fixed_point.hpp"
#include "nonlocal/functionals.hpp"
#include "nonlocal/solver.hpp"

namespace nonlocal::cli {

enum ExitCode : int {
    kSuccess = 0,
    kFailure = 1,
    kUsage = 2,
    kTwoCycle = 3,
    kBlowup = 4,
    kMaxIterations = 5,
};

inline int exit_code(TraceStatus s) noexcept
{
    switch (s) {
    case TraceStatus::Converged: return kSuccess;
    case TraceStatus::TwoCycle: return kTwoCycle;
    case TraceStatus::Blowup: return kBlowup;
    case TraceStatus::MaxIterations: return kMaxIterations;
    }
    return kFailure;
}

inline const std::vector<std::string>& commands()
{
    static const std::vector<std::string> names{"iterate", "sweep-g", "h-study", "solve",
                                                "diagnose"};
    return names;
}

inline constexpr std::string_view kDefaultFunctional = "grad_sq:12";

struct RunConfig {
    std::string command;
    std::string scenario = "convergent";
    std::size_t n_interior = 8191;
    /// Unset: ν1 of the scenario (h-study: 0.45).
    std::optional<double> x0;
    double tol = 1e-14;
    std::size_t max_iter = 1000;
    std::string scheme = "plain";
    double kappa = 0.0;
    double eps = 0.0;
    int m = 1;
    std::string functional{kDefaultFunctional};
    /// Empty: standard output.
    std::string out;

    // diagnose inputs
    DiagnosticConstants constants;

    bool help = false;
    std::string help_text;

    double h() const { return 1.0 / static_cast<double>(n_interior + 1); }

    IterationScheme iteration_scheme() const
    {
        return scheme == "damped" ? IterationScheme::damped(kappa) : IterationScheme::plain();
    }

    IterationOptions iteration_options() const
    {
        IterationOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        return o;
    }
};

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& v)
{
    try {
        return nonlocal::detail::parse_number(v, key);
    } catch (const UsageError&) {
        throw UsageError("config key '" + key + "': malformed number '" + v + "'");
    }
}

inline long long to_integer(const std::string& key, const std::string& v)
{
    const double d = to_double(key, v);
    if (d != static_cast<double>(static_cast<long long>(d)))
        throw UsageError("config key '" + key + "': expected an integer, got '" + v + "'");
    return static_cast<long long>(d);
}

inline void apply_key(RunConfig& cfg, const std::string& key, const std::string& value)
{
    if (key == "scenario") {
        cfg.scenario = value;
    } else if (key == "n") {
        const auto n = to_integer(key, value);
        if (n < 1)
            throw UsageError("config key 'n' must be at least 1");
        cfg.n_interior = static_cast<std::size_t>(n);
    } else if (key == "x0") {
        cfg.x0 = to_double(key, value);
    } else if (key == "tol") {
        cfg.tol = to_double(key, value);
    } else if (key == "max_iter") {
        const auto n = to_integer(key, value);
        if (n < 1)
            throw UsageError("config key 'max_iter' must be at least 1");
        cfg.max_iter = static_cast<std::size_t>(n);
    } else if (key == "scheme") {
        cfg.scheme = value;
    } else if (key == "kappa") {
        cfg.kappa = to_double(key, value);
    } else if (key == "eps") {
        cfg.eps = to_double(key, value);
    } else if (key == "m") {
        cfg.m = static_cast<int>(to_integer(key, value));
    } else if (key == "functional") {
        cfg.functional = value;
    } else if (key == "out") {
        cfg.out = value;
    } else {
        throw UsageError("unknown config key '" + key + "'");
    }
}

inline void validate(const RunConfig& cfg)
{
    (void)parse_scenario(cfg.scenario);
    (void)parse_functional(cfg.functional);
    if (!(cfg.tol > 0.0))
        throw UsageError("tol must be positive");
    if (cfg.scheme != "plain" && cfg.scheme != "damped")
        throw UsageError("scheme must be 'plain' or 'damped'");
    if (!(cfg.kappa >= 0.0))
        throw UsageError("kappa must be nonnegative");
    if (!(cfg.eps >= 0.0 && cfg.eps < 1.0))
        throw UsageError("eps must lie in [0,1)");
    if (cfg.m < 1)
        throw UsageError("m must be a positive integer");
}

}  // namespace detail

/// `key = value` lines; '#' starts a comment.
inline void apply_config_text(RunConfig& cfg, std::istream& in)
{
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto text = detail::trim(line);
        if (text.empty())
            continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const auto key = detail::trim(std::string_view(text).substr(0, eq));
        const auto value = detail::trim(std::string_view(text).substr(eq + 1));
        if (key.empty() || value.empty())
            throw UsageError("config line " + std::to_string(lineno) + ": empty key or value");
        detail::apply_key(cfg, key, value);
    }
}

/**
 * Parse `<command> [flags]`. A `--config FILE` is applied first; explicit
 * flags override its values. Throws UsageError on any malformed input.
 */
inline RunConfig parse_config(const std::vector<std::string>& args)
{
    RunConfig cfg;
    CLI::App app{"Nonlocal elliptic problems: fixed-point iterations and convergence studies",
                 "nonlocal"};
    app.set_help_flag("--help", "Print this help message and exit");

    std::string command;
    std::string config_path;
    std::string scenario;
    std::size_t n = 0;
    double h = 0.0;
    double x0 = 0.0;
    double tol = 0.0;
    std::size_t max_iter = 0;
    std::string scheme;
    double kappa = 0.0;
    double eps = 0.0;
    int m = 0;
    std::string functional;
    std::string out;
    DiagnosticConstants dc;
    double p_hom = 0.0;

    app.add_option("command", command, "iterate | sweep-g | h-study | solve | diagnose")
        ->required();
    app.add_option("--config", config_path, "key = value config file");
    auto* o_scenario = app.add_option("--scenario", scenario,
                                      "convergent | bounded_divergent | unbounded_divergent");
    auto* o_n = app.add_option("--n", n, "interior mesh nodes (h = 1/(n+1))");
    auto* o_h = app.add_option("--h", h, "mesh width; must be 1/(n+1)");
    auto* o_x0 = app.add_option("--x0", x0, "start value (default: nu1 of the scenario)");
    auto* o_tol = app.add_option("--tol", tol, "stopping tolerance on |x_{n+1} - x_n|");
    auto* o_max = app.add_option("--max-iter,--max_iter", max_iter, "iteration cap");
    auto* o_scheme = app.add_option("--scheme", scheme, "plain | damped");
    auto* o_kappa = app.add_option("--kappa", kappa, "damping parameter");
    auto* o_eps = app.add_option("--eps", eps, "coefficient perturbation amplitude in [0,1)");
    auto* o_m = app.add_option("--m", m, "coefficient perturbation frequency");
    auto* o_fun = app.add_option("--functional", functional,
                                 "integral | p_power:<p> | grad_sq:<s> | sub_integral:<a>:<b> | "
                                 "sub_grad_sq:<a>:<b>");
    auto* o_out = app.add_option("--out", out, "output CSV path (default: stdout)");
    app.add_option("--alpha", dc.alpha, "diagnose: ellipticity lower bound");
    app.add_option("--beta", dc.beta, "diagnose: ellipticity upper bound");
    app.add_option("--F-norm", dc.F_dual_norm, "diagnose: dual norm of the load");
    app.add_option("--gamma", dc.gamma, "diagnose: Lipschitz constant of the coefficient");
    app.add_option("--C-ell", dc.C_ell, "diagnose: Lipschitz constant of the functional");
    app.add_option("--C-A", dc.C_A, "diagnose: Lipschitz constant of a");
    app.add_option("--C-lambda", dc.C_lambda, "diagnose: Lipschitz constant of lambda");
    app.add_option("--C-P", dc.C_P, "diagnose: Poincare constant (default 1/pi)");
    auto* o_p = app.add_option("--p-hom", p_hom, "diagnose: homogeneity degree of the functional");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        cfg.help = true;
        cfg.help_text = app.help();
        return cfg;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    bool known = false;
    for (const auto& c : commands())
        known = known || c == command;
    if (!known)
        throw UsageError("unknown command '" + command + "'");
    cfg.command = command;
    if (command == "h-study")
        cfg.n_interior = 0;

    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in)
            throw UsageError("cannot open config file '" + config_path + "'");
        apply_config_text(cfg, in);
    }

    if (o_scenario->count())
        cfg.scenario = scenario;
    if (o_n->count()) {
        if (n < 1)
            throw UsageError("--n must be at least 1");
        cfg.n_interior = n;
    }
    if (o_h->count()) {
        std::size_t from_h = 0;
        try {
            from_h = mesh_from_width(h).n_interior();
        } catch (const PreconditionError& e) {
            throw UsageError(std::string("--h: ") + e.what());
        }
        if (o_n->count() && from_h != n)
            throw UsageError("--h and --n disagree");
        cfg.n_interior = from_h;
    }
    if (o_x0->count())
        cfg.x0 = x0;
    if (o_tol->count())
        cfg.tol = tol;
    if (o_max->count()) {
        if (max_iter < 1)
            throw UsageError("--max-iter must be at least 1");
        cfg.max_iter = max_iter;
    }
    if (o_scheme->count())
        cfg.scheme = scheme;
    if (o_kappa->count())
        cfg.kappa = kappa;
    if (o_eps->count())
        cfg.eps = eps;
    if (o_m->count())
        cfg.m = m;
    if (o_fun->count())
        cfg.functional = functional;
    if (o_out->count())
        cfg.out = out;
    if (o_p->count())
        dc.p_hom = p_hom;
    cfg.constants = dc;

    detail::validate(cfg);
    if (command == "diagnose") {
        try {
            cfg.constants.validate();
        } catch (const PreconditionError& e) {
            throw UsageError(e.what());
        }
    }
    return cfg;
}

namespace detail {

inline ScenarioOptions scenario_options(const RunConfig& cfg, bool exact_ell_psi)
{
    ScenarioOptions so;
    so.ell = parse_functional(cfg.functional);
    so.eps = cfg.eps;
    so.m = cfg.m;
    // ℓ(ψ) = 1 is known in closed form only for the default functional.
    if (exact_ell_psi && cfg.functional == kDefaultFunctional)
        so.ell_psi = kExactEllPsi;
    return so;
}

inline int report_status(const FixedPointTrace& trace, std::ostream& err)
{
    if (!trace.converged())
        err << "iteration " << to_string(trace.status)
            << (trace.message.empty() ? "" : ": " + trace.message) << '\n';
    return exit_code(trace.status);
}

inline int run_iterate(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const auto s = parse_scenario(cfg.scenario);
    const auto run = run_iteration_scenario(s, cfg.n_interior, cfg.x0, cfg.iteration_scheme(),
                                            cfg.iteration_options(), scenario_options(cfg, false));
    csv::write_trace(out, run.trace);
    return report_status(run.trace, err);
}

inline int run_sweep(const RunConfig& cfg, std::ostream& out)
{
    const auto s = parse_scenario(cfg.scenario);
    const auto p = scenario_problem(s, cfg.n_interior, scenario_options(cfg, true));
    const auto grid = default_sweep_grid(s);
    csv::write_sweep(out, sweep_G(p, grid));
    return kSuccess;
}

inline int run_study(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.functional != kDefaultFunctional)
        throw UsageError("h-study uses the functional grad_sq:12 only");
    if (cfg.eps != 0.0)
        throw UsageError("h-study has no perturbed variant (eps must be 0)");
    HStudyOptions opts;
    opts.x0 = cfg.x0.value_or(opts.x0);
    opts.iteration = cfg.iteration_options();
    std::vector<std::size_t> sizes = default_h_study_sizes();
    if (cfg.n_interior != 0) {
        // A given n becomes the finest level; coarser levels halve h.
        sizes.clear();
        for (std::size_t cells = cfg.n_interior + 1; cells >= 16 && sizes.size() < 7; cells /= 2)
            sizes.insert(sizes.begin(), cells - 1);
        if (sizes.size() < 3)
            throw UsageError("h-study needs n+1 >= 64 so that three levels with n+1 >= 16 exist");
    }
    csv::write_study(out, run_h_study(parse_scenario(cfg.scenario), sizes, opts));
    return kSuccess;
}

inline int run_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const auto s = parse_scenario(cfg.scenario);
    const auto p = scenario_problem(s, cfg.n_interior, scenario_options(cfg, true));
    const auto sol = solve_nonlinear(p, cfg.x0.value_or(scenario_G(s).nu1),
                                     cfg.iteration_scheme(), cfg.iteration_options());
    if (sol.u)
        csv::write_solution(out, *sol.u);
    return report_status(sol.trace, err);
}

inline int run_diagnose(const RunConfig& cfg, std::ostream& out)
{
    const auto uniq = uniqueness_diagnostic(cfg.constants);
    const auto small = smallness_diagnostic(cfg.constants);
    out << "diagnostic,value,satisfied\n";
    out << "uniqueness," << csv::format_double(uniq.value) << ',' << (uniq.satisfied ? 1 : 0)
        << '\n';
    out << "smallness," << csv::format_double(small.general.value) << ','
        << (small.general.satisfied ? 1 : 0) << '\n';
    if (small.simplified)
        out << "smallness_simplified," << csv::format_double(small.simplified->value) << ','
            << (small.simplified->satisfied ? 1 : 0) << '\n';
    return kSuccess;
}

inline int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    if (cfg.command == "iterate")
        return run_iterate(cfg, out, err);
    if (cfg.command == "sweep-g")
        return run_sweep(cfg, out);
    if (cfg.command == "h-study")
        return run_study(cfg, out);
    if (cfg.command == "solve")
        return run_solve(cfg, out, err);
    if (cfg.command == "diagnose")
        return run_diagnose(cfg, out);
    throw UsageError("unknown command '" + cfg.command + "'");
}

}  // namespace detail

/// Execute a parsed config. CSV goes to cfg.out, or to `out` when unset.
inline int run_command(const RunConfig& cfg, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr)
{
    try {
        if (cfg.out.empty())
            return detail::dispatch(cfg, out, err);
        std::ostringstream buffer;
        const int code = detail::dispatch(cfg, buffer, err);
        std::ofstream file(cfg.out, std::ios::binary);
        if (!file) {
            err << "cannot write '" << cfg.out << "'\n";
            return kFailure;
        }
        file << buffer.str();
        return code;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

/// parse_config + run_command with the exit-code contract.
inline int main(const std::vector<std::string>& args, std::ostream& out = std::cout,
                std::ostream& err = std::cerr)
{
    RunConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nrun with --help for the option list\n";
        return kUsage;
    }
    if (cfg.help) {
        out << cfg.help_text;
        return kSuccess;
    }
    return run_command(cfg, out, err);
}

}  // namespace nonlocal::cli
