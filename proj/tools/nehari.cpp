// Command-line driver: diagram, solve, shoot, eig, sweep-eps, sweep-h.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "nehari/diagram.hpp"
#include "nehari/error.hpp"
#include "nehari/io.hpp"
#include "nehari/shooting.hpp"

using namespace nehari;
namespace fs = std::filesystem;

namespace {

std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string opt_g17(const std::optional<double>& v)
{
    return v ? g17(*v) : "";
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

void write_text(const fs::path& p, const std::string& text)
{
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!(f << text))
        throw Error(ErrorKind::Io, "cannot write " + p.string());
}

RunConfig config_or_default(const std::string& path)
{
    return path.empty() ? RunConfig{} : load_config(path);
}

std::vector<bool> bits_of(const std::string& s)
{
    std::vector<bool> out;
    for (char c : s) {
        if (c != '0' && c != '1')
            throw Error(ErrorKind::Config, "bad bit string '" + s + "'");
        out.push_back(c == '1');
    }
    return out;
}

struct ProblemArgs {
    int kappa = 1;
    double h = 0.1;
    double eps = 0.0;
    double lambda = -100.0;
    std::size_t n = 500;

    void add(CLI::App* app)
    {
        app->add_option("--kappa", kappa, "number of wells")->check(CLI::PositiveNumber);
        app->add_option("--h", h, "well width");
        app->add_option("--eps", eps, "weight inside the wells")->check(CLI::Range(0.0, 1.0));
        app->add_option("--lambda", lambda, "parameter value");
        app->add_option("--n", n, "interior mesh nodes")->check(CLI::PositiveNumber);
    }
};

int cmd_diagram(const std::string& config, const fs::path& out, std::optional<double> lambda_min)
{
    RunConfig cfg = config_or_default(config);
    if (lambda_min)
        cfg.continuation.lambda_min = *lambda_min;
    const auto bundle = run_diagram(cfg);
    write_bundle(bundle, out);
    for (const auto& r : bundle.branches) {
        std::cout << r.id << " (" << to_string(r.role) << "): " << r.branch.points.size() << " points, stop "
                  << to_string(r.branch.stop) << '\n';
        for (const auto& [k, lam] : r.folds)
            std::cout << "  fold at lambda " << g17(lam) << '\n';
    }
    for (const auto& e : bundle.events) {
        if (e.event.kind != EventKind::Fold)
            std::cout << "branch point on " << e.branch_id << " at lambda " << g17(e.event.lambda_b) << " ("
                      << to_string(e.event.kind) << ")\n";
    }
    for (const auto& f : bundle.failures)
        std::cerr << "warning: " << f << '\n';
    std::cout << "max residual " << g17(validate_bundle(bundle)) << ", output in " << out.string() << '\n';
    return 0;
}

int cmd_solve(const ProblemArgs& p, const std::string& seed, std::optional<double> amplitude, const std::string& out)
{
    const auto w = build_weight(p.kappa, p.h, p.eps);
    const Discretization d(w, build_uniform_mesh(p.n));
    NewtonResult r;
    std::string used = seed;
    if (seed == "sine") {
        const double a = amplitude.value_or(p.lambda < d.principal_eigenvalue() ? sine_amplitude(d, p.lambda) : 1.0);
        r = newton_fixed_lambda(d, p.lambda, sine_seed(d.mesh(), a));
    }
    else if (seed.starts_with("mask:")) {
        const auto census = mask_census(d, p.lambda, {PeakMask::from_string(seed.substr(5))});
        if (census.empty()) {
            std::cerr << "no solution with peak mask " << seed.substr(5) << '\n';
            return 1;
        }
        r.state = {p.lambda, census.front().u};
        r.status = NewtonStatus::Converged;
        r.residual_norm = norm2(d.residual(p.lambda, r.state.u));
        used += " (" + census.front().seed + ")";
    }
    else if (seed.starts_with("well:")) {
        r = newton_fixed_lambda(d, p.lambda, well_seed(w, d.mesh(), bits_of(seed.substr(5)), p.lambda));
    }
    else {
        throw Error(ErrorKind::Config, "unknown seed '" + seed + "' (sine, mask:<bits>, well:<bits>)");
    }
    std::cout << "seed,status,iterations,lambda,l2_norm,residual,min_u,peak_mask\n";
    const auto& u = r.state.u;
    const double umin = u.empty() ? 0.0 : *std::min_element(u.begin(), u.end());
    std::cout << csv_field(used) << ',' << to_string(r.status) << ',' << r.iterations << ',' << g17(p.lambda) << ','
              << g17(d.l2_norm(u)) << ',' << g17(r.residual_norm) << ',' << g17(umin) << ','
              << peak_mask_of(d, u).to_string() << '\n';
    if (!out.empty())
        write_text(out, profile_text(d.mesh(), u, "solve " + used + " lambda " + g17(p.lambda)));
    return r.converged() ? 0 : 1;
}

int cmd_shoot(const ProblemArgs& p, std::size_t grid, std::optional<double> v0_max, const std::string& out)
{
    const auto w = build_weight(p.kappa, p.h, p.eps);
    ShootOptions opt;
    opt.grid_size = grid;
    opt.v0_max = v0_max;
    const auto r = shoot_count(w, p.lambda, opt);
    std::cout << "v0,lambda,count\n";
    for (double v0 : r.roots)
        std::cout << g17(v0) << ',' << g17(p.lambda) << ',' << r.count << '\n';
    if (r.roots.empty())
        std::cout << ',' << g17(p.lambda) << ",0\n";
    for (const auto& warn : r.warnings)
        std::cerr << "warning: " << warn << '\n';
    if (!out.empty()) {
        fs::create_directories(out);
        for (std::size_t k = 0; k < r.solutions.size(); ++k) {
            std::string text = "# v0 " + g17(r.roots[k]) + " lambda " + g17(p.lambda) + "\n";
            for (const auto& s : r.solutions[k].samples)
                text += g17(s.x) + ' ' + g17(s.u) + ' ' + g17(s.v) + '\n';
            write_text(fs::path(out) / ("root_" + std::to_string(k) + ".txt"), text);
        }
    }
    return 0;
}

int cmd_eig(const std::vector<std::size_t>& ns, const std::vector<std::size_t>& ks)
{
    std::cout << "n,k,closed_form,det_sign_bisection\n";
    for (std::size_t n : ns) {
        const Discretization d(build_weight(1, 0.1, 1.0), build_uniform_mesh(n));
        for (std::size_t k : ks) {
            if (k < 1 || k > n)
                throw Error(ErrorKind::Index, "k must lie in [1, n]");
            const double ev = toeplitz_eigenvalue(n, k);
            // Bracket between the neighbouring eigenvalues; [9, 12] for k = 1.
            const double lo = k == 1 ? 9.0 : 0.5 * (toeplitz_eigenvalue(n, k - 1) + ev);
            const double hi = k == 1 ? 12.0 : k == n ? ev + 1.0 : 0.5 * (ev + toeplitz_eigenvalue(n, k + 1));
            std::cout << n << ',' << k << ',' << g17(ev) << ',' << g17(bisect_linear_eigenvalue(d, lo, hi, 1e-6))
                      << '\n';
        }
    }
    return 0;
}

int cmd_sweep_eps(const std::string& config, const std::vector<double>& eps, const std::string& out)
{
    const auto base = config_or_default(config);
    const auto sweep = run_epsilon_sweep(base, eps);
    std::string csv = "eps,probe_lambda,main_peaks,isola_peaks,lambda_t,note\n";
    for (const auto& r : sweep.report)
        csv += g17(r.eps) + ',' + g17(r.probe_lambda) + ',' + std::to_string(r.main_peaks) + ',' +
               std::to_string(r.isola_peaks) + ',' + opt_g17(r.lambda_t) + ',' + csv_field(r.note) + '\n';
    std::cout << csv;
    if (!out.empty()) {
        write_text(fs::path(out) / "sweep_eps.csv", csv);
        for (const auto& b : sweep.bundles)
            write_bundle(b, fs::path(out) / ("eps_" + g17(b.config.eps)));
    }
    return 0;
}

int cmd_sweep_h(const std::string& config, const std::vector<double>& hs, const std::string& out)
{
    const auto rows = run_h_sweep(config_or_default(config), hs);
    std::string csv = "h,lambda_b,note\n";
    for (const auto& r : rows)
        csv += g17(r.h) + ',' + opt_g17(r.lambda_b) + ',' + csv_field(r.note) + '\n';
    std::cout << csv;
    if (!out.empty())
        write_text(fs::path(out) / "sweep_h.csv", csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Positive solutions of -u'' = lambda u + a(x) u^3 with a degenerate weight"};
    app.set_help_flag("--help", "print this help and exit");  // --h is the well width
    app.require_subcommand(1);

    auto* diagram = app.add_subcommand("diagram", "main branch, branch switching and isola sweep");
    std::string config;
    std::string out;
    std::optional<double> lambda_min;
    diagram->add_option("--config", config, "JSON run configuration (defaults if omitted)");
    diagram->add_option("--out", out, "output directory")->required();
    diagram->add_option("--lambda-min", lambda_min, "override continuation.lambda_min");

    auto* solve = app.add_subcommand("solve", "one Newton solve at fixed lambda");
    ProblemArgs solve_args;
    std::string seed = "sine";
    std::optional<double> amplitude;
    std::string solve_out;
    solve_args.add(solve);
    solve->add_option("--seed", seed, "sine | mask:<bits> | well:<bits>");
    solve->add_option("--amplitude", amplitude, "sine seed amplitude");
    solve->add_option("--out", solve_out, "profile file");

    auto* shoot = app.add_subcommand("shoot", "shooting census of positive solutions");
    ProblemArgs shoot_args;
    std::size_t grid = ShootOptions{}.grid_size;
    std::optional<double> v0_max;
    std::string shoot_out;
    shoot_args.add(shoot);
    shoot->add_option("--grid", grid, "v0 grid size");
    shoot->add_option("--v0-max", v0_max, "largest initial slope");
    shoot->add_option("--out", shoot_out, "directory for per-root profiles");

    auto* eig = app.add_subcommand("eig", "eigenvalues of the discrete Dirichlet Laplacian");
    std::vector<std::size_t> ns{500};
    std::vector<std::size_t> ks{1};
    eig->add_option("--n", ns, "interior nodes (repeatable)");
    eig->add_option("--k", ks, "eigenvalue index (repeatable)");

    auto* sweep_eps = app.add_subcommand("sweep-eps", "isola turning points over eps");
    std::vector<double> eps_values{0.3, 0.5, 0.51, 0.7, 0.9};
    std::string eps_config, eps_out;
    sweep_eps->add_option("--config", eps_config, "base configuration");
    sweep_eps->add_option("--eps", eps_values, "eps values");
    sweep_eps->add_option("--out", eps_out, "output directory");

    auto* sweep_h = app.add_subcommand("sweep-h", "first branch point on the main branch over h");
    std::vector<double> h_values{0.05, 0.1, 0.3, 0.5, 0.8};
    std::string h_config, h_out;
    sweep_h->add_option("--config", h_config, "base configuration");
    sweep_h->add_option("--h", h_values, "h values");
    sweep_h->add_option("--out", h_out, "output directory");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*diagram)
            return cmd_diagram(config, out, lambda_min);
        if (*solve)
            return cmd_solve(solve_args, seed, amplitude, solve_out);
        if (*shoot)
            return cmd_shoot(shoot_args, grid, v0_max, shoot_out);
        if (*eig)
            return cmd_eig(ns, ks);
        if (*sweep_eps)
            return cmd_sweep_eps(eps_config, eps_values, eps_out);
        if (*sweep_h)
            return cmd_sweep_h(h_config, h_values, h_out);
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
