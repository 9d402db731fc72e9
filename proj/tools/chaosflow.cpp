#include "chaosflow/collocation.hpp"
#include "chaosflow/config.hpp"
#include "chaosflow/errorlab.hpp"
#include "chaosflow/galerkin.hpp"
#include "chaosflow/io.hpp"
#include "chaosflow/parallel.hpp"
#include "chaosflow/triple_product.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

using namespace chaosflow;

namespace
{

enum Exit
{
    kOk = 0,
    kSolverFailure = 1,
    kCertificateFailure = 2,
    kBadConfig = 3,
};

struct Options
{
    int threads = 0;
    std::string config_path;
    std::string out_dir;
    std::string family;
    int order = -1;
    double xi = 0.0;
    double threshold = kTripleZeroThreshold;
    std::string out_file;
    bool svg = false;
};

struct Context
{
    RunConfig config;
    BasisPtr basis;
    std::unique_ptr<DiscreteForcing> forcing;
    std::string dir;
    int threads = 1;

    Manifest manifest(const std::string& kind) const
    {
        return {{"kind", kind},
                {"family", to_string(config.family)},
                {"N", std::to_string(config.order)},
                {"K", std::to_string(config.K)},
                {"Q", std::to_string(config.resolved_q())},
                {"nu", format_double(config.solver.nu)},
                {"config_hash", config.hash()}};
    }
    std::string path(const std::string& name) const { return (std::filesystem::path(dir) / name).string(); }
};

Context load_context(const Options& opt)
{
    Context ctx;
    ctx.config = load_config(opt.config_path);
    if (!opt.family.empty())
    {
        ctx.config.family = parse_family(opt.family);
        ctx.config.study.family = ctx.config.family;
    }
    if (opt.order >= 0)
        ctx.config.order = opt.order;
    if (opt.svg)
        ctx.config.svg = true;
    ctx.dir = opt.out_dir.empty() ? ctx.config.output_dir : opt.out_dir;
    std::filesystem::create_directories(ctx.dir);
    ctx.threads = resolve_threads(opt.threads);
    ctx.config.study.threads = ctx.threads;
    ctx.basis = build_basis(ctx.config.K, ctx.config.resolved_q());
    ctx.forcing = std::make_unique<DiscreteForcing>(ctx.config.forcing, ctx.basis);
    return ctx;
}

void emit(const std::string& out_file, const std::string& text)
{
    if (out_file.empty())
        std::cout << text;
    else
        write_file(out_file, text);
}

int cmd_quad(const Options& opt)
{
    const PolynomialFamily poly(parse_family(opt.family.empty() ? "legendre" : opt.family));
    std::ostringstream out;
    write_quadrature_csv(out, gauss_rule(poly, std::max(opt.order, 0)));
    emit(opt.out_file, out.str());
    return kOk;
}

int cmd_triple(const Options& opt)
{
    const auto tensor =
        triple_products(parse_family(opt.family.empty() ? "legendre" : opt.family), std::max(opt.order, 0), opt.threshold);
    std::ostringstream out;
    write_triple_csv(out, tensor);
    emit(opt.out_file, out.str());
    return kOk;
}

int cmd_solve(const Options& opt)
{
    const Context ctx = load_context(opt);
    const auto sol = solve_deterministic(*ctx.forcing, opt.xi, ctx.config.solver);
    auto manifest = ctx.manifest("field");
    manifest.emplace_back("xi", format_double(opt.xi));
    std::ostringstream field;
    write_field_csv(field, sol.field, manifest);
    write_file(ctx.path("solve_field.csv"), field.str());

    const auto& r = sol.report;
    std::ostringstream row;
    row << "xi,iterations,residual,theta,certified,bound_ratio,h1_norm\n"
        << format_double(opt.xi) << "," << r.iterations << "," << format_double(r.residual) << ","
        << format_double(r.certificate.theta) << "," << int(r.certificate.certified()) << ","
        << format_double(r.bound_ratio) << "," << format_double(h1_seminorm(*sol.field.basis(), sol.field.coefficients())) << "\n";
    write_file(ctx.path("solve_report.csv"), row.str());
    std::cout << row.str();
    return r.certificate.certified() ? kOk : kCertificateFailure;
}

int cmd_galerkin(const Options& opt)
{
    const Context ctx = load_context(opt);
    const auto& cfg = ctx.config;
    const auto sol = solve_galerkin(*ctx.forcing, cfg.family, cfg.order, cfg.solver);
    const auto grid = xi_grid(cfg.family, cfg.study.grid_count, cfg.half_range);
    const double theta = sup_theta(*ctx.forcing, cfg.solver.nu, grid);
    const double epsilon = uniqueness_margin(sol.field, cfg.solver.nu, grid);
    auto manifest = ctx.manifest("galerkin");
    std::ostringstream field;
    write_chaos_csv(field, sol.field, manifest);
    write_file(ctx.path("galerkin.csv"), field.str());

    const auto& r = sol.report;
    std::ostringstream row;
    row << "N,iterations,residual,chaos_norm,forcing_bound,bound_ratio,theta,epsilon\n"
        << cfg.order << "," << r.iterations << "," << format_double(r.residual) << "," << format_double(r.chaos_norm)
        << "," << format_double(r.forcing_bound) << "," << format_double(r.bound_ratio) << ","
        << format_double(theta) << "," << format_double(epsilon) << "\n";
    write_file(ctx.path("galerkin_report.csv"), row.str());
    std::cout << row.str();
    return theta < 1.0 && epsilon > 0.0 ? kOk : kCertificateFailure;
}

int cmd_collocate(const Options& opt)
{
    const Context ctx = load_context(opt);
    const auto& cfg = ctx.config;
    const auto sol = solve_collocation(*ctx.forcing, cfg.family, cfg.order, cfg.solver, ctx.threads);
    std::ostringstream field, nodes, report;
    write_pseudospectral_csv(field, sol, ctx.manifest("chaos"));
    write_file(ctx.path("collocation.csv"), field.str());
    write_node_csv(nodes, sol.rule);
    write_file(ctx.path("collocation_nodes.csv"), nodes.str());

    bool certified = true;
    report << "j,xi,iterations,residual,theta,certified\n";
    for (std::size_t j = 0; j < sol.node_reports.size(); ++j)
    {
        const auto& r = sol.node_reports[j];
        certified = certified && r.certificate.certified();
        report << j << "," << format_double(sol.rule.nodes[j]) << "," << r.iterations << ","
               << format_double(r.residual) << "," << format_double(r.certificate.theta) << ","
               << int(r.certificate.certified()) << "\n";
    }
    write_file(ctx.path("collocation_report.csv"), report.str());
    std::cout << report.str();
    std::printf("interpolation_residual=%.17g\n", interpolation_residual(sol));
    return certified ? kOk : kCertificateFailure;
}

int cmd_study(const Options& opt)
{
    const Context ctx = load_context(opt);
    const auto& cfg = ctx.config;
    const auto report = run_study(*ctx.forcing, cfg.solver, cfg.study);
    auto manifest = ctx.manifest("study");
    manifest.erase(manifest.begin() + 2); // N is per row
    std::ostringstream csv;
    write_study_csv(csv, report, manifest);
    write_file(ctx.path("study.csv"), csv.str());
    if (cfg.svg)
    {
        std::ostringstream svg;
        write_study_svg(svg, report);
        write_file(ctx.path("study.svg"), svg.str());
    }
    std::cout << csv.str();
    return report.theta < 1.0 ? kOk : kCertificateFailure;
}

int cmd_compare(const Options& opt)
{
    const Context ctx = load_context(opt);
    const auto& cfg = ctx.config;
    const auto report =
        compare_methods(*ctx.forcing, cfg.solver, cfg.family, cfg.order, cfg.study.m_ref, ctx.threads);
    const auto grid = xi_grid(cfg.family, cfg.study.grid_count, cfg.half_range);
    const double theta = sup_theta(*ctx.forcing, cfg.solver.nu, grid);
    auto manifest = ctx.manifest("compare");
    manifest.emplace_back("theta", format_double(theta));
    std::ostringstream csv;
    write_compare_csv(csv, report, manifest);
    write_file(ctx.path("compare.csv"), csv.str());
    std::cout << csv.str();
    return theta < 1.0 ? kOk : kCertificateFailure;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"chaosflow: polynomial chaos for the randomly forced steady Navier-Stokes problem"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--threads", opt.threads, "worker threads (default: CHAOSFLOW_THREADS, else 1)")
        ->check(CLI::NonNegativeNumber);

    const auto add_family = [&](CLI::App* sub) {
        sub->add_option("--family", opt.family, "hermite or legendre");
        sub->add_option("--chaos-order,--order", opt.order, "chaos order N")->check(CLI::NonNegativeNumber);
    };
    const auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "run configuration file")->required();
        sub->add_option("--out-dir", opt.out_dir, "output directory (default: [output] dir)");
    };

    auto* quad = app.add_subcommand("quad", "Gauss nodes and weights as CSV");
    add_family(quad);
    quad->add_option("--out", opt.out_file, "output file (default: stdout)");
    auto* triple = app.add_subcommand("triple", "sparse triple-product tensor as CSV");
    add_family(triple);
    triple->add_option("--threshold", opt.threshold, "zero threshold");
    triple->add_option("--out", opt.out_file, "output file (default: stdout)");
    auto* solve = app.add_subcommand("solve", "pathwise solve at one xi");
    add_config(solve);
    solve->add_option("--xi", opt.xi, "value of xi")->required();
    auto* galerkin = app.add_subcommand("galerkin", "intrusive Galerkin solve");
    add_config(galerkin);
    add_family(galerkin);
    auto* collocate = app.add_subcommand("collocate", "pseudo-spectral collocation");
    add_config(collocate);
    add_family(collocate);
    auto* study = app.add_subcommand("study", "convergence study");
    add_config(study);
    study->add_option("--family", opt.family, "hermite or legendre");
    study->add_flag("--svg", opt.svg, "also write study.svg");
    auto* compare = app.add_subcommand("compare", "Galerkin against collocation");
    add_config(compare);
    add_family(compare);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        return app.exit(e);
    }

    try
    {
        if (quad->parsed())
            return cmd_quad(opt);
        if (triple->parsed())
            return cmd_triple(opt);
        if (solve->parsed())
            return cmd_solve(opt);
        if (galerkin->parsed())
            return cmd_galerkin(opt);
        if (collocate->parsed())
            return cmd_collocate(opt);
        if (study->parsed())
            return cmd_study(opt);
        if (compare->parsed())
            return cmd_compare(opt);
    }
    catch (const ConfigError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kBadConfig;
    }
    catch (const QuadratureError& e)
    {
        std::cerr << "error: invalid configuration: " << e.what() << "\n";
        return kBadConfig;
    }
    catch (const UnsupportedForcing& e)
    {
        std::cerr << "error: invalid configuration: " << e.what() << "\n";
        return kBadConfig;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kSolverFailure;
    }
    return kOk;
}
