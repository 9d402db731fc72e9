#include "chaosflow/collocation.hpp"

#include "chaosflow/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>

namespace chaosflow
{

namespace
{

PolynomialFamily family_for(Family family, int order)
{
    return PolynomialFamily(family, std::max(order + 1, PolynomialFamily::kDefaultMaxDegree));
}

} // namespace

Eigen::MatrixXd w_matrix(const QuadratureRule& rule, const PolynomialFamily& family)
{
    const int order = rule.level;
    const auto size = static_cast<Eigen::Index>(rule.size());
    Eigen::MatrixXd w(order + 1, size);
    std::vector<double> p(static_cast<std::size_t>(order) + 1);
    for (Eigen::Index j = 0; j < size; ++j)
    {
        family.evaluate_all(rule.nodes[static_cast<std::size_t>(j)], p);
        for (int k = 0; k <= order; ++k)
            w(k, j) = rule.weights[static_cast<std::size_t>(j)] * p[static_cast<std::size_t>(k)];
    }
    return w;
}

Eigen::MatrixXd w_matrix(Family family, int order)
{
    const auto poly = family_for(family, order);
    return w_matrix(gauss_rule(poly, order), poly);
}

Eigen::VectorXd PseudoSpectralSolution::evaluate(double xi) const
{
    const auto poly = family_for(family, order);
    Eigen::VectorXd p(order + 1);
    poly.evaluate_all(xi, {p.data(), static_cast<std::size_t>(p.size())});
    for (int k = 0; k <= order; ++k)
        p[k] /= poly.norm(k);
    return coefficients * p;
}

ChaosField PseudoSpectralSolution::as_chaos_field() const
{
    const auto poly = family_for(family, order);
    Eigen::MatrixXd modes = coefficients;
    for (int k = 0; k <= order; ++k)
        modes.col(k) /= poly.norm(k);
    return {basis, family, std::move(modes)};
}

PseudoSpectralSolution solve_collocation(const PathSolver& solver, const BasisPtr& basis, Family family, int order,
                                         int threads)
{
    if (order < 0)
        throw DegreeError("chaos order must be non-negative");
    const auto poly = family_for(family, order);
    PseudoSpectralSolution out;
    out.basis = basis;
    out.family = family;
    out.order = order;
    out.rule = gauss_rule(poly, order);
    out.w = w_matrix(out.rule, poly);

    const std::size_t nodes = out.rule.size();
    std::vector<PathSolution> solutions(nodes);
    std::atomic<int> calls{0};
    parallel_for(nodes, threads, [&](std::size_t j) {
        ++calls;
        try
        {
            solutions[j] = solver(out.rule.nodes[j]);
        }
        catch (const SolverError& e)
        {
            char where[96];
            std::snprintf(where, sizeof where, "collocation node %zu (xi = %.17g) failed: ", j, out.rule.nodes[j]);
            throw SolverError(where + std::string(e.what()), e.residual(), e.iterations());
        }
    });
    out.solver_calls = calls.load();

    out.node_solutions.resize(basis->dimension(), static_cast<Eigen::Index>(nodes));
    for (std::size_t j = 0; j < nodes; ++j)
    {
        if (solutions[j].field.basis() != basis)
            throw BasisMismatch("path solver returned a field on a different basis");
        out.node_solutions.col(static_cast<Eigen::Index>(j)) = solutions[j].field.coefficients();
        out.node_reports.push_back(solutions[j].report);
    }
    out.coefficients = discrete_projection_coeffs(out.node_solutions, out.rule, poly, order);
    return out;
}

PseudoSpectralSolution solve_collocation(const DiscreteForcing& forcing, Family family, int order,
                                         const SolverConfig& config, int threads)
{
    const PathSolver solver = [&](double xi) { return solve_deterministic(forcing, xi, config); };
    return solve_collocation(solver, forcing.basis(), family, order, threads);
}

double interpolation_residual(const PseudoSpectralSolution& sol)
{
    double worst = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < sol.rule.size(); ++j)
    {
        const Eigen::VectorXd u = sol.node_solutions.col(static_cast<Eigen::Index>(j));
        worst = std::max(worst, h1_distance(*sol.basis, sol.evaluate(sol.rule.nodes[j]), u));
        scale = std::max(scale, h1_seminorm(*sol.basis, u));
    }
    if (scale == 0.0)
        return worst == 0.0 ? 0.0 : INFINITY;
    return worst / scale;
}

} // namespace chaosflow
