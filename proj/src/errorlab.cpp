#include "chaosflow/errorlab.hpp"

#include "chaosflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace chaosflow
{

namespace
{

PolynomialFamily family_for(Family family, int degree)
{
    return PolynomialFamily(family, std::max(degree, PolynomialFamily::kDefaultMaxDegree));
}

ChaosField truncate(const ChaosField& field, int order)
{
    return {field.basis(), field.family(), field.modes().leftCols(order + 1)};
}

ChaosField project_samples(const BasisPtr& basis, const QuadratureRule& rule, const Eigen::MatrixXd& samples,
                           Family family, int order)
{
    const auto poly = family_for(family, 2 * rule.level + 2);
    Eigen::MatrixXd modes = discrete_projection_coeffs(samples, rule, poly, order);
    for (int k = 0; k <= order; ++k)
        modes.col(k) /= poly.norm(k);
    return {basis, family, std::move(modes)};
}

} // namespace

PathCache::PathCache(const DiscreteForcing& forcing, SolverConfig config, int threads)
    : forcing_(forcing), config_(config), threads_(std::max(threads, 1))
{
    config_.validate();
}

Eigen::MatrixXd PathCache::solve(const std::vector<double>& xis)
{
    std::vector<double> missing;
    {
        std::lock_guard lock(mutex_);
        std::set<double> seen;
        for (double xi : xis)
            if (!cache_.count(xi) && seen.insert(xi).second)
                missing.push_back(xi);
    }
    std::vector<Eigen::VectorXd> solved(missing.size());
    parallel_for(missing.size(), threads_, [&](std::size_t i) {
        solved[i] = solve_deterministic(forcing_, missing[i], config_).field.coefficients();
    });
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < missing.size(); ++i)
        cache_.emplace(missing[i], std::move(solved[i]));
    Eigen::MatrixXd out(basis()->dimension(), static_cast<Eigen::Index>(xis.size()));
    for (std::size_t i = 0; i < xis.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = cache_.at(xis[i]);
    return out;
}

Eigen::VectorXd PathCache::solve(double xi) { return solve(std::vector<double>{xi}).col(0); }

PathSolver PathCache::solver() const
{
    auto* self = const_cast<PathCache*>(this);
    return [self](double xi) {
        const Eigen::VectorXd z = self->solve(xi);
        PathSolution out{VelocityField(self->basis(), z), {}};
        out.report.residual = relative_residual(*self->basis(), z, self->forcing_.load(xi), self->config_);
        out.report.certificate = smallness_certificate(self->forcing_, xi, self->config_.nu);
        return out;
    };
}

int PathCache::solves() const
{
    std::lock_guard lock(mutex_);
    return static_cast<int>(cache_.size());
}

QuadratureRule reference_rule(Family family, int level, bool split)
{
    if (split)
        return split_rule(family, level);
    return gauss_rule(family_for(family, level + 1), level);
}

ReferenceProjection reference_projection(PathCache& paths, Family family, int order, int m_ref, double guard)
{
    if (m_ref < order)
        throw std::invalid_argument("reference level must be at least the chaos order");
    const bool split = !paths.forcing().spec().smooth();
    const auto& basis = paths.basis();

    auto rule = reference_rule(family, m_ref, split);
    Eigen::MatrixXd samples = paths.solve(rule.nodes);
    ChaosField projection = project_samples(basis, rule, samples, family, order);

    const auto fine_rule = reference_rule(family, 2 * m_ref, split);
    const ChaosField fine = project_samples(basis, fine_rule, paths.solve(fine_rule.nodes), family, order);
    const auto poly = family_for(family, order);
    double change = 0.0;
    for (int k = 0; k <= order; ++k)
        change = std::max(change, std::sqrt(poly.norm(k)) *
                                      h1_distance(*basis, projection.modes().col(k), fine.modes().col(k)));
    // relative to |u|_H on the reference rule
    double scale = 0.0;
    for (std::size_t j = 0; j < rule.size(); ++j)
        scale += rule.weights[j] * std::pow(h1_seminorm(*basis, samples.col(static_cast<Eigen::Index>(j))), 2);
    scale = std::sqrt(scale);
    if (scale > 0.0)
        change /= scale;
    if (change > guard)
    {
        char msg[160];
        std::snprintf(msg, sizeof msg, "reference under-resolved: doubling M_ref=%d changes the modes by %.3g", m_ref,
                      change);
        throw ReferenceError(msg);
    }
    return {std::move(rule), std::move(samples), std::move(projection), change};
}

std::vector<double> delta_points(Family family, int grid_count, double half_range, const std::vector<double>& extra)
{
    auto points = xi_grid(family, grid_count, half_range);
    points.insert(points.end(), extra.begin(), extra.end());
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return points;
}

double delta_sup(PathCache& paths, const ChaosField& approx, const std::vector<double>& points)
{
    if (points.empty())
        throw std::invalid_argument("delta needs at least one xi point");
    const Eigen::MatrixXd u = paths.solve(points);
    double sup = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        sup = std::max(sup, h1_distance(*paths.basis(), u.col(static_cast<Eigen::Index>(i)), approx.evaluate(points[i])));
    return sup;
}

double expected_sq_error(const ReferenceProjection& ref, const StreamBasis& basis, const ChaosField& approx)
{
    double acc = 0.0;
    for (std::size_t j = 0; j < ref.rule.size(); ++j)
    {
        const double d = h1_distance(basis, ref.samples.col(static_cast<Eigen::Index>(j)), approx.evaluate(ref.rule.nodes[j]));
        acc += ref.rule.weights[j] * d * d;
    }
    return acc;
}

CollocationBound check_bound_collocation(const ReferenceProjection& ref, const PseudoSpectralSolution& ps,
                                         double delta)
{
    const int order = ps.order;
    if (order > ref.projection.order())
        throw std::invalid_argument("reference projection has lower order than the collocation solution");
    const auto& basis = *ps.basis;
    const ChaosField u_n = truncate(ref.projection, order);
    const ChaosField u_ps = ps.as_chaos_field();
    const auto poly = family_for(ps.family, order);

    CollocationBound out{};
    out.delta = delta;
    out.proj_err2 = std::max(0.0, expected_sq_error(ref, basis, u_n));
    out.ps_err2 = std::max(0.0, expected_sq_error(ref, basis, u_ps));
    for (int k = 0; k <= order; ++k)
    {
        const double d = h1_distance(basis, u_n.modes().col(k), u_ps.modes().col(k));
        out.aliasing2 += poly.norm(k) * d * d;
    }
    out.lhs = out.ps_err2;
    out.rhs = out.proj_err2 + order * delta * delta;
    out.slack = out.rhs - out.lhs;
    out.weak_rhs = (1.0 + order) * delta * delta;
    out.decomposition_gap =
        std::abs(out.ps_err2 - out.proj_err2 - out.aliasing2) / std::max(out.ps_err2, 1e-300);
    return out;
}

GalerkinBound check_bound_galerkin(const ReferenceProjection& ref, const ChaosField& galerkin, double theta,
                                   double epsilon)
{
    if (!(theta < 1.0) || !(epsilon > 0.0))
        throw BoundsNotApplicable("bounds not applicable: need theta < 1 and epsilon_N > 0");
    if (galerkin.order() > ref.projection.order())
        throw std::invalid_argument("reference projection has lower order than the Galerkin solution");
    const auto& basis = *galerkin.basis();
    const ChaosField u_n = truncate(ref.projection, galerkin.order());
    GalerkinBound out{};
    out.theta = theta;
    out.epsilon = epsilon;
    out.proj_gap = chaos_distance(u_n, galerkin);
    out.proj_err = std::sqrt(std::max(0.0, expected_sq_error(ref, basis, u_n)));
    out.galerkin_err = std::sqrt(std::max(0.0, expected_sq_error(ref, basis, galerkin)));
    out.factor = (theta + 1.0 - epsilon) / epsilon;
    out.gap_bound_rhs = out.factor * out.proj_err;
    out.gap_bound_slack = out.gap_bound_rhs - out.proj_gap;
    out.error_bound_rhs = (1.0 + out.factor) * out.proj_err;
    out.error_bound_slack = out.error_bound_rhs - out.galerkin_err;
    return out;
}

double sup_theta(const DiscreteForcing& forcing, double nu, const std::vector<double>& points)
{
    double sup = 0.0;
    for (double xi : points)
        sup = std::max(sup, smallness_certificate(forcing, xi, nu).theta);
    return sup;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& series)
{
    if (series.size() < 3)
        throw std::invalid_argument("rate fit needs at least three points");
    const auto n = static_cast<Eigen::Index>(series.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const auto [x, v] = series[static_cast<std::size_t>(i)];
        if (!(x > 0.0) || !(v > 0.0))
            throw std::invalid_argument("rate fit needs positive orders and values");
        A(i, 0) = 1.0;
        A(i, 1) = -std::log(x);
        y[i] = std::log(v);
    }
    const Eigen::Vector2d sol = A.colPivHouseholderQr().solve(y);
    const double rms = std::sqrt((A * sol - y).squaredNorm() / static_cast<double>(n));
    return {sol[1], std::exp(sol[0]), rms};
}

int StudyConfig::resolved_m_ref() const
{
    const int max_order = orders.empty() ? 0 : *std::max_element(orders.begin(), orders.end());
    return m_ref > 0 ? m_ref : 4 * max_order + 16;
}

void StudyConfig::validate() const
{
    if (orders.empty())
        throw std::invalid_argument("study needs at least one chaos order");
    for (int n : orders)
        if (n < 0)
            throw std::invalid_argument("chaos orders must be non-negative");
    const int max_order = *std::max_element(orders.begin(), orders.end());
    if (resolved_m_ref() < 2 * max_order + 8)
        throw std::invalid_argument("M_ref must be at least 2 max(N) + 8");
    if (grid_count < 101)
        throw std::invalid_argument("xi grid needs at least 101 points");
    if (!(half_range > 0.0))
        throw std::invalid_argument("half range must be positive");
}

StudyReport run_study(const DiscreteForcing& forcing, const SolverConfig& config, const StudyConfig& study)
{
    study.validate();
    PathCache paths(forcing, config, resolve_threads(study.threads));
    const int max_order = *std::max_element(study.orders.begin(), study.orders.end());
    const int m_ref = study.resolved_m_ref();
    const auto ref = reference_projection(paths, study.family, max_order, m_ref);
    const auto grid = xi_grid(study.family, study.grid_count, study.half_range);

    StudyReport report{study.family, m_ref, study.grid_count, config.nu, sup_theta(forcing, config.nu, grid),
                       ref.doubling_change, 0.0, {}, 0};
    const auto fine_grid = xi_grid(study.family, 2 * study.grid_count - 1, study.half_range);

    for (int order : study.orders)
    {
        StudyRow row;
        row.order = order;
        const auto ps = solve_collocation(paths.solver(), forcing.basis(), study.family, order, 1);
        const ChaosField u_n = truncate(ref.projection, order);
        const auto points = delta_points(study.family, study.grid_count, study.half_range, ps.rule.nodes);
        const double delta = delta_sup(paths, u_n, points);
        row.collocation = check_bound_collocation(ref, ps, delta);
        row.interpolation_residual = interpolation_residual(ps);

        if (study.grid_check)
        {
            std::vector<double> fine = fine_grid;
            fine.insert(fine.end(), ps.rule.nodes.begin(), ps.rule.nodes.end());
            const double fine_delta = delta_sup(paths, u_n, fine);
            if (fine_delta > 0.0)
                report.grid_refinement_change =
                    std::max(report.grid_refinement_change, (fine_delta - delta) / fine_delta);
        }

        if (study.galerkin)
        {
            try
            {
                const auto sol = solve_galerkin(forcing, study.family, order, config);
                row.galerkin_run = true;
                row.galerkin_iterations = sol.report.iterations;
                const double epsilon = uniqueness_margin(sol.field, config.nu, grid);
                row.galerkin_certified = report.theta < 1.0 && epsilon > 0.0;
                if (row.galerkin_certified)
                    row.galerkin = check_bound_galerkin(ref, sol.field, report.theta, epsilon);
                else
                {
                    row.galerkin.theta = report.theta;
                    row.galerkin.epsilon = epsilon;
                }
            }
            catch (const SolverError&)
            {
                row.galerkin_run = false;
            }
        }
        report.rows.push_back(row);
    }
    report.path_solves = paths.solves();
    return report;
}

std::vector<NamedRate> study_rates(const StudyReport& report)
{
    std::vector<NamedRate> out;
    const auto fit = [&](const std::string& name, auto value) {
        std::vector<std::pair<double, double>> series;
        for (const auto& row : report.rows)
            if (row.order > 0 && value(row) > 0.0)
                series.emplace_back(row.order, value(row));
        if (series.size() >= 3)
            out.push_back({name, rate_fit(series)});
    };
    fit("delta", [](const StudyRow& r) { return r.collocation.delta; });
    fit("ps_err2", [](const StudyRow& r) { return r.collocation.ps_err2; });
    fit("proj_err2", [](const StudyRow& r) { return r.collocation.proj_err2; });
    return out;
}

CompareReport compare_methods(const DiscreteForcing& forcing, const SolverConfig& config, Family family, int order,
                              int m_ref, int threads)
{
    if (order < 0)
        throw std::invalid_argument("chaos order must be non-negative");
    const int level = m_ref > 0 ? m_ref : 4 * order + 16;
    PathCache paths(forcing, config, resolve_threads(threads));
    const auto ref = reference_projection(paths, family, order, level);
    const auto gal = solve_galerkin(forcing, family, order, config);
    const auto ps = solve_collocation(paths.solver(), forcing.basis(), family, order, 1).as_chaos_field();

    CompareReport report{family, order, level, {}, 0.0, 0.0, 0.0, gal.report};
    const PolynomialFamily poly(family);
    const Eigen::MatrixXd& S = forcing.basis()->stiffness();
    for (int l = 0; l <= order; ++l)
    {
        const Eigen::VectorXd d = gal.field.modes().col(l) - ps.modes().col(l);
        report.mode_distance.push_back(std::sqrt(std::max(0.0, poly.norm(l) * d.dot(S * d))));
    }
    report.gap = chaos_distance(gal.field, ps);
    report.galerkin_err = std::sqrt(expected_sq_error(ref, *forcing.basis(), gal.field));
    report.collocation_err = std::sqrt(expected_sq_error(ref, *forcing.basis(), ps));
    return report;
}

} // namespace chaosflow
