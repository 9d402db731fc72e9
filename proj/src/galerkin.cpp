#include "chaosflow/galerkin.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace chaosflow
{

namespace
{

std::vector<double> family_norms(Family family, int order)
{
    const PolynomialFamily poly(family, std::max(order, PolynomialFamily::kDefaultMaxDegree));
    std::vector<double> out;
    for (int l = 0; l <= order; ++l)
        out.push_back(poly.norm(l));
    return out;
}

} // namespace

ChaosForcing project_forcing(const DiscreteForcing& forcing, Family family, int order)
{
    const int R = forcing.term_count();
    ChaosForcing out{family, order, Eigen::MatrixXd::Zero(R, order + 1), {}, 0.0};
    for (int r = 0; r < R; ++r)
    {
        const auto coeffs = project_factor(forcing.spec().terms[static_cast<std::size_t>(r)].factor, family, order);
        for (int l = 0; l <= order; ++l)
            out.weights(r, l) = coeffs[static_cast<std::size_t>(l)];
    }
    out.loads = Eigen::MatrixXd::Zero(forcing.basis()->dimension(), order + 1);
    const auto norms = family_norms(family, order);
    double acc = 0.0;
    for (int l = 0; l <= order; ++l)
    {
        out.loads.col(l) = forcing.load_from_weights(out.weights.col(l));
        const double f = forcing.l2_norm(out.weights.col(l));
        acc += norms[static_cast<std::size_t>(l)] * DomainSpec::poincare_factor * f * f;
    }
    out.poincare_bound = std::sqrt(acc);
    return out;
}

std::vector<ModeCoupling> mode_couplings(const TripleProductTensor& tensor, int order)
{
    std::vector<ModeCoupling> out;
    for (const auto& e : tensor.entries())
        if (e.l <= order && e.m <= order && e.n <= order)
            out.push_back({e.l, e.n, e.m, e.value});
    return out;
}

GalerkinSystem::GalerkinSystem(BasisPtr basis, Family family, int order, double threshold)
    : basis_(std::move(basis)), family_(family), order_(order), norms_(family_norms(family, order))
{
    if (order < 0)
        throw DegreeError("chaos order must be non-negative");
    couplings_ = mode_couplings(triple_products(family, order, threshold), order);
}

Eigen::MatrixXd GalerkinSystem::convection_stack(const Eigen::MatrixXd& z) const
{
    const int n = basis_->dimension();
    std::vector<Eigen::MatrixXd> convected;
    convected.reserve(static_cast<std::size_t>(order_) + 1);
    for (int k = 0; k <= order_; ++k)
        convected.push_back(convected_operator(*basis_, z.col(k)));
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, order_ + 1);
    for (const auto& c : couplings_)
        out.col(c.l) += c.coefficient * (convected[static_cast<std::size_t>(c.convecting)] * z.col(c.convected));
    return out;
}

Eigen::MatrixXd GalerkinSystem::residual(const Eigen::MatrixXd& z, const Eigen::MatrixXd& loads,
                                         const SolverConfig& config) const
{
    Eigen::MatrixXd r = config.nu * (basis_->stiffness() * z) + loads;
    if (config.convection_scale != 0.0)
        r += config.convection_scale * convection_stack(z);
    return r;
}

double GalerkinSystem::dual_norm(const Eigen::MatrixXd& r) const
{
    const Eigen::MatrixXd solved = basis_->stiffness_factor().solve(r);
    double acc = 0.0;
    for (int l = 0; l <= order_; ++l)
        acc += norms_[static_cast<std::size_t>(l)] * r.col(l).dot(solved.col(l));
    return std::sqrt(std::max(0.0, acc));
}

Eigen::MatrixXd GalerkinSystem::jacobian(const Eigen::MatrixXd& z, const SolverConfig& config) const
{
    const int n = basis_->dimension();
    const int blocks = order_ + 1;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n * blocks, n * blocks);
    for (int l = 0; l < blocks; ++l)
        J.block(l * n, l * n, n, n) = config.nu * basis_->stiffness();
    if (config.convection_scale == 0.0)
        return J;
    std::vector<Eigen::MatrixXd> convected, convecting;
    for (int k = 0; k < blocks; ++k)
    {
        convected.push_back(convected_operator(*basis_, z.col(k)));
        convecting.push_back(convecting_operator(*basis_, z.col(k)));
    }
    const double s = config.convection_scale;
    for (const auto& c : couplings_)
    {
        // d/dz^k of n(z^k, z^m) is B(z^m), d/dz^m is C(z^k)
        J.block(c.l * n, c.convecting * n, n, n) += s * c.coefficient * convecting[static_cast<std::size_t>(c.convected)];
        J.block(c.l * n, c.convected * n, n, n) += s * c.coefficient * convected[static_cast<std::size_t>(c.convecting)];
    }
    return J;
}

GalerkinSolution GalerkinSystem::solve(const ChaosForcing& forcing, const SolverConfig& config) const
{
    config.validate();
    if (forcing.order != order_ || forcing.family != family_)
        throw std::invalid_argument("chaos forcing does not match the Galerkin system");
    const auto& b = forcing.loads;
    const int n = basis_->dimension();
    const auto& llt = basis_->stiffness_factor();
    const double load_norm = std::max(dual_norm(b), 1e-300);

    // Stokes stack
    Eigen::MatrixXd z = -llt.solve(b) / config.nu;
    int iterations = 1;
    Eigen::MatrixXd r = residual(z, b, config);
    double res = dual_norm(r) / load_norm;

    while (res > config.tol_rel)
    {
        if (iterations >= config.max_iter)
            throw SolverError("Galerkin solver did not converge in " + std::to_string(config.max_iter) +
                                  " iterations (residual " + std::to_string(res) + ")",
                              res, iterations);
        if (config.strategy == Strategy::Picard)
        {
            const Eigen::MatrixXd next = -llt.solve(b + config.convection_scale * convection_stack(z)) / config.nu;
            z += config.damping * (next - z);
            r = residual(z, b, config);
            res = dual_norm(r) / load_norm;
        }
        else
        {
            const Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), r.size());
            const Eigen::VectorXd step = -jacobian(z, config).partialPivLu().solve(rv);
            const Eigen::Map<const Eigen::MatrixXd> dz(step.data(), n, order_ + 1);
            double lambda = config.damping;
            Eigen::MatrixXd trial = z + lambda * dz;
            Eigen::MatrixXd trial_r = residual(trial, b, config);
            double trial_res = dual_norm(trial_r) / load_norm;
            for (int halvings = 0; halvings < 20 && !(trial_res < res); ++halvings)
            {
                lambda *= 0.5;
                trial = z + lambda * dz;
                trial_r = residual(trial, b, config);
                trial_res = dual_norm(trial_r) / load_norm;
            }
            z = std::move(trial);
            r = std::move(trial_r);
            res = trial_res;
        }
        ++iterations;
        if (!std::isfinite(res))
            throw SolverError("Galerkin solver diverged (non-finite residual)", res, iterations);
    }

    GalerkinSolution out{ChaosField(basis_, family_, std::move(z)), {}};
    out.report.iterations = iterations;
    out.report.residual = res;
    out.report.chaos_norm = chaos_norm(out.field);
    out.report.forcing_bound = forcing.poincare_bound;
    out.report.bound_ratio = forcing.poincare_bound > 0.0
                                 ? config.nu * out.report.chaos_norm / forcing.poincare_bound
                                 : (out.report.chaos_norm > 0.0 ? INFINITY : 0.0);
    return out;
}

GalerkinSolution solve_galerkin(const DiscreteForcing& forcing, Family family, int order, const SolverConfig& config)
{
    const GalerkinSystem system(forcing.basis(), family, order);
    return system.solve(project_forcing(forcing, family, order), config);
}

double big_trilinear_A(const ChaosField& u, const ChaosField& v, const ChaosField& w)
{
    if (u.order() != v.order() || u.order() != w.order())
        throw std::invalid_argument("chaos stacks have different orders");
    if (u.family() != v.family() || u.family() != w.family())
        throw std::invalid_argument("chaos stacks use different families");
    if (u.basis() != v.basis() || u.basis() != w.basis())
        throw BasisMismatch("chaos stacks live on different bases");
    const int order = u.order();
    const auto norms = family_norms(u.family(), order);
    const auto& basis = *u.basis();
    std::vector<Eigen::MatrixXd> convected;
    for (int k = 0; k <= order; ++k)
        convected.push_back(convected_operator(basis, u.modes().col(k)));
    double acc = 0.0;
    for (const auto& c : mode_couplings(triple_products(u.family(), order), order))
    {
        const double a = w.modes().col(c.l).dot(convected[static_cast<std::size_t>(c.convecting)] *
                                                 v.modes().col(c.convected));
        acc += norms[static_cast<std::size_t>(c.l)] * c.coefficient * a;
    }
    return acc;
}

double uniqueness_margin(const ChaosField& v, double nu, const std::vector<double>& grid)
{
    if (grid.empty())
        throw std::invalid_argument("uniqueness margin needs a non-empty xi grid");
    const auto norms = v.h1_along(grid);
    const double sup = *std::max_element(norms.begin(), norms.end());
    return 1.0 - std::sqrt(DomainSpec::area) * sup / (2.0 * nu);
}

} // namespace chaosflow
