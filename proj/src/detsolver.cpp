#include "chaosflow/detsolver.hpp"

#include <Eigen/LU>

#include <cmath>

namespace chaosflow
{

std::string to_string(Strategy strategy)
{
    return strategy == Strategy::Picard ? "picard" : "newton";
}

Strategy parse_strategy(std::string_view name)
{
    if (name == "picard")
        return Strategy::Picard;
    if (name == "newton" || name == "newton_damped")
        return Strategy::NewtonDamped;
    throw std::invalid_argument("unknown solver strategy '" + std::string(name) + "'");
}

void SolverConfig::validate() const
{
    if (!(nu > 0.0) || !std::isfinite(nu))
        throw std::invalid_argument("viscosity nu must be positive");
    if (!(tol_rel > 0.0 && tol_rel < 1.0))
        throw std::invalid_argument("tol must lie in (0, 1)");
    if (max_iter < 1)
        throw std::invalid_argument("max_iter must be at least 1");
    if (!(damping > 0.0 && damping <= 1.0))
        throw std::invalid_argument("damping must lie in (0, 1]");
    if (!std::isfinite(convection_scale))
        throw std::invalid_argument("convection scale must be finite");
}

Certificate smallness_certificate(double poincare_bound, double nu)
{
    const double theta = std::sqrt(DomainSpec::area) * poincare_bound / (2.0 * nu * nu);
    return {theta, 2.0 * nu * theta / std::sqrt(DomainSpec::area)};
}

Certificate smallness_certificate(const DiscreteForcing& forcing, double xi, double nu)
{
    return smallness_certificate(forcing.dual_norms_at(xi).poincare_bound, nu);
}

namespace
{

double dual_norm(const StreamBasis& basis, const Eigen::VectorXd& r)
{
    return std::sqrt(std::max(0.0, r.dot(basis.stiffness_factor().solve(r))));
}

} // namespace

Eigen::VectorXd residual_vector(const StreamBasis& basis, const Eigen::VectorXd& z, const Eigen::VectorXd& load,
                                const SolverConfig& config)
{
    Eigen::VectorXd r = config.nu * (basis.stiffness() * z) + load;
    if (config.convection_scale != 0.0)
        r += config.convection_scale * convection(basis, z, z);
    return r;
}

double relative_residual(const StreamBasis& basis, const Eigen::VectorXd& z, const Eigen::VectorXd& load,
                         const SolverConfig& config)
{
    return dual_norm(basis, residual_vector(basis, z, load, config)) / std::max(dual_norm(basis, load), 1e-300);
}

PathSolution solve_load(const BasisPtr& basis, const Eigen::VectorXd& load, double poincare_bound,
                        const SolverConfig& config)
{
    config.validate();
    if (load.size() != basis->dimension())
        throw std::invalid_argument("load vector does not match the basis dimension");
    const auto& S = basis->stiffness();
    const auto& llt = basis->stiffness_factor();
    const double load_norm = std::max(dual_norm(*basis, load), 1e-300);

    // Stokes start
    Eigen::VectorXd z = -llt.solve(load) / config.nu;
    int iterations = 1;
    Eigen::VectorXd r = residual_vector(*basis, z, load, config);
    double residual = dual_norm(*basis, r) / load_norm;

    while (residual > config.tol_rel)
    {
        if (iterations >= config.max_iter)
            throw SolverError("solver did not converge in " + std::to_string(config.max_iter) +
                                  " iterations (residual " + std::to_string(residual) + ")",
                              residual, iterations);
        if (config.strategy == Strategy::Picard)
        {
            const Eigen::VectorXd rhs = load + config.convection_scale * convection(*basis, z, z);
            const Eigen::VectorXd next = -llt.solve(rhs) / config.nu;
            z = z + config.damping * (next - z);
            r = residual_vector(*basis, z, load, config);
            residual = dual_norm(*basis, r) / load_norm;
        }
        else
        {
            Eigen::MatrixXd J = config.nu * S;
            if (config.convection_scale != 0.0)
                J += config.convection_scale * (convecting_operator(*basis, z) + convected_operator(*basis, z));
            const Eigen::VectorXd step = -J.partialPivLu().solve(r);
            double lambda = config.damping;
            Eigen::VectorXd trial = z + lambda * step;
            Eigen::VectorXd trial_r = residual_vector(*basis, trial, load, config);
            double trial_res = dual_norm(*basis, trial_r) / load_norm;
            for (int halvings = 0; halvings < 20 && !(trial_res < residual); ++halvings)
            {
                lambda *= 0.5;
                trial = z + lambda * step;
                trial_r = residual_vector(*basis, trial, load, config);
                trial_res = dual_norm(*basis, trial_r) / load_norm;
            }
            z = trial;
            r = trial_r;
            residual = trial_res;
        }
        ++iterations;
        if (!std::isfinite(residual))
            throw SolverError("solver diverged (non-finite residual)", residual, iterations);
    }

    PathSolution out{VelocityField(basis, std::move(z)), {}};
    out.report.iterations = iterations;
    out.report.residual = residual;
    out.report.certificate = smallness_certificate(poincare_bound, config.nu);
    const double h1 = field_norms(out.field).h1;
    out.report.bound_ratio = poincare_bound > 0.0 ? config.nu * h1 / poincare_bound : (h1 > 0.0 ? INFINITY : 0.0);
    return out;
}

PathSolution solve_deterministic(const DiscreteForcing& forcing, double xi, const SolverConfig& config)
{
    const auto weights = forcing.factors(xi);
    return solve_load(forcing.basis(), forcing.load_from_weights(weights), forcing.dual_norms(weights).poincare_bound,
                      config);
}

LipschitzCheck lipschitz_pair_check(const DiscreteForcing& forcing, double xi1, double xi2,
                                    const SolverConfig& config, double theta)
{
    if (theta < 0.0)
        theta = std::max(smallness_certificate(forcing, xi1, config.nu).theta,
                         smallness_certificate(forcing, xi2, config.nu).theta);
    if (!(theta < 1.0))
        throw std::domain_error("bounds not applicable: smallness certificate theta >= 1");
    const auto u1 = solve_deterministic(forcing, xi1, config);
    const auto u2 = solve_deterministic(forcing, xi2, config);
    LipschitzCheck out;
    out.theta = theta;
    out.lhs = h1_distance(*forcing.basis(), u1.field.coefficients(), u2.field.coefficients());
    const Eigen::VectorXd dw = forcing.factors(xi1) - forcing.factors(xi2);
    out.rhs = std::sqrt(DomainSpec::poincare_factor) * forcing.l2_norm(dw) / (config.nu * (1.0 - theta));
    out.verdict = out.lhs <= out.rhs + 1e-10;
    return out;
}

} // namespace chaosflow
