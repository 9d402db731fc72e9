#pragma once

#include "chaosflow/fieldspace.hpp"
#include "chaosflow/forcing.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace chaosflow
{

enum class Strategy
{
    Picard,
    NewtonDamped,
};

std::string to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);

struct SolverConfig
{
    double nu = 1.0;
    double tol_rel = 1e-12;
    int max_iter = 200;
    Strategy strategy = Strategy::Picard;
    double damping = 1.0;
    /// Multiplies the convection term; 0 turns the problem into Stokes.
    double convection_scale = 1.0;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

/// theta = sqrt|G| |f|_{-1,2} / (2 nu^2) with the Poincare dual bound, and the
/// implied velocity bound 2 nu theta / sqrt|G| = nu theta.
struct Certificate
{
    double theta = 0.0;
    double velocity_bound = 0.0;
    bool certified() const { return theta < 1.0; }
};

Certificate smallness_certificate(double poincare_bound, double nu);
Certificate smallness_certificate(const DiscreteForcing& forcing, double xi, double nu);

struct SolveReport
{
    int iterations = 0;
    /// |nu S z + n(z) + b|_{S^-1} / max(|b|_{S^-1}, 1e-300)
    double residual = 0.0;
    Certificate certificate;
    /// nu |u|_{1,2} / poincare bound (0 when both vanish)
    double bound_ratio = 0.0;
};

class SolverError : public std::runtime_error
{
public:
    SolverError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations)
    {
    }
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

struct PathSolution
{
    VelocityField field;
    SolveReport report;
};

/// n(z)_e = a(u, u, h_e), scaled by the convection factor of the config.
Eigen::VectorXd residual_vector(const StreamBasis& basis, const Eigen::VectorXd& z, const Eigen::VectorXd& load,
                                const SolverConfig& config);
double relative_residual(const StreamBasis& basis, const Eigen::VectorXd& z, const Eigen::VectorXd& load,
                         const SolverConfig& config);

/// Solve nu S z + n(z) + b = 0 for a given load b. `poincare_bound` only feeds the report.
PathSolution solve_load(const BasisPtr& basis, const Eigen::VectorXd& load, double poincare_bound,
                        const SolverConfig& config);

PathSolution solve_deterministic(const DiscreteForcing& forcing, double xi, const SolverConfig& config);

struct LipschitzCheck
{
    double lhs = 0.0; ///< |u(xi1) - u(xi2)|_{1,2}
    double rhs = 0.0; ///< sqrt2 |f(xi1) - f(xi2)|_{L2} / (nu (1 - theta))
    double theta = 0.0;
    bool verdict = false;
};

/// Stability of the solution map in xi. A negative theta means "use the
/// larger of the two measured certificates".
LipschitzCheck lipschitz_pair_check(const DiscreteForcing& forcing, double xi1, double xi2,
                                    const SolverConfig& config, double theta = -1.0);

} // namespace chaosflow
