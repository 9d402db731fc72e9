#pragma once

#include "chaosflow/chaos_field.hpp"
#include "chaosflow/detsolver.hpp"
#include "chaosflow/orthopoly.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace chaosflow
{

/// Black-box pathwise solver xi -> u(xi).
using PathSolver = std::function<PathSolution(double xi)>;

/// W_kj = w_j P_k(xi_j)
Eigen::MatrixXd w_matrix(const QuadratureRule& rule, const PolynomialFamily& family);
Eigen::MatrixXd w_matrix(Family family, int order);

struct PseudoSpectralSolution
{
    BasisPtr basis;
    Family family;
    int order = 0;
    QuadratureRule rule;
    Eigen::MatrixXd w;
    /// Column k: u_k^{(N)} = sum_j W_kj u(xi_j), summed in ascending j.
    Eigen::MatrixXd coefficients;
    /// Column j: u(xi_j).
    Eigen::MatrixXd node_solutions;
    std::vector<SolveReport> node_reports;
    int solver_calls = 0;

    /// sum_k u_k^{(N)} P_k(xi) / c(k)
    Eigen::VectorXd evaluate(double xi) const;
    VelocityField evaluate_at_xi(double xi) const { return {basis, evaluate(xi)}; }
    /// The same expansion with modes u_k^{(N)} / c(k).
    ChaosField as_chaos_field() const;
};

PseudoSpectralSolution solve_collocation(const PathSolver& solver, const BasisPtr& basis, Family family, int order,
                                         int threads = 1);
PseudoSpectralSolution solve_collocation(const DiscreteForcing& forcing, Family family, int order,
                                         const SolverConfig& config, int threads = 1);

/// max_j |u^{(N)}(xi_j) - u(xi_j)|_{1,2} / max_j |u(xi_j)|_{1,2}, 0 for zero data.
double interpolation_residual(const PseudoSpectralSolution& sol);

} // namespace chaosflow
