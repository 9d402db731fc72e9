#pragma once

#include "chaosflow/chaos_field.hpp"
#include "chaosflow/detsolver.hpp"
#include "chaosflow/forcing.hpp"
#include "chaosflow/triple_product.hpp"

#include <Eigen/Dense>

#include <vector>

namespace chaosflow
{

/// Chaos projection of a forcing: f^l = sum_r weights(r, l) F_r and b^l = loads.col(l).
struct ChaosForcing
{
    Family family;
    int order;
    Eigen::MatrixXd weights;
    Eigen::MatrixXd loads;
    /// (sum_l c(l) 2 |f^l|_{L2}^2)^{1/2}, the Poincare bound of the projected forcing.
    double poincare_bound;
};

ChaosForcing project_forcing(const DiscreteForcing& forcing, Family family, int order);

/// One convection term A_{m,k;l} (v^k . grad) v^m of mode l.
struct ModeCoupling
{
    int l;
    int convecting; ///< k
    int convected;  ///< m
    double coefficient;
};

std::vector<ModeCoupling> mode_couplings(const TripleProductTensor& tensor, int order);

struct GalerkinReport
{
    int iterations = 0;
    /// H-weighted dual norm of the stacked residual, relative to the load.
    double residual = 0.0;
    double chaos_norm = 0.0;
    double forcing_bound = 0.0;
    /// nu |v_N|_H / forcing_bound
    double bound_ratio = 0.0;
};

struct GalerkinSolution
{
    ChaosField field;
    GalerkinReport report;
};

/**
 * The coupled system
 *   nu S z^l + sum_{m,k} A_{m,k;l} n(z^k, z^m) + b^l = 0,  l = 0..N,
 * with n(u, v)_e = a(u, v, h_e).
 */
class GalerkinSystem
{
public:
    GalerkinSystem(BasisPtr basis, Family family, int order, double threshold = kTripleZeroThreshold);

    const BasisPtr& basis() const { return basis_; }
    Family family() const { return family_; }
    int order() const { return order_; }
    const std::vector<ModeCoupling>& couplings() const { return couplings_; }
    double norm_c(int l) const { return norms_[static_cast<std::size_t>(l)]; }

    /// Columns: convection term sum_{m,k} A_{m,k;l} n(z^k, z^m) of each mode l.
    Eigen::MatrixXd convection_stack(const Eigen::MatrixXd& z) const;
    Eigen::MatrixXd residual(const Eigen::MatrixXd& z, const Eigen::MatrixXd& loads, const SolverConfig& config) const;
    /// (sum_l c(l) r_l^T S^{-1} r_l)^{1/2}
    double dual_norm(const Eigen::MatrixXd& r) const;

    GalerkinSolution solve(const ChaosForcing& forcing, const SolverConfig& config) const;

private:
    Eigen::MatrixXd jacobian(const Eigen::MatrixXd& z, const SolverConfig& config) const;

    BasisPtr basis_;
    Family family_;
    int order_;
    std::vector<double> norms_;
    std::vector<ModeCoupling> couplings_;
};

GalerkinSolution solve_galerkin(const DiscreteForcing& forcing, Family family, int order, const SolverConfig& config);

/// sum_l c(l) sum_{m,k} A_{m,k;l} a(u^k, v^m, w^l)
double big_trilinear_A(const ChaosField& u, const ChaosField& v, const ChaosField& w);

/// 1 - sup_grid |v_N(xi)|_{1,2} / nu; positive values certify uniqueness.
double uniqueness_margin(const ChaosField& v, double nu, const std::vector<double>& grid);

} // namespace chaosflow
