#pragma once

#include "chaosflow/fieldspace.hpp"
#include "chaosflow/orthopoly.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace chaosflow
{

/**
 * Truncated chaos expansion v(xi) = sum_{l=0}^N v^l P_l(xi) of velocity fields.
 * Column l of modes() holds the coefficients of v^l.
 */
class ChaosField
{
public:
    ChaosField(BasisPtr basis, Family family, int order);
    ChaosField(BasisPtr basis, Family family, Eigen::MatrixXd modes);

    const BasisPtr& basis() const { return basis_; }
    Family family() const { return family_; }
    int order() const { return static_cast<int>(modes_.cols()) - 1; }
    const Eigen::MatrixXd& modes() const { return modes_; }
    Eigen::MatrixXd& modes() { return modes_; }
    VelocityField mode(int l) const { return {basis_, modes_.col(l)}; }

    /// Coefficients of v(xi).
    Eigen::VectorXd evaluate(double xi) const;
    VelocityField at(double xi) const { return {basis_, evaluate(xi)}; }

    /// |v(xi)|_{1,2} at each point, through the Gram matrix of the modes.
    std::vector<double> h1_along(std::span<const double> xis) const;

private:
    BasisPtr basis_;
    Family family_;
    Eigen::MatrixXd modes_;
};

/// (sum_l c(l) |v^l|_{1,2}^2)^{1/2}
double chaos_norm(const ChaosField& v);
/// chaos_norm(u - v), padding the lower order with zero modes.
double chaos_distance(const ChaosField& u, const ChaosField& v);

/// Equispaced xi points: [-1, 1] for Legendre, [-R, R] for Hermite.
std::vector<double> xi_grid(Family family, int count, double half_range = 6.0);

} // namespace chaosflow
