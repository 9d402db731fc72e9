#pragma once

#include "chaosflow/fieldspace.hpp"
#include "chaosflow/orthopoly.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace chaosflow
{

class UnsupportedForcing : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// coef * x1^px * x2^py
struct Monomial
{
    int px = 0;
    int py = 0;
    double coef = 0.0;
};

/// Two-component polynomial vector field F(x) = (F^1(x), F^2(x)) on G.
struct VectorPolynomial
{
    std::vector<Monomial> first;
    std::vector<Monomial> second;

    Eigen::Vector2d operator()(double x1, double x2) const;
    /// Highest power of either coordinate in either component.
    int max_power() const;
    bool is_zero() const;
};

enum class FactorKind
{
    Polynomial,    ///< sum_p c_p xi^p
    AbsoluteValue, ///< scale |xi| + shift
    Affine,        ///< scale xi + shift
};

/// Scalar random factor g(xi) of one forcing term.
class RandomFactor
{
public:
    RandomFactor() = default;

    static RandomFactor constant(double value);
    static RandomFactor polynomial(std::vector<double> coefficients);
    static RandomFactor absolute(double scale = 1.0, double shift = 0.0);
    static RandomFactor affine(double scale, double shift = 0.0);

    FactorKind kind() const { return kind_; }
    /// Polynomial: c_0..c_d. AbsoluteValue and Affine: {shift, scale}.
    const std::vector<double>& coefficients() const { return coefficients_; }

    double operator()(double xi) const;
    /// Polynomial degree in xi; -1 for the kinked |xi| factor.
    int degree() const;
    bool smooth() const { return kind_ != FactorKind::AbsoluteValue; }
    /// Upper bound on |g'| over [-half_range, half_range].
    double lipschitz(double half_range) const;

private:
    FactorKind kind_ = FactorKind::Polynomial;
    std::vector<double> coefficients_{1.0};
};

struct ForcingTerm
{
    RandomFactor factor;
    VectorPolynomial field;
};

/// f(xi, x) = sum_r g_r(xi) F_r(x).
struct ForcingSpec
{
    std::vector<ForcingTerm> terms;

    Eigen::VectorXd factors(double xi) const;
    Eigen::Vector2d operator()(double xi, double x1, double x2) const;
    bool smooth() const;
    /// Largest polynomial degree in xi, or -1 if any factor is kinked.
    int xi_degree() const;
};

/// Chaos coefficients E(g P_l) / c(l), l = 0..order. Exact for polynomial and
/// affine factors; the |xi| factor uses split rules with a doubling check.
std::vector<double> project_factor(const RandomFactor& factor, Family family, int order);

struct DualNorms
{
    /// sqrt(|G| / 2) |f|_{L2}, an upper bound on |f|_{-1,2}
    double poincare_bound;
    /// sqrt(b^T S^{-1} b), the dual norm over the discrete span (a lower bound)
    double discrete_riesz;
};

/**
 * A forcing bound to a basis: per-term loads b_r = <F_r, h_i> and the Gram
 * matrix (F_r, F_s)_0 are cached, so that b(xi) = sum_r g_r(xi) b_r.
 */
class DiscreteForcing
{
public:
    DiscreteForcing(ForcingSpec spec, BasisPtr basis);

    const ForcingSpec& spec() const { return spec_; }
    const BasisPtr& basis() const { return basis_; }
    int term_count() const { return static_cast<int>(spec_.terms.size()); }
    /// Column r holds the load of F_r.
    const Eigen::MatrixXd& term_loads() const { return term_loads_; }
    const Eigen::MatrixXd& gram() const { return gram_; }

    Eigen::VectorXd factors(double xi) const { return spec_.factors(xi); }
    Eigen::VectorXd load(double xi) const { return load_from_weights(factors(xi)); }
    Eigen::VectorXd load_from_weights(const Eigen::VectorXd& weights) const;

    /// |sum_r weights_r F_r|_{L2}
    double l2_norm(const Eigen::VectorXd& weights) const;
    DualNorms dual_norms(const Eigen::VectorXd& weights) const;
    DualNorms dual_norms_at(double xi) const { return dual_norms(factors(xi)); }

    /// C_f with |f(xi1) - f(xi2)|_{-1,2} <= C_f |xi1 - xi2| on [-R, R],
    /// using the Poincare dual bound of each term.
    double lipschitz_constant(double half_range) const;

private:
    ForcingSpec spec_;
    BasisPtr basis_;
    Eigen::MatrixXd term_loads_;
    Eigen::MatrixXd gram_;
};

Eigen::VectorXd load_vector(const DiscreteForcing& forcing, double xi);
DualNorms dual_norms(const DiscreteForcing& forcing, double xi);

} // namespace chaosflow
