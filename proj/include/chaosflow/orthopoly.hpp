#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chaosflow
{

/// Input distribution of the scalar random variable xi.
enum class Family
{
    HermiteProbabilist, ///< xi ~ N(0, 1), basis He_n
    LegendreUniform,    ///< xi ~ U[-1, 1], basis P_n with P_n(1) = 1
};

std::string to_string(Family family);
Family parse_family(std::string_view name);

class DegreeError : public std::out_of_range
{
public:
    using std::out_of_range::out_of_range;
};

/**
 * Orthogonal basis of one input distribution.
 *
 * Polynomials are evaluated by the forward three-term recurrence
 *   P_{n+1}(x) = (a_n x - b_n) P_n(x) - g_n P_{n-1}(x),
 * and c(n) = E[P_n(xi)^2] under the probability measure of xi.
 */
class PolynomialFamily
{
public:
    static constexpr int kDefaultMaxDegree = 64;

    struct Recurrence
    {
        double a;
        double b;
        double g;
    };

    explicit PolynomialFamily(Family kind, int max_degree = kDefaultMaxDegree);

    Family kind() const { return kind_; }
    int max_degree() const { return max_degree_; }

    double evaluate(int n, double x) const;
    /// Writes P_0(x) .. P_{out.size()-1}(x).
    void evaluate_all(double x, std::span<double> out) const;
    double norm(int n) const;
    Recurrence recurrence(int n) const;

    /// Coefficients of the monic recurrence x p_n = p_{n+1} + alpha_n p_n + beta_n p_{n-1}.
    double monic_alpha(int n) const;
    double monic_beta(int n) const;

private:
    void check_degree(int n) const;

    Family kind_;
    int max_degree_;
    std::vector<double> norms_;
};

double evaluate_poly(const PolynomialFamily& family, int n, double x);
double norm_c(const PolynomialFamily& family, int n);

/// Nodes ascending, weights of the probability measure (sum to one).
struct QuadratureRule
{
    Family family;
    int level = 0;
    /// Split rules integrate piecewise polynomials with a break at xi = 0 exactly.
    bool split = false;
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    /// Sum of weights times h(node), accumulated in ascending node order.
    template <class F>
    double expectation(F&& h) const
    {
        double acc = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j)
            acc += weights[j] * h(nodes[j]);
        return acc;
    }
};

/// Gauss rule with level+1 nodes at the roots of P_{level+1} (Golub-Welsch).
QuadratureRule gauss_rule(const PolynomialFamily& family, int level);

/// Gauss rule computed and returned in extended precision, for tabulating
/// exact polynomial integrals whose node sums suffer cancellation.
struct ExtendedRule
{
    std::vector<long double> nodes;
    std::vector<long double> weights;
};
ExtendedRule gauss_rule_extended(const PolynomialFamily& family, int level);

/// Gauss rule of the family's density restricted to [0, inf) (or [0, 1]),
/// normalized to total mass 1/2; level+1 nodes.
QuadratureRule half_range_rule(Family family, int level);

/// Mirror of half_range_rule: 2(level+1) nodes, exact for functions that are
/// polynomials of degree <= 2 level + 1 on each side of zero.
QuadratureRule split_rule(Family family, int level);

/// u_k = sum_j w_j s_j P_k(xi_j), k = 0..max_degree, applied column-wise:
/// `samples` holds one column per node, result one column per degree.
Eigen::MatrixXd discrete_projection_coeffs(const Eigen::MatrixXd& samples,
                                           const QuadratureRule& rule,
                                           const PolynomialFamily& family,
                                           int max_degree);

std::vector<double> discrete_projection_coeffs(std::span<const double> samples,
                                               const QuadratureRule& rule,
                                               const PolynomialFamily& family,
                                               int max_degree);

} // namespace chaosflow
