#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace chaosflow
{

/// The fixed physical domain G = (-1, 1)^2.
struct DomainSpec
{
    static constexpr double area = 4.0;
    /// |u|_{L2}^2 <= (|G| / 2) |u|_{1,2}^2
    static constexpr double poincare_factor = area / 2.0;
    /// |a(u, v, w)| <= (sqrt|G| / 2) |u|_{1,2} |v|_{1,2} |w|_{1,2}
    static constexpr double trilinear_constant = 1.0;
};

class QuadratureError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

class BasisMismatch : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Values of phi_k(t) = (1 - t^2)^2 L_k(t) and its first two derivatives.
struct ClampedValue
{
    double value;
    double d1;
    double d2;
};
ClampedValue clamped_legendre(int k, double t);

/**
 * Divergence-free Galerkin space on G.
 *
 * Stream functions psi_ab(x) = phi_a(x1) phi_b(x2), a, b < K, generate the
 * velocity fields h_ab = (d psi / d x2, -d psi / d x1), which are
 * solenoidal and vanish with their normal derivative on the boundary.
 * Field index i = a K + b. Every spatial integral is a tensor Gauss-Legendre
 * sum with Q points per axis, exact for the polynomial integrands that occur
 * when Q >= ceil((3 (K + 4) + 1) / 2).
 */
class StreamBasis
{
public:
    static std::shared_ptr<const StreamBasis> build(int resolution, int quadrature_points);
    static int minimum_quadrature_points(int resolution);

    int resolution() const { return resolution_; }
    int quadrature_points() const { return quadrature_points_; }
    int dimension() const { return resolution_ * resolution_; }
    int index(int a, int b) const { return a * resolution_ + b; }

    /// S_ij = (grad h_i, grad h_j)_0
    const Eigen::MatrixXd& stiffness() const { return stiffness_; }
    const Eigen::LLT<Eigen::MatrixXd>& stiffness_factor() const { return stiffness_llt_; }
    /// M_ij = (h_i, h_j)_0
    const Eigen::MatrixXd& mass() const { return mass_; }

    /// T(i, j, e) = a(h_i, h_j, h_e) = ((h_i . grad) h_j, h_e)_0
    double trilinear(int i, int j, int e) const
    {
        const auto n = static_cast<std::size_t>(dimension());
        return trilinear_[(static_cast<std::size_t>(e) * n + static_cast<std::size_t>(j)) * n +
                          static_cast<std::size_t>(i)];
    }
    /// Slice e as an n x n column-major matrix with entry (i, j) = T(i, j, e).
    Eigen::Map<const Eigen::MatrixXd> trilinear_slice(int e) const;

    /// 1-D Gauss-Legendre grid on [-1, 1] (Lebesgue weights) and tabulated
    /// phi^{(d)}_k at its nodes: rows k, columns nodes.
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }
    const Eigen::MatrixXd& phi(int derivative) const { return phi_.at(static_cast<std::size_t>(derivative)); }

    /// Point evaluation of the field with coefficients z.
    Eigen::Vector2d velocity(const Eigen::VectorXd& z, double x1, double x2) const;
    /// Row i is the velocity component i, column j the derivative d / dx_j.
    Eigen::Matrix2d velocity_gradient(const Eigen::VectorXd& z, double x1, double x2) const;

private:
    StreamBasis(int resolution, int quadrature_points);

    int resolution_;
    int quadrature_points_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<Eigen::MatrixXd> phi_;
    Eigen::MatrixXd stiffness_;
    Eigen::LLT<Eigen::MatrixXd> stiffness_llt_;
    Eigen::MatrixXd mass_;
    std::vector<double> trilinear_;
};

using BasisPtr = std::shared_ptr<const StreamBasis>;

inline BasisPtr build_basis(int resolution, int quadrature_points)
{
    return StreamBasis::build(resolution, quadrature_points);
}

inline const Eigen::MatrixXd& stiffness_matrix(const StreamBasis& basis) { return basis.stiffness(); }

/// u = sum_i z_i h_i over a shared basis.
class VelocityField
{
public:
    VelocityField() = default;
    explicit VelocityField(BasisPtr basis);
    VelocityField(BasisPtr basis, Eigen::VectorXd coefficients);

    const BasisPtr& basis() const { return basis_; }
    const Eigen::VectorXd& coefficients() const { return coefficients_; }
    Eigen::VectorXd& coefficients() { return coefficients_; }
    double coefficient(int a, int b) const { return coefficients_[basis_->index(a, b)]; }

    Eigen::Vector2d operator()(double x1, double x2) const { return basis_->velocity(coefficients_, x1, x2); }

    VelocityField& operator+=(const VelocityField& other);
    VelocityField& operator-=(const VelocityField& other);
    VelocityField& operator*=(double scale);

private:
    BasisPtr basis_;
    Eigen::VectorXd coefficients_;
};

VelocityField operator+(VelocityField lhs, const VelocityField& rhs);
VelocityField operator-(VelocityField lhs, const VelocityField& rhs);
VelocityField operator*(double scale, VelocityField field);

void require_same_basis(const VelocityField& a, const VelocityField& b);

struct FieldNorms
{
    double h1; ///< |u|_{1,2}
    double l2; ///< |u|_{L2}
};

FieldNorms field_norms(const VelocityField& u);
double h1_seminorm(const StreamBasis& basis, const Eigen::VectorXd& z);
/// |u - v|_{1,2} for coefficient vectors on the same basis.
double h1_distance(const StreamBasis& basis, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

double trilinear_a(const VelocityField& u, const VelocityField& v, const VelocityField& w);

/// Vector with entries a(u, v, h_e), e.g. the convection term for u = v.
Eigen::VectorXd convection(const StreamBasis& basis, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Matrix C(u) with C(u) v = convection(u, v).
Eigen::MatrixXd convected_operator(const StreamBasis& basis, const Eigen::VectorXd& u);
/// Matrix B(v) with B(v) u = convection(u, v).
Eigen::MatrixXd convecting_operator(const StreamBasis& basis, const Eigen::VectorXd& v);

} // namespace chaosflow
