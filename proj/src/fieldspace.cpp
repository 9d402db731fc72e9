#include "chaosflow/fieldspace.hpp"

#include "chaosflow/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chaosflow
{

ClampedValue clamped_legendre(int k, double t)
{
    double l_prev = 0.0, d1_prev = 0.0, d2_prev = 0.0;
    double l = 1.0, d1 = 0.0, d2 = 0.0;
    for (int m = 0; m < k; ++m)
    {
        const double c1 = (2.0 * m + 1.0) / (m + 1.0);
        const double c0 = m / (m + 1.0);
        const double l_next = c1 * t * l - c0 * l_prev;
        const double d1_next = c1 * (l + t * d1) - c0 * d1_prev;
        const double d2_next = c1 * (2.0 * d1 + t * d2) - c0 * d2_prev;
        l_prev = l;
        d1_prev = d1;
        d2_prev = d2;
        l = l_next;
        d1 = d1_next;
        d2 = d2_next;
    }
    const double s = 1.0 - t * t;
    const double w = s * s;
    const double w1 = -4.0 * t * s;
    const double w2 = 12.0 * t * t - 4.0;
    return {w * l, w1 * l + w * d1, w2 * l + 2.0 * w1 * d1 + w * d2};
}

int StreamBasis::minimum_quadrature_points(int resolution) { return (3 * (resolution + 4) + 2) / 2; }

std::shared_ptr<const StreamBasis> StreamBasis::build(int resolution, int quadrature_points)
{
    if (resolution < 1)
        throw std::invalid_argument("basis resolution K must be at least 1");
    const int needed = minimum_quadrature_points(resolution);
    if (quadrature_points < needed)
        throw QuadratureError("quadrature under-resolved: K=" + std::to_string(resolution) + " needs Q >= " +
                              std::to_string(needed) + ", got Q=" + std::to_string(quadrature_points));
    return std::shared_ptr<const StreamBasis>(new StreamBasis(resolution, quadrature_points));
}

StreamBasis::StreamBasis(int resolution, int quadrature_points)
    : resolution_(resolution), quadrature_points_(quadrature_points)
{
    const int K = resolution;
    const int Q = quadrature_points;
    const PolynomialFamily legendre(Family::LegendreUniform, std::max(Q, PolynomialFamily::kDefaultMaxDegree));
    const auto rule = gauss_rule(legendre, Q - 1);
    nodes_ = rule.nodes;
    weights_.resize(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q)
        weights_[q] = 2.0 * rule.weights[q];

    phi_.assign(3, Eigen::MatrixXd(K, Q));
    for (int k = 0; k < K; ++k)
        for (int q = 0; q < Q; ++q)
        {
            const auto v = clamped_legendre(k, nodes_[static_cast<std::size_t>(q)]);
            phi_[0](k, q) = v.value;
            phi_[1](k, q) = v.d1;
            phi_[2](k, q) = v.d2;
        }

    // 1-D integrals int phi^(p)_a phi^(r)_c, filled symmetrically when p == r.
    auto pair_integral = [&](int p, int r) {
        Eigen::MatrixXd out(K, K);
        for (int a = 0; a < K; ++a)
            for (int c = (p == r ? a : 0); c < K; ++c)
            {
                double acc = 0.0;
                for (int q = 0; q < Q; ++q)
                    acc += weights_[static_cast<std::size_t>(q)] * phi_[p](a, q) * phi_[r](c, q);
                out(a, c) = acc;
                if (p == r)
                    out(c, a) = acc;
            }
        return out;
    };
    const Eigen::MatrixXd m00 = pair_integral(0, 0);
    const Eigen::MatrixXd m11 = pair_integral(1, 1);
    const Eigen::MatrixXd m22 = pair_integral(2, 2);

    const int n = dimension();
    stiffness_.resize(n, n);
    mass_.resize(n, n);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b)
            for (int c = 0; c < K; ++c)
                for (int d = 0; d < K; ++d)
                {
                    const int i = index(a, b);
                    const int j = index(c, d);
                    if (j < i)
                        continue;
                    const double s = 2.0 * m11(a, c) * m11(b, d) + m00(a, c) * m22(b, d) + m22(a, c) * m00(b, d);
                    const double m = m00(a, c) * m11(b, d) + m11(a, c) * m00(b, d);
                    stiffness_(i, j) = stiffness_(j, i) = s;
                    mass_(i, j) = mass_(j, i) = m;
                }
    stiffness_llt_.compute(stiffness_);
    if (stiffness_llt_.info() != Eigen::Success)
        throw std::runtime_error("stiffness matrix is not positive definite");

    // 1-D triple integrals X[p,r,s](a,c,e) = int phi^(p)_a phi^(r)_c phi^(s)_e
    auto triple_integral = [&](int p, int r, int s) {
        std::vector<double> out(static_cast<std::size_t>(K) * K * K);
        for (int a = 0; a < K; ++a)
            for (int c = 0; c < K; ++c)
                for (int e = 0; e < K; ++e)
                {
                    double acc = 0.0;
                    for (int q = 0; q < Q; ++q)
                        acc += weights_[static_cast<std::size_t>(q)] * phi_[p](a, q) * phi_[r](c, q) * phi_[s](e, q);
                    out[(static_cast<std::size_t>(a) * K + c) * K + e] = acc;
                }
        return out;
    };
    const auto x010 = triple_integral(0, 1, 0);
    const auto x111 = triple_integral(1, 1, 1);
    const auto x100 = triple_integral(1, 0, 0);
    const auto x021 = triple_integral(0, 2, 1);
    auto at = [K](const std::vector<double>& x, int a, int c, int e) {
        return x[(static_cast<std::size_t>(a) * K + c) * K + e];
    };

    // (h_i . grad) h_j . h_e with h^1 = phi_a phi'_b and h^2 = -phi'_a phi_b splits
    // into four separable products of x1- and x2-integrals.
    const auto nn = static_cast<std::size_t>(n);
    trilinear_.assign(nn * nn * nn, 0.0);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b)
            for (int c = 0; c < K; ++c)
                for (int d = 0; d < K; ++d)
                    for (int e = 0; e < K; ++e)
                        for (int f = 0; f < K; ++f)
                        {
                            const double value = at(x010, a, c, e) * at(x111, b, d, f) -
                                                 at(x100, a, c, e) * at(x021, b, d, f) +
                                                 at(x021, a, c, e) * at(x100, b, d, f) -
                                                 at(x111, a, c, e) * at(x010, b, d, f);
                            const auto i = static_cast<std::size_t>(index(a, b));
                            const auto j = static_cast<std::size_t>(index(c, d));
                            const auto k = static_cast<std::size_t>(index(e, f));
                            trilinear_[(k * nn + j) * nn + i] = value;
                        }
}

Eigen::Map<const Eigen::MatrixXd> StreamBasis::trilinear_slice(int e) const
{
    const auto n = static_cast<std::size_t>(dimension());
    return {trilinear_.data() + static_cast<std::size_t>(e) * n * n, dimension(), dimension()};
}

namespace
{

struct PointValues
{
    std::vector<ClampedValue> x1;
    std::vector<ClampedValue> x2;
};

PointValues point_values(int K, double x1, double x2)
{
    PointValues out;
    for (int k = 0; k < K; ++k)
    {
        out.x1.push_back(clamped_legendre(k, x1));
        out.x2.push_back(clamped_legendre(k, x2));
    }
    return out;
}

} // namespace

Eigen::Vector2d StreamBasis::velocity(const Eigen::VectorXd& z, double x1, double x2) const
{
    const auto pv = point_values(resolution_, x1, x2);
    Eigen::Vector2d u = Eigen::Vector2d::Zero();
    for (int a = 0; a < resolution_; ++a)
        for (int b = 0; b < resolution_; ++b)
        {
            const double c = z[index(a, b)];
            u[0] += c * pv.x1[a].value * pv.x2[b].d1;
            u[1] -= c * pv.x1[a].d1 * pv.x2[b].value;
        }
    return u;
}

Eigen::Matrix2d StreamBasis::velocity_gradient(const Eigen::VectorXd& z, double x1, double x2) const
{
    const auto pv = point_values(resolution_, x1, x2);
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    for (int a = 0; a < resolution_; ++a)
        for (int b = 0; b < resolution_; ++b)
        {
            const double c = z[index(a, b)];
            g(0, 0) += c * pv.x1[a].d1 * pv.x2[b].d1;
            g(0, 1) += c * pv.x1[a].value * pv.x2[b].d2;
            g(1, 0) -= c * pv.x1[a].d2 * pv.x2[b].value;
            g(1, 1) -= c * pv.x1[a].d1 * pv.x2[b].d1;
        }
    return g;
}

VelocityField::VelocityField(BasisPtr basis)
    : basis_(std::move(basis)), coefficients_(Eigen::VectorXd::Zero(basis_->dimension()))
{
}

VelocityField::VelocityField(BasisPtr basis, Eigen::VectorXd coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients))
{
    if (coefficients_.size() != basis_->dimension())
        throw std::invalid_argument("coefficient count does not match the basis dimension");
}

void require_same_basis(const VelocityField& a, const VelocityField& b)
{
    if (!a.basis() || a.basis() != b.basis())
        throw BasisMismatch("velocity fields live on different bases");
}

VelocityField& VelocityField::operator+=(const VelocityField& other)
{
    require_same_basis(*this, other);
    coefficients_ += other.coefficients_;
    return *this;
}

VelocityField& VelocityField::operator-=(const VelocityField& other)
{
    require_same_basis(*this, other);
    coefficients_ -= other.coefficients_;
    return *this;
}

VelocityField& VelocityField::operator*=(double scale)
{
    coefficients_ *= scale;
    return *this;
}

VelocityField operator+(VelocityField lhs, const VelocityField& rhs) { return lhs += rhs; }
VelocityField operator-(VelocityField lhs, const VelocityField& rhs) { return lhs -= rhs; }
VelocityField operator*(double scale, VelocityField field) { return field *= scale; }

double h1_seminorm(const StreamBasis& basis, const Eigen::VectorXd& z)
{
    return std::sqrt(std::max(0.0, z.dot(basis.stiffness() * z)));
}

double h1_distance(const StreamBasis& basis, const Eigen::VectorXd& u, const Eigen::VectorXd& v)
{
    return h1_seminorm(basis, u - v);
}

FieldNorms field_norms(const VelocityField& u)
{
    const auto& z = u.coefficients();
    const auto& basis = *u.basis();
    return {h1_seminorm(basis, z), std::sqrt(std::max(0.0, z.dot(basis.mass() * z)))};
}

Eigen::VectorXd convection(const StreamBasis& basis, const Eigen::VectorXd& u, const Eigen::VectorXd& v)
{
    return convected_operator(basis, u) * v;
}

Eigen::MatrixXd convected_operator(const StreamBasis& basis, const Eigen::VectorXd& u)
{
    const int n = basis.dimension();
    Eigen::MatrixXd out(n, n);
    for (int e = 0; e < n; ++e)
        out.row(e) = (basis.trilinear_slice(e).transpose() * u).transpose();
    return out;
}

Eigen::MatrixXd convecting_operator(const StreamBasis& basis, const Eigen::VectorXd& v)
{
    const int n = basis.dimension();
    Eigen::MatrixXd out(n, n);
    for (int e = 0; e < n; ++e)
        out.row(e) = (basis.trilinear_slice(e) * v).transpose();
    return out;
}

double trilinear_a(const VelocityField& u, const VelocityField& v, const VelocityField& w)
{
    require_same_basis(u, v);
    require_same_basis(u, w);
    return w.coefficients().dot(convection(*u.basis(), u.coefficients(), v.coefficients()));
}

} // namespace chaosflow
