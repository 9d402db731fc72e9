#include "chaosflow/chaos_field.hpp"

#include <algorithm>
#include <cmath>

namespace chaosflow
{

namespace
{

PolynomialFamily family_for(Family family, int order)
{
    return PolynomialFamily(family, std::max(order, PolynomialFamily::kDefaultMaxDegree));
}

} // namespace

ChaosField::ChaosField(BasisPtr basis, Family family, int order)
    : basis_(std::move(basis)), family_(family), modes_(Eigen::MatrixXd::Zero(basis_->dimension(), order + 1))
{
    if (order < 0)
        throw DegreeError("chaos order must be non-negative");
}

ChaosField::ChaosField(BasisPtr basis, Family family, Eigen::MatrixXd modes)
    : basis_(std::move(basis)), family_(family), modes_(std::move(modes))
{
    if (modes_.rows() != basis_->dimension() || modes_.cols() < 1)
        throw std::invalid_argument("chaos modes do not match the basis dimension");
}

Eigen::VectorXd ChaosField::evaluate(double xi) const
{
    const auto poly = family_for(family_, order());
    Eigen::VectorXd p(order() + 1);
    poly.evaluate_all(xi, {p.data(), static_cast<std::size_t>(p.size())});
    return modes_ * p;
}

std::vector<double> ChaosField::h1_along(std::span<const double> xis) const
{
    const auto poly = family_for(family_, order());
    const Eigen::MatrixXd gram = modes_.transpose() * basis_->stiffness() * modes_;
    Eigen::VectorXd p(order() + 1);
    std::vector<double> out;
    out.reserve(xis.size());
    for (double xi : xis)
    {
        poly.evaluate_all(xi, {p.data(), static_cast<std::size_t>(p.size())});
        out.push_back(std::sqrt(std::max(0.0, p.dot(gram * p))));
    }
    return out;
}

double chaos_norm(const ChaosField& v)
{
    const auto poly = family_for(v.family(), v.order());
    double acc = 0.0;
    for (int l = 0; l <= v.order(); ++l)
    {
        const double h1 = h1_seminorm(*v.basis(), v.modes().col(l));
        acc += poly.norm(l) * h1 * h1;
    }
    return std::sqrt(acc);
}

double chaos_distance(const ChaosField& u, const ChaosField& v)
{
    if (u.family() != v.family())
        throw std::invalid_argument("chaos fields use different families");
    if (u.basis() != v.basis())
        throw BasisMismatch("chaos fields live on different bases");
    const int order = std::max(u.order(), v.order());
    Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(u.modes().rows(), order + 1);
    diff.leftCols(u.order() + 1) += u.modes();
    diff.leftCols(v.order() + 1) -= v.modes();
    return chaos_norm(ChaosField(u.basis(), u.family(), std::move(diff)));
}

std::vector<double> xi_grid(Family family, int count, double half_range)
{
    if (count < 1)
        throw std::invalid_argument("xi grid needs at least one point");
    const double r = family == Family::LegendreUniform ? 1.0 : half_range;
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out[static_cast<std::size_t>(i)] = count == 1 ? 0.0 : -r + 2.0 * r * i / (count - 1);
    return out;
}

} // namespace chaosflow
