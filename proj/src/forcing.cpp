#include "chaosflow/forcing.hpp"

#include <algorithm>
#include <cmath>

namespace chaosflow
{

namespace
{

double eval_component(const std::vector<Monomial>& terms, double x1, double x2)
{
    double acc = 0.0;
    for (const auto& m : terms)
        acc += m.coef * std::pow(x1, m.px) * std::pow(x2, m.py);
    return acc;
}

void check_monomials(const std::vector<Monomial>& terms)
{
    for (const auto& m : terms)
    {
        if (m.px < 0 || m.py < 0)
            throw UnsupportedForcing("spatial forcing must be polynomial: negative exponent");
        if (!std::isfinite(m.coef))
            throw UnsupportedForcing("spatial forcing coefficient is not finite");
    }
}

} // namespace

Eigen::Vector2d VectorPolynomial::operator()(double x1, double x2) const
{
    return {eval_component(first, x1, x2), eval_component(second, x1, x2)};
}

int VectorPolynomial::max_power() const
{
    int p = 0;
    for (const auto* comp : {&first, &second})
        for (const auto& m : *comp)
            p = std::max({p, m.px, m.py});
    return p;
}

bool VectorPolynomial::is_zero() const
{
    auto zero = [](const Monomial& m) { return m.coef == 0.0; };
    return std::all_of(first.begin(), first.end(), zero) && std::all_of(second.begin(), second.end(), zero);
}

RandomFactor RandomFactor::constant(double value) { return polynomial({value}); }

RandomFactor RandomFactor::polynomial(std::vector<double> coefficients)
{
    if (coefficients.empty())
        coefficients.push_back(0.0);
    for (double c : coefficients)
        if (!std::isfinite(c))
            throw UnsupportedForcing("random factor coefficient is not finite");
    RandomFactor out;
    out.kind_ = FactorKind::Polynomial;
    out.coefficients_ = std::move(coefficients);
    return out;
}

RandomFactor RandomFactor::absolute(double scale, double shift)
{
    RandomFactor out = polynomial({shift, scale});
    out.kind_ = FactorKind::AbsoluteValue;
    return out;
}

RandomFactor RandomFactor::affine(double scale, double shift)
{
    RandomFactor out = polynomial({shift, scale});
    out.kind_ = FactorKind::Affine;
    return out;
}

double RandomFactor::operator()(double xi) const
{
    if (kind_ == FactorKind::AbsoluteValue)
        return coefficients_[1] * std::abs(xi) + coefficients_[0];
    double acc = 0.0;
    for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it)
        acc = acc * xi + *it;
    return acc;
}

int RandomFactor::degree() const
{
    if (kind_ == FactorKind::AbsoluteValue)
        return -1;
    int d = static_cast<int>(coefficients_.size()) - 1;
    while (d > 0 && coefficients_[static_cast<std::size_t>(d)] == 0.0)
        --d;
    return d;
}

double RandomFactor::lipschitz(double half_range) const
{
    if (kind_ == FactorKind::AbsoluteValue)
        return std::abs(coefficients_[1]);
    double acc = 0.0;
    for (std::size_t p = 1; p < coefficients_.size(); ++p)
        acc += static_cast<double>(p) * std::abs(coefficients_[p]) * std::pow(half_range, static_cast<double>(p - 1));
    return acc;
}

Eigen::VectorXd ForcingSpec::factors(double xi) const
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(terms.size()));
    for (std::size_t r = 0; r < terms.size(); ++r)
        out[static_cast<Eigen::Index>(r)] = terms[r].factor(xi);
    return out;
}

Eigen::Vector2d ForcingSpec::operator()(double xi, double x1, double x2) const
{
    Eigen::Vector2d out = Eigen::Vector2d::Zero();
    for (const auto& t : terms)
        out += t.factor(xi) * t.field(x1, x2);
    return out;
}

bool ForcingSpec::smooth() const
{
    return std::all_of(terms.begin(), terms.end(), [](const ForcingTerm& t) { return t.factor.smooth(); });
}

int ForcingSpec::xi_degree() const
{
    int d = 0;
    for (const auto& t : terms)
    {
        if (!t.factor.smooth())
            return -1;
        d = std::max(d, t.factor.degree());
    }
    return d;
}

std::vector<double> project_factor(const RandomFactor& factor, Family family, int order)
{
    if (order < 0)
        throw DegreeError("chaos order must be non-negative");
    std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);

    auto project = [&](const QuadratureRule& rule, const PolynomialFamily& basis) {
        std::vector<double> samples(rule.size());
        for (std::size_t j = 0; j < rule.size(); ++j)
            samples[j] = factor(rule.nodes[j]);
        auto coeffs = discrete_projection_coeffs(samples, rule, basis, order);
        for (int l = 0; l <= order; ++l)
            coeffs[static_cast<std::size_t>(l)] /= basis.norm(l);
        return coeffs;
    };

    if (factor.smooth())
    {
        const int d = factor.degree();
        const int level = std::max(order, 2 * d + 2);
        const PolynomialFamily basis(family, std::max(level + 1, PolynomialFamily::kDefaultMaxDegree));
        const auto coeffs = project(gauss_rule(basis, level), basis);
        for (int l = 0; l <= std::min(order, d); ++l)
            out[static_cast<std::size_t>(l)] = coeffs[static_cast<std::size_t>(l)];
        return out;
    }

    // |xi| P_l is a polynomial of degree l + 1 on each half line.
    const int level = order + 8;
    const PolynomialFamily basis(family, std::max(2 * level + 1, PolynomialFamily::kDefaultMaxDegree));
    const auto coarse = project(split_rule(family, level), basis);
    const auto fine = project(split_rule(family, 2 * level), basis);
    for (int l = 0; l <= order; l += 2)
    {
        const auto k = static_cast<std::size_t>(l);
        if (std::abs(coarse[k] - fine[k]) > 1e-10 * std::max(1.0, std::abs(fine[k])))
            throw std::runtime_error("projection of |xi| factor failed the doubling check");
        out[k] = fine[k];
    }
    return out;
}

DiscreteForcing::DiscreteForcing(ForcingSpec spec, BasisPtr basis) : spec_(std::move(spec)), basis_(std::move(basis))
{
    if (!basis_)
        throw std::invalid_argument("forcing needs a basis");
    const int K = basis_->resolution();
    const int Q = basis_->quadrature_points();
    const int R = term_count();
    for (const auto& t : spec_.terms)
    {
        check_monomials(t.field.first);
        check_monomials(t.field.second);
        // load integrand degree p + K + 3 per axis, Gram integrand 2p
        const int p = t.field.max_power();
        if (p + K + 3 > 2 * Q - 1 || 2 * p > 2 * Q - 1)
            throw QuadratureError("quadrature under-resolved for forcing of degree " + std::to_string(p) +
                                  " with Q=" + std::to_string(Q));
    }

    const auto nodes = basis_->nodes();
    const auto weights = basis_->weights();
    std::vector<Eigen::MatrixXd> f1(static_cast<std::size_t>(R), Eigen::MatrixXd(Q, Q));
    std::vector<Eigen::MatrixXd> f2(static_cast<std::size_t>(R), Eigen::MatrixXd(Q, Q));
    for (int r = 0; r < R; ++r)
        for (int p = 0; p < Q; ++p)
            for (int q = 0; q < Q; ++q)
            {
                const auto v = spec_.terms[static_cast<std::size_t>(r)].field(nodes[p], nodes[q]);
                f1[r](p, q) = v[0];
                f2[r](p, q) = v[1];
            }

    const Eigen::Map<const Eigen::VectorXd> w(weights.data(), Q);
    const Eigen::MatrixXd ww = w * w.transpose();
    term_loads_.resize(basis_->dimension(), R);
    gram_.resize(R, R);
    for (int r = 0; r < R; ++r)
    {
        const Eigen::MatrixXd b1 = basis_->phi(0) * f1[r].cwiseProduct(ww) * basis_->phi(1).transpose();
        const Eigen::MatrixXd b2 = basis_->phi(1) * f2[r].cwiseProduct(ww) * basis_->phi(0).transpose();
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b)
                term_loads_(basis_->index(a, b), r) = b1(a, b) - b2(a, b);
        for (int s = 0; s <= r; ++s)
        {
            const double g = (f1[r].cwiseProduct(f1[s]) + f2[r].cwiseProduct(f2[s])).cwiseProduct(ww).sum();
            gram_(r, s) = gram_(s, r) = g;
        }
    }
}

Eigen::VectorXd DiscreteForcing::load_from_weights(const Eigen::VectorXd& weights) const
{
    if (weights.size() != term_count())
        throw std::invalid_argument("forcing weight count does not match the number of terms");
    if (term_count() == 0)
        return Eigen::VectorXd::Zero(basis_->dimension());
    return term_loads_ * weights;
}

double DiscreteForcing::l2_norm(const Eigen::VectorXd& weights) const
{
    if (term_count() == 0)
        return 0.0;
    return std::sqrt(std::max(0.0, weights.dot(gram_ * weights)));
}

DualNorms DiscreteForcing::dual_norms(const Eigen::VectorXd& weights) const
{
    const Eigen::VectorXd b = load_from_weights(weights);
    const double riesz = std::sqrt(std::max(0.0, b.dot(basis_->stiffness_factor().solve(b))));
    return {std::sqrt(DomainSpec::poincare_factor) * l2_norm(weights), riesz};
}

double DiscreteForcing::lipschitz_constant(double half_range) const
{
    double acc = 0.0;
    for (int r = 0; r < term_count(); ++r)
    {
        const auto& factor = spec_.terms[static_cast<std::size_t>(r)].factor;
        acc += factor.lipschitz(half_range) * std::sqrt(DomainSpec::poincare_factor * std::max(0.0, gram_(r, r)));
    }
    return acc;
}

Eigen::VectorXd load_vector(const DiscreteForcing& forcing, double xi) { return forcing.load(xi); }

DualNorms dual_norms(const DiscreteForcing& forcing, double xi) { return forcing.dual_norms_at(xi); }

} // namespace chaosflow
