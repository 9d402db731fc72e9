#include "chaosflow/orthopoly.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace chaosflow
{

std::string to_string(Family family)
{
    return family == Family::HermiteProbabilist ? "hermite" : "legendre";
}

Family parse_family(std::string_view name)
{
    if (name == "hermite")
        return Family::HermiteProbabilist;
    if (name == "legendre")
        return Family::LegendreUniform;
    throw std::invalid_argument("unknown polynomial family '" + std::string(name) +
                                "' (expected hermite or legendre)");
}

PolynomialFamily::PolynomialFamily(Family kind, int max_degree) : kind_(kind), max_degree_(max_degree)
{
    if (max_degree < 0)
        throw DegreeError("max_degree must be non-negative");
    norms_.resize(static_cast<std::size_t>(max_degree) + 1);
    double factorial = 1.0;
    for (int n = 0; n <= max_degree; ++n)
    {
        if (n > 0)
            factorial *= n;
        norms_[n] = kind == Family::HermiteProbabilist ? factorial : 1.0 / (2.0 * n + 1.0);
    }
}

void PolynomialFamily::check_degree(int n) const
{
    if (n < 0 || n > max_degree_)
        throw DegreeError("degree " + std::to_string(n) + " outside [0, " + std::to_string(max_degree_) + "]");
}

PolynomialFamily::Recurrence PolynomialFamily::recurrence(int n) const
{
    if (n < 0)
        throw DegreeError("negative recurrence index");
    if (kind_ == Family::HermiteProbabilist)
        return {1.0, 0.0, static_cast<double>(n)};
    const double np1 = n + 1.0;
    return {(2.0 * n + 1.0) / np1, 0.0, n / np1};
}

double PolynomialFamily::monic_alpha(int) const { return 0.0; }

double PolynomialFamily::monic_beta(int n) const
{
    if (n <= 0)
        return 1.0; // total mass
    if (kind_ == Family::HermiteProbabilist)
        return static_cast<double>(n);
    const double nn = static_cast<double>(n) * n;
    return nn / (4.0 * nn - 1.0);
}

double PolynomialFamily::evaluate(int n, double x) const
{
    check_degree(n);
    double prev = 0.0;
    double cur = 1.0;
    for (int k = 0; k < n; ++k)
    {
        const auto r = recurrence(k);
        const double next = (r.a * x - r.b) * cur - r.g * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

void PolynomialFamily::evaluate_all(double x, std::span<double> out) const
{
    if (out.empty())
        return;
    check_degree(static_cast<int>(out.size()) - 1);
    out[0] = 1.0;
    if (out.size() == 1)
        return;
    double prev = 0.0;
    for (std::size_t k = 0; k + 1 < out.size(); ++k)
    {
        const auto r = recurrence(static_cast<int>(k));
        out[k + 1] = (r.a * x - r.b) * out[k] - r.g * prev;
        prev = out[k];
    }
}

double PolynomialFamily::norm(int n) const
{
    check_degree(n);
    return norms_[n];
}

double evaluate_poly(const PolynomialFamily& family, int n, double x) { return family.evaluate(n, x); }

double norm_c(const PolynomialFamily& family, int n) { return family.norm(n); }

namespace
{

// Gauss rule of a measure given by its monic recurrence: alpha[0..n], beta[1..n],
// total mass mu0. Returns n+1 nodes.
template <class Real>
struct RawRule
{
    std::vector<Real> nodes;
    std::vector<Real> weights;
};

// Orthonormal recurrence sweep at x. Returns p_{n+1}/p'_{n+1} (Newton step)
// and log of sum_{k<=n} p_k^2 (Christoffel function).
template <class Real>
struct Sweep
{
    Real newton_step;
    Real log_christoffel_sum;
};

template <class Real>
Sweep<Real> orthonormal_sweep(const std::vector<Real>& alpha, const std::vector<Real>& sqrt_beta, Real mu0, Real x)
{
    using std::abs, std::log, std::sqrt;
    const std::size_t n = alpha.size() - 1;
    constexpr Real kBig = 1e150;
    Real p_prev = 0, dp_prev = 0;
    Real p = 1 / sqrt(mu0), dp = 0;
    Real sum = p * p;
    Real log_scale = 0; // p and dp carry the factor exp(log_scale), sum its square
    for (std::size_t k = 0; k <= n; ++k)
    {
        const Real sb_next = sqrt_beta[k + 1];
        const Real sb = k > 0 ? sqrt_beta[k] : Real(0);
        const Real p_next = ((x - alpha[k]) * p - sb * p_prev) / sb_next;
        const Real dp_next = (p + (x - alpha[k]) * dp - sb * dp_prev) / sb_next;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
        if (k + 1 <= n)
            sum += p * p;
        if (abs(p) > kBig || abs(dp) > kBig)
        {
            p /= kBig;
            dp /= kBig;
            p_prev /= kBig;
            dp_prev /= kBig;
            sum /= kBig * kBig;
            log_scale += log(kBig);
        }
    }
    return {dp != 0 ? p / dp : Real(0), log(sum) + 2 * log_scale};
}

template <class Real>
RawRule<Real> gauss_from_recurrence(const std::vector<Real>& alpha, const std::vector<Real>& beta, Real mu0)
{
    using std::abs, std::exp, std::isfinite, std::sqrt;
    using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
    const std::size_t m = alpha.size();
    if (m == 1)
        return {{alpha[0]}, {mu0}};

    Vector diag(m), sub(m - 1);
    for (std::size_t i = 0; i < m; ++i)
        diag[i] = alpha[i];
    for (std::size_t i = 1; i < m; ++i)
        sub[i - 1] = sqrt(beta[i]);

    Eigen::SelfAdjointEigenSolver<Matrix> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("Golub-Welsch eigen-solver failed to converge");

    // sqrt_beta[k] for k = 0..m; the last entry only feeds the Newton polish on p_m.
    std::vector<Real> sqrt_beta(m + 1, Real(0));
    for (std::size_t i = 1; i < m; ++i)
        sqrt_beta[i] = sqrt(beta[i]);
    sqrt_beta[m] = beta.size() > m ? sqrt(beta[m]) : Real(1);

    RawRule<Real> rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    const Real spread = std::max(Real(1), solver.eigenvalues().cwiseAbs().maxCoeff());
    for (std::size_t j = 0; j < m; ++j)
    {
        Real x = solver.eigenvalues()[static_cast<Eigen::Index>(j)];
        for (int it = 0; it < 2; ++it)
        {
            const Real dx = orthonormal_sweep(alpha, sqrt_beta, mu0, x).newton_step;
            if (!isfinite(dx) || abs(dx) > Real(1e-8) * spread)
                break;
            x -= dx;
        }
        rule.nodes[j] = x;
        rule.weights[j] = exp(-orthonormal_sweep(alpha, sqrt_beta, mu0, x).log_christoffel_sum);
    }

    for (std::size_t j = 0; j < m; ++j)
    {
        if (!(rule.weights[j] > 0) || !isfinite(rule.nodes[j]))
            throw std::runtime_error("Golub-Welsch produced a non-positive weight or non-finite node");
        if (j > 0 && !(rule.nodes[j] > rule.nodes[j - 1]))
            throw std::runtime_error("Golub-Welsch produced repeated nodes");
    }
    const Real total = std::accumulate(rule.weights.begin(), rule.weights.end(), Real(0));
    for (auto& w : rule.weights)
        w *= mu0 / total;
    return rule;
}

template <class Real>
RawRule<Real> family_gauss(const PolynomialFamily& family, int level)
{
    if (level < 0)
        throw DegreeError("quadrature level must be non-negative");
    if (level + 1 > family.max_degree())
        throw DegreeError("quadrature level " + std::to_string(level) + " needs P_" + std::to_string(level + 1) +
                          " beyond max_degree " + std::to_string(family.max_degree()));
    std::vector<Real> alpha(static_cast<std::size_t>(level) + 1), beta(static_cast<std::size_t>(level) + 2);
    for (int k = 0; k <= level; ++k)
        alpha[k] = family.monic_alpha(k);
    beta[0] = 1;
    for (int k = 1; k <= level + 1; ++k)
    {
        // exact rational forms, evaluated at the working precision
        const Real kk = static_cast<Real>(k) * k;
        beta[k] = family.kind() == Family::HermiteProbabilist ? Real(k) : kk / (4 * kk - 1);
    }
    auto raw = gauss_from_recurrence<Real>(alpha, beta, Real(1));
    if (level == 0)
        raw.nodes[0] = 0;
    return raw;
}

// Monic recurrence of the half-range Gaussian density on [0, inf), from a
// Lanczos run (with full reorthogonalization) on a fine composite
// Gauss-Legendre discretization. Truncation at `cutoff` leaves mass below exp(-cutoff^2/2).
void half_gaussian_recurrence(int count, std::vector<double>& alpha, std::vector<double>& beta)
{
    const double cutoff = std::sqrt(2.0 * (2.0 * count + 1.0)) + 12.0;
    constexpr double kPanel = 0.25;
    constexpr int kPanelLevel = 19;
    const PolynomialFamily legendre(Family::LegendreUniform, kPanelLevel + 1);
    const QuadratureRule panel = gauss_rule(legendre, kPanelLevel);
    const int panels = static_cast<int>(std::ceil(cutoff / kPanel));

    std::vector<double> xs, mus;
    xs.reserve(static_cast<std::size_t>(panels) * panel.size());
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);
    for (int p = 0; p < panels; ++p)
    {
        const double lo = p * kPanel;
        for (std::size_t q = 0; q < panel.size(); ++q)
        {
            const double x = lo + 0.5 * kPanel * (panel.nodes[q] + 1.0);
            // probability weights sum to 1 on [-1,1]; Lebesgue weight on the panel is kPanel * w
            const double w = kPanel * panel.weights[q];
            xs.push_back(x);
            mus.push_back(w * inv_sqrt_2pi * std::exp(-0.5 * x * x));
        }
    }

    const Eigen::Index size = static_cast<Eigen::Index>(xs.size());
    const Eigen::Map<const Eigen::VectorXd> x(xs.data(), size);
    Eigen::VectorXd sqrt_mu(size);
    for (Eigen::Index i = 0; i < size; ++i)
        sqrt_mu[i] = std::sqrt(mus[static_cast<std::size_t>(i)]);

    Eigen::MatrixXd basis(size, count + 1);
    alpha.assign(static_cast<std::size_t>(count) + 1, 0.0);
    beta.assign(static_cast<std::size_t>(count) + 1, 0.0);
    beta[0] = sqrt_mu.squaredNorm();
    basis.col(0) = sqrt_mu / std::sqrt(beta[0]);
    for (int k = 0; k <= count; ++k)
    {
        alpha[k] = basis.col(k).cwiseProduct(x).dot(basis.col(k));
        if (k == count)
            break;
        Eigen::VectorXd r = basis.col(k).cwiseProduct(x) - alpha[k] * basis.col(k);
        if (k > 0)
            r -= std::sqrt(beta[k]) * basis.col(k - 1);
        for (int pass = 0; pass < 2; ++pass)
            r -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).transpose() * r);
        const double nrm = r.norm();
        beta[k + 1] = nrm * nrm;
        basis.col(k + 1) = r / nrm;
    }
}

} // namespace

QuadratureRule gauss_rule(const PolynomialFamily& family, int level)
{
    auto raw = family_gauss<double>(family, level);
    return {family.kind(), level, false, std::move(raw.nodes), std::move(raw.weights)};
}

ExtendedRule gauss_rule_extended(const PolynomialFamily& family, int level)
{
    auto raw = family_gauss<long double>(family, level);
    return {std::move(raw.nodes), std::move(raw.weights)};
}

QuadratureRule half_range_rule(Family family, int level)
{
    if (level < 0)
        throw DegreeError("quadrature level must be non-negative");

    static std::mutex cache_mutex;
    static std::map<std::pair<int, int>, QuadratureRule> cache;
    const std::pair<int, int> key{static_cast<int>(family), level};
    {
        std::lock_guard lock(cache_mutex);
        if (auto it = cache.find(key); it != cache.end())
            return it->second;
    }

    QuadratureRule rule{family, level, false, {}, {}};
    if (family == Family::LegendreUniform)
    {
        const PolynomialFamily legendre(Family::LegendreUniform, std::max(level + 1, PolynomialFamily::kDefaultMaxDegree));
        const auto full = gauss_rule(legendre, level);
        for (std::size_t j = 0; j < full.size(); ++j)
        {
            rule.nodes.push_back(0.5 * (full.nodes[j] + 1.0));
            rule.weights.push_back(0.5 * full.weights[j]);
        }
    }
    else
    {
        std::vector<double> alpha, beta;
        half_gaussian_recurrence(level + 1, alpha, beta);
        std::vector<double> a(alpha.begin(), alpha.begin() + level + 1);
        auto raw = gauss_from_recurrence<double>(a, beta, 0.5);
        rule.nodes = std::move(raw.nodes);
        rule.weights = std::move(raw.weights);
    }

    std::lock_guard lock(cache_mutex);
    cache.emplace(key, rule);
    return rule;
}

QuadratureRule split_rule(Family family, int level)
{
    const auto half = half_range_rule(family, level);
    QuadratureRule rule{family, level, true, {}, {}};
    const std::size_t m = half.size();
    rule.nodes.resize(2 * m);
    rule.weights.resize(2 * m);
    for (std::size_t j = 0; j < m; ++j)
    {
        rule.nodes[m - 1 - j] = -half.nodes[j];
        rule.weights[m - 1 - j] = half.weights[j];
        rule.nodes[m + j] = half.nodes[j];
        rule.weights[m + j] = half.weights[j];
    }
    return rule;
}

Eigen::MatrixXd discrete_projection_coeffs(const Eigen::MatrixXd& samples, const QuadratureRule& rule,
                                           const PolynomialFamily& family, int max_degree)
{
    if (static_cast<std::size_t>(samples.cols()) != rule.size())
        throw std::invalid_argument("discrete projection: " + std::to_string(samples.cols()) + " samples for " +
                                    std::to_string(rule.size()) + " quadrature nodes");
    if (max_degree < 0 || max_degree > rule.level)
        throw DegreeError("discrete projection degree exceeds the rule level");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(samples.rows(), max_degree + 1);
    std::vector<double> values(static_cast<std::size_t>(max_degree) + 1);
    for (std::size_t j = 0; j < rule.size(); ++j)
    {
        family.evaluate_all(rule.nodes[j], values);
        for (int k = 0; k <= max_degree; ++k)
            out.col(k) += (rule.weights[j] * values[k]) * samples.col(static_cast<Eigen::Index>(j));
    }
    return out;
}

std::vector<double> discrete_projection_coeffs(std::span<const double> samples, const QuadratureRule& rule,
                                               const PolynomialFamily& family, int max_degree)
{
    const Eigen::Map<const Eigen::MatrixXd> row(samples.data(), 1, static_cast<Eigen::Index>(samples.size()));
    const Eigen::MatrixXd out = discrete_projection_coeffs(Eigen::MatrixXd(row), rule, family, max_degree);
    return {out.data(), out.data() + out.size()};
}

} // namespace chaosflow
