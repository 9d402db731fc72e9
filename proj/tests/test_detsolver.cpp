#include "chaosflow/detsolver.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace chaosflow;

namespace
{

// Rotational part (x2, -x1) plus a shear, so the discrete load is nonzero.
VectorPolynomial test_field(double scale)
{
    return {{{0, 1, scale}, {2, 1, 0.5 * scale}}, {{1, 0, -scale}, {1, 2, 0.3 * scale}}};
}

DiscreteForcing scaled_forcing(const BasisPtr& basis, RandomFactor factor, double target_theta, double nu)
{
    DiscreteForcing unit(ForcingSpec{{{factor, test_field(1.0)}}}, basis);
    const double bound = unit.dual_norms_at(1.0).poincare_bound;
    const double scale = target_theta * nu * nu / bound;
    return DiscreteForcing(ForcingSpec{{{factor, test_field(scale)}}}, basis);
}

} // namespace

TEST_CASE("config validation and strategy names")
{
    SolverConfig c;
    CHECK_NOTHROW(c.validate());
    c.nu = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SolverConfig{};
    c.damping = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SolverConfig{};
    c.tol_rel = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK(parse_strategy("picard") == Strategy::Picard);
    CHECK(parse_strategy("newton") == Strategy::NewtonDamped);
    CHECK(to_string(Strategy::NewtonDamped) == "newton");
    CHECK_THROWS_AS(parse_strategy("bisection"), std::invalid_argument);
}

TEST_CASE("smallness certificate")
{
    auto basis = build_basis(3, 12);
    DiscreteForcing zero(ForcingSpec{}, basis);
    CHECK(smallness_certificate(zero, 0.0, 1.0).theta == 0.0);
    DiscreteForcing unit(ForcingSpec{{{RandomFactor::constant(1.0), {{{0, 0, 1.0}}, {}}}}}, basis);
    const auto cert = smallness_certificate(unit, 0.0, 4.0);
    CHECK(cert.theta == doctest::Approx(2.0 * std::sqrt(2.0) / 16.0).epsilon(1e-14));
    CHECK(cert.velocity_bound == doctest::Approx(4.0 * cert.theta).epsilon(1e-14));
    CHECK(cert.certified());
    DiscreteForcing triple(ForcingSpec{{{RandomFactor::constant(3.0), {{{0, 0, 1.0}}, {}}}}}, basis);
    CHECK(smallness_certificate(triple, 0.0, 4.0).theta == doctest::Approx(3.0 * cert.theta).epsilon(1e-14));
}

TEST_CASE("zero forcing gives the zero field in one iteration")
{
    auto basis = build_basis(3, 12);
    DiscreteForcing zero(ForcingSpec{}, basis);
    for (auto strategy : {Strategy::Picard, Strategy::NewtonDamped})
    {
        SolverConfig config;
        config.strategy = strategy;
        const auto sol = solve_deterministic(zero, 0.5, config);
        CHECK(sol.field.coefficients().isZero(0.0));
        CHECK(sol.report.iterations == 1);
        CHECK(sol.report.residual == 0.0);
        CHECK(sol.report.bound_ratio == 0.0);
    }
}

TEST_CASE("manufactured solutions are recovered")
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int K : {3, 4})
    {
        auto basis = build_basis(K, StreamBasis::minimum_quadrature_points(K));
        const int n = basis->dimension();
        for (int trial = 0; trial < 10; ++trial)
        {
            SolverConfig config;
            config.nu = 0.5 + u(rng) * 0.25;
            Eigen::VectorXd target(n);
            for (int i = 0; i < n; ++i)
                target[i] = u(rng);
            target *= 0.1 * config.nu * std::abs(u(rng)) / h1_seminorm(*basis, target);
            const Eigen::VectorXd load = -config.nu * (basis->stiffness() * target) - convection(*basis, target, target);
            CHECK(relative_residual(*basis, target, load, config) <= 1e-14);

            const auto picard = solve_load(basis, load, 1.0, config);
            config.strategy = Strategy::NewtonDamped;
            const auto newton = solve_load(basis, load, 1.0, config);
            const double scale = target.norm();
            CHECK((picard.field.coefficients() - target).norm() <= 1e-10 * scale);
            CHECK((newton.field.coefficients() - target).norm() <= 1e-10 * scale);
            CHECK((picard.field.coefficients() - newton.field.coefficients()).norm() <= 1e-9 * scale);
            CHECK(picard.report.residual <= config.tol_rel);
            CHECK(newton.report.iterations < picard.report.iterations + 1);
        }
    }
}

TEST_CASE("Stokes limit is one linear solve")
{
    auto basis = build_basis(3, 12);
    auto forcing = scaled_forcing(basis, RandomFactor::constant(1.0), 0.5, 1.0);
    SolverConfig config;
    config.convection_scale = 0.0;
    const auto sol = solve_deterministic(forcing, 0.0, config);
    const Eigen::VectorXd expected = -basis->stiffness_factor().solve(forcing.load(0.0)) / config.nu;
    CHECK(sol.report.iterations == 1);
    CHECK((sol.field.coefficients() - expected).norm() == 0.0);
}

TEST_CASE("a-priori bound and Picard iteration ceiling")
{
    auto basis = build_basis(4, 14);
    for (double nu : {0.5, 1.0, 2.0})
    {
        auto forcing = scaled_forcing(basis, RandomFactor::affine(1.0, 0.2), 0.5 / 1.2, nu);
        SolverConfig config;
        config.nu = nu;
        for (double xi : {-1.0, -0.3, 0.0, 0.7, 1.0})
        {
            const auto sol = solve_deterministic(forcing, xi, config);
            CHECK(sol.report.certificate.theta <= 0.5 + 1e-12);
            CHECK(sol.report.iterations <= 60);
            const double bound = forcing.dual_norms_at(xi).poincare_bound;
            CHECK(nu * field_norms(sol.field).h1 <= bound + 1e-10);
            CHECK(sol.report.bound_ratio <= 1.0 + 1e-10);
        }
    }
}

TEST_CASE("non-convergence raises with the last residual")
{
    auto basis = build_basis(3, 12);
    auto forcing = scaled_forcing(basis, RandomFactor::constant(1.0), 0.5, 1.0);
    SolverConfig config;
    config.max_iter = 2;
    try
    {
        (void)solve_deterministic(forcing, 0.0, config);
        FAIL("expected SolverError");
    }
    catch (const SolverError& e)
    {
        CHECK(e.residual() > config.tol_rel);
        CHECK(e.iterations() == 2);
    }
}

TEST_CASE("pathwise Lipschitz stability")
{
    auto basis = build_basis(4, 14);
    const double nu = 1.0;
    auto forcing = scaled_forcing(basis, RandomFactor::affine(1.0), 0.3, nu);
    SolverConfig config;
    config.nu = nu;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto same = lipschitz_pair_check(forcing, 0.4, 0.4, config);
    CHECK(same.lhs == 0.0);
    CHECK(same.rhs == 0.0);
    CHECK(same.verdict);
    for (int trial = 0; trial < 50; ++trial)
    {
        const double a = u(rng), b = u(rng);
        const auto check = lipschitz_pair_check(forcing, a, b, config);
        CHECK(check.theta <= 0.3 + 1e-12);
        CHECK(check.verdict);
        CHECK(check.lhs <= check.rhs + 1e-10);
    }
    CHECK_THROWS_AS(lipschitz_pair_check(forcing, 0.1, 0.2, config, 1.0), std::domain_error);
}
