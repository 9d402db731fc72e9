#include "chaosflow/galerkin.hpp"

#include "doctest.h"
#include "test_support.hpp"

#include <cmath>
#include <map>
#include <random>
#include <tuple>

using namespace chaosflow;
using namespace chaosflow::testing;

namespace
{

ChaosField random_stack(const BasisPtr& basis, Family family, int order, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m(basis->dimension(), order + 1);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = u(rng);
    return {basis, family, m};
}

double factorial(int n)
{
    double f = 1.0;
    for (int k = 2; k <= n; ++k)
        f *= k;
    return f;
}

} // namespace

TEST_CASE("forcing projection")
{
    auto basis = build_basis(3, 12);
    const auto F = swirl_field(1.0);
    SUBCASE("deterministic")
    {
        DiscreteForcing f(ForcingSpec{{{RandomFactor::constant(1.0), F}}}, basis);
        const auto p = project_forcing(f, Family::HermiteProbabilist, 3);
        CHECK(p.weights(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(p.weights.rightCols(3).isZero(0.0));
        CHECK(p.loads.rightCols(3).isZero(0.0));
        CHECK(p.poincare_bound == doctest::Approx(f.dual_norms_at(0.0).poincare_bound).epsilon(1e-14));
    }
    SUBCASE("xi, Legendre")
    {
        DiscreteForcing f(ForcingSpec{{{RandomFactor::affine(1.0), F}}}, basis);
        const auto p = project_forcing(f, Family::LegendreUniform, 3);
        CHECK(std::abs(p.weights(0, 0)) <= 1e-15);
        CHECK(p.weights(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(p.weights(0, 2) == 0.0);
        CHECK(p.weights(0, 3) == 0.0);
    }
    SUBCASE("|xi|, Legendre")
    {
        DiscreteForcing f(ForcingSpec{{{RandomFactor::absolute(), F}}}, basis);
        const auto p = project_forcing(f, Family::LegendreUniform, 2);
        CHECK(p.weights(0, 0) == doctest::Approx(0.5).epsilon(1e-13));
        CHECK(p.weights(0, 1) == 0.0);
        CHECK(p.weights(0, 2) == doctest::Approx(5.0 / 8.0).epsilon(1e-13));
    }
}

TEST_CASE("Hermite N = 2 couplings match the explicit Hermite system")
{
    const int N = 2;
    std::map<std::tuple<int, int, int>, double> explicit_terms;
    for (int l = 0; l <= N; ++l)
        for (int n = 0; n <= N; ++n)
            for (int k = 0; k <= l; ++k)
            {
                const int m = l - k;
                if (k + n > N || m + n > N)
                    continue;
                explicit_terms[{l, k + n, m + n}] +=
                    factorial(k + n) * factorial(m + n) / (factorial(k) * factorial(m) * factorial(n));
            }
    auto basis = build_basis(2, 11);
    const GalerkinSystem system(basis, Family::HermiteProbabilist, N);
    std::map<std::tuple<int, int, int>, double> assembled;
    for (const auto& c : system.couplings())
        assembled[{c.l, c.convecting, c.convected}] += c.coefficient;
    REQUIRE(assembled.size() == explicit_terms.size());
    for (const auto& [key, value] : explicit_terms)
    {
        REQUIRE(assembled.count(key) == 1);
        CHECK(assembled[key] == value);
    }
}

TEST_CASE("big trilinear form")
{
    std::mt19937_64 rng(17);
    auto basis = build_basis(3, 12);
    for (Family fam : {Family::LegendreUniform, Family::HermiteProbabilist})
    {
        for (int trial = 0; trial < 50; ++trial)
        {
            const int N = trial % 7;
            const auto v = random_stack(basis, fam, N, rng);
            const auto w = random_stack(basis, fam, N, rng);
            const auto u = random_stack(basis, fam, N, rng);
            const double scale = std::pow(chaos_norm(v), 2) * chaos_norm(u);
            CHECK(std::abs(big_trilinear_A(u, v, v)) <= 1e-10 * scale);

            if (N == 3)
            {
                const PolynomialFamily poly(fam);
                const auto rule = gauss_rule(poly, 2 * N);
                const double sampled = rule.expectation([&](double xi) {
                    return trilinear_a(u.at(xi), v.at(xi), w.at(xi));
                });
                CHECK(std::abs(big_trilinear_A(u, v, w) - sampled) <=
                      1e-11 * std::max(1.0, chaos_norm(u) * chaos_norm(v) * chaos_norm(w)));
            }
        }
        ChaosField u(basis, fam, 2), v(basis, fam, 2), w(basis, fam, 2);
        auto r = random_stack(basis, fam, 2, rng);
        u.modes().col(0) = r.modes().col(0);
        v.modes().col(0) = r.modes().col(1);
        w.modes().col(0) = r.modes().col(2);
        CHECK(big_trilinear_A(u, v, w) == doctest::Approx(trilinear_a(u.mode(0), v.mode(0), w.mode(0))).epsilon(1e-13));
        CHECK_THROWS_AS(big_trilinear_A(u, v, ChaosField(basis, fam, 1)), std::invalid_argument);
    }
}

TEST_CASE("chaos norm")
{
    std::mt19937_64 rng(1);
    auto basis = build_basis(3, 12);
    ChaosField single(basis, Family::LegendreUniform, 3);
    const auto r = random_stack(basis, Family::LegendreUniform, 3, rng);
    single.modes().col(0) = r.modes().col(0);
    CHECK(chaos_norm(single) == doctest::Approx(h1_seminorm(*basis, r.modes().col(0))).epsilon(1e-15));
    ChaosField only2(basis, Family::LegendreUniform, 3);
    only2.modes().col(2) = r.modes().col(2);
    CHECK(chaos_norm(only2) == doctest::Approx(std::sqrt(0.2) * h1_seminorm(*basis, r.modes().col(2))).epsilon(1e-14));
    const auto rule = gauss_rule(PolynomialFamily(Family::LegendreUniform), 3);
    const double sampled = rule.expectation([&](double xi) { return std::pow(field_norms(r.at(xi)).h1, 2); });
    CHECK(std::abs(chaos_norm(r) * chaos_norm(r) - sampled) <= 1e-12 * sampled);
    CHECK(chaos_distance(r, r) == 0.0);
}

TEST_CASE("deterministic forcing decouples the Galerkin system")
{
    auto basis = build_basis(4, 14);
    SolverConfig config;
    auto forcing = forcing_with_theta(basis, RandomFactor::constant(1.0), 0.4, config.nu);
    const auto det = solve_deterministic(forcing, 0.0, config);
    for (Family fam : {Family::LegendreUniform, Family::HermiteProbabilist})
        for (int N : {0, 1, 3})
        {
            const auto sol = solve_galerkin(forcing, fam, N, config);
            const double scale = det.field.coefficients().norm();
            CHECK((sol.field.modes().col(0) - det.field.coefficients()).norm() <= 1e-12 * scale);
            if (N > 0)
                CHECK(sol.field.modes().rightCols(N).cwiseAbs().maxCoeff() <= 1e-12 * scale);
        }
}

TEST_CASE("N = 0 reduces to the deterministic solve with the mean forcing")
{
    auto basis = build_basis(3, 12);
    SolverConfig config;
    auto forcing = forcing_with_theta(basis, RandomFactor::polynomial({0.5, 0.3, 0.4}), 0.4, config.nu);
    const auto sol = solve_galerkin(forcing, Family::LegendreUniform, 0, config);
    const auto projected = project_forcing(forcing, Family::LegendreUniform, 0);
    const auto det = solve_load(basis, projected.loads.col(0), projected.poincare_bound, config);
    CHECK((sol.field.modes().col(0) - det.field.coefficients()).norm() <= 1e-13 * det.field.coefficients().norm());
}

TEST_CASE("random forcing: strategies agree, a-priori bound and weak residual hold")
{
    auto basis = build_basis(4, 14);
    for (Family fam : {Family::LegendreUniform, Family::HermiteProbabilist})
        for (int N : {1, 2, 4})
        {
            SolverConfig config;
            config.nu = 0.8;
            const double peak = fam == Family::LegendreUniform ? 1.0 : 3.0;
            auto forcing = forcing_with_theta(basis, RandomFactor::affine(1.0, 0.5), 0.3, config.nu, peak);
            const auto picard = solve_galerkin(forcing, fam, N, config);
            config.strategy = Strategy::NewtonDamped;
            const auto newton = solve_galerkin(forcing, fam, N, config);
            const double scale = picard.field.modes().norm();
            CHECK((picard.field.modes() - newton.field.modes()).norm() <= 1e-9 * scale);
            for (const auto* sol : {&picard, &newton})
            {
                CHECK(sol->report.residual <= config.tol_rel);
                CHECK(config.nu * sol->report.chaos_norm <= sol->report.forcing_bound + 1e-9);
                CHECK(sol->report.bound_ratio <= 1.0 + 1e-9);
            }
            // weak form tested with every unit stack
            const GalerkinSystem system(basis, fam, N);
            const auto projected = project_forcing(forcing, fam, N);
            const Eigen::MatrixXd r = system.residual(picard.field.modes(), projected.loads, config);
            CHECK(r.cwiseAbs().maxCoeff() <= 1e-11 * projected.loads.cwiseAbs().maxCoeff());
        }
}

TEST_CASE("uniqueness margin")
{
    auto basis = build_basis(3, 12);
    const auto grid = xi_grid(Family::LegendreUniform, 1001);
    CHECK(grid.front() == -1.0);
    CHECK(grid.back() == 1.0);
    CHECK(xi_grid(Family::HermiteProbabilist, 3, 6.0)[0] == -6.0);
    CHECK(uniqueness_margin(ChaosField(basis, Family::LegendreUniform, 2), 1.0, grid) == 1.0);
    CHECK_THROWS_AS(uniqueness_margin(ChaosField(basis, Family::LegendreUniform, 2), 1.0, {}), std::invalid_argument);

    ChaosField v(basis, Family::LegendreUniform, 0);
    v.modes()(0, 0) = 1.0;
    const double nu = h1_seminorm(*basis, v.modes().col(0));
    CHECK(std::abs(uniqueness_margin(v, nu, grid)) <= 1e-15);

    SolverConfig config;
    const double theta = 0.1;
    auto forcing = forcing_with_theta(basis, RandomFactor::affine(1.0), theta, config.nu);
    const auto sol = solve_galerkin(forcing, Family::LegendreUniform, 3, config);
    CHECK(uniqueness_margin(sol.field, config.nu, grid) >= 1.0 - theta * 1.05);
}
