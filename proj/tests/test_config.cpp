#include "chaosflow/config.hpp"

#include "doctest.h"

#include <string>

using namespace chaosflow;

namespace
{

const char* kFull = R"(# a complete configuration
[space]
K = 5
Q = 16

[solver]
nu = 0.5
tol = 1e-11
max_iter = 80
strategy = newton
damping = 0.9

[chaos]
family = hermite
N = 6
R_trunc = 5

[forcing]
terms = swirl, kink
swirl.g = poly(0.5, 1, 0.25)
swirl.f1 = 0:1:1.0, 2:1:0.5   ; inline comment
swirl.f2 = 1:0:-1.0
kink.g = abs(2, 0.1)
kink.f2 = 0:0:0.3

[study]
orders = 1, 2, 4
M_ref = 40
grid = 301
galerkin = false
grid_check = no

[output]
dir = results
svg = true
)";

int error_line(const std::string& text)
{
    try
    {
        (void)parse_config(text);
    }
    catch (const ConfigError& e)
    {
        return e.line();
    }
    return -1;
}

} // namespace

TEST_CASE("full configuration")
{
    const RunConfig c = parse_config(kFull);
    CHECK(c.K == 5);
    CHECK(c.Q == 16);
    CHECK(c.resolved_q() == 16);
    CHECK(c.solver.nu == 0.5);
    CHECK(c.solver.tol_rel == 1e-11);
    CHECK(c.solver.max_iter == 80);
    CHECK(c.solver.strategy == Strategy::NewtonDamped);
    CHECK(c.solver.damping == 0.9);
    CHECK(c.family == Family::HermiteProbabilist);
    CHECK(c.order == 6);
    CHECK(c.half_range == 5.0);
    REQUIRE(c.forcing.terms.size() == 2);
    CHECK(c.term_names == std::vector<std::string>{"swirl", "kink"});
    const auto& swirl = c.forcing.terms[0];
    CHECK(swirl.factor(2.0) == doctest::Approx(0.5 + 2.0 + 1.0));
    REQUIRE(swirl.field.first.size() == 2);
    CHECK(swirl.field.first[1].px == 2);
    CHECK(swirl.field.first[1].py == 1);
    CHECK(swirl.field.first[1].coef == 0.5);
    CHECK(swirl.field.second[0].coef == -1.0);
    const auto& kink = c.forcing.terms[1];
    CHECK(kink.factor.kind() == FactorKind::AbsoluteValue);
    CHECK(kink.factor(-1.5) == doctest::Approx(3.1));
    CHECK(kink.field.first.empty());
    CHECK(c.study.orders == std::vector<int>{1, 2, 4});
    CHECK(c.study.m_ref == 40);
    CHECK(c.study.grid_count == 301);
    CHECK_FALSE(c.study.galerkin);
    CHECK_FALSE(c.study.grid_check);
    CHECK(c.study.family == Family::HermiteProbabilist);
    CHECK(c.study.half_range == 5.0);
    CHECK(c.output_dir == "results");
    CHECK(c.svg);
}

TEST_CASE("defaults and resolved Q")
{
    const RunConfig c = parse_config("");
    CHECK(c.K == 4);
    CHECK(c.resolved_q() == StreamBasis::minimum_quadrature_points(4));
    CHECK(c.forcing.terms.empty());
    CHECK(c.solver.strategy == Strategy::Picard);

    const RunConfig high = parse_config("[space]\nK = 2\n[forcing]\nterms = a\na.g = const(1)\na.f1 = 12:0:1\n");
    CHECK(high.resolved_q() == 13);
    CHECK_NOTHROW(DiscreteForcing(high.forcing, build_basis(high.K, high.resolved_q())));
}

TEST_CASE("malformed input reports line and column")
{
    try
    {
        (void)parse_config("[space]\nK = 3\n  bogus = 1\n");
        FAIL("expected ConfigError");
    }
    catch (const ConfigError& e)
    {
        CHECK(e.line() == 3);
        CHECK(e.column() == 3);
        CHECK(std::string(e.what()).find("unknown key 'bogus'") != std::string::npos);
    }
    try
    {
        (void)parse_config("[solver]\nnu =  abc\n");
        FAIL("expected ConfigError");
    }
    catch (const ConfigError& e)
    {
        CHECK(e.line() == 2);
        CHECK(e.column() == 7);
    }
    CHECK(error_line("[nowhere]\n") == 1);
    CHECK(error_line("K = 3\n") == 1);
    CHECK(error_line("[space]\nK\n") == 2);
    CHECK(error_line("[space]\nK = 3\nK = 4\n") == 3);
    CHECK(error_line("[space]\nK = 3.5\n") == 2);
    CHECK(error_line("[space]\nK = 0\n") == 2);
    CHECK(error_line("[space]\nK = 4\nQ = 3\n") == 3);
    CHECK(error_line("[solver]\nstrategy = bisection\n") == 2);
    CHECK(error_line("[chaos]\nfamily = laguerre\n") == 2);
    CHECK(error_line("[forcing]\nterms = a\n") == 2);
    CHECK(error_line("[forcing]\nterms = a\na.g = sin(1)\n") == 3);
    CHECK(error_line("[forcing]\nterms = a\na.g = const(1, 2)\n") == 3);
    CHECK(error_line("[forcing]\nterms = a\na.g = const(1)\na.f1 = 1:1\n") == 4);
    CHECK(error_line("[forcing]\nterms = a\na.g = const(1)\nb.f1 = 1:1:1\n") == 4);
    CHECK(error_line("[study]\norders = 1,,2\n") == 2);
    CHECK(error_line("[study]\ngrid = 50\n") == 2);
    CHECK(error_line("[study]\ngalerkin = maybe\n") == 2);
    CHECK(error_line("[space]\nK = 3\n") == -1);
}

TEST_CASE("config hash")
{
    const RunConfig a = parse_config(kFull);
    const RunConfig b = parse_config(std::string(kFull) + "\n# trailing comment\n");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    const RunConfig c = parse_config(std::string(kFull).replace(std::string(kFull).find("nu = 0.5"), 8, "nu = 0.6"));
    CHECK(a.hash() != c.hash());
    // FNV-1a test vectors
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}
