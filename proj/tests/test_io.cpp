#include "chaosflow/galerkin.hpp"
#include "chaosflow/io.hpp"

#include "doctest.h"
#include "test_support.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

using namespace chaosflow;
using namespace chaosflow::testing;

TEST_CASE("doubles round trip through 17 digits")
{
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::uint64_t> bits;
    for (int i = 0; i < 10000; ++i)
    {
        const std::uint64_t b = bits(rng);
        double v;
        std::memcpy(&v, &b, sizeof v);
        if (!std::isfinite(v))
            continue;
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(std::numeric_limits<double>::denorm_min()) == "4.9406564584124654e-324");
}

TEST_CASE("quadrature and triple tables")
{
    std::ostringstream q;
    write_quadrature_csv(q, gauss_rule(PolynomialFamily(Family::LegendreUniform), 1));
    CHECK(q.str() == "j,node,weight\n0,-0.57735026918962573,0.5\n1,0.57735026918962573,0.5\n");
    std::ostringstream t;
    write_triple_csv(t, triple_products(Family::HermiteProbabilist, 1));
    CHECK(t.str() == "m,n,l,value\n0,0,0,1\n1,1,0,1\n0,1,1,1\n1,0,1,1\n1,1,2,1\n");
}

TEST_CASE("field and chaos tables reload bit-identically")
{
    auto basis = build_basis(3, 12);
    SolverConfig config;
    auto forcing = forcing_with_theta(basis, geometric_factor(0.5, 4), 0.3, config.nu);
    const auto det = solve_deterministic(forcing, 0.37, config);
    std::stringstream f;
    write_field_csv(f, det.field, {{"kind", "field"}, {"K", "3"}});
    const auto field = read_field_csv(f);
    CHECK(field.resolution == 3);
    CHECK(field.coefficients == det.field.coefficients());
    CHECK(manifest_value(field.manifest, "kind") == "field");
    CHECK_THROWS_AS(manifest_value(field.manifest, "missing"), FormatError);

    const auto gal = solve_galerkin(forcing, Family::LegendreUniform, 3, config);
    std::stringstream c;
    write_chaos_csv(c, gal.field, {{"family", "legendre"}});
    const auto chaos = read_chaos_csv(c);
    CHECK(chaos.resolution == 3);
    CHECK(chaos.modes == gal.field.modes());

    const auto ps = solve_collocation(forcing, Family::LegendreUniform, 3, config);
    std::stringstream p;
    write_pseudospectral_csv(p, ps, {});
    const auto pt = read_chaos_csv(p);
    CHECK(manifest_value(pt.manifest, "kind") == "pseudospectral");
    CHECK(pt.modes == ps.as_chaos_field().modes());
    std::ostringstream nodes;
    write_node_csv(nodes, ps.rule);
    CHECK(nodes.str().rfind("j,xi,weight\n0,", 0) == 0);
}

TEST_CASE("malformed tables")
{
    std::istringstream empty("");
    CHECK_THROWS_AS(read_field_csv(empty), FormatError);
    std::istringstream header("l,a,b,z\n0,0,0,1\n");
    CHECK_THROWS_AS(read_field_csv(header), FormatError);
    std::istringstream ragged("a,b,z\n0,0,1\n0,1\n");
    CHECK_THROWS_AS(read_field_csv(ragged), FormatError);
    std::istringstream notsquare("a,b,z\n0,0,1\n0,1,2\n");
    CHECK_THROWS_AS(read_field_csv(notsquare), FormatError);
    std::istringstream junk("a,b,z\n0,0,x\n");
    CHECK_THROWS_AS(read_field_csv(junk), FormatError);
}

TEST_CASE("study table and plot")
{
    StudyReport report{Family::LegendreUniform, 32, 201, 1.0, 0.2, 0.0, 0.0, {}, 0};
    for (int n : {1, 2, 4, 8})
    {
        StudyRow row;
        row.order = n;
        row.collocation.delta = 1.0 / n;
        row.collocation.ps_err2 = 2.0 / (n * n);
        row.collocation.proj_err2 = 1.0 / (n * n);
        report.rows.push_back(row);
    }
    const auto rates = study_rates(report);
    REQUIRE(rates.size() == 3);
    CHECK(rates[0].series == "delta");
    CHECK(rates[0].fit.p == doctest::Approx(1.0));
    std::ostringstream csv;
    write_study_csv(csv, report, {{"config_hash", "abc"}});
    const std::string text = csv.str();
    CHECK(text.find("# config_hash=abc\n") == 0);
    CHECK(text.find("# rate.delta.p=1") != std::string::npos);
    CHECK(text.find("\n8,0.015625,0.03125,") != std::string::npos);
    std::ostringstream svg;
    write_study_svg(svg, report);
    CHECK(svg.str().find("<svg") == 0);
    CHECK(svg.str().find("N^-3/4") != std::string::npos);
    CHECK(svg.str().find("</svg>") != std::string::npos);
}
