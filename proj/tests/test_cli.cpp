#include "chaosflow/config.hpp"
#include "chaosflow/io.hpp"

#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace chaosflow;
namespace fs = std::filesystem;

namespace
{

struct Run
{
    int status;
    std::string out;
};

Run run(const std::string& args)
{
    const std::string cmd = std::string(CHAOSFLOW_CLI) + " " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe))
        out.append(buf, n);
    const int raw = ::pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("chaosflow_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

const char* kSmall = R"([space]
K = 3
[chaos]
family = legendre
N = 3
[forcing]
terms = t
t.g = poly(1, 0.5, 0.25)
t.f1 = 0:1:0.05, 2:1:0.025
t.f2 = 1:0:-0.05, 1:2:0.015
[study]
orders = 1, 2, 3
grid = 101
)";

} // namespace

TEST_CASE("quad prints the two-point Legendre rule")
{
    const auto r = run("quad --family legendre --chaos-order 1");
    CHECK(r.status == 0);
    std::istringstream in(r.out);
    std::string header, row0, row1;
    std::getline(in, header);
    std::getline(in, row0);
    std::getline(in, row1);
    CHECK(header == "j,node,weight");
    CHECK(std::abs(std::strtod(row0.substr(2).c_str(), nullptr) + 0.5773502691896258) <= 2e-16);
    CHECK(std::abs(std::strtod(row1.substr(2).c_str(), nullptr) - 0.5773502691896258) <= 2e-16);
    CHECK(row0.substr(row0.rfind(',') + 1) == "0.5");
}

TEST_CASE("zero forcing gives a zero field and zero residual")
{
    const auto dir = scratch("zero");
    write(dir / "zero.ini", "[space]\nK = 3\n");
    const auto r = run("solve --config " + (dir / "zero.ini").string() + " --xi 0.25 --out-dir " + dir.string());
    CHECK(r.status == 0);
    CHECK(r.out.find("0.25,1,0,0,1,0,0") != std::string::npos);
    std::ifstream in(dir / "solve_field.csv");
    const auto field = read_field_csv(in);
    CHECK(field.coefficients.isZero(0.0));
    CHECK(manifest_value(field.manifest, "config_hash") == load_config((dir / "zero.ini").string()).hash());
}

TEST_CASE("exit codes")
{
    const auto dir = scratch("exit");
    write(dir / "bad.ini", "[space]\nK = 3\n\n[solver]\n nu = fast\n");
    const auto bad = run("solve --config " + (dir / "bad.ini").string() + " --xi 0");
    CHECK(bad.status == 3);
    CHECK(bad.out.find("config:5:7") != std::string::npos);

    const auto missing = run("solve --config " + (dir / "none.ini").string() + " --xi 0");
    CHECK(missing.status == 3);

    // strong forcing: theta > 1 at xi = 0 but the solver still converges
    write(dir / "big.ini", "[space]\nK = 3\n[forcing]\nterms = t\nt.g = const(1)\nt.f1 = 0:1:3\nt.f2 = 1:0:-3\n");
    const auto big = run("solve --config " + (dir / "big.ini").string() + " --xi 0 --out-dir " + dir.string());
    CHECK(big.status == 2);

    write(dir / "diverge.ini", "[space]\nK = 3\n[solver]\nmax_iter = 2\ntol = 1e-14\n[forcing]\nterms = t\n"
                               "t.g = const(1)\nt.f1 = 0:1:3, 2:1:1.5\nt.f2 = 1:0:-3, 1:2:0.9\n");
    const auto fail = run("solve --config " + (dir / "diverge.ini").string() + " --xi 0 --out-dir " + dir.string());
    CHECK(fail.status == 1);
}

TEST_CASE("compare with deterministic forcing")
{
    const auto dir = scratch("compare");
    write(dir / "det.ini", "[space]\nK = 3\n[chaos]\nN = 3\n[forcing]\nterms = t\nt.g = const(1)\n"
                           "t.f1 = 0:1:0.05, 2:1:0.025\nt.f2 = 1:0:-0.05, 1:2:0.015\n");
    const auto r = run("compare --config " + (dir / "det.ini").string() + " --out-dir " + dir.string());
    CHECK(r.status == 0);
    const std::string csv = slurp(dir / "compare.csv");
    const auto at = csv.find("\nH,");
    REQUIRE(at != std::string::npos);
    CHECK(std::strtod(csv.c_str() + at + 3, nullptr) <= 1e-11);
}

TEST_CASE("galerkin and collocate artifacts")
{
    const auto dir = scratch("artifacts");
    write(dir / "small.ini", kSmall);
    const auto g = run("galerkin --config " + (dir / "small.ini").string() + " --family legendre --chaos-order 2 "
                       "--out-dir " + dir.string());
    CHECK(g.status == 0);
    std::ifstream gin(dir / "galerkin.csv");
    const auto gal = read_chaos_csv(gin);
    CHECK(gal.modes.cols() == 3);
    CHECK(manifest_value(gal.manifest, "N") == "2");
    CHECK(manifest_value(gal.manifest, "family") == "legendre");

    const auto c = run("collocate --config " + (dir / "small.ini").string() + " --out-dir " + dir.string());
    CHECK(c.status == 0);
    std::ifstream cin(dir / "collocation.csv");
    const auto col = read_chaos_csv(cin);
    CHECK(manifest_value(col.manifest, "kind") == "pseudospectral");
    CHECK(col.modes.cols() == 4);
    CHECK(slurp(dir / "collocation_nodes.csv").rfind("j,xi,weight\n", 0) == 0);
}

TEST_CASE("threads do not change any byte")
{
    const auto dir = scratch("threads");
    write(dir / "small.ini", kSmall);
    const std::string cfg = (dir / "small.ini").string();
    for (const std::string sub : {"collocate", "study"})
    {
        const std::string extra = sub == "study" ? " --svg" : "";
        CHECK(run(sub + " --config " + cfg + " --out-dir " + (dir / "seq").string() + extra).status == 0);
        CHECK(run("--threads 4 " + sub + " --config " + cfg + " --out-dir " + (dir / "par").string()).status == 0);
    }
    for (const char* file : {"collocation.csv", "collocation_nodes.csv", "collocation_report.csv", "study.csv"})
    {
        const std::string a = slurp(dir / "seq" / file);
        CHECK(!a.empty());
        CHECK(a == slurp(dir / "par" / file));
    }
    CHECK(fs::exists(dir / "seq" / "study.svg"));
}
