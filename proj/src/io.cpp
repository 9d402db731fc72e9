#include "chaosflow/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace chaosflow
{

std::string format_double(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_manifest(std::ostream& out, const Manifest& manifest)
{
    for (const auto& [key, value] : manifest)
        out << "# " << key << "=" << value << "\n";
}

void write_quadrature_csv(std::ostream& out, const QuadratureRule& rule)
{
    out << "j,node,weight\n";
    for (std::size_t j = 0; j < rule.size(); ++j)
        out << j << "," << format_double(rule.nodes[j]) << "," << format_double(rule.weights[j]) << "\n";
}

void write_triple_csv(std::ostream& out, const TripleProductTensor& tensor)
{
    out << "m,n,l,value\n";
    for (const auto& e : tensor.entries())
        out << e.m << "," << e.n << "," << e.l << "," << format_double(e.value) << "\n";
}

void write_field_csv(std::ostream& out, const VelocityField& field, const Manifest& manifest)
{
    write_manifest(out, manifest);
    const int K = field.basis()->resolution();
    out << "a,b,z\n";
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b)
            out << a << "," << b << "," << format_double(field.coefficient(a, b)) << "\n";
}

void write_chaos_csv(std::ostream& out, const ChaosField& field, const Manifest& manifest)
{
    write_manifest(out, manifest);
    const auto& basis = *field.basis();
    const int K = basis.resolution();
    out << "l,a,b,z\n";
    for (int l = 0; l <= field.order(); ++l)
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b)
                out << l << "," << a << "," << b << "," << format_double(field.modes()(basis.index(a, b), l))
                    << "\n";
}

void write_pseudospectral_csv(std::ostream& out, const PseudoSpectralSolution& sol, Manifest manifest)
{
    const auto kind = std::find_if(manifest.begin(), manifest.end(), [](const auto& kv) { return kv.first == "kind"; });
    if (kind == manifest.end())
        manifest.emplace_back("kind", "pseudospectral");
    else
        kind->second = "pseudospectral";
    write_chaos_csv(out, sol.as_chaos_field(), manifest);
}

void write_node_csv(std::ostream& out, const QuadratureRule& rule)
{
    out << "j,xi,weight\n";
    for (std::size_t j = 0; j < rule.size(); ++j)
        out << j << "," << format_double(rule.nodes[j]) << "," << format_double(rule.weights[j]) << "\n";
}

namespace
{

/// Manifest, header and rows of a CSV table; every data cell is split on ','.
struct RawTable
{
    Manifest manifest;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_cells(const std::string& line)
{
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        cells.push_back(cell);
    return cells;
}

RawTable read_raw(std::istream& in)
{
    RawTable t;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line.rfind("# ", 0) == 0)
        {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw FormatError("line " + std::to_string(line_no) + ": manifest line without '='");
            t.manifest.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
            continue;
        }
        if (t.header.empty())
        {
            t.header = split_cells(line);
            continue;
        }
        auto cells = split_cells(line);
        if (cells.size() != t.header.size())
            throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                              " cells");
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty())
        throw FormatError("missing header");
    return t;
}

long parse_index(const std::string& s)
{
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE || v < 0)
        throw FormatError("bad index '" + s + "'");
    return v;
}

double parse_value(const std::string& s)
{
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw FormatError("bad number '" + s + "'");
    return v;
}

int resolution_from_rows(std::size_t count)
{
    const auto K = static_cast<int>(std::lround(std::sqrt(static_cast<double>(count))));
    if (K < 1 || static_cast<std::size_t>(K) * static_cast<std::size_t>(K) != count)
        throw FormatError("coefficient table is not K x K");
    return K;
}

void expect_header(const RawTable& t, const std::vector<std::string>& header)
{
    if (t.header != header)
        throw FormatError("unexpected header");
}

} // namespace

FieldTable read_field_csv(std::istream& in)
{
    const RawTable t = read_raw(in);
    expect_header(t, {"a", "b", "z"});
    FieldTable out;
    out.manifest = t.manifest;
    out.resolution = resolution_from_rows(t.rows.size());
    const int K = out.resolution;
    out.coefficients = Eigen::VectorXd::Zero(K * K);
    for (const auto& r : t.rows)
    {
        const long a = parse_index(r[0]), b = parse_index(r[1]);
        if (a >= K || b >= K)
            throw FormatError("index out of range");
        out.coefficients[a * K + b] = parse_value(r[2]);
    }
    return out;
}

ChaosTable read_chaos_csv(std::istream& in)
{
    const RawTable t = read_raw(in);
    expect_header(t, {"l", "a", "b", "z"});
    long max_l = -1;
    for (const auto& r : t.rows)
        max_l = std::max(max_l, parse_index(r[0]));
    if (max_l < 0)
        throw FormatError("empty chaos table");
    const auto modes = static_cast<std::size_t>(max_l + 1);
    if (t.rows.size() % modes != 0)
        throw FormatError("ragged chaos table");
    ChaosTable out;
    out.manifest = t.manifest;
    out.resolution = resolution_from_rows(t.rows.size() / modes);
    const int K = out.resolution;
    out.modes = Eigen::MatrixXd::Zero(K * K, static_cast<Eigen::Index>(modes));
    for (const auto& r : t.rows)
    {
        const long l = parse_index(r[0]), a = parse_index(r[1]), b = parse_index(r[2]);
        if (a >= K || b >= K)
            throw FormatError("index out of range");
        out.modes(a * K + b, l) = parse_value(r[3]);
    }
    return out;
}

const std::string& manifest_value(const Manifest& manifest, const std::string& key)
{
    for (const auto& [k, v] : manifest)
        if (k == key)
            return v;
    throw FormatError("manifest has no '" + key + "'");
}

void write_study_csv(std::ostream& out, const StudyReport& report, const Manifest& manifest)
{
    Manifest full = manifest;
    full.emplace_back("M_ref", std::to_string(report.m_ref));
    full.emplace_back("grid", std::to_string(report.grid_count));
    full.emplace_back("theta", format_double(report.theta));
    full.emplace_back("reference_doubling_change", format_double(report.reference_doubling_change));
    full.emplace_back("grid_refinement_change", format_double(report.grid_refinement_change));
    full.emplace_back("path_solves", std::to_string(report.path_solves));
    for (const auto& r : study_rates(report))
    {
        full.emplace_back("rate." + r.series + ".p", format_double(r.fit.p));
        full.emplace_back("rate." + r.series + ".C", format_double(r.fit.c));
        full.emplace_back("rate." + r.series + ".residual", format_double(r.fit.residual));
    }
    write_manifest(out, full);
    out << "N,proj_err2,ps_err2,aliasing2,delta,ni_lhs,ni_rhs,ni_slack,ni_weak_rhs,decomposition_gap,"
           "interpolation_residual,galerkin_run,galerkin_certified,galerkin_iterations,epsilon,proj_gap,proj_err,"
           "galerkin_err,factor,gap_bound_rhs,gap_bound_slack,error_bound_rhs,error_bound_slack\n";
    for (const auto& row : report.rows)
    {
        const auto& c = row.collocation;
        const auto& g = row.galerkin;
        out << row.order;
        for (double v : {c.proj_err2, c.ps_err2, c.aliasing2, c.delta, c.lhs, c.rhs, c.slack, c.weak_rhs,
                         c.decomposition_gap, row.interpolation_residual})
            out << "," << format_double(v);
        out << "," << int(row.galerkin_run) << "," << int(row.galerkin_certified) << "," << row.galerkin_iterations;
        for (double v : {g.epsilon, g.proj_gap, g.proj_err, g.galerkin_err, g.factor, g.gap_bound_rhs, g.gap_bound_slack,
                         g.error_bound_rhs, g.error_bound_slack})
            out << "," << format_double(v);
        out << "\n";
    }
}

void write_study_svg(std::ostream& out, const StudyReport& report)
{
    struct Series
    {
        const char* name;
        const char* color;
        std::vector<std::pair<double, double>> points;
    };
    std::vector<Series> series{{"delta_N", "#1f77b4", {}}, {"sqrt E|u-u^(N)|^2", "#d62728", {}},
                               {"sqrt E|u-u^N|^2", "#2ca02c", {}}};
    for (const auto& row : report.rows)
    {
        if (row.order <= 0)
            continue;
        const double n = row.order;
        const double vals[3] = {row.collocation.delta, std::sqrt(row.collocation.ps_err2),
                                std::sqrt(row.collocation.proj_err2)};
        for (int s = 0; s < 3; ++s)
            if (vals[s] > 0.0)
                series[static_cast<std::size_t>(s)].points.emplace_back(std::log10(n), std::log10(vals[s]));
    }
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points)
        {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    const double W = 640, H = 480, pad = 60;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
    out << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    if (!std::isfinite(xmin))
    {
        out << "<text x=\"320\" y=\"240\" text-anchor=\"middle\">no positive data</text>\n</svg>\n";
        return;
    }
    if (xmax - xmin < 1e-12)
        xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12)
        ymax = ymin + 1.0;
    const auto px = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (W - 2 * pad); };
    const auto py = [&](double y) { return H - pad - (y - ymin) / (ymax - ymin) * (H - 2 * pad); };
    char buf[256];
    out << "<g stroke=\"black\" fill=\"none\"><rect x=\"60\" y=\"60\" width=\"520\" height=\"360\"/></g>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"320\" y=\"465\" text-anchor=\"middle\">log10 N</text>\n"
                  "<text x=\"15\" y=\"240\" transform=\"rotate(-90 15 240)\" text-anchor=\"middle\">log10 error "
                  "[%.2f, %.2f]</text>\n",
                  ymin, ymax);
    out << buf;
    // reference slopes anchored at the first delta point
    const auto& anchor = series[0].points.empty() ? series[1].points : series[0].points;
    if (!anchor.empty())
    {
        const double x0 = anchor.front().first, y0 = anchor.front().second;
        for (const auto& [slope, label] : {std::pair{-0.75, "N^-3/4"}, std::pair{-1.5, "N^-3/2"}})
        {
            const double y1 = y0 + slope * (xmax - x0);
            std::snprintf(buf, sizeof buf,
                          "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"gray\" "
                          "stroke-dasharray=\"6,4\"/>\n<text x=\"%.2f\" y=\"%.2f\" fill=\"gray\">%s</text>\n",
                          px(x0), py(y0), px(xmax), py(y1), px(xmax) - 50, py(y1) - 5, label);
            out << buf;
        }
    }
    int legend = 0;
    for (const auto& s : series)
    {
        if (s.points.empty())
            continue;
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : s.points)
        {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x), py(y));
            out << buf;
        }
        out << "\"/>\n";
        std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\" fill=\"%s\">%s</text>\n", 400, 80 + 18 * legend,
                      s.color, s.name);
        out << buf;
        ++legend;
    }
    out << "</svg>\n";
}

void write_compare_csv(std::ostream& out, const CompareReport& report, const Manifest& manifest)
{
    Manifest full = manifest;
    full.emplace_back("M_ref", std::to_string(report.m_ref));
    full.emplace_back("gap", format_double(report.gap));
    full.emplace_back("galerkin_err", format_double(report.galerkin_err));
    full.emplace_back("collocation_err", format_double(report.collocation_err));
    full.emplace_back("galerkin_iterations", std::to_string(report.galerkin_report.iterations));
    write_manifest(out, full);
    out << "l,distance\n";
    for (std::size_t l = 0; l < report.mode_distance.size(); ++l)
        out << l << "," << format_double(report.mode_distance[l]) << "\n";
    out << "H," << format_double(report.gap) << "\n";
}

void write_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << contents;
    if (!out)
        throw std::runtime_error("write failed for '" + path + "'");
}

} // namespace chaosflow
