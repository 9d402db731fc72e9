#include "chaosflow/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace chaosflow
{

ConfigError::ConfigError(const std::string& message, int line, int column)
    : std::runtime_error("config:" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line), column_(column)
{
}

namespace
{

struct Token
{
    std::string text;
    int line;
    int column;
};

std::string trim(const std::string& s, std::size_t& offset)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
    {
        offset = s.size();
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    offset = first;
    return s.substr(first, last - first + 1);
}

/// Comma-separated items with their columns; parentheses protect inner commas.
std::vector<Token> split_list(const Token& value)
{
    std::vector<Token> items;
    int depth = 0;
    std::size_t start = 0;
    const std::string& s = value.text;
    for (std::size_t i = 0; i <= s.size(); ++i)
    {
        if (i < s.size() && s[i] == '(')
            ++depth;
        else if (i < s.size() && s[i] == ')')
            --depth;
        if (i == s.size() || (s[i] == ',' && depth == 0))
        {
            std::size_t off = 0;
            const std::string piece = trim(s.substr(start, i - start), off);
            if (piece.empty())
                throw ConfigError("empty list item", value.line, value.column + static_cast<int>(start));
            items.push_back({piece, value.line, value.column + static_cast<int>(start + off)});
            start = i + 1;
        }
    }
    return items;
}

double to_double(const Token& t)
{
    const char* begin = t.text.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        throw ConfigError("expected a number, got '" + t.text + "'", t.line, t.column);
    return v;
}

int to_int(const Token& t)
{
    const char* begin = t.text.c_str();
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0' || errno == ERANGE || v < INT32_MIN || v > INT32_MAX)
        throw ConfigError("expected an integer, got '" + t.text + "'", t.line, t.column);
    return static_cast<int>(v);
}

bool to_bool(const Token& t)
{
    if (t.text == "true" || t.text == "yes" || t.text == "1")
        return true;
    if (t.text == "false" || t.text == "no" || t.text == "0")
        return false;
    throw ConfigError("expected true or false, got '" + t.text + "'", t.line, t.column);
}

RandomFactor to_factor(const Token& t)
{
    const auto open = t.text.find('(');
    if (open == std::string::npos || t.text.back() != ')')
        throw ConfigError("expected const(..), poly(..), abs(..) or affine(..), got '" + t.text + "'", t.line,
                          t.column);
    const std::string kind = t.text.substr(0, open);
    const Token inner{t.text.substr(open + 1, t.text.size() - open - 2), t.line, t.column + static_cast<int>(open) + 1};
    std::vector<double> args;
    for (const auto& item : split_list(inner))
        args.push_back(to_double(item));
    const auto arity = [&](std::size_t lo, std::size_t hi) {
        if (args.size() < lo || args.size() > hi)
            throw ConfigError(kind + " takes " + std::to_string(lo) + (lo == hi ? "" : "-" + std::to_string(hi)) +
                                  " arguments",
                              t.line, t.column);
    };
    if (kind == "const")
    {
        arity(1, 1);
        return RandomFactor::constant(args[0]);
    }
    if (kind == "poly")
    {
        arity(1, 64);
        return RandomFactor::polynomial(args);
    }
    if (kind == "abs")
    {
        arity(0, 2);
        return RandomFactor::absolute(args.empty() ? 1.0 : args[0], args.size() > 1 ? args[1] : 0.0);
    }
    if (kind == "affine")
    {
        arity(1, 2);
        return RandomFactor::affine(args[0], args.size() > 1 ? args[1] : 0.0);
    }
    throw ConfigError("unknown factor kind '" + kind + "'", t.line, t.column);
}

std::vector<Monomial> to_monomials(const Token& t)
{
    std::vector<Monomial> out;
    for (const auto& item : split_list(t))
    {
        const auto c1 = item.text.find(':');
        const auto c2 = c1 == std::string::npos ? c1 : item.text.find(':', c1 + 1);
        if (c2 == std::string::npos)
            throw ConfigError("expected px:py:coef, got '" + item.text + "'", item.line, item.column);
        const Token px{item.text.substr(0, c1), item.line, item.column};
        const Token py{item.text.substr(c1 + 1, c2 - c1 - 1), item.line, item.column + static_cast<int>(c1) + 1};
        const Token coef{item.text.substr(c2 + 1), item.line, item.column + static_cast<int>(c2) + 1};
        Monomial m{to_int(px), to_int(py), to_double(coef)};
        if (m.px < 0 || m.py < 0)
            throw ConfigError("negative power", item.line, item.column);
        out.push_back(m);
    }
    return out;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

RunConfig parse_config(const std::string& text)
{
    RunConfig cfg;
    // key -> value token, per section; repeated keys are errors
    std::map<std::string, Token> values;
    std::string section;
    const std::set<std::string> sections{"space", "solver", "chaos", "forcing", "study", "output"};

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw))
    {
        ++line_no;
        auto cut = raw.find_first_of("#;");
        std::string line = cut == std::string::npos ? raw : raw.substr(0, cut);
        std::size_t off = 0;
        const std::string body = trim(line, off);
        if (body.empty())
            continue;
        const int col = static_cast<int>(off) + 1;
        if (body.front() == '[')
        {
            if (body.back() != ']')
                throw ConfigError("unterminated section header", line_no, col);
            std::size_t inner_off = 0;
            section = trim(body.substr(1, body.size() - 2), inner_off);
            if (!sections.count(section))
                throw ConfigError("unknown section [" + section + "]", line_no, col);
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value", line_no, col);
        if (section.empty())
            throw ConfigError("key outside of a section", line_no, col);
        std::size_t koff = 0, voff = 0;
        const std::string key = trim(body.substr(0, eq), koff);
        const std::string value = trim(body.substr(eq + 1), voff);
        if (key.empty())
            throw ConfigError("empty key", line_no, col);
        const int vcol = col + static_cast<int>(eq + 1 + voff);
        if (value.empty())
            throw ConfigError("empty value for '" + key + "'", line_no, vcol);
        const std::string full = section + "." + key;
        if (values.count(full))
            throw ConfigError("duplicate key '" + key + "' in [" + section + "]", line_no, col + static_cast<int>(koff));
        values.emplace(full, Token{value, line_no, vcol});
        values[full + "@key"] = Token{key, line_no, col + static_cast<int>(koff)};
    }

    std::set<std::string> used;
    const auto get = [&](const std::string& name) -> const Token* {
        auto it = values.find(name);
        if (it == values.end())
            return nullptr;
        used.insert(name);
        return &it->second;
    };

    if (auto t = get("space.K"))
        cfg.K = to_int(*t);
    if (auto t = get("space.Q"))
        cfg.Q = to_int(*t);
    if (auto t = get("solver.nu"))
        cfg.solver.nu = to_double(*t);
    if (auto t = get("solver.tol"))
        cfg.solver.tol_rel = to_double(*t);
    if (auto t = get("solver.max_iter"))
        cfg.solver.max_iter = to_int(*t);
    if (auto t = get("solver.damping"))
        cfg.solver.damping = to_double(*t);
    if (auto t = get("solver.strategy"))
    {
        try
        {
            cfg.solver.strategy = parse_strategy(t->text);
        }
        catch (const std::exception& e)
        {
            throw ConfigError(e.what(), t->line, t->column);
        }
    }
    if (auto t = get("chaos.family"))
    {
        try
        {
            cfg.family = parse_family(t->text);
        }
        catch (const std::exception& e)
        {
            throw ConfigError(e.what(), t->line, t->column);
        }
    }
    if (auto t = get("chaos.N"))
        cfg.order = to_int(*t);
    if (auto t = get("chaos.R_trunc"))
        cfg.half_range = to_double(*t);

    if (auto t = get("forcing.terms"))
    {
        for (const auto& name : split_list(*t))
        {
            if (std::find(cfg.term_names.begin(), cfg.term_names.end(), name.text) != cfg.term_names.end())
                throw ConfigError("duplicate term '" + name.text + "'", name.line, name.column);
            cfg.term_names.push_back(name.text);
            ForcingTerm term;
            const auto g = get("forcing." + name.text + ".g");
            if (!g)
                throw ConfigError("term '" + name.text + "' has no g", name.line, name.column);
            term.factor = to_factor(*g);
            if (auto f1 = get("forcing." + name.text + ".f1"))
                term.field.first = to_monomials(*f1);
            if (auto f2 = get("forcing." + name.text + ".f2"))
                term.field.second = to_monomials(*f2);
            cfg.forcing.terms.push_back(std::move(term));
        }
    }

    if (auto t = get("study.orders"))
    {
        cfg.study.orders.clear();
        for (const auto& item : split_list(*t))
            cfg.study.orders.push_back(to_int(item));
    }
    if (auto t = get("study.M_ref"))
        cfg.study.m_ref = to_int(*t);
    if (auto t = get("study.grid"))
        cfg.study.grid_count = to_int(*t);
    if (auto t = get("study.galerkin"))
        cfg.study.galerkin = to_bool(*t);
    if (auto t = get("study.grid_check"))
        cfg.study.grid_check = to_bool(*t);
    if (auto t = get("output.dir"))
        cfg.output_dir = t->text;
    if (auto t = get("output.svg"))
        cfg.svg = to_bool(*t);

    // anything left over is unknown; report the first in file order
    const Token* unknown = nullptr;
    for (const auto& [name, tok] : values)
    {
        if (name.size() > 4 && name.compare(name.size() - 4, 4, "@key") == 0)
            continue;
        if (used.count(name))
            continue;
        const Token& key = values.at(name + "@key");
        if (!unknown || key.line < unknown->line)
            unknown = &key;
    }
    if (unknown)
        throw ConfigError("unknown key '" + unknown->text + "'", unknown->line, unknown->column);

    cfg.study.family = cfg.family;
    cfg.study.half_range = cfg.half_range;

    const auto where = [&](const std::string& name) {
        auto it = values.find(name);
        return it == values.end() ? std::pair{0, 0} : std::pair{it->second.line, it->second.column};
    };
    const auto require = [&](bool ok, const std::string& name, const std::string& message) {
        if (!ok)
        {
            const auto [l, c] = where(name);
            throw ConfigError(message, l, c);
        }
    };
    require(cfg.K >= 1 && cfg.K <= 24, "space.K", "K must lie in [1, 24]");
    require(cfg.Q == 0 || cfg.Q >= StreamBasis::minimum_quadrature_points(cfg.K), "space.Q",
            "Q must be at least " + std::to_string(StreamBasis::minimum_quadrature_points(cfg.K)) + " for K=" +
                std::to_string(cfg.K));
    require(cfg.order >= 0 && cfg.order <= 32, "chaos.N", "N must lie in [0, 32]");
    require(cfg.half_range > 0.0, "chaos.R_trunc", "R_trunc must be positive");
    try
    {
        cfg.solver.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError(e.what(), where("solver.nu").first, 0);
    }
    require(cfg.study.grid_count >= 101, "study.grid", "grid needs at least 101 points");
    require(cfg.study.m_ref == 0 || cfg.study.m_ref >= 2 * *std::max_element(cfg.study.orders.begin(), cfg.study.orders.end()) + 8,
            "study.M_ref", "M_ref must be at least 2 max(N) + 8");
    try
    {
        cfg.study.validate();
    }
    catch (const std::invalid_argument& e)
    {
        const auto [l, c] = where("study.orders");
        throw ConfigError(e.what(), l, c);
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open '" + path + "'", 0, 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

int RunConfig::resolved_q() const
{
    int p = 0;
    for (const auto& t : forcing.terms)
        p = std::max(p, t.field.max_power());
    const int need = std::max({StreamBasis::minimum_quadrature_points(K), (p + K + 5) / 2, p + 1});
    return Q > 0 ? Q : need;
}

std::string RunConfig::canonical() const
{
    std::ostringstream out;
    out << "[space]\nK=" << K << "\nQ=" << resolved_q() << "\n";
    out << "[solver]\nnu=" << fmt(solver.nu) << "\ntol=" << fmt(solver.tol_rel) << "\nmax_iter=" << solver.max_iter
        << "\nstrategy=" << to_string(solver.strategy) << "\ndamping=" << fmt(solver.damping) << "\n";
    out << "[chaos]\nfamily=" << to_string(family) << "\nN=" << order << "\nR_trunc=" << fmt(half_range) << "\n";
    out << "[forcing]\n";
    for (std::size_t r = 0; r < forcing.terms.size(); ++r)
    {
        const auto& t = forcing.terms[r];
        out << "term" << r << ".g=" << static_cast<int>(t.factor.kind()) << "(";
        for (std::size_t i = 0; i < t.factor.coefficients().size(); ++i)
            out << (i ? "," : "") << fmt(t.factor.coefficients()[i]);
        out << ")\n";
        for (int c = 0; c < 2; ++c)
        {
            out << "term" << r << ".f" << c + 1 << "=";
            const auto& ms = c == 0 ? t.field.first : t.field.second;
            for (std::size_t i = 0; i < ms.size(); ++i)
                out << (i ? "," : "") << ms[i].px << ":" << ms[i].py << ":" << fmt(ms[i].coef);
            out << "\n";
        }
    }
    out << "[study]\norders=";
    for (std::size_t i = 0; i < study.orders.size(); ++i)
        out << (i ? "," : "") << study.orders[i];
    out << "\nM_ref=" << study.resolved_m_ref() << "\ngrid=" << study.grid_count << "\ngalerkin=" << study.galerkin
        << "\ngrid_check=" << study.grid_check << "\n";
    return out.str();
}

std::uint64_t fnv1a(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text)
    {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string RunConfig::hash() const
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
    return buf;
}

} // namespace chaosflow
