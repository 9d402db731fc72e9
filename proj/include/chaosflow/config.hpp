#pragma once

#include "chaosflow/detsolver.hpp"
#include "chaosflow/errorlab.hpp"
#include "chaosflow/forcing.hpp"
#include "chaosflow/orthopoly.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace chaosflow
{

/// Malformed configuration, with a 1-based position.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(const std::string& message, int line, int column);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/**
 * Run configuration. Grammar (INI-like, '#' or ';' starts a comment):
 *
 *   [space]    K, Q
 *   [solver]   nu, tol, max_iter, strategy (picard|newton), damping
 *   [chaos]    family (hermite|legendre), N, R_trunc
 *   [forcing]  terms = t1, t2
 *              t1.g  = const(c) | poly(c0, c1, ...) | abs(scale[, shift]) | affine(scale[, shift])
 *              t1.f1 = px:py:coef, ...      (first component, monomials coef x1^px x2^py)
 *              t1.f2 = px:py:coef, ...
 *   [study]    orders = 1, 2, 4, M_ref, grid, galerkin, grid_check
 *   [output]   dir, svg
 */
struct RunConfig
{
    int K = 4;
    int Q = 0; ///< 0 selects the smallest exact value for K and the forcing
    SolverConfig solver;
    Family family = Family::LegendreUniform;
    int order = 4;
    double half_range = 6.0;
    ForcingSpec forcing;
    std::vector<std::string> term_names;
    StudyConfig study;
    std::string output_dir = ".";
    bool svg = false;

    int resolved_q() const;
    /// Canonical text of every resolved value; identical configs give identical text.
    std::string canonical() const;
    /// FNV-1a of canonical(), as 16 hex digits.
    std::string hash() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

std::uint64_t fnv1a(const std::string& text);

} // namespace chaosflow
