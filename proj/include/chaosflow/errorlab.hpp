#pragma once

#include "chaosflow/chaos_field.hpp"
#include "chaosflow/collocation.hpp"
#include "chaosflow/detsolver.hpp"
#include "chaosflow/forcing.hpp"
#include "chaosflow/galerkin.hpp"

#include <Eigen/Dense>

#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace chaosflow
{

class ReferenceError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class BoundsNotApplicable : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// Memoized pathwise solves u(xi), keyed by the exact value of xi.
class PathCache
{
public:
    PathCache(const DiscreteForcing& forcing, SolverConfig config, int threads = 1);

    const DiscreteForcing& forcing() const { return forcing_; }
    const SolverConfig& config() const { return config_; }
    const BasisPtr& basis() const { return forcing_.basis(); }

    /// Column i holds u(xis[i]). Missing points are solved in parallel.
    Eigen::MatrixXd solve(const std::vector<double>& xis);
    Eigen::VectorXd solve(double xi);
    /// A PathSolver view for collocation; each call is one deterministic solve.
    PathSolver solver() const;
    int solves() const;

private:
    const DiscreteForcing& forcing_;
    SolverConfig config_;
    int threads_;
    mutable std::mutex mutex_;
    std::map<double, Eigen::VectorXd> cache_;
};

/// Reference rule for expectations: Gauss of level M, or the split rule of
/// level M when the forcing is kinked at xi = 0.
QuadratureRule reference_rule(Family family, int level, bool split);

struct ReferenceProjection
{
    QuadratureRule rule;
    /// Column j: u(xi_j) on the rule.
    Eigen::MatrixXd samples;
    /// Modes E(u P_k) / c(k), k <= N.
    ChaosField projection;
    /// max_k |change of mode k under doubling|, each scaled by sqrt c(k), relative to |u|_H
    double doubling_change;
};

/// u^N = P^N u from pathwise solves on the level-M rule; throws ReferenceError
/// "reference under-resolved" if doubling M moves the modes by more than 1e-9.
ReferenceProjection reference_projection(PathCache& paths, Family family, int order, int m_ref,
                                         double guard = 1e-9);

/// Grid points plus any extra points (e.g. collocation nodes), sorted and unique.
std::vector<double> delta_points(Family family, int grid_count, double half_range, const std::vector<double>& extra);

/// max over points of |u(xi) - v(xi)|_{1,2}
double delta_sup(PathCache& paths, const ChaosField& approx, const std::vector<double>& points);

/// E |u - v|_{1,2}^2 on the reference rule.
double expected_sq_error(const ReferenceProjection& ref, const StreamBasis& basis, const ChaosField& approx);

struct CollocationBound
{
    double proj_err2;  ///< E|u - u^N|^2
    double ps_err2;    ///< E|u - u^{(N)}|^2
    double aliasing2;  ///< sum_k |u_k - u_k^{(N)}|^2 / c(k)
    double delta;      ///< delta_N
    double lhs;        ///< ps_err2
    double rhs;        ///< proj_err2 + N delta^2
    double slack;      ///< rhs - lhs
    double weak_rhs;   ///< (1 + N) delta^2
    double decomposition_gap; ///< |ps_err2 - proj_err2 - aliasing2| / max(ps_err2, tiny)
};

CollocationBound check_bound_collocation(const ReferenceProjection& ref, const PseudoSpectralSolution& ps,
                                         double delta);

struct GalerkinBound
{
    double theta;
    double epsilon;
    double proj_gap;     ///< |P^N u - v_N|_H
    double proj_err;     ///< |u - P^N u|_H
    double galerkin_err; ///< |u - v_N|_H
    double factor;       ///< (theta + 1 - epsilon) / epsilon
    double gap_bound_rhs;
    double gap_bound_slack;
    double error_bound_rhs;
    double error_bound_slack;
};

/// Throws BoundsNotApplicable "bounds not applicable" unless theta < 1 and epsilon > 0.
GalerkinBound check_bound_galerkin(const ReferenceProjection& ref, const ChaosField& galerkin, double theta,
                                   double epsilon);

/// sup of the smallness certificate over the points.
double sup_theta(const DiscreteForcing& forcing, double nu, const std::vector<double>& points);

struct RateFit
{
    double p;        ///< value ~ C N^{-p}
    double c;
    double residual; ///< RMS of the log-log fit
};

RateFit rate_fit(const std::vector<std::pair<double, double>>& series);

struct StudyConfig
{
    Family family = Family::LegendreUniform;
    std::vector<int> orders{1, 2, 4, 8};
    int m_ref = 0; ///< 0 selects 4 max(N) + 16
    int grid_count = 1001;
    double half_range = 6.0;
    bool galerkin = true;
    bool grid_check = true;
    int threads = 1;

    int resolved_m_ref() const;
    void validate() const;
};

struct StudyRow
{
    int order = 0;
    CollocationBound collocation{};
    double interpolation_residual = 0.0;
    bool galerkin_run = false;
    bool galerkin_certified = false;
    GalerkinBound galerkin{};
    int galerkin_iterations = 0;
};

struct StudyReport
{
    Family family;
    int m_ref;
    int grid_count;
    double nu;
    double theta;
    double reference_doubling_change;
    double grid_refinement_change; ///< relative change of max delta when the grid is doubled
    std::vector<StudyRow> rows;
    int path_solves;
};

StudyReport run_study(const DiscreteForcing& forcing, const SolverConfig& config, const StudyConfig& study);

struct NamedRate
{
    std::string series; ///< "delta", "ps_err2" or "proj_err2"
    RateFit fit;
};

/// Log-log fits over the rows of a study; series with fewer than three
/// positive values are skipped.
std::vector<NamedRate> study_rates(const StudyReport& report);

struct CompareReport
{
    Family family;
    int order;
    int m_ref;
    /// sqrt c(l) |v^l - u_l^{(N)} / c(l)|_{1,2}, l = 0..N
    std::vector<double> mode_distance;
    double gap;             ///< |v_N - u^{(N)}|_H
    double galerkin_err;    ///< |u - v_N|_H on the reference rule
    double collocation_err; ///< |u - u^{(N)}|_H on the reference rule
    GalerkinReport galerkin_report;
};

/// Galerkin and collocation of the same order on the same forcing, with error
/// estimates from the level-m_ref reference rule (0 selects 4 N + 16).
CompareReport compare_methods(const DiscreteForcing& forcing, const SolverConfig& config, Family family, int order,
                              int m_ref = 0, int threads = 1);

} // namespace chaosflow
