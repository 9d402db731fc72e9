#pragma once

#include "chaosflow/chaos_field.hpp"
#include "chaosflow/collocation.hpp"
#include "chaosflow/errorlab.hpp"
#include "chaosflow/fieldspace.hpp"
#include "chaosflow/orthopoly.hpp"
#include "chaosflow/triple_product.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chaosflow
{

class FormatError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Ordered key=value pairs written as leading "# key=value" lines.
using Manifest = std::vector<std::pair<std::string, std::string>>;

/// %.17g, which round-trips every finite double.
std::string format_double(double value);

void write_manifest(std::ostream& out, const Manifest& manifest);

/// Header "j,node,weight".
void write_quadrature_csv(std::ostream& out, const QuadratureRule& rule);
/// Header "m,n,l,value", entries in tensor order.
void write_triple_csv(std::ostream& out, const TripleProductTensor& tensor);

/// Header "a,b,z".
void write_field_csv(std::ostream& out, const VelocityField& field, const Manifest& manifest);
/// Header "l,a,b,z".
void write_chaos_csv(std::ostream& out, const ChaosField& field, const Manifest& manifest);
/// Chaos table of the pseudo-spectral solution (modes u_k^{(N)} / c(k)) with kind=pseudospectral.
void write_pseudospectral_csv(std::ostream& out, const PseudoSpectralSolution& sol, Manifest manifest);
/// Header "j,xi,weight".
void write_node_csv(std::ostream& out, const QuadratureRule& rule);

struct FieldTable
{
    Manifest manifest;
    int resolution = 0;
    Eigen::VectorXd coefficients;
};

struct ChaosTable
{
    Manifest manifest;
    int resolution = 0;
    /// Column l holds mode l.
    Eigen::MatrixXd modes;
};

FieldTable read_field_csv(std::istream& in);
ChaosTable read_chaos_csv(std::istream& in);
/// Value of a manifest key, or throws FormatError.
const std::string& manifest_value(const Manifest& manifest, const std::string& key);

/// One row per order.
void write_study_csv(std::ostream& out, const StudyReport& report, const Manifest& manifest);
/// Log-log plot of delta, sqrt(ps_err2) and sqrt(proj_err2) against N, with reference slopes -3/4 and -3/2.
void write_study_svg(std::ostream& out, const StudyReport& report);

/// Header "l,distance", then a total row "H,gap".
void write_compare_csv(std::ostream& out, const CompareReport& report, const Manifest& manifest);

/// Writes text to a file, throwing std::runtime_error on failure.
void write_file(const std::string& path, const std::string& contents);

} // namespace chaosflow
