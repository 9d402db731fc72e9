#pragma once

#include "chaosflow/orthopoly.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace chaosflow
{

struct TripleEntry
{
    int m;
    int n;
    int l;
    double value;
};

/// Linearization coefficients A_{m,n;l} = E(P_m P_n P_l) / c(l) for
/// 0 <= m, n <= N and 0 <= l <= 2N. Only nonzero entries are stored,
/// sorted by (l, m, n).
class TripleProductTensor
{
public:
    TripleProductTensor(Family family, int order, std::vector<TripleEntry> entries);

    Family family() const { return family_; }
    int order() const { return order_; }
    std::span<const TripleEntry> entries() const { return entries_; }

    /// Zero for any index combination that is not stored.
    double operator()(int m, int n, int l) const;

private:
    Family family_;
    int order_;
    std::vector<TripleEntry> entries_;
};

inline constexpr double kTripleZeroThreshold = 1e-12;

/// Entries from a Gauss rule of level 2N, which integrates E(P_m P_n P_l)
/// (degree <= 4N) exactly.
TripleProductTensor triple_products(Family family, int order, double zero_threshold = kTripleZeroThreshold);

struct LinearizationTerm
{
    int degree;
    std::uint64_t coefficient;
};

inline constexpr int kMaxLinearizationDegree = 20;

/// He_m He_n = sum_k m! n! / ((m-k)! (n-k)! k!) He_{m+n-2k}, highest degree
/// first. Coefficients are exact integers; m, n <= 20.
std::vector<LinearizationTerm> hermite_linearization(int m, int n);

} // namespace chaosflow
