#include "chaosflow/triple_product.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chaosflow
{

TripleProductTensor::TripleProductTensor(Family family, int order, std::vector<TripleEntry> entries)
    : family_(family), order_(order), entries_(std::move(entries))
{
    std::sort(entries_.begin(), entries_.end(), [](const TripleEntry& x, const TripleEntry& y) {
        return std::tie(x.l, x.m, x.n) < std::tie(y.l, y.m, y.n);
    });
}

double TripleProductTensor::operator()(int m, int n, int l) const
{
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), std::tuple{l, m, n},
                                     [](const TripleEntry& e, const std::tuple<int, int, int>& key) {
                                         return std::tie(e.l, e.m, e.n) < key;
                                     });
    if (it != entries_.end() && it->l == l && it->m == m && it->n == n)
        return it->value;
    return 0.0;
}

TripleProductTensor triple_products(Family family, int order, double zero_threshold)
{
    if (order < 0)
        throw DegreeError("triple product order must be non-negative");
    const int level = 2 * order;
    const PolynomialFamily basis(family, std::max(level + 1, 1));
    const auto rule = gauss_rule_extended(basis, level);

    // Orthonormal values keep the node sums well scaled for large Hermite degrees.
    const int top = 2 * order;
    const std::size_t count = rule.nodes.size();
    std::vector<long double> values((static_cast<std::size_t>(top) + 1) * count);
    auto value = [&](int k, std::size_t j) -> long double& { return values[static_cast<std::size_t>(k) * count + j]; };
    for (std::size_t j = 0; j < count; ++j)
    {
        const long double x = rule.nodes[j];
        long double prev = 0.0L, cur = 1.0L;
        value(0, j) = 1.0L;
        for (int k = 0; k < top; ++k)
        {
            const long double a = basis.kind() == Family::HermiteProbabilist ? 1.0L : (2.0L * k + 1.0L) / (k + 1.0L);
            const long double g = basis.kind() == Family::HermiteProbabilist ? static_cast<long double>(k)
                                                                             : k / (k + 1.0L);
            const long double next = a * x * cur - g * prev;
            prev = cur;
            cur = next;
            value(k + 1, j) = cur;
        }
        for (int k = 0; k <= top; ++k)
            value(k, j) /= std::sqrt(static_cast<long double>(basis.norm(k)));
    }

    // The threshold applies to the orthonormalized product E(p_m p_n p_l), which
    // carries the quadrature noise at unit scale for both families.
    std::vector<TripleEntry> entries;
    for (int l = 0; l <= top; ++l)
    {
        for (int m = 0; m <= order; ++m)
        {
            for (int n = m; n <= order; ++n)
            {
                long double acc = 0.0L;
                for (std::size_t j = 0; j < count; ++j)
                    acc += rule.weights[j] * value(m, j) * value(n, j) * value(l, j);
                if (std::abs(acc) < zero_threshold)
                    continue;
                const long double scale = std::sqrt(static_cast<long double>(basis.norm(m)) * basis.norm(n) /
                                                    basis.norm(l));
                const double entry = static_cast<double>(acc * scale);
                entries.push_back({m, n, l, entry});
                if (n != m)
                    entries.push_back({n, m, l, entry});
            }
        }
    }
    return {family, order, std::move(entries)};
}

std::vector<LinearizationTerm> hermite_linearization(int m, int n)
{
    if (m < 0 || n < 0)
        throw DegreeError("hermite_linearization: negative degree");
    if (m > kMaxLinearizationDegree || n > kMaxLinearizationDegree)
        throw DegreeError("hermite_linearization: degrees above 20 overflow 64-bit coefficients");
    auto binomial = [](int top, int k) {
        std::uint64_t b = 1;
        for (int i = 1; i <= k; ++i)
            b = b * static_cast<std::uint64_t>(top - k + i) / static_cast<std::uint64_t>(i);
        return b;
    };
    std::vector<LinearizationTerm> terms;
    std::uint64_t k_factorial = 1;
    for (int k = 0; k <= std::min(m, n); ++k)
    {
        if (k > 0)
            k_factorial *= static_cast<std::uint64_t>(k);
        terms.push_back({m + n - 2 * k, binomial(m, k) * binomial(n, k) * k_factorial});
    }
    return terms;
}

} // namespace chaosflow
