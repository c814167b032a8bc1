#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "bipcover/lineage_distribution.hpp"

namespace bipcover {

// Largest gene count any bound may return. Counts are carried as doubles in
// several places; above 2^53 they stop being exact integers.
inline constexpr double kMaxGeneCount = 9007199254740992.0;  // 2^53

struct BoundSpec {
    int k = 4;
    double t_min = 1.0;
    double q = 0.9;

    // Throws DomainError unless 4 <= k <= 512, t_min > 0 finite, 0 < q < 1.
    void validate() const;
};

struct BoundReport {
    BoundSpec spec;
    double m_o_real = 0.0;  // the original bound before rounding up
    std::uint64_t m_o = 0;
    std::uint64_t m_c = 0;
    std::uint64_t m_s = 0;
    std::uint64_t m_b = 0;
    // Success probabilities for l = 2..k-2 (index l-2) behind M_c, M_s, M_b.
    std::vector<double> h_c;
    std::vector<double> h_s;
    std::vector<double> h_b;
};

// log((1-q)/(k-3)) / log(1 - g(k-2, 1, t_min)), unrounded. Throws Overflow
// when it exceeds kMaxGeneCount (including g underflowing to 0).
double original_bound_real(const BoundSpec& spec);
std::uint64_t original_bound(const BoundSpec& spec);

// Least n >= 1 with sum_l (1 - h[l])^n <= 1 - q. Powers are taken as
// exp(n log1p(-h)) and summed in log space. Throws NeverSatisfiable when some
// h is 0 and Overflow when n would exceed kMaxGeneCount.
std::uint64_t invert_sum_bound(std::span<const double> h, double q);

// g(l, 1, t_min) for l = 2..k-2.
std::vector<double> caterpillar_successes(const BoundSpec& spec);
std::uint64_t caterpillar_bound(const BoundSpec& spec);

// E g(Z_{floor(l/2)} + Z_{ceil(l/2)}, 1, t_min).
double one_step_success(int l, double t_min);
std::vector<double> one_step_successes(const BoundSpec& spec);
std::uint64_t one_step_bound(const BoundSpec& spec);

// X[l] is the count entering the top edge of the balanced l-leaf subtree,
// W[l] the count leaving it. X[1] = W[1] = point mass at 1.
struct BalancedDistributions {
    double t_min = 0.0;
    std::vector<LineageDistribution> X;  // index l-1
    std::vector<LineageDistribution> W;  // index l-1

    int l_max() const noexcept { return static_cast<int>(W.size()); }
    const LineageDistribution& x(int l) const { return X.at(static_cast<std::size_t>(l - 1)); }
    const LineageDistribution& w(int l) const { return W.at(static_cast<std::size_t>(l - 1)); }
};

// Memoized per t_min (compared bit-exactly); safe to call concurrently. The
// returned table may cover more than l_max.
std::shared_ptr<const BalancedDistributions> balanced_lineage_distributions(int l_max, double t_min);

// P(W_l = 1) for l = 2..k-2.
std::vector<double> balanced_successes(const BoundSpec& spec);
std::uint64_t balanced_bound(const BoundSpec& spec);

// Closed-form upper bound on M_b using g at ceil(E X_{k-2}):
// ceil(log((1-q)/(k-3)) / log(1 - g(ceil(E X_{k-2}), 1, t_min))).
std::uint64_t balanced_envelope(const BoundSpec& spec);

BoundReport compute_bounds(const BoundSpec& spec);

}  // namespace bipcover
