#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bipcover {

// Probability mass function over lineage counts. probs()[m] is the
// probability of count min_support() + m. Count 0 is never in the support.
class LineageDistribution {
public:
    static constexpr double kSumTolerance = 1e-10;
    static constexpr double kTrimThreshold = 1e-15;

    // Validates the invariants; throws DomainError on violation.
    LineageDistribution(int min_support, std::vector<double> probs);

    static LineageDistribution point_mass(int count);

    int min_support() const noexcept { return min_support_; }
    int max_support() const noexcept { return min_support_ + static_cast<int>(probs_.size()) - 1; }
    std::span<const double> probs() const noexcept { return probs_; }

    // P(count = n); zero outside the support.
    double pmf(int n) const noexcept;
    // P(count <= n).
    double cdf(int n) const noexcept;
    double mean() const noexcept;
    double total_mass() const noexcept;

    // Drops leading/trailing entries below `threshold` and renormalizes.
    // Throws DomainError if the dropped mass reaches 1e-12.
    LineageDistribution trimmed(double threshold = kTrimThreshold) const;

private:
    int min_support_;
    std::vector<double> probs_;
};

// First-order stochastic dominance upper <=_st check: cdf(upper) <= cdf(lower) + tol
// at every count.
bool stochastically_dominates(const LineageDistribution& upper, const LineageDistribution& lower,
                              double tol = 1e-12);

}  // namespace bipcover
