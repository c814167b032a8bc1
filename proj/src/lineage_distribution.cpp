#include "bipcover/lineage_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bipcover/errors.hpp"

namespace bipcover {

namespace {

double neumaier_sum(std::span<const double> xs) {
    double sum = 0.0;
    double comp = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        comp += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

}  // namespace

LineageDistribution::LineageDistribution(int min_support, std::vector<double> probs)
    : min_support_(min_support), probs_(std::move(probs)) {
    if (min_support_ < 1)
        throw DomainError("lineage distribution support must start at 1 or above");
    if (probs_.empty())
        throw DomainError("lineage distribution has no mass");
    for (double p : probs_) {
        if (!(p >= 0.0) || p > 1.0 + kSumTolerance)
            throw DomainError("lineage probability outside [0,1]: " + std::to_string(p));
    }
    const double total = neumaier_sum(probs_);
    if (std::fabs(total - 1.0) > kSumTolerance)
        throw DomainError("lineage probabilities sum to " + std::to_string(total));
    for (double& p : probs_) p = std::min(p, 1.0);
}

LineageDistribution LineageDistribution::point_mass(int count) {
    return LineageDistribution(count, {1.0});
}

double LineageDistribution::pmf(int n) const noexcept {
    if (n < min_support_ || n > max_support()) return 0.0;
    return probs_[static_cast<std::size_t>(n - min_support_)];
}

double LineageDistribution::cdf(int n) const noexcept {
    if (n < min_support_) return 0.0;
    if (n >= max_support()) return 1.0;
    const auto upto = static_cast<std::size_t>(n - min_support_ + 1);
    return std::min(1.0, neumaier_sum(std::span<const double>(probs_).first(upto)));
}

double LineageDistribution::mean() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i)
        m += probs_[i] * static_cast<double>(min_support_ + static_cast<int>(i));
    return m;
}

double LineageDistribution::total_mass() const noexcept { return neumaier_sum(probs_); }

LineageDistribution LineageDistribution::trimmed(double threshold) const {
    std::size_t lo = 0;
    std::size_t hi = probs_.size();
    while (lo + 1 < hi && probs_[lo] < threshold) ++lo;
    while (hi - 1 > lo && probs_[hi - 1] < threshold) --hi;
    double dropped = 0.0;
    for (std::size_t i = 0; i < lo; ++i) dropped += probs_[i];
    for (std::size_t i = hi; i < probs_.size(); ++i) dropped += probs_[i];
    if (dropped >= 1e-12)
        throw DomainError("trimming would drop mass " + std::to_string(dropped));
    std::vector<double> kept(probs_.begin() + static_cast<std::ptrdiff_t>(lo),
                             probs_.begin() + static_cast<std::ptrdiff_t>(hi));
    const double kept_mass = neumaier_sum(kept);
    for (double& p : kept) p /= kept_mass;
    return LineageDistribution(min_support_ + static_cast<int>(lo), std::move(kept));
}

bool stochastically_dominates(const LineageDistribution& upper, const LineageDistribution& lower,
                              double tol) {
    const int lo = std::min(upper.min_support(), lower.min_support());
    const int hi = std::max(upper.max_support(), lower.max_support());
    double cu = 0.0;
    double cl = 0.0;
    for (int n = lo; n <= hi; ++n) {
        cu += upper.pmf(n);
        cl += lower.pmf(n);
        if (cu > cl + tol) return false;
    }
    return true;
}

}  // namespace bipcover
