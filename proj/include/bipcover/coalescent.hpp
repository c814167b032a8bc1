#pragma once

#include <vector>

#include "bipcover/lineage_distribution.hpp"

namespace bipcover {

// Largest lineage count accepted by the transition functions.
inline constexpr int kMaxLineages = 512;

// Kingman pure-death rates lambda_m = m(m-1)/2 for m = 2..k_max.
struct CoalescentRates {
    int k_max;
    std::vector<double> rates;  // rates[m - 2] == lambda_m

    explicit CoalescentRates(int k_max);
    double rate(int m) const { return rates.at(static_cast<std::size_t>(m - 2)); }
};

constexpr double pair_rate(int m) noexcept { return 0.5 * m * (m - 1.0); }

// Probability that i lineages coalesce to exactly j lineages in time T,
// evaluated from the alternating series. Throws UnstableEvaluation when the
// cancellation estimate exceeds 1e-8 absolute or 1e-9 relative, or when the
// raw sum leaves [-1e-9, 1 + 1e-9].
double g_tavare(int i, int j, double T);

// Same quantity by uniformization of the pure-death chain. Every term is
// nonnegative; the Poisson tail is truncated below 1e-13 (absolute) and
// below 1e-13 times the absorption probability (relative).
double g_stable(int i, int j, double T);

// g_tavare with fallback to g_stable. Result always lies in [0, 1].
double g(int i, int j, double T);

// All of g(i, 1..i, T); element j-1 holds g(i, j, T).
std::vector<double> transition_row(int i, double T);
std::vector<double> transition_row_stable(int i, double T);

// Rows of the transition kernel for one branch length, computed up front.
// Immutable after construction and safe to share between threads.
class TransitionTable {
public:
    TransitionTable(double T, int i_max);

    double time() const noexcept { return T_; }
    int max_lineages() const noexcept { return static_cast<int>(rows_.size()); }
    const std::vector<double>& row(int i) const;

private:
    double T_;
    std::vector<std::vector<double>> rows_;
};

// Pushes a lineage-count pmf through a branch of length T.
LineageDistribution evolve(const LineageDistribution& dist, double T);
LineageDistribution evolve(const LineageDistribution& dist, const TransitionTable& table);

// Distribution of Z_i^T.
LineageDistribution lineages_after(int i, double T);

// Pmf of the sum of two independent counts.
LineageDistribution convolve(const LineageDistribution& a, const LineageDistribution& b);

// Closed-form upper bound 1 / (1 - (1 - 1/i) e^{-T/2}) on E[Z_i^T].
double expected_lineages_bound(int i, double T);

}  // namespace bipcover
