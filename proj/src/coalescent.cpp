#include "bipcover/coalescent.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "bipcover/errors.hpp"

namespace bipcover {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kAbsTolerance = 1e-8;
constexpr double kRelTolerance = 1e-9;
constexpr double kTailTolerance = 1e-13;

// log(n!) for n up to twice the lineage cap.
double log_factorial(int n) {
    static const std::vector<double> table = [] {
        std::vector<double> t(2 * kMaxLineages + 2);
        for (std::size_t n = 0; n < t.size(); ++n) t[n] = std::lgamma(static_cast<double>(n) + 1.0);
        return t;
    }();
    return table[static_cast<std::size_t>(n)];
}

void check_args(int i, int j, double T) {
    if (i < 1 || i > kMaxLineages)
        throw DomainError("lineage count " + std::to_string(i) + " outside [1, " +
                          std::to_string(kMaxLineages) + "]");
    if (j < 1 || j > i)
        throw DomainError("target count " + std::to_string(j) + " outside [1, " + std::to_string(i) + "]");
    if (!(T >= 0.0) || !std::isfinite(T))
        throw DomainError("coalescent time must be finite and nonnegative");
}

struct SeriesResult {
    double value;
    double error;
};

// Alternating series for g(i, j, T) with a running error estimate.
SeriesResult tavare_series(int i, int j, double T) {
    const double base = std::log(2.0 * j - 1.0) + log_factorial(2 * j - 2) - log_factorial(j - 1) +
                        log_factorial(i) - log_factorial(i - j) - log_factorial(j) -
                        (log_factorial(i + j - 1) - log_factorial(i - 1));
    const double base_rel = 4.0 * kEps *
                            (std::log(2.0 * j - 1.0) + log_factorial(2 * j - 2) + log_factorial(j - 1) +
                             log_factorial(i) + log_factorial(i - j) + log_factorial(j) +
                             log_factorial(i + j - 1) + log_factorial(i - 1));

    double sum = 0.0;
    double comp = 0.0;
    double abs_sum = 0.0;
    double err = 0.0;
    double log_coef = base;
    double log_coef_err = 0.0;
    for (int k = j; k <= i; ++k) {
        if (k > j) {
            const int p = k - 1;
            const double factor = (2.0 * p + 1.0) / (2.0 * p - 1.0) * (j + p - 1.0) * (i - p) /
                                  ((static_cast<double>(i) + p) * (p + 1.0 - j));
            const double lf = std::log(factor);
            log_coef += lf;
            log_coef_err += 3.0 * kEps * (std::fabs(lf) + 1.0);
        }
        const double decay = pair_rate(k) * T;
        const double log_term = log_coef - decay;
        const double mag = std::exp(log_term);
        const double term = ((k - j) % 2 == 0) ? mag : -mag;

        const double t = sum + term;
        comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;

        abs_sum += mag;
        const double rel = log_coef_err + 2.0 * kEps * (decay + std::fabs(log_term) + 1.0);
        err += mag * rel;
    }
    const double value = sum + comp;
    err += 2.0 * kEps * abs_sum + std::fabs(value) * base_rel;
    return {value, err};
}

double clamp_probability(double x) { return std::clamp(x, 0.0, 1.0); }

// Poisson(x) probability of n, accurate to a few ulps even deep in the tails.
double poisson_weight(double x, int n) {
    return boost::math::gamma_p_derivative(static_cast<double>(n) + 1.0, x);
}

// Upper bound on the Poisson(x) mass above n given w_{n+1}; needs n + 2 > x.
double poisson_tail_bound(double w_next, double x, int n) {
    return w_next / (1.0 - x / (n + 2.0));
}

}  // namespace

CoalescentRates::CoalescentRates(int k_max_) : k_max(k_max_) {
    if (k_max < 2) throw DomainError("rate table needs k_max >= 2");
    rates.reserve(static_cast<std::size_t>(k_max - 1));
    for (int m = 2; m <= k_max; ++m) rates.push_back(pair_rate(m));
}

double g_tavare(int i, int j, double T) {
    check_args(i, j, T);
    if (T == 0.0) return i == j ? 1.0 : 0.0;
    const auto [raw, err] = tavare_series(i, j, T);
    const bool out_of_range = raw < -1e-9 || raw > 1.0 + 1e-9;
    if (out_of_range || err > kAbsTolerance || err > kRelTolerance * std::fabs(raw)) {
        throw UnstableEvaluation("alternating series for g(" + std::to_string(i) + "," + std::to_string(j) +
                                     ") lost precision",
                                 raw, err);
    }
    return clamp_probability(raw);
}

std::vector<double> transition_row_stable(int i, double T) {
    check_args(i, 1, T);
    std::vector<double> row(static_cast<std::size_t>(i), 0.0);
    if (T == 0.0 || i == 1) {
        row.back() = 1.0;
        return row;
    }

    const double rate = pair_rate(i);
    const double x = rate * T;

    // v[m - 1] = P(uniformized chain is at m after n jumps)
    std::vector<double> v(static_cast<std::size_t>(i), 0.0);
    std::vector<double> stay(static_cast<std::size_t>(i));
    std::vector<double> move(static_cast<std::size_t>(i));
    for (int m = 1; m <= i; ++m) {
        move[static_cast<std::size_t>(m - 1)] = pair_rate(m) / rate;
        stay[static_cast<std::size_t>(m - 1)] = 1.0 - pair_rate(m) / rate;
    }
    v.back() = 1.0;

    double w = poisson_weight(x, 0);
    int lowest = i;  // smallest state with nonzero mass
    for (int n = 0;; ++n) {
        if (w > 0.0) {
            for (int m = lowest; m <= i; ++m) row[static_cast<std::size_t>(m - 1)] += w * v[static_cast<std::size_t>(m - 1)];
        }
        const double w_next = poisson_weight(x, n + 1);
        if (n >= i - 1 && n + 2.0 > x + 1.0) {
            const double tail = poisson_tail_bound(w_next, x, n);
            const double scale = std::max(row[0], DBL_MIN);
            if (tail <= kTailTolerance * scale) break;
        }
        // One jump of the uniformized chain; ascending m reads the old v[m].
        if (lowest > 1) --lowest;
        for (int m = lowest; m <= i; ++m) {
            const auto idx = static_cast<std::size_t>(m - 1);
            double next = v[idx] * stay[idx];
            if (m < i) next += v[idx + 1] * move[idx + 1];
            v[idx] = next;
        }
        w = w_next;
    }
    for (double& p : row) p = clamp_probability(p);
    return row;
}

double g_stable(int i, int j, double T) {
    check_args(i, j, T);
    return transition_row_stable(i, T)[static_cast<std::size_t>(j - 1)];
}

double g(int i, int j, double T) {
    check_args(i, j, T);
    try {
        return g_tavare(i, j, T);
    } catch (const UnstableEvaluation&) {
        return g_stable(i, j, T);
    }
}

std::vector<double> transition_row(int i, double T) {
    check_args(i, 1, T);
    std::vector<double> row(static_cast<std::size_t>(i), 0.0);
    if (T == 0.0) {
        row.back() = 1.0;
        return row;
    }
    std::vector<int> unstable;
    for (int j = 1; j <= i; ++j) {
        try {
            row[static_cast<std::size_t>(j - 1)] = g_tavare(i, j, T);
        } catch (const UnstableEvaluation&) {
            unstable.push_back(j);
        }
    }
    if (unstable.empty()) return row;

    // Fill only the entries the series could not deliver.
    const std::vector<double> stable = transition_row_stable(i, T);
    for (int j : unstable) row[static_cast<std::size_t>(j - 1)] = stable[static_cast<std::size_t>(j - 1)];
    return row;
}

TransitionTable::TransitionTable(double T, int i_max) : T_(T) {
    if (i_max < 1 || i_max > kMaxLineages) throw DomainError("transition table size out of range");
    if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("coalescent time must be finite and nonnegative");
    rows_.reserve(static_cast<std::size_t>(i_max));
    for (int i = 1; i <= i_max; ++i) rows_.push_back(transition_row(i, T));
}

const std::vector<double>& TransitionTable::row(int i) const {
    if (i < 1 || i > max_lineages())
        throw DomainError("transition table has no row " + std::to_string(i));
    return rows_[static_cast<std::size_t>(i - 1)];
}

namespace {

template <typename RowFn>
LineageDistribution evolve_with(const LineageDistribution& dist, RowFn&& row_of) {
    const int top = dist.max_support();
    std::vector<double> out(static_cast<std::size_t>(top), 0.0);
    for (int i = dist.min_support(); i <= top; ++i) {
        const double p = dist.pmf(i);
        if (p == 0.0) continue;
        const std::vector<double>& row = row_of(i);
        for (int j = 1; j <= i; ++j) out[static_cast<std::size_t>(j - 1)] += p * row[static_cast<std::size_t>(j - 1)];
    }
    return LineageDistribution(1, std::move(out));
}

}  // namespace

LineageDistribution evolve(const LineageDistribution& dist, double T) {
    if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("coalescent time must be finite and nonnegative");
    if (dist.max_support() > kMaxLineages) throw DomainError("distribution support exceeds lineage cap");
    std::vector<double> scratch;
    return evolve_with(dist, [&](int i) -> const std::vector<double>& {
        scratch = transition_row(i, T);
        return scratch;
    });
}

LineageDistribution evolve(const LineageDistribution& dist, const TransitionTable& table) {
    return evolve_with(dist, [&](int i) -> const std::vector<double>& { return table.row(i); });
}

LineageDistribution lineages_after(int i, double T) {
    return LineageDistribution(1, transition_row(i, T));
}

LineageDistribution convolve(const LineageDistribution& a, const LineageDistribution& b) {
    const auto pa = a.probs();
    const auto pb = b.probs();
    std::vector<double> out(pa.size() + pb.size() - 1, 0.0);
    for (std::size_t x = 0; x < pa.size(); ++x) {
        if (pa[x] == 0.0) continue;
        for (std::size_t y = 0; y < pb.size(); ++y) out[x + y] += pa[x] * pb[y];
    }
    return LineageDistribution(a.min_support() + b.min_support(), std::move(out));
}

double expected_lineages_bound(int i, double T) {
    if (i < 1) throw DomainError("lineage count must be positive");
    if (!(T > 0.0)) throw DomainError("expected-lineage bound needs T > 0");
    return 1.0 / (1.0 - (1.0 - 1.0 / i) * std::exp(-T / 2.0));
}

}  // namespace bipcover
