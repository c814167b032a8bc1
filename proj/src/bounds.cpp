#include "bipcover/bounds.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "bipcover/coalescent.hpp"
#include "bipcover/errors.hpp"

namespace bipcover {
namespace {

std::uint64_t ceil_count(double x) {
    if (!(x <= kMaxGeneCount)) throw Overflow("gene count exceeds 2^53");
    return x <= 1.0 ? 1 : static_cast<std::uint64_t>(std::ceil(x));
}

// log sum_l exp(n a_l), with a_l = log1p(-h_l) <= 0.
double log_objective(const std::vector<double>& a, double n) {
    double top = -std::numeric_limits<double>::infinity();
    for (double x : a) top = std::max(top, n * x);
    if (top == -std::numeric_limits<double>::infinity()) return top;
    double s = 0.0;
    for (double x : a) s += std::exp(n * x - top);
    return top + std::log(s);
}

std::uint64_t log_ratio_bound(double numerator_log, double g_value) {
    const double denom = std::log1p(-g_value);
    if (denom == 0.0) throw Overflow("success probability underflows; gene count unbounded in double precision");
    return ceil_count(numerator_log / denom);
}

}  // namespace

void BoundSpec::validate() const {
    if (k < 4 || k > kMaxLineages) throw DomainError("k must be in [4, 512]");
    if (!(t_min > 0.0) || !std::isfinite(t_min)) throw DomainError("t_min must be positive and finite");
    if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
}

double original_bound_real(const BoundSpec& spec) {
    spec.validate();
    const double denom = std::log1p(-g(spec.k - 2, 1, spec.t_min));
    if (denom == 0.0) throw Overflow("success probability underflows; gene count unbounded in double precision");
    const double value = std::log((1.0 - spec.q) / (spec.k - 3)) / denom;
    if (!(value <= kMaxGeneCount)) throw Overflow("original bound exceeds 2^53");
    return value;
}

std::uint64_t original_bound(const BoundSpec& spec) { return ceil_count(original_bound_real(spec)); }

std::uint64_t invert_sum_bound(std::span<const double> h, double q) {
    if (h.empty()) throw DomainError("need at least one success probability");
    if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
    std::vector<double> a;
    a.reserve(h.size());
    for (double x : h) {
        if (!(x >= 0.0 && x <= 1.0)) throw DomainError("success probabilities must lie in [0, 1]");
        if (x == 0.0) throw NeverSatisfiable("a bipartition with zero success probability is never covered");
        a.push_back(std::log1p(-x));
    }
    const double target = std::log1p(-q);
    auto ok = [&](double n) { return log_objective(a, n) <= target; };

    double hi = 1.0;
    while (!ok(hi)) {
        if (hi >= kMaxGeneCount) throw Overflow("gene count exceeds 2^53");
        hi = std::min(2.0 * hi, kMaxGeneCount);
    }
    double lo = hi == 1.0 ? 0.0 : std::floor(hi / 2.0);  // ok(lo) is false or lo == 0
    while (hi - lo > 1.0) {
        const double mid = std::floor((lo + hi) / 2.0);
        (ok(mid) ? hi : lo) = mid;
    }
    return static_cast<std::uint64_t>(hi);
}

std::vector<double> caterpillar_successes(const BoundSpec& spec) {
    spec.validate();
    std::vector<double> h;
    for (int l = 2; l <= spec.k - 2; ++l) h.push_back(g(l, 1, spec.t_min));
    return h;
}

std::uint64_t caterpillar_bound(const BoundSpec& spec) { return invert_sum_bound(caterpillar_successes(spec), spec.q); }

namespace {

double one_step_success_with(int l, const TransitionTable& table) {
    const auto a = LineageDistribution(1, table.row(l / 2));
    const auto b = LineageDistribution(1, table.row((l + 1) / 2));
    const LineageDistribution s = convolve(a, b);
    double total = 0.0;
    for (int r = s.min_support(); r <= s.max_support(); ++r) {
        const double p = s.pmf(r);
        if (p != 0.0) total += p * table.row(r)[0];
    }
    return std::min(total, 1.0);
}

}  // namespace

double one_step_success(int l, double t_min) {
    if (l < 2 || l > kMaxLineages) throw DomainError("l must be in [2, 512]");
    if (!(t_min > 0.0) || !std::isfinite(t_min)) throw DomainError("t_min must be positive and finite");
    return one_step_success_with(l, TransitionTable(t_min, l));
}

std::vector<double> one_step_successes(const BoundSpec& spec) {
    spec.validate();
    const TransitionTable table(spec.t_min, spec.k - 2);
    std::vector<double> h;
    for (int l = 2; l <= spec.k - 2; ++l) h.push_back(one_step_success_with(l, table));
    return h;
}

std::uint64_t one_step_bound(const BoundSpec& spec) { return invert_sum_bound(one_step_successes(spec), spec.q); }

namespace {

std::shared_ptr<const BalancedDistributions> build_balanced(int l_max, double t_min) {
    auto out = std::make_shared<BalancedDistributions>();
    out->t_min = t_min;
    const TransitionTable table(t_min, l_max);
    out->X.push_back(LineageDistribution::point_mass(1));
    out->W.push_back(LineageDistribution::point_mass(1));
    for (int l = 2; l <= l_max; ++l) {
        const auto& big = out->W[static_cast<std::size_t>((l + 1) / 2 - 1)];
        const auto& small = out->W[static_cast<std::size_t>(l / 2 - 1)];
        LineageDistribution x = convolve(big, small);
        LineageDistribution w = evolve(x, table);
        out->X.push_back(std::move(x));
        out->W.push_back(std::move(w));
    }
    return out;
}

}  // namespace

std::shared_ptr<const BalancedDistributions> balanced_lineage_distributions(int l_max, double t_min) {
    if (l_max < 1 || l_max > kMaxLineages) throw DomainError("l_max must be in [1, 512]");
    if (!(t_min > 0.0) || !std::isfinite(t_min)) throw DomainError("t_min must be positive and finite");

    static std::mutex mutex;
    static std::map<double, std::shared_ptr<const BalancedDistributions>> cache;

    // Keys compare bit-exactly for finite positive doubles.
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(t_min);
    if (it != cache.end() && it->second->l_max() >= l_max) return it->second;
    // Grow geometrically so increasing-k sweeps rebuild O(log k) times.
    int size = l_max;
    if (it != cache.end()) size = std::min(std::max(l_max, 2 * it->second->l_max()), kMaxLineages);
    auto table = build_balanced(size, t_min);
    cache[t_min] = table;
    return table;
}

std::vector<double> balanced_successes(const BoundSpec& spec) {
    spec.validate();
    const auto table = balanced_lineage_distributions(spec.k - 2, spec.t_min);
    std::vector<double> h;
    for (int l = 2; l <= spec.k - 2; ++l) h.push_back(table->w(l).pmf(1));
    return h;
}

std::uint64_t balanced_bound(const BoundSpec& spec) { return invert_sum_bound(balanced_successes(spec), spec.q); }

std::uint64_t balanced_envelope(const BoundSpec& spec) {
    spec.validate();
    const auto table = balanced_lineage_distributions(spec.k - 2, spec.t_min);
    const double mean = table->x(spec.k - 2).mean();
    // Guard against a mean like 2.0000000000000004 rounding up a whole count.
    const int index = std::max(1, static_cast<int>(std::ceil(mean - 1e-9)));
    return log_ratio_bound(std::log((1.0 - spec.q) / (spec.k - 3)), g(index, 1, spec.t_min));
}

BoundReport compute_bounds(const BoundSpec& spec) {
    spec.validate();
    BoundReport r;
    r.spec = spec;
    r.m_o_real = original_bound_real(spec);
    r.m_o = ceil_count(r.m_o_real);
    r.h_c = caterpillar_successes(spec);
    r.h_s = one_step_successes(spec);
    r.h_b = balanced_successes(spec);
    r.m_c = invert_sum_bound(r.h_c, spec.q);
    r.m_s = invert_sum_bound(r.h_s, spec.q);
    r.m_b = invert_sum_bound(r.h_b, spec.q);
    return r;
}

}  // namespace bipcover
