#include "bipcover/checks.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>

#include "bipcover/asymptotics.hpp"
#include "bipcover/bounds.hpp"
#include "bipcover/coalescent.hpp"
#include "bipcover/errors.hpp"
#include "bipcover/mscsim.hpp"
#include "bipcover/rng.hpp"
#include "bipcover/treegen.hpp"

namespace bipcover {
namespace {

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

CheckResult result(std::string name, bool ok, std::string detail) {
    return CheckResult{std::move(name), ok, std::move(detail)};
}

// g with g(i, j) = 0 for j > i.
double kernel(const KernelFn& g, int i, int j, double T) { return j > i ? 0.0 : g(i, j, T); }

const std::vector<double> kBoundTimes{0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
const std::vector<double> kBoundQs{0.5, 0.9, 0.99};

// Lineages entering the root of `tree` when every edge carries its own length.
LineageDistribution root_entry_distribution(const SpeciesTree& tree) {
    std::vector<LineageDistribution> leaving;
    leaving.reserve(static_cast<std::size_t>(tree.node_count()));
    for (int id = 0; id < tree.node_count(); ++id) leaving.push_back(LineageDistribution::point_mass(1));
    for (int id : tree.postorder()) {
        const TreeNode& n = tree.node(id);
        if (n.left == -1) continue;
        const auto entering = convolve(leaving[static_cast<std::size_t>(n.left)], leaving[static_cast<std::size_t>(n.right)]);
        if (id == tree.root()) return entering;
        leaving[static_cast<std::size_t>(id)] = evolve(entering, n.branch_length);
    }
    throw DomainError("tree has no root");
}

}  // namespace

CheckOptions::CheckOptions() : g([](int i, int j, double T) { return bipcover::g(i, j, T); }) {}

CheckResult check_closed_forms(const KernelFn& g) {
    double worst = 0.0;
    for (double T : {0.01, 0.1, 0.5, 1.0, 2.0, 10.0}) worst = std::max(worst, std::abs(g(2, 1, T) - -std::expm1(-T)));
    const double g311 = 1.0 - 1.5 * std::exp(-1.0) + 0.5 * std::exp(-3.0);
    worst = std::max(worst, std::abs(g(3, 1, 1.0) - g311));
    bool identity = true;
    for (int i = 1; i <= 40; ++i)
        for (int j = 1; j <= i; ++j) identity = identity && g(i, j, 0.0) == (i == j ? 1.0 : 0.0);
    return result("closed_form", worst <= 1e-12 && identity,
                  fmt("max |g - closed form| = %.3g (tol 1e-12); g(i,j,0) identity %s", worst, identity ? "exact" : "violated"));
}

CheckResult check_hypoexponential_identity(const KernelFn& g) {
    double worst = 0.0;
    int wk = 0;
    double wt = 0.0;
    for (int k = 2; k <= 30; ++k) {
        const auto spec = HypoexponentialSpec::kingman(k);
        for (double T : {0.05, 0.2, 1.0, 5.0}) {
            const double d = std::abs(g(k, 1, T) - hypoexp_cdf(spec, T));
            if (d > worst) {
                worst = d;
                wk = k;
                wt = T;
            }
        }
    }
    return result("hypoexponential_identity", worst <= 1e-9,
                  fmt("max |g(k,1,T) - F_k(T)| = %.3g at k=%d T=%g (tol 1e-9)", worst, wk, wt));
}

CheckResult check_monte_carlo_pmf(const KernelFn& g, int samples, std::uint64_t seed) {
    const std::vector<std::pair<int, double>> cases{{5, 0.3}, {10, 1.0}, {20, 0.1}};
    bool ok = true;
    double worst_z = 0.0;
    int bins = 0;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const auto [i, T] = cases[c];
        Rng rng(derive_seed(seed, c));
        std::vector<long> counts(static_cast<std::size_t>(i) + 1, 0);
        for (int s = 0; s < samples; ++s) ++counts[static_cast<std::size_t>(simulate_kingman(i, T, rng))];
        for (int j = 1; j <= i; ++j) {
            const double p = g(i, j, T);
            const double expected = p * samples;
            if (expected < 10.0) continue;
            const double se = std::sqrt(samples * p * (1.0 - p));
            const double z = std::abs(static_cast<double>(counts[static_cast<std::size_t>(j)]) - expected) / se;
            worst_z = std::max(worst_z, z);
            ok = ok && z <= 4.0;
            ++bins;
        }
    }
    return result("monte_carlo_pmf", ok,
                  fmt("%d bins over (5,0.3),(10,1),(20,0.1) at N=%d; max |z| = %.3f (tol 4)", bins, samples, worst_z));
}

CheckResult check_kernel_shape(const KernelFn& g) {
    const std::vector<double> times{0.01, 0.1, 0.5, 1.0, 5.0};
    double row_err = 0.0;
    for (int i = 1; i <= 60; ++i)
        for (double T : times) {
            double s = 0.0;
            for (int j = 1; j <= i; ++j) s += g(i, j, T);
            row_err = std::max(row_err, std::abs(s - 1.0));
        }
    bool monotone = true, convex = true;
    for (double T : times) {
        for (int i = 1; i < 60; ++i) monotone = monotone && g(i + 1, 1, T) <= g(i, 1, T) + 1e-12;
        for (int i = 1; i + 2 <= 60; ++i) convex = convex && g(i + 2, 1, T) - 2 * g(i + 1, 1, T) + g(i, 1, T) >= -1e-12;
    }
    for (int i : {2, 5, 10, 30})
        for (std::size_t t = 0; t + 1 < times.size(); ++t) monotone = monotone && g(i, 1, times[t]) <= g(i, 1, times[t + 1]) + 1e-12;
    double worst_lc = -1e300;
    for (int n : {3, 5, 10, 20})
        for (int j : {1, 2, n / 2, n}) {
            std::vector<double> lg;
            for (int s = 1; s <= 60; ++s) lg.push_back(std::log(g(n, j, 0.05 * s)));
            for (std::size_t s = 1; s + 1 < lg.size(); ++s) worst_lc = std::max(worst_lc, lg[s + 1] - 2 * lg[s] + lg[s - 1]);
        }
    const bool ok = row_err <= 1e-10 && monotone && convex && worst_lc <= 1e-10;
    return result("kernel_shape", ok,
                  fmt("row-sum err %.3g (tol 1e-10); monotone %s; convex in i %s; max d2 log g %.3g (tol 1e-10)", row_err,
                      monotone ? "yes" : "no", convex ? "yes" : "no", worst_lc));
}

CheckResult check_bound_chain() {
    struct Cell {
        std::uint64_t o, c, s, b;
    };
    const std::size_t nt = kBoundTimes.size(), nq = kBoundQs.size();
    std::vector<Cell> cells;
    for (int k = 4; k <= 20; ++k)
        for (double t : kBoundTimes)
            for (double q : kBoundQs) {
                const BoundReport r = compute_bounds({k, t, q});
                cells.push_back({r.m_o, r.m_c, r.m_s, r.m_b});
            }
    auto at = [&](int k, std::size_t ti, std::size_t qi) -> const Cell& {
        return cells[(static_cast<std::size_t>(k - 4) * nt + ti) * nq + qi];
    };
    int chain_bad = 0, mono_bad = 0;
    auto leq = [](const Cell& a, const Cell& b) { return a.o <= b.o && a.c <= b.c && a.s <= b.s && a.b <= b.b; };
    for (int k = 4; k <= 20; ++k)
        for (std::size_t ti = 0; ti < nt; ++ti)
            for (std::size_t qi = 0; qi < nq; ++qi) {
                const Cell& x = at(k, ti, qi);
                if (!(x.b <= x.s && x.s <= x.c && x.c <= x.o)) ++chain_bad;
                if (k > 4 && !leq(at(k - 1, ti, qi), x)) ++mono_bad;
                if (ti > 0 && !leq(x, at(k, ti - 1, qi))) ++mono_bad;
                if (qi > 0 && !leq(at(k, ti, qi - 1), x)) ++mono_bad;
            }
    return result("bound_chain", chain_bad == 0 && mono_bad == 0,
                  fmt("%zu cells; chain violations %d; monotonicity violations %d", cells.size(), chain_bad, mono_bad));
}

CheckResult check_deterministic_balancing() {
    int pairs = 0, bad = 0;
    for (double T : {0.1, 0.5, 1.0, 2.0}) {
        std::vector<LineageDistribution> z;
        for (int i = 1; i <= 16; ++i) z.push_back(lineages_after(i, T));
        for (int k = 2; k <= 16; ++k) {
            std::vector<LineageDistribution> sums;
            for (int i = 1; i <= k / 2; ++i)
                sums.push_back(convolve(z[static_cast<std::size_t>(i - 1)], z[static_cast<std::size_t>(k - i - 1)]));
            for (std::size_t i = 0; i < sums.size(); ++i)
                for (std::size_t j = i; j < sums.size(); ++j) {
                    ++pairs;
                    if (!stochastically_dominates(sums[j], sums[i])) ++bad;
                }
        }
    }
    return result("deterministic_balancing", bad == 0,
                  fmt("%d (k,i,j,T) cases with k<=16; violations %d", pairs, bad));
}

CheckResult check_balanced_worst_case() {
    int trees = 0, bad = 0;
    for (int k = 4; k <= 8; ++k) {
        const auto x_b = balanced_lineage_distributions(k, 1.0)->x(k);
        for_each_topology(k, [&](const SpeciesTree& t) {
            ++trees;
            if (!stochastically_dominates(x_b, root_entry_distribution(t))) ++bad;
        });
    }
    return result("balanced_worst_case", bad == 0,
                  fmt("%d topologies with k=4..8, unit branches; trees beating X_B: %d", trees, bad));
}

CheckResult check_ulc() {
    double worst = 0.0;
    int pmfs = 0;
    auto ulc_gap = [](const LineageDistribution& d) {
        double w = 0.0;
        for (int j = d.min_support(); j <= d.max_support(); ++j) {
            const double lhs = j * d.pmf(j) * d.pmf(j);
            const double rhs = (j + 1) * d.pmf(j - 1) * d.pmf(j + 1);
            w = std::max(w, rhs - lhs);
        }
        return w;
    };
    for (double T : {0.1, 0.5, 1.0, 2.0}) {
        const auto table = balanced_lineage_distributions(64, T);
        for (int l = 1; l <= 64; ++l) {
            worst = std::max({worst, ulc_gap(table->x(l)), ulc_gap(table->w(l))});
            pmfs += 2;
        }
    }
    return result("ultra_log_concavity", worst <= 1e-14,
                  fmt("%d pmfs (X_l, W_l, l<=64); max violation %.3g (tol 1e-14)", pmfs, worst));
}

CheckResult check_likelihood_ratio_order(const KernelFn& g) {
    double worst = 0.0;
    for (double T : {0.1, 0.5, 1.0, 2.0})
        for (int i = 1; i <= 20; ++i)
            for (int j = i; j <= 20; ++j)
                for (int m = 1; m <= j; ++m)
                    for (int n = m; n <= j; ++n) {
                        const double lhs = kernel(g, i, m, T) * kernel(g, j, n, T);
                        const double rhs = kernel(g, i, n, T) * kernel(g, j, m, T);
                        worst = std::max(worst, rhs - lhs);
                    }
    return result("likelihood_ratio_order", worst <= 1e-14,
                  fmt("i<=j<=20, m<=n, T in {0.1,0.5,1,2}; max violation %.3g (tol 1e-14)", worst));
}

CheckResult check_extremality() {
    const std::vector<std::pair<const char*, std::function<double(int)>>> fs{
        {"x", [](int x) { return double(x); }},
        {"x^2", [](int x) { return double(x) * x; }},
        {"2^x min(x,20)", [](int x) { return std::ldexp(1.0, x) * std::min(x, 20); }},
    };
    auto sum = [](const std::vector<int>& a, const std::function<double(int)>& f) {
        double s = 0.0;
        for (int x : a) s += f(x);
        return s;
    };
    int trees = 0, bad = 0;
    for (int k = 5; k <= 7; ++k) {
        const auto cat = descendant_counts(caterpillar(k, 1.0));
        const auto bal = all_edge_descendant_counts(balanced(k, 1.0));
        for_each_topology(k, [&](const SpeciesTree& t) {
            ++trees;
            const auto nt = descendant_counts(t);
            const auto all = all_edge_descendant_counts(t);
            for (const auto& [name, f] : fs) {
                const double c = sum(cat, f), b = sum(bal, f);
                if (sum(nt, f) > c * (1 + 1e-12)) ++bad;
                if (sum(all, f) < b * (1 - 1e-12)) ++bad;
            }
        });
    }
    return result("extremality", bad == 0,
                  fmt("%d topologies (k=5,6,7), f in {x, x^2, 2^x min(x,20)}; violations %d", trees, bad));
}

CheckResult check_large_T() {
    const double r = (1.0 - g(10, 1, 20.0)) / one_minus_g_large_T_approx(10, 20.0);
    return result("large_T", r >= 0.99 && r <= 1.01, fmt("(1-g(10,1,20)) e^20 11/27 = %.6f (want [0.99, 1.01])", r));
}

CheckResult check_small_T() {
    const double r = g(5, 1, 1e-3) / g_small_T_approx(5, 1e-3);
    return result("small_T", r >= 0.99 && r <= 1.01, fmt("g(5,1,1e-3) / (5!/2^4 1e-12) = %.6f (want [0.99, 1.01])", r));
}

CheckResult check_gap_law() {
    const double f = f_infinity(1.0), s = s_infinity(1.0);
    std::vector<double> a;
    for (int k : {100, 200, 400}) a.push_back((k + 1) / 2.0 * (g(k, 1, 1.0) - s));
    const double d0 = std::abs(a[0] - f), d1 = std::abs(a[1] - f), d2 = std::abs(a[2] - f);
    return result("gap_law", d2 < d1 && d1 < d0,
                  fmt("a_100=%.8f a_200=%.8f a_400=%.8f f_inf(1)=%.8f", a[0], a[1], a[2], f));
}

CheckResult check_beta_trend() {
    std::vector<double> r;
    for (double T : {0.2, 0.1, 0.05}) {
        const BetaReport b = beta_T(T);
        r.push_back(b.value / b.asymptote);
    }
    const bool toward_one = std::abs(r[1] - 1) < std::abs(r[0] - 1) && std::abs(r[2] - 1) < std::abs(r[1] - 1);
    return result("beta_T_asymptote", toward_one,
                  fmt("beta_T 2T/pi^2 at T=0.2,0.1,0.05: %.4g, %.4g, %.4g", r[0], r[1], r[2]));
}

CheckResult check_log_s_trend() {
    const double half_pi2 = boost::math::double_constants::pi_sqr / 2.0;
    std::vector<double> r;
    for (double T : {0.2, 0.1, 0.05}) r.push_back(std::log(s_infinity(T)) * T / -half_pi2);
    const bool toward_one = std::abs(r[1] - 1) < std::abs(r[0] - 1) && std::abs(r[2] - 1) < std::abs(r[1] - 1);
    return result("log_s_asymptote", toward_one,
                  fmt("log s(T) T / (-pi^2/2) at T=0.2,0.1,0.05: %.6f, %.6f, %.6f", r[0], r[1], r[2]));
}

CheckResult check_m_o_regimes() {
    const double large = m_o_asymptotics(6, 30.0, 0.9, Regime::LargeT).ratio;
    const double small = m_o_asymptotics(6, 1e-3, 0.9, Regime::SmallT).ratio;
    const double kap = kappa(0.9, 4);
    const bool ok = large >= 0.95 && large <= 1.05 && small >= 0.9 && small <= 1.1 && std::abs(kap - std::log(10.0)) < 1e-14;
    return result("m_o_regimes", ok,
                  fmt("large-T ratio %.5f (want [0.95,1.05]); small-T ratio %.5f (want [0.9,1.1]); kappa(0.9,4)=%.7f", large,
                      small, kap));
}

std::vector<CheckResult> oracle_checks(const CheckOptions& opts) {
    return {check_closed_forms(opts.g), check_hypoexponential_identity(opts.g),
            check_monte_carlo_pmf(opts.g, opts.mc_samples, opts.seed), check_kernel_shape(opts.g), check_bound_chain()};
}

std::vector<CheckResult> dominance_checks(const CheckOptions& opts) {
    return {check_deterministic_balancing(), check_balanced_worst_case(), check_ulc(),
            check_likelihood_ratio_order(opts.g), check_extremality()};
}

std::vector<CheckResult> asymptotic_checks(const CheckOptions&) {
    return {check_large_T(), check_small_T(), check_gap_law(), check_beta_trend(), check_log_s_trend(),
            check_m_o_regimes()};
}

std::vector<CheckResult> run_checks(std::string_view suite, const CheckOptions& opts) {
    if (suite == "oracles") return oracle_checks(opts);
    if (suite == "dominance") return dominance_checks(opts);
    if (suite == "asymptotics") return asymptotic_checks(opts);
    if (suite == "all") {
        auto out = oracle_checks(opts);
        for (auto* fn : {dominance_checks, asymptotic_checks}) {
            auto more = fn(opts);
            out.insert(out.end(), more.begin(), more.end());
        }
        return out;
    }
    throw DomainError("unknown check suite '" + std::string(suite) + "' (expected oracles, dominance, asymptotics or all)");
}

}  // namespace bipcover
