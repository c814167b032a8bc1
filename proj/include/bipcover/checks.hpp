#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace bipcover {

using KernelFn = std::function<double(int, int, double)>;

struct CheckOptions {
    // The transition kernel under test; replaceable so a perturbed kernel can
    // be shown to fail the suite.
    KernelFn g;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    int mc_samples = 1'000'000;

    CheckOptions();
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Kernel closed forms, hypoexponential identity, Monte-Carlo pmf agreement,
// kernel shape properties, and the bound chain over the standard grid.
std::vector<CheckResult> oracle_checks(const CheckOptions& opts);
// Stochastic orderings, ultra log-concavity and tree-shape extremality.
std::vector<CheckResult> dominance_checks(const CheckOptions& opts);
// Large/small-T limits, gap law, s(T) and beta_T trends, M_o regimes.
std::vector<CheckResult> asymptotic_checks(const CheckOptions& opts);

// suite is "oracles", "dominance", "asymptotics" or "all"; DomainError otherwise.
std::vector<CheckResult> run_checks(std::string_view suite, const CheckOptions& opts);

// Individual checks, shared with the acceptance driver.
CheckResult check_closed_forms(const KernelFn& g);
CheckResult check_hypoexponential_identity(const KernelFn& g);
CheckResult check_monte_carlo_pmf(const KernelFn& g, int samples, std::uint64_t seed);
CheckResult check_kernel_shape(const KernelFn& g);
CheckResult check_bound_chain();
CheckResult check_deterministic_balancing();
CheckResult check_balanced_worst_case();
CheckResult check_ulc();
CheckResult check_likelihood_ratio_order(const KernelFn& g);
CheckResult check_extremality();
CheckResult check_large_T();
CheckResult check_small_T();
CheckResult check_gap_law();
CheckResult check_beta_trend();
CheckResult check_log_s_trend();
CheckResult check_m_o_regimes();

}  // namespace bipcover
