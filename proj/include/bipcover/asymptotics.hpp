#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bipcover {

// Rates of independent exponential stages, strictly increasing and positive.
struct HypoexponentialSpec {
    std::vector<double> rates;

    void validate() const;
    // m(m-1)/2 for m = 2..k: the waiting times of Kingman's coalescent from k to 1.
    static HypoexponentialSpec kingman(int k);
};

// F(T) = 1 - sum_i C_i exp(-rate_i T), C_i = prod_{m != i} rate_m / (rate_m - rate_i).
// Double precision first; falls back to 100-digit arithmetic when the
// cancellation estimate is too large. Throws UnstableEvaluation only if that fails too.
double hypoexp_cdf(const HypoexponentialSpec& spec, double T);
double hypoexp_pdf(const HypoexponentialSpec& spec, double T);

// s(T) = P(S_inf <= T), where S_inf is the time for infinitely many lineages to
// reach one; evaluated as prod_{n>=1} (1 - e^{-nT})^3.
double s_infinity(double T);
// Density of S_inf: s(T) * 3 sum_n n / (e^{nT} - 1).
double f_infinity(double T);

// k!/2^{k-1} T^{k-1}, the leading small-T behaviour of g(k, 1, T).
double g_small_T_approx(int k, double T);
// 1 - 3(k-1)/(k+1) e^{-T}.
double g_large_T_approx(int k, double T);
// 3(k-1)/(k+1) e^{-T}, the same approximation for 1 - g(k, 1, T).
double one_minus_g_large_T_approx(int k, double T);

// (2 - e^{-T/2}) / (1 - e^{-T/2}); bounds E X for balanced subtrees of any size.
double u_of_T(double T);

struct BetaReport {
    double T = 0.0;
    int index = 0;          // ceil(u(T)), the lineage count fed to g
    double value = 0.0;     // log(1 - g(index, 1, T)) / log(1 - s(T))
    double asymptote = 0.0; // pi^2 / (2T)
};
BetaReport beta_T(double T);

// log((k-3)/(1-q)).
double kappa(double q, int k);

enum class Regime { LargeT, SmallT, LargeK };
// "large-T", "small-T", "large-k"; DomainError otherwise.
Regime parse_regime(std::string_view name);
std::string_view regime_name(Regime r);

struct AsymptoticReport {
    Regime regime = Regime::LargeT;
    double approx = 0.0;
    double exact = 0.0;  // unrounded original bound
    double ratio = 0.0;  // exact / approx
};

// Compares the unrounded original bound with its closed-form approximation:
// kappa/T (large T), 2^{k-3} kappa / ((k-2)! T^{k-3}) (small T), and
// kappa / -log(1 - s(T)) (large k).
AsymptoticReport m_o_asymptotics(int k, double T, double q, Regime regime);

}  // namespace bipcover
