#include "bipcover/asymptotics.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>

#include "bipcover/bounds.hpp"
#include "bipcover/coalescent.hpp"
#include "bipcover/errors.hpp"

namespace bipcover {
namespace {

using Wide = boost::multiprecision::cpp_bin_float_100;

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_time(double T, bool allow_zero) {
    if (!std::isfinite(T) || T < 0.0 || (!allow_zero && T == 0.0))
        throw DomainError(allow_zero ? "time must be finite and nonnegative" : "time must be positive and finite");
}

struct Sum {
    double value;
    double error;
};

// sum_i C_i rate_i^p exp(-rate_i T) in double precision, with a rounding estimate.
Sum coefficient_sum(const std::vector<double>& rates, double T, int power) {
    const std::size_t n = rates.size();
    double s = 0.0, c = 0.0, abs_sum = 0.0, err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double log_mag = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            if (m == i) continue;
            log_mag += std::log(rates[m]) - std::log(std::abs(rates[m] - rates[i]));
        }
        log_mag += power * std::log(rates[i]) - rates[i] * T;
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;  // rates below rate_i flip the sign
        const double term = sign * std::exp(log_mag);
        const double t = s + term;
        c += std::abs(s) >= std::abs(term) ? (s - t) + term : (term - t) + s;
        s = t;
        abs_sum += std::abs(term);
        err += (std::abs(log_mag) + 2.0 * n) * kEps * std::abs(term);
    }
    return {s + c, err + 4.0 * kEps * abs_sum};
}

Wide wide_coefficient_sum(const std::vector<double>& rates, double T, int power, Wide& abs_sum) {
    const std::size_t n = rates.size();
    Wide s = 0;
    abs_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Wide c = 1;
        const Wide ri = rates[i];
        for (std::size_t m = 0; m < n; ++m) {
            if (m == i) continue;
            const Wide rm = rates[m];
            c *= rm / (rm - ri);
        }
        Wide term = c * exp(-ri * Wide(T));
        for (int p = 0; p < power; ++p) term *= ri;
        s += term;
        abs_sum += abs(term);
    }
    return s;
}

// Value of 1 - sum (power 0) or sum (power 1), checked for cancellation.
double evaluate(const HypoexponentialSpec& spec, double T, int power) {
    spec.validate();
    check_time(T, true);
    // Exact at the origin, where the relative cancellation test cannot pass.
    if (T == 0.0) return power == 0 || spec.rates.size() > 1 ? 0.0 : spec.rates[0];
    const Sum d = coefficient_sum(spec.rates, T, power);
    const double value = power == 0 ? 1.0 - d.value : d.value;
    const bool stable = spec.rates.size() <= 40 && d.error <= 1e-12 &&
                        d.error <= 1e-8 * std::abs(value) + std::numeric_limits<double>::min();
    if (stable) return std::clamp(value, 0.0, power == 0 ? 1.0 : std::numeric_limits<double>::infinity());

    Wide abs_sum;
    const Wide w = wide_coefficient_sum(spec.rates, T, power, abs_sum);
    const Wide wv = power == 0 ? Wide(1) - w : w;
    const Wide werr = abs_sum * Wide(spec.rates.size()) * std::numeric_limits<Wide>::epsilon();
    const double out = static_cast<double>(wv);
    if (werr > Wide(1e-12) || werr > Wide(1e-8) * abs(wv) + Wide(std::numeric_limits<double>::min()))
        throw UnstableEvaluation("hypoexponential coefficients cancel beyond 100-digit precision", out,
                                 static_cast<double>(werr));
    return std::clamp(out, 0.0, power == 0 ? 1.0 : std::numeric_limits<double>::infinity());
}

}  // namespace

void HypoexponentialSpec::validate() const {
    if (rates.empty()) throw DomainError("hypoexponential needs at least one rate");
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (!(rates[i] > 0.0) || !std::isfinite(rates[i])) throw DomainError("rates must be positive and finite");
        if (i > 0 && !(rates[i] > rates[i - 1])) throw DomainError("rates must be strictly increasing");
    }
}

HypoexponentialSpec HypoexponentialSpec::kingman(int k) {
    if (k < 2) throw DomainError("Kingman rates need k >= 2");
    HypoexponentialSpec s;
    for (int m = 2; m <= k; ++m) s.rates.push_back(pair_rate(m));
    return s;
}

double hypoexp_cdf(const HypoexponentialSpec& spec, double T) { return evaluate(spec, T, 0); }

double hypoexp_pdf(const HypoexponentialSpec& spec, double T) { return evaluate(spec, T, 1); }

double s_infinity(double T) {
    check_time(T, false);
    double log_s = 0.0;
    for (int n = 1;; ++n) {
        const double x = std::exp(-n * T);
        log_s += std::log1p(-x);
        if (x < 1e-18) break;
    }
    return std::exp(3.0 * log_s);
}

double f_infinity(double T) {
    check_time(T, false);
    double d = 0.0;
    for (int n = 1;; ++n) {
        const double term = n / std::expm1(n * T);
        d += term;
        if (term < 1e-18 * d) break;
    }
    return s_infinity(T) * 3.0 * d;
}

double g_small_T_approx(int k, double T) {
    if (k < 2) throw DomainError("k must be at least 2");
    check_time(T, false);
    return std::exp(std::lgamma(k + 1.0) - (k - 1) * std::log(2.0) + (k - 1) * std::log(T));
}

double one_minus_g_large_T_approx(int k, double T) {
    if (k < 2) throw DomainError("k must be at least 2");
    check_time(T, true);
    return 3.0 * (k - 1) / (k + 1) * std::exp(-T);
}

double g_large_T_approx(int k, double T) { return 1.0 - one_minus_g_large_T_approx(k, T); }

double u_of_T(double T) {
    check_time(T, false);
    const double e = std::exp(-T / 2.0);
    return (2.0 - e) / -std::expm1(-T / 2.0);
}

BetaReport beta_T(double T) {
    check_time(T, false);
    BetaReport r;
    r.T = T;
    r.index = static_cast<int>(std::ceil(u_of_T(T) - 1e-9));
    if (r.index > kMaxLineages) throw DomainError("T too small: ceil(u(T)) exceeds the lineage cap");
    const double s = s_infinity(T);
    r.value = std::log1p(-g(r.index, 1, T)) / std::log1p(-s);
    r.asymptote = boost::math::double_constants::pi_sqr / (2.0 * T);
    return r;
}

double kappa(double q, int k) {
    if (k < 4) throw DomainError("k must be at least 4");
    if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
    return std::log((k - 3) / (1.0 - q));
}

Regime parse_regime(std::string_view name) {
    if (name == "large-T") return Regime::LargeT;
    if (name == "small-T") return Regime::SmallT;
    if (name == "large-k") return Regime::LargeK;
    throw DomainError("unknown regime '" + std::string(name) + "' (expected large-T, small-T or large-k)");
}

std::string_view regime_name(Regime r) {
    switch (r) {
        case Regime::LargeT: return "large-T";
        case Regime::SmallT: return "small-T";
        case Regime::LargeK: return "large-k";
    }
    return "?";
}

AsymptoticReport m_o_asymptotics(int k, double T, double q, Regime regime) {
    const BoundSpec spec{k, T, q};
    spec.validate();
    AsymptoticReport r;
    r.regime = regime;
    r.exact = original_bound_real(spec);
    const double kap = kappa(q, k);
    switch (regime) {
        case Regime::LargeT:
            r.approx = kap / T;
            break;
        case Regime::SmallT:
            r.approx = std::exp(std::log(kap) + (k - 3) * std::log(2.0) - std::lgamma(k - 1.0) - (k - 3) * std::log(T));
            break;
        case Regime::LargeK:
            r.approx = kap / -std::log1p(-s_infinity(T));
            break;
    }
    r.ratio = r.exact / r.approx;
    return r;
}

}  // namespace bipcover
