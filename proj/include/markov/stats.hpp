#ifndef MARKOV_STATS_HPP
#define MARKOV_STATS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "markov/special.hpp"

namespace markov {

/// First two sample moments with their standard errors.
struct MomentSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double se_mean = 0.0;
    double se_variance = 0.0;
};

inline MomentSummary moment_summary(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("moment_summary: need n >= 2");
    MomentSummary s;
    s.n = xs.size();
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(s.n);
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - s.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double n = static_cast<double>(s.n);
    s.variance = m2 / (n - 1.0);
    s.se_mean = std::sqrt(s.variance / n);
    // moment estimator of Var(s^2); clipped at 0 for near-degenerate samples
    const double v4 = m4 / n - (m2 / n) * (m2 / n);
    s.se_variance = std::sqrt(std::max(v4, 0.0) / n);
    return s;
}

/// Named one-dimensional cdf for one-sample testing.
struct NamedCdf {
    std::string name;
    std::function<double(double)> cdf;

    static NamedCdf uniform(double lo = 0.0, double hi = 1.0) {
        return {"uniform", [lo, hi](double x) {
                    if (x <= lo) return 0.0;
                    if (x >= hi) return 1.0;
                    return (x - lo) / (hi - lo);
                }};
    }
    static NamedCdf beta(double a, double b) {
        return {"beta", [a, b](double x) { return incomplete_beta(a, b, std::clamp(x, 0.0, 1.0)); }};
    }
    static NamedCdf normal(double mean, double sd) {
        return {"normal", [mean, sd](double x) { return normal_cdf((x - mean) / sd); }};
    }

    static NamedCdf by_name(const std::string& name, const std::vector<double>& params) {
        if (name == "uniform") {
            if (params.size() == 2) return uniform(params[0], params[1]);
            return uniform();
        }
        if (name == "beta" && params.size() == 2) return beta(params[0], params[1]);
        if (name == "normal" && params.size() == 2) return normal(params[0], params[1]);
        throw std::invalid_argument("unsupported cdf: " + name);
    }
};

struct KsResult {
    double statistic = 0.0;   // sup |F_n - F|
    double scaled = 0.0;      // Stephens-corrected sqrt(n)-scaling
    bool pass_at_1pct = false;
    bool pass_at_5pct = false;
};

/// One-sample Kolmogorov-Smirnov test against a named cdf. Asymptotic
/// critical values 1.6276 (1%) and 1.3581 (5%) with the Stephens
/// small-sample correction.
inline KsResult ks_test(std::vector<double> samples, const NamedCdf& dist) {
    if (samples.size() < 30) throw std::invalid_argument("ks_test: need n >= 30");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = dist.cdf(samples[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    KsResult r;
    r.statistic = d;
    r.scaled = d * (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
    r.pass_at_1pct = r.scaled <= 1.6276;
    r.pass_at_5pct = r.scaled <= 1.3581;
    return r;
}

/// Two-sample KS test; pass thresholds from the asymptotic Kolmogorov law.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.size() < 30 || b.size() < 30) throw std::invalid_argument("ks_two_sample: need n >= 30");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KsResult r;
    r.statistic = d;
    r.scaled = d * std::sqrt(na * nb / (na + nb));
    r.pass_at_1pct = r.scaled <= 1.6276;
    r.pass_at_5pct = r.scaled <= 1.3581;
    return r;
}

}  // namespace markov

#endif
