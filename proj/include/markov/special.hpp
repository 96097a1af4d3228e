#ifndef MARKOV_SPECIAL_HPP
#define MARKOV_SPECIAL_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

namespace markov {

inline double log_gamma(double x) { return std::lgamma(x); }

inline double log_beta_fn(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

/// Standard normal cdf.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

namespace detail {

// Lentz continued fraction for the regularized incomplete beta function.
inline double betacf(double a, double b, double x) {
    const int max_iter = 300;
    const double eps = std::numeric_limits<double>::epsilon();
    const double fpmin = std::numeric_limits<double>::min() / eps;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 10.0 * eps) break;
    }
    return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: a, b must be > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = a * std::log(x) + b * std::log1p(-x) - log_beta_fn(a, b);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(ln_front) * detail::betacf(a, b, x) / a;
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta_fn(a, b)) *
                     detail::betacf(b, a, 1.0 - x) / b;
}

inline double beta_pdf(double a, double b, double x) {
    if (x < 0.0 || x > 1.0) return 0.0;
    double lp = -log_beta_fn(a, b);
    if (a != 1.0) lp += (a - 1.0) * std::log(x);
    if (b != 1.0) lp += (b - 1.0) * std::log1p(-x);
    return std::exp(lp);
}

/// log(sum(exp(v))) over a range, tolerating -inf entries.
template <typename It>
double log_sum_exp(It first, It last) {
    double m = -std::numeric_limits<double>::infinity();
    for (It it = first; it != last; ++it) m = std::max(m, *it);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (It it = first; it != last; ++it) s += std::exp(*it - m);
    return m + std::log(s);
}

}  // namespace markov

#endif
