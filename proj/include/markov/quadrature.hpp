#ifndef MARKOV_QUADRATURE_HPP
#define MARKOV_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "markov/space.hpp"

namespace markov {

namespace detail {

inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // inverted test so non-finite values terminate instead of recursing
    if (depth <= 0 || !(std::fabs(delta) > 15.0 * tol))
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson on [a, b] to relative tolerance rel_tol (absolute floor
/// 1e-14 for integrals near zero).
inline double integrate_1d(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-8) {
    if (a >= b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = std::max(std::fabs(whole) * rel_tol, 1e-14);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

namespace detail {

inline double halton(std::size_t index, std::size_t base) {
    double f = 1.0, r = 0.0;
    std::size_t i = index + 1;  // skip the origin
    while (i > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

inline std::size_t nth_prime(std::size_t n) {
    static const std::size_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    return primes[n % 12];
}

}  // namespace detail

/// Quasi-Monte Carlo (Halton) integral of f over a box, d >= 2.
inline double integrate_qmc(const std::function<double(const std::vector<double>&)>& f,
                            const Box& box, std::size_t points = 1u << 16) {
    const std::size_t d = box.dim();
    std::vector<double> x(d);
    double sum = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
        for (std::size_t j = 0; j < d; ++j)
            x[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * detail::halton(k, detail::nth_prime(j));
        sum += f(x);
    }
    return box.volume() * sum / static_cast<double>(points);
}

}  // namespace markov

#endif
