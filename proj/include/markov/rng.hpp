#ifndef MARKOV_RNG_HPP
#define MARKOV_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace markov {

namespace detail {

// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Derivation path from a root seed. Identical lineages yield identical
/// streams; sibling lineages (different child indices) yield independent
/// streams. The stream itself is counter-based: draw i is a pure function
/// of (lineage key, i).
class SeedLineage {
public:
    explicit SeedLineage(std::uint64_t root) : key_(detail::mix64(root ^ 0x6d61726b6f766b65ULL)) {
        path_.push_back(root);
    }

    SeedLineage child(std::uint64_t index) const {
        SeedLineage c(*this);
        c.key_ = detail::mix64(c.key_ ^ detail::mix64(index + 0x51ed270b0f4a3c29ULL));
        c.path_.push_back(index);
        return c;
    }

    std::uint64_t key() const { return key_; }
    const std::vector<std::uint64_t>& path() const { return path_; }

private:
    std::uint64_t key_;
    std::vector<std::uint64_t> path_;
};

/// Counter-based uniform stream over a lineage key.
class RngStream {
public:
    explicit RngStream(const SeedLineage& lineage) : key_(lineage.key()) {}
    explicit RngStream(std::uint64_t raw_key) : key_(raw_key) {}

    std::uint64_t next_u64() { return detail::mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    /// Uniform on [0, 1).
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

inline double draw_uniform(RngStream& g) { return g.next_double(); }

inline double draw_normal(RngStream& g, double mean = 0.0, double sd = 1.0) {
    if (!(sd > 0.0)) throw std::invalid_argument("draw_normal: sd must be > 0");
    // Box-Muller; the sine branch is discarded to keep draws independent of
    // call history.
    double u1 = g.next_double();
    while (u1 <= 0.0) u1 = g.next_double();
    const double u2 = g.next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Marsaglia-Tsang for shape >= 1, boosted by U^{1/shape} below 1.
inline double draw_gamma(RngStream& g, double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("draw_gamma: shape must be > 0");
    if (shape < 1.0) {
        double u = g.next_double();
        while (u <= 0.0) u = g.next_double();
        return draw_gamma(g, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = draw_normal(g);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        double u = g.next_double();
        while (u <= 0.0) u = g.next_double();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

inline double draw_beta(RngStream& g, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("draw_beta: a, b must be > 0");
    const double x = draw_gamma(g, a);
    const double y = draw_gamma(g, b);
    return x / (x + y);
}

/// Index draw from unnormalized nonnegative weights.
inline std::size_t draw_categorical(RngStream& g, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("draw_categorical: total weight must be > 0");
    double u = g.next_double() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        u -= weights[i];
        if (u < 0.0) return i;
    }
    return weights.size() - 1;
}

}  // namespace markov

#endif
