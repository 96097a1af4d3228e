#ifndef MARKOV_TESTS_SUPPORT_HPP
#define MARKOV_TESTS_SUPPORT_HPP

#include <cmath>
#include <vector>

#include "markov/markov.hpp"

namespace testsupport {

using namespace markov;

// independent matrix-vector oracle for S_*(T) on finite spaces
inline std::vector<double> naive_pushforward(const std::vector<std::vector<double>>& rows,
                                             const std::vector<double>& mu) {
    std::vector<double> out(rows[0].size(), 0.0);
    for (std::size_t x = 0; x < rows.size(); ++x)
        for (std::size_t y = 0; y < out.size(); ++y) out[y] += mu[x] * rows[x][y];
    return out;
}

// independent stochastic-matrix product oracle
inline std::vector<std::vector<double>> naive_matmul(const std::vector<std::vector<double>>& t1,
                                                     const std::vector<std::vector<double>>& t2) {
    std::vector<std::vector<double>> out(t1.size(), std::vector<double>(t2[0].size(), 0.0));
    for (std::size_t x = 0; x < t1.size(); ++x)
        for (std::size_t y = 0; y < t2.size(); ++y)
            for (std::size_t z = 0; z < t2[0].size(); ++z) out[x][z] += t1[x][y] * t2[y][z];
    return out;
}

inline double tv_vec(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

// Bern(theta)^2 on {00, 01, 10, 11}
inline std::vector<double> bern2(double theta) {
    const double q = 1.0 - theta;
    return {q * q, q * theta, theta * q, theta * theta};
}

inline StatModel bern2_model(const SampleSpace& x4, const std::vector<double>& thetas) {
    std::vector<ProbMeasure> family;
    for (double t : thetas) family.emplace_back(Measure::from_weights(x4, bern2(t)));
    return StatModel::from_family(x4, family);
}

inline SampleSpace bern2_space() { return SampleSpace::finite({"00", "01", "10", "11"}); }

// sum statistic {00,01,10,11} -> {s0,s1,s2}
inline MeasurableMap sum_statistic(const SampleSpace& x4) {
    return MeasurableMap::label_table(x4, SampleSpace::finite({"s0", "s1", "s2"}), {0, 1, 1, 2});
}

// first-coordinate statistic
inline MeasurableMap first_statistic(const SampleSpace& x4) {
    return MeasurableMap::label_table(x4, SampleSpace::finite({"f0", "f1"}), {0, 0, 1, 1});
}

/// A randomly generated pair of composable sufficient statistics. The family
/// is built in factorized form mu_theta(x) prop. h(k2(k1(x)), theta) *
/// g2(k1(x)) * g(x), so k1, k2 and their composite are sufficient by
/// construction.
struct SufficientPair {
    SampleSpace x, y, z;
    StatModel model_x;
    MeasurableMap k1, k2;

    static SufficientPair random(RngStream& g) {
        const std::size_t nz = 2 + static_cast<std::size_t>(g.next_double() * 2);
        const std::size_t ny = nz + static_cast<std::size_t>(g.next_double() * 2);
        const std::size_t nx = ny + 1 + static_cast<std::size_t>(g.next_double() * 2);
        const std::size_t members = 2 + static_cast<std::size_t>(g.next_double() * 2);
        const SampleSpace x = SampleSpace::omega(nx);
        const SampleSpace y = SampleSpace::omega(ny);
        const SampleSpace z = SampleSpace::omega(nz);

        // surjections: hit every label once, then map the rest at random
        auto surjection = [&g](std::size_t from, std::size_t to) {
            std::vector<std::size_t> t(from);
            for (std::size_t i = 0; i < from; ++i)
                t[i] = i < to ? i : static_cast<std::size_t>(g.next_double() * double(to));
            return t;
        };
        const std::vector<std::size_t> t1 = surjection(nx, ny);
        const std::vector<std::size_t> t2 = surjection(ny, nz);

        std::vector<double> gx(nx), g2(ny);
        for (double& v : gx) v = 0.2 + g.next_double();
        for (double& v : g2) v = 0.2 + g.next_double();
        std::vector<std::vector<double>> h(members, std::vector<double>(nz));
        for (auto& row : h)
            for (double& v : row) v = 0.2 + g.next_double();

        std::vector<ProbMeasure> family;
        for (std::size_t m = 0; m < members; ++m) {
            std::vector<double> w(nx);
            double mass = 0.0;
            for (std::size_t i = 0; i < nx; ++i) {
                w[i] = h[m][t2[t1[i]]] * g2[t1[i]] * gx[i];
                mass += w[i];
            }
            for (double& v : w) v /= mass;
            family.emplace_back(Measure::from_weights(x, w));
        }
        return SufficientPair{x, y, z, StatModel::from_family(x, family),
                              MeasurableMap::label_table(x, y, t1),
                              MeasurableMap::label_table(y, z, t2)};
    }
};

}  // namespace testsupport

#endif
