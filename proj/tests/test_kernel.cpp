#include "doctest.h"

#include <cmath>

#include "markov/markov.hpp"
#include "support.hpp"

using namespace markov;
using testsupport::naive_matmul;
using testsupport::naive_pushforward;
using testsupport::tv_vec;

namespace {

const SampleSpace o2 = SampleSpace::omega(2);
const SampleSpace o3 = SampleSpace::omega(3);
const SampleSpace u01 = SampleSpace::interval(0.0, 1.0);

}  // namespace

TEST_CASE("dirac unit") {
    const Kernel d = Kernel::dirac(o2);
    const Measure row = d.at(Point::label(0)).get();
    REQUIRE(row.atoms().size() == 1);
    CHECK(row.atoms()[0].weight == 1.0);
    CHECK(row.atoms()[0].location.label_index() == 0);

    const Kernel de = Kernel::dirac(u01);
    const Measure erow = de.at(Point::real(0.3)).get();
    REQUIRE(erow.atoms().size() == 1);
    CHECK(erow.atoms()[0].location.x() == 0.3);

    // P_*(delta) is the identity on probe measures
    const ProbMeasure mu(Measure::from_weights(o2, {0.25, 0.75}));
    CHECK(total_variation(pushforward_p(d, mu).get(), mu.get()) == 0.0);
}

TEST_CASE("kernel construction validates row stochasticity") {
    CHECK_THROWS_AS(Kernel::from_rows(o2, o2, {{0.5, 0.6}, {0.5, 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(Kernel::from_rows(o3, o2, {{0.5, 0.5}, {0.5, 0.5}}), std::invalid_argument);
}

TEST_CASE("pushforward_p matches the matrix-vector oracle") {
    const std::vector<std::vector<double>> rows = {{0.3, 0.7}, {0.6, 0.4}};
    const Kernel t = Kernel::from_rows(o2, o2, rows);
    const ProbMeasure mu(Measure::from_weights(o2, {0.5, 0.5}));
    const std::vector<double> expected = naive_pushforward(rows, {0.5, 0.5});
    CHECK(tv_vec(pushforward_p(t, mu).get().weights(), expected) <= 1e-15);
    CHECK(expected[0] == doctest::Approx(0.45));
    CHECK(expected[1] == doctest::Approx(0.55));

    // S_*(T)(delta_x) = row(x)
    const ProbMeasure da = ProbMeasure::dirac(o2, Point::label(0));
    CHECK(tv_vec(pushforward_p(t, da).get().weights(), rows[0]) <= 1e-15);
}

TEST_CASE("pushforward_s is linear and mass preserving") {
    const Kernel t = Kernel::from_rows(o2, o2, {{0.3, 0.7}, {0.6, 0.4}});
    const Measure two_da = Measure::dirac(o2, Point::label(0)).scaled(2.0);
    const std::vector<double> w = pushforward_s(t, two_da).weights();
    CHECK(w[0] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(1.4).epsilon(1e-14));

    CHECK(pushforward_s(t, Measure::zero(o2)).total_mass() == 0.0);

    RngStream g(SeedLineage(3));
    for (int trial = 0; trial < 20; ++trial) {
        const Measure mu = Measure::from_weights(
            o2, {g.next_double() * 2 - 1, g.next_double() * 2 - 1});
        CHECK(pushforward_s(t, mu).total_mass() == doctest::Approx(mu.total_mass()).epsilon(1e-12));
    }
}

TEST_CASE("pullback evaluates I_f of the rows") {
    const SampleSpace ef = SampleSpace::finite({"e", "f"});
    const Kernel t = Kernel::from_rows(SampleSpace::finite({"c"}), ef, {{0.3, 0.7}});
    const SimpleFunction ind_e = SimpleFunction::indicator(ef, Region::of_labels({0}));
    const PointFunction tf = pullback(t, ind_e);
    CHECK(tf(Point::label(0)) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(tf.table()[0] == doctest::Approx(0.3).epsilon(1e-14));

    // deterministic kernel: T*f = f . kappa
    const MeasurableMap swap = MeasurableMap::label_table(o2, o2, {1, 0});
    const Kernel k = Kernel::deterministic(swap);
    const SimpleFunction f(o2, {{Region::of_labels({0}), 2.0}, {Region::of_labels({1}), -1.0}});
    const PointFunction kf = pullback(k, f);
    for (std::size_t x = 0; x < 2; ++x)
        CHECK(kf(Point::label(x)) == doctest::Approx(f(swap.apply(Point::label(x)))));

    // rows are normalized, so 1_Y pulls back to the constant 1
    const PointFunction one = pullback(t, SimpleFunction::one(ef));
    CHECK(one(Point::label(0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("compose matches the stochastic-matrix product oracle") {
    const std::vector<std::vector<double>> r1 = {{0.5, 0.5}, {0.2, 0.8}};
    const std::vector<std::vector<double>> r2 = {{0.3, 0.7}, {0.6, 0.4}};
    const Kernel t1 = Kernel::from_rows(o2, o2, r1);
    const Kernel t2 = Kernel::from_rows(o2, o2, r2);
    const Kernel c = compose(t2, t1);
    const std::vector<std::vector<double>> expected = naive_matmul(r1, r2);
    CHECK(expected[0][0] == doctest::Approx(0.45));
    CHECK(expected[0][1] == doctest::Approx(0.55));
    for (std::size_t x = 0; x < 2; ++x)
        CHECK(tv_vec(c.at(Point::label(x)).get().weights(), expected[x]) <= 1e-14);

    // unit laws
    CHECK(tv_vec(compose(Kernel::dirac(o2), t1).at(Point::label(1)).get().weights(), r1[1]) <=
          1e-14);
    CHECK(tv_vec(compose(t1, Kernel::dirac(o2)).at(Point::label(1)).get().weights(), r1[1]) <=
          1e-14);

    // constant kernels absorb
    const ProbMeasure nu(Measure::from_weights(o2, {0.1, 0.9}));
    const Kernel ck = compose(Kernel::constant(o2, nu), t1);
    for (std::size_t x = 0; x < 2; ++x)
        CHECK(tv_vec(ck.at(Point::label(x)).get().weights(), nu.get().weights()) <= 1e-14);

    CHECK_THROWS_AS(compose(Kernel::from_rows(o3, o2, {{1, 0}, {1, 0}, {0, 1}}), t1),
                    std::invalid_argument);
}

TEST_CASE("ev_p averages measure clouds") {
    const ProbMeasure mu(Measure::from_weights(o2, {0.3, 0.7}));
    CHECK(total_variation(ev_p(MeasureCloud::dirac(mu)).get(), mu.get()) == 0.0);

    MeasureCloud two;
    two.atoms.emplace_back(ProbMeasure(Measure::from_weights(o2, {1.0, 0.0})), 0.5);
    two.atoms.emplace_back(ProbMeasure(Measure::from_weights(o2, {0.0, 1.0})), 0.5);
    const std::vector<double> w = ev_p(two).get().weights();
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] == doctest::Approx(0.5));

    // Dirichlet mean oracle: E[p] = alpha / alpha(X) = (0.5, 0.5)
    const DirichletParam alpha(Measure::from_weights(o2, {1.0, 1.0}));
    MeasureCloud cloud;
    const std::size_t n = 20000;
    for (const DirSample& s : dir_sample(alpha, n, SeedLineage(17)))
        cloud.atoms.emplace_back(ProbMeasure(Measure::from_weights(o2, s)), 1.0 / double(n));
    const std::vector<double> mixed = ev_p(cloud).get().weights();
    CHECK(mixed[0] == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("graph builds the joint of prior and kernel") {
    const SampleSpace x2 = SampleSpace::finite({"0", "1"});
    const Kernel p = Kernel::from_rows(o2, x2, {{0.8, 0.2}, {0.3, 0.7}});
    const ProbMeasure prior(Measure::from_weights(o2, {0.5, 0.5}));
    const Joint j = graph(p, prior);
    CHECK(j.mass(Region::of_labels({0}), Region::of_labels({1})) ==
          doctest::Approx(0.10).epsilon(1e-14));

    // marginals recover the prior and the pushforward
    CHECK(tv_vec(j.marginal_theta().weights(), {0.5, 0.5}) <= 1e-14);
    const std::vector<double> mx = j.marginal_sample().weights();
    CHECK(mx[0] == doctest::Approx(0.55).epsilon(1e-14));
    CHECK(mx[1] == doctest::Approx(0.45).epsilon(1e-14));

    // delta graphs sit on the diagonal
    const Joint jd = graph(Kernel::dirac(o2), prior);
    CHECK(jd.mass(Region::of_labels({0}), Region::of_labels({0})) == doctest::Approx(0.5));
    CHECK(jd.mass(Region::of_labels({0}), Region::of_labels({1})) == 0.0);
}

TEST_CASE("laws check: random suite and hand-computed fixtures") {
    const LawsReport rep = laws_check({.seed = 2024, .max_size = 6, .trials = 100});
    CHECK(rep.max_residual() <= 1e-12);

    // associativity on three fixed 2-state kernels, against the oracle
    const std::vector<std::vector<double>> r1 = {{0.5, 0.5}, {0.2, 0.8}};
    const std::vector<std::vector<double>> r2 = {{0.3, 0.7}, {0.6, 0.4}};
    const std::vector<std::vector<double>> r3 = {{0.9, 0.1}, {0.25, 0.75}};
    const Kernel t1 = Kernel::from_rows(o2, o2, r1);
    const Kernel t2 = Kernel::from_rows(o2, o2, r2);
    const Kernel t3 = Kernel::from_rows(o2, o2, r3);
    const Kernel left = compose(t3, compose(t2, t1));
    const Kernel right = compose(compose(t3, t2), t1);
    const std::vector<std::vector<double>> oracle = naive_matmul(naive_matmul(r1, r2), r3);
    for (std::size_t x = 0; x < 2; ++x) {
        CHECK(tv_vec(left.at(Point::label(x)).get().weights(), oracle[x]) <= 1e-14);
        CHECK(tv_vec(right.at(Point::label(x)).get().weights(), oracle[x]) <= 1e-14);
    }

    // unit law residual for delta on Omega_3
    const Kernel d3 = Kernel::dirac(o3);
    const ProbMeasure mu(Measure::from_weights(o3, {0.2, 0.3, 0.5}));
    CHECK(total_variation(pushforward_p(d3, mu).get(), mu.get()) == 0.0);

    // the fault-injection hook must register
    const LawsReport faulty = laws_check({.seed = 1, .max_size = 4, .trials = 5, .fault_injection = 1e-3});
    CHECK(faulty.functoriality >= 1e-3);
}

TEST_CASE("markov operators contract total variation") {
    RngStream g(SeedLineage(41));
    for (int trial = 0; trial < 30; ++trial) {
        const Kernel t = markov::detail::random_kernel(g, o3, o2);
        const Measure a = Measure::from_weights(
            o3, {g.next_double(), g.next_double(), g.next_double()});
        const Measure b = Measure::from_weights(
            o3, {g.next_double(), g.next_double(), g.next_double()});
        CHECK(total_variation(pushforward_s(t, a), pushforward_s(t, b)) <=
              total_variation(a, b) + 1e-12);
    }
}

TEST_CASE("pushforward preserves absolute continuity on finite spaces") {
    RngStream g(SeedLineage(43));
    for (int trial = 0; trial < 30; ++trial) {
        const Kernel t = markov::detail::random_kernel(g, o3, o3);
        // support(nu) subset of support(mu)
        const Measure mu = Measure::from_weights(o3, {g.next_double(), g.next_double(), 0.0});
        const Measure nu = Measure::from_weights(o3, {g.next_double(), 0.0, 0.0});
        const std::vector<double> pm = pushforward_s(t, mu).weights();
        const std::vector<double> pn = pushforward_s(t, nu).weights();
        for (std::size_t y = 0; y < 3; ++y)
            if (pn[y] > 1e-15) CHECK(pm[y] > 0.0);
    }
}

TEST_CASE("parametric kernels compose lazily through P_*") {
    const Kernel shift = Kernel::parametric(u01, u01, [](const Point& x) {
        return ProbMeasure(Measure::of_density(
            Density::piecewise(SampleSpace::interval(0.0, 1.0), {0.0, std::max(x.x(), 0.01)}, {1.0})));
    });
    const Kernel noise = Kernel::parametric(u01, u01, [](const Point& x) {
        return ProbMeasure(Measure::of_density(Density::normal(
            SampleSpace::interval(0.0, 1.0), {x.x()}, {0.2})));
    });
    const McOptions mc{.particles = 200, .seed = 5};
    const Kernel lazy = compose(noise, shift, mc);
    CHECK_FALSE(lazy.is_finite_table());

    // functoriality within Monte Carlo error on an empirical probe
    ProbMeasure probe(Measure::dirac(u01, Point::real(0.8)));
    const Measure lhs = pushforward_p(lazy, probe, mc).get();
    const Measure rhs = pushforward_p(noise, pushforward_p(shift, probe, mc), mc).get();
    const Region a = Region::of_interval(0.0, 0.4);
    // 5 * MC standard error at 200 particles
    const double tol = 5.0 * 0.5 / std::sqrt(200.0);
    CHECK(std::fabs(lhs.region_mass(a) - rhs.region_mass(a)) <= tol);
}
