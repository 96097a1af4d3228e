#include "doctest.h"

#include <cmath>

#include "markov/markov.hpp"
#include "support.hpp"

using namespace markov;
using namespace testsupport;

namespace {

const SampleSpace x4 = bern2_space();

}  // namespace

TEST_CASE("is_morphism") {
    const StatModel model = bern2_model(x4, {0.3, 0.6});
    const MorphismCheck idc = is_morphism(Kernel::dirac(x4), model, model);
    CHECK(idc.ok);
    CHECK(idc.max_tv <= 1e-12);

    // definitional: the pushforward of each member is listed in dst
    const SampleSpace o2 = SampleSpace::omega(2);
    const Kernel first = Kernel::deterministic(first_statistic(x4));
    std::vector<ProbMeasure> pushed;
    for (const ProbMeasure& mu : model.family) pushed.push_back(pushforward_p(first, mu));
    const StatModel dst{first.codomain(), pushed};
    CHECK(is_morphism(first, model, dst).ok);

    // a constant kernel misses a model that lacks the constant
    const Kernel constant = Kernel::constant(x4, ProbMeasure(Measure::from_weights(o2, {1.0, 0.0})));
    const StatModel missing{o2, {ProbMeasure(Measure::from_weights(o2, {0.5, 0.5}))}};
    CHECK_FALSE(is_morphism(constant, model, missing).ok);
}

TEST_CASE("sum statistic is sufficient for the Bernoulli-pair family") {
    const StatModel model = bern2_model(x4, {0.3, 0.6});
    const Kernel t = Kernel::deterministic(sum_statistic(x4));
    const SufficiencyReport rep = check_sufficiency(t, model);
    REQUIRE(rep.verdict == SuffVerdict::sufficient);
    REQUIRE(rep.witness.has_value());
    // exact conditional, independent of theta by symmetry:
    // p((1,0) | sum = 1) = theta(1-theta) / (2 theta(1-theta)) = 1/2
    const std::vector<double> row_s1 = rep.witness->at(Point::label(1)).get().weights();
    CHECK(row_s1[2] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(row_s1[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(row_s1[0] == 0.0);
    CHECK(row_s1[3] == 0.0);
}

TEST_CASE("first-coordinate statistic is not sufficient") {
    const StatModel model = bern2_model(x4, {0.3, 0.6});
    const SufficiencyReport rep = check_sufficiency(Kernel::deterministic(first_statistic(x4)), model);
    CHECK(rep.verdict == SuffVerdict::not_sufficient);
    // the conditional of the second coordinate given the first is theta itself
    CHECK(rep.max_deviation == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("identity is sufficient with a dirac witness") {
    const StatModel model = bern2_model(x4, {0.2, 0.5, 0.9});
    const SufficiencyReport rep = check_sufficiency(Kernel::dirac(x4), model);
    REQUIRE(rep.verdict == SuffVerdict::sufficient);
    for (std::size_t y = 0; y < 4; ++y) {
        const std::vector<double> row = rep.witness->at(Point::label(y)).get().weights();
        CHECK(row[y] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("sufficiency on non-finite spaces is inconclusive") {
    const SampleSpace u01 = SampleSpace::interval(0.0, 1.0);
    const Kernel t = Kernel::parametric(u01, u01, [u01](const Point& x) {
        return ProbMeasure::dirac(u01, x);
    });
    const StatModel cont{u01, {ProbMeasure(Measure::of_density(Density::uniform(u01)))}};
    CHECK(check_sufficiency(t, cont).verdict == SuffVerdict::inconclusive);
}

TEST_CASE("fisher-neyman factorization agrees with the conditional check") {
    const StatModel model = bern2_model(x4, {0.3, 0.6});
    const Measure counting = Measure::from_weights(x4, {1.0, 1.0, 1.0, 1.0});
    CHECK(fisher_neyman_check(model, counting, sum_statistic(x4)));
    CHECK_FALSE(fisher_neyman_check(model, counting, first_statistic(x4)));

    // a single-member family factorizes vacuously
    const StatModel solo = bern2_model(x4, {0.3});
    CHECK(fisher_neyman_check(solo, counting, first_statistic(x4)));
}

TEST_CASE("fisher-neyman and conditional sufficiency agree on random families") {
    RngStream g(SeedLineage(59));
    const Measure counting = Measure::from_weights(x4, {1.0, 1.0, 1.0, 1.0});
    int sufficient_seen = 0, insufficient_seen = 0;
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<ProbMeasure> family;
        for (int m = 0; m < 2; ++m) {
            std::vector<double> w(4);
            double s = 0.0;
            for (double& v : w) {
                v = 0.05 + g.next_double();
                s += v;
            }
            for (double& v : w) v /= s;
            family.emplace_back(Measure::from_weights(x4, w));
        }
        const StatModel model = StatModel::from_family(x4, family);
        for (const MeasurableMap& kappa : {sum_statistic(x4), first_statistic(x4)}) {
            const bool fn = fisher_neyman_check(model, counting, kappa);
            const SuffVerdict v = check_sufficiency(Kernel::deterministic(kappa), model).verdict;
            CHECK(fn == (v == SuffVerdict::sufficient));
            (fn ? sufficient_seen : insufficient_seen)++;
        }
    }
    CHECK(insufficient_seen > 0);  // random families are almost never factorized
    // factorized families must land on the sufficient side
    RngStream g2(SeedLineage(60));
    for (int trial = 0; trial < 10; ++trial) {
        const SufficientPair pair = SufficientPair::random(g2);
        const std::size_t nx = pair.x.size();
        const Measure base = Measure::from_weights(pair.x, std::vector<double>(nx, 1.0));
        const bool fn = fisher_neyman_check(pair.model_x, base, pair.k1);
        const SuffVerdict v =
            check_sufficiency(Kernel::deterministic(pair.k1), pair.model_x).verdict;
        CHECK(fn);
        CHECK(v == SuffVerdict::sufficient);
        ++sufficient_seen;
    }
    CHECK(sufficient_seen > 0);
}

TEST_CASE("equivalence pairs") {
    const StatModel model = bern2_model(x4, {0.3, 0.6});
    CHECK(check_equivalence_pair(Kernel::dirac(x4), Kernel::dirac(x4), model, model));

    // a sufficient statistic and its witness implement an equivalence
    const Kernel t = Kernel::deterministic(sum_statistic(x4));
    const SufficiencyReport rep = check_sufficiency(t, model);
    REQUIRE(rep.witness.has_value());
    std::vector<ProbMeasure> pushed;
    for (const ProbMeasure& mu : model.family) pushed.push_back(pushforward_p(t, mu));
    const StatModel image{t.codomain(), pushed};
    CHECK(check_equivalence_pair(t, *rep.witness, model, image));

    // an arbitrary non-inverse pair is not an equivalence
    const Kernel junk = Kernel::constant(t.codomain(),
                                         ProbMeasure(Measure::from_weights(x4, {1, 0, 0, 0})));
    CHECK_FALSE(check_equivalence_pair(t, junk, model, image));
}

TEST_CASE("reproducing identity for conditional mappings") {
    const StatModel model = bern2_model(x4, {0.3, 0.6});
    const Kernel t = Kernel::deterministic(sum_statistic(x4));
    const SufficiencyReport rep = check_sufficiency(t, model);
    REQUIRE(rep.witness.has_value());
    CHECK(dual_sufficiency_check(t, *rep.witness, model));

    CHECK(dual_sufficiency_check(Kernel::dirac(x4), Kernel::dirac(x4), model));

    const Kernel constant = Kernel::constant(
        t.codomain(), ProbMeasure(Measure::from_weights(x4, {0.25, 0.25, 0.25, 0.25})));
    CHECK_FALSE(dual_sufficiency_check(t, constant, model));
}

TEST_CASE("composition of sufficient morphisms is sufficient") {
    RngStream g(SeedLineage(61));
    for (int trial = 0; trial < 20; ++trial) {
        const SufficientPair pair = SufficientPair::random(g);
        const Kernel t1 = Kernel::deterministic(pair.k1);
        const Kernel t2 = Kernel::deterministic(pair.k2);

        const SufficiencyReport r1 = check_sufficiency(t1, pair.model_x);
        REQUIRE(r1.verdict == SuffVerdict::sufficient);

        std::vector<ProbMeasure> pushed;
        for (const ProbMeasure& mu : pair.model_x.family) pushed.push_back(pushforward_p(t1, mu));
        const StatModel model_y{pair.y, pushed};
        const SufficiencyReport r2 = check_sufficiency(t2, model_y);
        REQUIRE(r2.verdict == SuffVerdict::sufficient);

        const SufficiencyReport rc = check_sufficiency(compose(t2, t1), pair.model_x);
        REQUIRE(rc.verdict == SuffVerdict::sufficient);

        // the composite witness is the composite of the witnesses
        const Kernel expected = compose(*r1.witness, *r2.witness);
        for (std::size_t z = 0; z < pair.z.size(); ++z) {
            const double tv = total_variation(rc.witness->at(Point::label(z)).get(),
                                              expected.at(Point::label(z)).get());
            CHECK(tv <= 1e-9);
        }
    }
}
