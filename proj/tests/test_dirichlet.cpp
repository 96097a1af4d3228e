#include "doctest.h"

#include <cmath>

#include "markov/markov.hpp"
#include "support.hpp"

using namespace markov;

namespace {

const SampleSpace u01 = SampleSpace::interval(0.0, 1.0);
const SampleSpace o2 = SampleSpace::omega(2);
const SampleSpace o3 = SampleSpace::omega(3);

DirichletParam alpha_2uniform() {
    return DirichletParam(Measure::of_density(Density::uniform(u01), 2.0));
}

MeasurableMap half_partition() {
    return MeasurableMap::box_partition(
        u01, o2, {Region::of_interval(0.0, 0.5), Region::of_interval(0.5, 1.0)});
}

}  // namespace

TEST_CASE("dirichlet density") {
    const DirichletParam flat(Measure::from_weights(o3, {1.0, 1.0, 1.0}));
    // Gamma(3)/Gamma(1)^3 = 2
    CHECK(dir_density(flat, {0.2, 0.3, 0.5}) == doctest::Approx(2.0).epsilon(1e-12));

    const DirichletParam a21(Measure::from_weights(o2, {2.0, 1.0}));
    // Gamma(3)/(Gamma(2)Gamma(1)) t = 2t
    CHECK(dir_density(a21, {0.3, 0.7}) == doctest::Approx(2.0 * 0.3).epsilon(1e-12));
    CHECK(dir_density(a21, {0.9, 0.1}) == doctest::Approx(2.0 * 0.9).epsilon(1e-12));

    // mass off the support face
    const DirichletParam face(Measure::from_weights(o3, {1.0, 0.0, 1.0}));
    CHECK(dir_density(face, {0.3, 0.2, 0.5}) == 0.0);
    CHECK(dir_density(face, {0.3, 0.0, 0.7}) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(dir_density(flat, {0.5, 0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("dirichlet sampling moments") {
    const DirichletParam beta11(Measure::from_weights(o2, {1.0, 1.0}));
    std::vector<double> first;
    for (const DirSample& s : dir_sample(beta11, 10000, SeedLineage(5))) first.push_back(s[0]);
    const MomentSummary m = moment_summary(first);
    CHECK(std::fabs(m.mean - 0.5) <= 3.0 * m.se_mean);

    // degenerate face: alpha = (5, 0)
    const DirichletParam degen(Measure::from_weights(o2, {5.0, 0.0}));
    for (const DirSample& s : dir_sample(degen, 50, SeedLineage(6))) {
        CHECK(s[0] == 1.0);
        CHECK(s[1] == 0.0);
    }

    // Beta(2,2) variance oracle: 4 / (16 * 5)
    const DirichletParam b22(Measure::from_weights(o2, {2.0, 2.0}));
    std::vector<double> x;
    for (const DirSample& s : dir_sample(b22, 10000, SeedLineage(7))) x.push_back(s[0]);
    const MomentSummary m2 = moment_summary(x);
    CHECK(std::fabs(m2.variance - 0.05) <= 3.0 * m2.se_variance);
}

TEST_CASE("every dirichlet sample sums to one on the support") {
    const DirichletParam alpha(Measure::from_weights(o3, {0.7, 2.0, 0.0}));
    for (const DirSample& s : dir_sample(alpha, 200, SeedLineage(8))) {
        CHECK(std::fabs(s[0] + s[1] + s[2] - 1.0) <= 1e-12);
        CHECK(s[2] == 0.0);
    }
}

TEST_CASE("aggregate sums cells and matches the Beta marginal in law") {
    const MeasurableMap collapse = MeasurableMap::label_table(o3, o2, {0, 0, 1});
    const DirSample s = {0.1, 0.2, 0.7};
    const DirSample agg = aggregate(s, collapse);
    CHECK(agg[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(agg[1] == doctest::Approx(0.7).epsilon(1e-14));

    const MeasurableMap full = MeasurableMap::label_table(o3, SampleSpace::omega(1), {0, 0, 0});
    CHECK(aggregate(s, full)[0] == doctest::Approx(1.0).epsilon(1e-14));

    // Dir(1,2,3) aggregated by {w1,w2}|{w3}: first coordinate ~ Beta(3,3)
    const DirichletParam alpha(Measure::from_weights(o3, {1.0, 2.0, 3.0}));
    std::vector<double> first;
    for (const DirSample& d : dir_sample(alpha, 10000, SeedLineage(99)))
        first.push_back(aggregate(d, collapse)[0]);
    CHECK(ks_test(first, NamedCdf::beta(3.0, 3.0)).pass_at_1pct);
}

TEST_CASE("dirichlet conjugate update") {
    const DirichletParam d11(Measure::from_weights(o2, {1.0, 1.0}));
    const DirichletParam once = dir_posterior(d11, Point::label(0));
    CHECK(once.finite_alpha()[0] == doctest::Approx(2.0));
    CHECK(once.finite_alpha()[1] == doctest::Approx(1.0));

    const DirichletParam twice = dir_posterior(once, Point::label(0));
    CHECK(twice.finite_alpha()[0] == doctest::Approx(3.0));

    // support grows when the observation lands on a zero cell
    const DirichletParam face(Measure::from_weights(o2, {1.0, 0.0}));
    CHECK(dir_posterior(face, Point::label(1)).finite_alpha()[1] == doctest::Approx(1.0));
}

TEST_CASE("stick weights and the telescoping identity") {
    const std::vector<double> w = stick_weights({0.5, 0.5, 0.5, 0.5});
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] == doctest::Approx(0.25));
    CHECK(w[2] == doctest::Approx(0.125));
    CHECK(w[3] == doctest::Approx(0.0625));

    for (const DPSample& s : stick_breaking_sample(alpha_2uniform(), {}, 100, SeedLineage(12))) {
        double sum = 0.0;
        for (const auto& [q, p] : s.atoms) sum += p;
        CHECK(std::fabs(sum + s.remainder - 1.0) <= 1e-12);
        CHECK(s.remainder <= 1e-10);
        CHECK(s.truncation == s.atoms.size());
    }
}

TEST_CASE("stick-breaking projections match the Beta cell law") {
    // P(A) ~ Beta(alpha(A), alpha(A^c)) = Beta(1,1) for A = [0, 0.5]
    std::vector<double> pa;
    for (const DPSample& s : stick_breaking_sample(alpha_2uniform(), {}, 10000, SeedLineage(13)))
        pa.push_back(dp_project(s, half_partition())[0]);
    const MomentSummary m = moment_summary(pa);
    CHECK(std::fabs(m.mean - 0.5) <= 3.0 * m.se_mean);
    CHECK(std::fabs(m.variance - 1.0 / 12.0) <= 3.0 * m.se_variance);
    CHECK(ks_test(pa, NamedCdf::beta(1.0, 1.0)).pass_at_1pct);
}

TEST_CASE("dp_project cell sums and remainder attribution") {
    DPSample s(normalize(alpha_2uniform().base).get());
    s.atoms = {{Point::real(0.2), 0.6}, {Point::real(0.8), 0.4}};
    s.remainder = 0.0;
    const DirSample cells = dp_project(s, half_partition());
    CHECK(cells[0] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(cells[1] == doctest::Approx(0.4).epsilon(1e-14));

    const MeasurableMap one_cell =
        MeasurableMap::box_partition(u01, SampleSpace::omega(1), {Region::of_interval(0.0, 1.0)});
    CHECK(dp_project(s, one_cell)[0] == doctest::Approx(1.0).epsilon(1e-14));

    // remainder attributed proportionally to the base cells
    s.remainder = 0.1;
    s.atoms = {{Point::real(0.2), 0.9}};
    const DirSample withrem = dp_project(s, half_partition());
    CHECK(withrem[0] == doctest::Approx(0.9 + 0.1 * 0.5).epsilon(1e-12));
    CHECK(withrem[1] == doctest::Approx(0.1 * 0.5).epsilon(1e-12));
    CHECK(withrem[0] + withrem[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dp posterior adds point masses") {
    const DirichletParam alpha = alpha_2uniform();
    const DirichletParam post = dp_posterior(alpha, {Point::real(0.3)});
    CHECK(post.base.atom_mass_at(Point::real(0.3)) == doctest::Approx(1.0));
    CHECK(post.concentration() == doctest::Approx(3.0));

    const DirichletParam same = dp_posterior(alpha, {});
    CHECK(same.concentration() == doctest::Approx(2.0));
}

TEST_CASE("conjugacy commutes with projection in law") {
    const DirichletParam alpha = alpha_2uniform();
    const Point datum = Point::real(0.3);
    const MeasurableMap half = half_partition();
    const std::size_t n = 10000;

    std::vector<DirSample> via_dp;
    for (const DPSample& s : stick_breaking_sample(dp_posterior(alpha, {datum}), {}, n, SeedLineage(21)))
        via_dp.push_back(dp_project(s, half));

    const Measure cells = pushforward_measure(half, alpha.base);
    const DirichletParam projected(add_measures(cells, Measure::dirac(o2, half.apply(datum))));
    const std::vector<DirSample> via_dir = dir_sample(projected, n, SeedLineage(22));

    const PartitionComparison cmp = markov::detail::compare_cell_samples(via_dp, via_dir);
    CHECK(cmp.pass);
}

TEST_CASE("naturality of the Dirichlet map") {
    // identity map: trivially equal in law
    const NaturalityReport id_rep = naturality_check(
        DirichletParam(Measure::from_weights(o3, {1.0, 2.0, 3.0})), MeasurableMap::identity(o3),
        4000, SeedLineage(31), {MeasurableMap::identity(o3)});
    CHECK(id_rep.all_pass);

    // euclidean-to-finite partition map
    const NaturalityReport part_rep = naturality_check(
        alpha_2uniform(), half_partition(), 4000, SeedLineage(32), {MeasurableMap::identity(o2)});
    CHECK(part_rep.all_pass);

    // finite collapse: both sides should look like Dir(3,3)
    const NaturalityReport fin_rep = naturality_check(
        DirichletParam(Measure::from_weights(o3, {1.0, 2.0, 3.0})),
        MeasurableMap::label_table(o3, o2, {0, 0, 1}), 4000, SeedLineage(33),
        {MeasurableMap::identity(o2)});
    CHECK(fin_rep.all_pass);
    REQUIRE_FALSE(fin_rep.partitions.empty());
    for (const CellComparison& c : fin_rep.partitions[0].cells) {
        CHECK(std::fabs(c.a.mean - 0.5) <= 3.0 * c.a.se_mean);  // Beta(3,3) mean
    }
}

TEST_CASE("aggregation property on random partitions") {
    RngStream g(SeedLineage(34));
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t k = 3 + static_cast<std::size_t>(g.next_double() * 3);
        const std::size_t l = 2;
        const SampleSpace ok = SampleSpace::omega(k);
        const SampleSpace ol = SampleSpace::omega(l);
        std::vector<double> a(k);
        for (double& v : a) v = 0.5 + 3.0 * g.next_double();
        std::vector<std::size_t> table(k);
        for (std::size_t i = 0; i < k; ++i) table[i] = i < l ? i : std::size_t(g.next_double() * l);
        const MeasurableMap part = MeasurableMap::label_table(ok, ol, table);

        const DirichletParam alpha(Measure::from_weights(ok, a));
        std::vector<DirSample> aggregated;
        for (const DirSample& s : dir_sample(alpha, 4000, SeedLineage(35).child(trial)))
            aggregated.push_back(aggregate(s, part));
        const Measure cells = pushforward_measure(part, alpha.base);
        const std::vector<DirSample> direct =
            dir_sample(DirichletParam(cells), 4000, SeedLineage(36).child(trial));
        CHECK(markov::detail::compare_cell_samples(aggregated, direct).pass);
    }
}

TEST_CASE("continuity probe along parameter paths") {
    std::vector<DirichletParam> path;
    for (int j = 1; j <= 256; j *= 2)
        path.push_back(DirichletParam(Measure::from_weights(o2, {1.0 + 1.0 / j, 1.0})));
    const DirichletParam limit(Measure::from_weights(o2, {1.0, 1.0}));
    const ContinuityReport rep = dir_continuity_probe(path, limit, 10000, SeedLineage(41));
    CHECK(rep.final_within);
    // the mean gap shrinks along the path: Beta mean formula a/(a+b)
    CHECK(rep.steps.back().mean_gap_max < rep.steps.front().mean_gap_max + 0.01);

    // constant path stays inside the band throughout
    const ContinuityReport flat = dir_continuity_probe(
        {limit, limit, limit}, limit, 5000, SeedLineage(42));
    for (const ContinuityStep& s : flat.steps) CHECK(s.within);

    // symmetric path (j, j): every member has first-coordinate mean 1/2
    for (int j : {1, 4, 16}) {
        const DirichletParam sym(Measure::from_weights(o2, {double(j), double(j)}));
        std::vector<double> first;
        for (const DirSample& s : dir_sample(sym, 5000, SeedLineage(43).child(j)))
            first.push_back(s[0]);
        const MomentSummary m = moment_summary(first);
        CHECK(std::fabs(m.mean - 0.5) <= 3.0 * m.se_mean);
    }
}

TEST_CASE("dp sample determinism and expectation identities") {
    const DirichletParam alpha = alpha_2uniform();
    const std::vector<DPSample> a = stick_breaking_sample(alpha, {}, 3, SeedLineage(44));
    const std::vector<DPSample> b = stick_breaking_sample(alpha, {}, 3, SeedLineage(44));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].atoms.size() == b[i].atoms.size());
        for (std::size_t k = 0; k < a[i].atoms.size(); ++k) {
            CHECK(a[i].atoms[k].first.x() == b[i].atoms[k].first.x());
            CHECK(a[i].atoms[k].second == b[i].atoms[k].second);
        }
    }

    // E[P(A)] = alpha(A)/alpha(X) and the Ferguson variance for A = [0, 0.3]
    std::vector<double> pa;
    for (const DPSample& s :
         stick_breaking_sample(alpha, {}, 10000, SeedLineage(45))) {
        double mass = 0.0;
        for (const auto& [q, p] : s.atoms)
            if (q.x() <= 0.3) mass += p;
        pa.push_back(mass);
    }
    const MomentSummary m = moment_summary(pa);
    CHECK(std::fabs(m.mean - 0.3) <= 3.0 * m.se_mean);
    CHECK(std::fabs(m.variance - 0.3 * 0.7 / 3.0) <= 3.0 * m.se_variance);
}
