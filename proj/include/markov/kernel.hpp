#ifndef MARKOV_KERNEL_HPP
#define MARKOV_KERNEL_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "markov/measure.hpp"
#include "markov/rng.hpp"
#include "markov/space.hpp"

namespace markov {

struct McOptions {
    std::size_t particles = 10000;
    std::uint64_t seed = 0;
};

namespace detail {

/// Weighted mixture of measures on a common space; dense accumulation on
/// finite spaces, bulk atom merge otherwise.
inline Measure mix(const SampleSpace& space, const std::vector<const Measure*>& parts,
                   const std::vector<double>& weights) {
    if (space.is_finite()) {
        std::vector<double> acc(space.size(), 0.0);
        for (std::size_t i = 0; i < parts.size(); ++i) {
            for (const Atom& a : parts[i]->atoms())
                acc[a.location.label_index()] += weights[i] * a.weight;
        }
        return Measure::from_weights(space, acc);
    }
    std::vector<Point> pts;
    std::vector<double> ws;
    Measure out(space);
    bool approximate = false;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        require_same_space(space, parts[i]->space(), "mixture");
        approximate = approximate || parts[i]->approximate;
        for (const Atom& a : parts[i]->atoms()) {
            pts.push_back(a.location);
            ws.push_back(weights[i] * a.weight);
        }
        for (const DensityComponent& d : parts[i]->densities())
            out.add_density(d.density, weights[i] * d.weight);
    }
    Measure bulk = Measure::from_points(space, std::move(pts), std::move(ws));
    for (const Atom& a : bulk.atoms()) out.add_atom(a.location, a.weight);
    out.approximate = approximate;
    return out;
}

}  // namespace detail

/// Probabilistic morphism X ~> Y: a row-stochastic table on finite domains,
/// or a point -> probability measure rule.
class Kernel {
public:
    static Kernel finite_table(const SampleSpace& dom, const SampleSpace& cod,
                               std::vector<ProbMeasure> rows) {
        if (!dom.is_finite() || rows.size() != dom.size())
            throw std::invalid_argument("finite_table: exactly one row per domain label");
        for (const ProbMeasure& r : rows) require_same_space(cod, r.space(), "finite_table row");
        Kernel k(dom, cod);
        k.rows_ = std::make_shared<std::vector<ProbMeasure>>(std::move(rows));
        return k;
    }

    /// Finite -> finite table from raw row weights.
    static Kernel from_rows(const SampleSpace& dom, const SampleSpace& cod,
                            const std::vector<std::vector<double>>& rows) {
        std::vector<ProbMeasure> ms;
        ms.reserve(rows.size());
        for (const auto& r : rows) ms.emplace_back(Measure::from_weights(cod, r));
        return finite_table(dom, cod, std::move(ms));
    }

    static Kernel parametric(const SampleSpace& dom, const SampleSpace& cod,
                             std::function<ProbMeasure(const Point&)> rule) {
        Kernel k(dom, cod);
        k.rule_ = std::move(rule);
        return k;
    }

    /// The Dirac unit delta: x |-> delta_x.
    static Kernel dirac(const SampleSpace& space) {
        if (space.is_finite()) {
            std::vector<ProbMeasure> rows;
            rows.reserve(space.size());
            for (std::size_t i = 0; i < space.size(); ++i)
                rows.push_back(ProbMeasure::dirac(space, Point::label(i)));
            Kernel k = finite_table(space, space, std::move(rows));
            k.deterministic_ = true;
            return k;
        }
        Kernel k = parametric(space, space,
                              [space](const Point& x) { return ProbMeasure::dirac(space, x); });
        k.deterministic_ = true;
        return k;
    }

    /// delta . kappa for a measurable map.
    static Kernel deterministic(const MeasurableMap& kappa) {
        const SampleSpace dom = kappa.domain(), cod = kappa.codomain();
        if (dom.is_finite()) {
            std::vector<ProbMeasure> rows;
            rows.reserve(dom.size());
            for (std::size_t i = 0; i < dom.size(); ++i)
                rows.push_back(ProbMeasure::dirac(cod, kappa.apply(Point::label(i))));
            Kernel k = finite_table(dom, cod, std::move(rows));
            k.deterministic_ = true;
            return k;
        }
        Kernel k = parametric(dom, cod, [kappa, cod](const Point& x) {
            return ProbMeasure::dirac(cod, kappa.apply(x));
        });
        k.deterministic_ = true;
        return k;
    }

    static Kernel constant(const SampleSpace& dom, ProbMeasure nu) {
        if (dom.is_finite())
            return finite_table(dom, nu.space(), std::vector<ProbMeasure>(dom.size(), nu));
        const SampleSpace cod = nu.space();
        return parametric(dom, cod, [nu](const Point&) { return nu; });
    }

    const SampleSpace& domain() const { return dom_; }
    const SampleSpace& codomain() const { return cod_; }
    bool is_finite_table() const { return rows_ != nullptr; }
    bool is_deterministic() const { return deterministic_; }
    const std::vector<ProbMeasure>& rows() const { return *rows_; }

    /// overline{T}(x).
    ProbMeasure at(const Point& x) const {
        if (rows_) return (*rows_)[x.label_index()];
        return rule_(x);
    }

private:
    Kernel(SampleSpace dom, SampleSpace cod) : dom_(std::move(dom)), cod_(std::move(cod)) {}

    SampleSpace dom_;
    SampleSpace cod_;
    std::shared_ptr<std::vector<ProbMeasure>> rows_;
    std::function<ProbMeasure(const Point&)> rule_;
    bool deterministic_ = false;
};

/// S_*(T): the linear extension of T to signed measures. Atom components mix
/// rows exactly; density components are pushed by a seeded particle cloud.
inline Measure pushforward_s(const Kernel& t, const Measure& mu, const McOptions& opts = {}) {
    require_same_space(t.domain(), mu.space(), "pushforward_s");
    std::vector<Measure> rows;
    std::vector<const Measure*> parts;
    std::vector<double> weights;
    rows.reserve(mu.atoms().size());
    for (const Atom& a : mu.atoms()) {
        rows.push_back(t.at(a.location).get());
        weights.push_back(a.weight);
    }
    std::size_t component = 0;
    for (const DensityComponent& d : mu.densities()) {
        RngStream g(SeedLineage(opts.seed).child(0x7073u).child(component++));
        const double w = d.weight / static_cast<double>(opts.particles);
        for (std::size_t k = 0; k < opts.particles; ++k) {
            rows.push_back(t.at(Point::vec(d.density.sample(g))).get());
            weights.push_back(w);
        }
    }
    for (const Measure& r : rows) parts.push_back(&r);
    Measure out = detail::mix(t.codomain(), parts, weights);
    out.approximate = out.approximate || !mu.densities().empty();
    return out;
}

/// P_*(T) = S_*(T) restricted to probability measures.
inline ProbMeasure pushforward_p(const Kernel& t, const ProbMeasure& mu, const McOptions& opts = {}) {
    return ProbMeasure(pushforward_s(t, mu.get(), opts), 1e-9);
}

/// T^*(f): the pullback of a simple function, queryable pointwise and
/// tabulated on finite domains.
class PointFunction {
public:
    PointFunction(std::function<double(const Point&)> eval, std::vector<double> table)
        : eval_(std::move(eval)), table_(std::move(table)) {}

    double operator()(const Point& x) const { return eval_(x); }
    const std::vector<double>& table() const { return table_; }

private:
    std::function<double(const Point&)> eval_;
    std::vector<double> table_;
};

inline PointFunction pullback(const Kernel& t, const SimpleFunction& f) {
    require_same_space(t.codomain(), f.space(), "pullback");
    const double bound = f.sup_abs_bound() + 1e-9;
    auto eval = [t, f, bound](const Point& x) {
        const double v = integrate(f, t.at(x).get());
        if (std::fabs(v) > bound)
            throw std::logic_error("pullback: |T*f| exceeded the sup-norm bound");
        return v;
    };
    std::vector<double> table;
    if (t.domain().is_finite()) {
        table.reserve(t.domain().size());
        for (std::size_t i = 0; i < t.domain().size(); ++i) table.push_back(eval(Point::label(i)));
    }
    return PointFunction(std::move(eval), std::move(table));
}

/// T2 . T1. Exact (stochastic-matrix product) when T1 is a finite table with
/// purely atomic rows; otherwise a lazy pair evaluated through P_* on demand.
inline Kernel compose(const Kernel& t2, const Kernel& t1, const McOptions& opts = {}) {
    require_same_space(t2.domain(), t1.codomain(), "compose");
    if (t1.is_finite_table()) {
        bool atomic = true;
        for (const ProbMeasure& r : t1.rows()) atomic = atomic && r.get().densities().empty();
        if (atomic) {
            std::vector<ProbMeasure> rows;
            rows.reserve(t1.rows().size());
            for (const ProbMeasure& r : t1.rows()) rows.push_back(pushforward_p(t2, r, opts));
            return Kernel::finite_table(t1.domain(), t2.codomain(), std::move(rows));
        }
    }
    return Kernel::parametric(t1.domain(), t2.codomain(), [t1, t2, opts](const Point& x) {
        return pushforward_p(t2, t1.at(x), opts);
    });
}

/// Element of P^2(X): a finite atom cloud over probability-measure values.
struct MeasureCloud {
    std::vector<std::pair<ProbMeasure, double>> atoms;

    const SampleSpace& base_space() const {
        if (atoms.empty()) throw std::invalid_argument("MeasureCloud: empty cloud");
        return atoms.front().first.space();
    }

    static MeasureCloud dirac(ProbMeasure mu) { return MeasureCloud{{{std::move(mu), 1.0}}}; }
};

/// ev_P: averages a measure on measures into its mixture.
inline ProbMeasure ev_p(const MeasureCloud& nu) {
    const SampleSpace& base = nu.base_space();
    std::vector<const Measure*> parts;
    std::vector<double> weights;
    for (const auto& [mu, w] : nu.atoms) {
        require_same_space(base, mu.space(), "ev_p");
        if (w < 0.0) throw std::invalid_argument("ev_p: negative cloud weight");
        parts.push_back(&mu.get());
        weights.push_back(w);
    }
    return ProbMeasure(detail::mix(base, parts, weights), 1e-9);
}

/// Element of P^3(X): an atom cloud over P^2(X) clouds.
struct CloudCloud {
    std::vector<std::pair<MeasureCloud, double>> atoms;
};

/// ev_P one level up: flattens P^3(X) -> P^2(X).
inline MeasureCloud ev_p(const CloudCloud& nu) {
    MeasureCloud out;
    for (const auto& [cloud, w] : nu.atoms)
        for (const auto& [mu, v] : cloud.atoms) out.atoms.emplace_back(mu, w * v);
    return out;
}

/// P_*(ev_P): applies ev_P atomwise, P^3(X) -> P^2(X).
inline MeasureCloud pushforward_ev(const CloudCloud& nu) {
    MeasureCloud out;
    for (const auto& [cloud, w] : nu.atoms) out.atoms.emplace_back(ev_p(cloud), w);
    return out;
}

/// Joint measure (Gamma_p)_* prior on domain x codomain, for an atomic prior.
struct Joint {
    SampleSpace theta_space;
    SampleSpace sample_space;
    std::vector<Point> theta_points;
    std::vector<double> weights;
    std::vector<Measure> conditionals;  // one probability measure per theta atom

    double mass(const Region& theta_region, const Region& x_region) const {
        double m = 0.0;
        for (std::size_t i = 0; i < theta_points.size(); ++i)
            if (theta_region.contains(theta_points[i]))
                m += weights[i] * conditionals[i].region_mass(x_region);
        return m;
    }

    Measure marginal_theta() const {
        Measure m(theta_space);
        for (std::size_t i = 0; i < theta_points.size(); ++i)
            m.add_atom(theta_points[i], weights[i]);
        return m;
    }

    Measure marginal_sample() const {
        std::vector<const Measure*> parts;
        for (const Measure& c : conditionals) parts.push_back(&c);
        return detail::mix(sample_space, parts, weights);
    }
};

inline Joint graph(const Kernel& p, const ProbMeasure& prior) {
    require_same_space(p.domain(), prior.space(), "graph");
    if (!prior.get().densities().empty())
        throw std::invalid_argument("graph: prior must be atomic (finite or particle cloud)");
    Joint j{p.domain(), p.codomain(), {}, {}, {}};
    for (const Atom& a : prior.get().atoms()) {
        j.theta_points.push_back(a.location);
        j.weights.push_back(a.weight);
        j.conditionals.push_back(p.at(a.location).get());
    }
    return j;
}

// ---------------------------------------------------------------------------
// Executable law suite
// ---------------------------------------------------------------------------

struct LawsOptions {
    std::uint64_t seed = 0;
    std::size_t max_size = 6;
    std::size_t trials = 100;
    double fault_injection = 0.0;  // test hook: perturbs one functoriality side
};

struct LawsReport {
    double functoriality = 0.0;   // P_*(T2 . T1) = P_*(T2) . P_*(T1)
    double associativity = 0.0;   // overline{T3 . (T2 . T1)} = overline{(T3 . T2) . T1}
    double ev_associativity = 0.0;  // ev_P . P_*(ev_P) = ev_P . ev_P
    double pinduce = 0.0;         // P_*(T) = ev_P . P_*(overline T)
    double unit_compose = 0.0;    // delta . T = T = T . delta
    double unit_ev = 0.0;         // ev_P . delta = Id

    double max_residual() const {
        return std::max({functoriality, associativity, ev_associativity, pinduce, unit_compose,
                         unit_ev});
    }
    bool all_within(double tol) const { return max_residual() <= tol; }
};

namespace detail {

inline std::vector<double> random_simplex(RngStream& g, std::size_t n) {
    std::vector<double> w(n);
    double s = 0.0;
    for (double& x : w) {
        x = -std::log(std::max(g.next_double(), 1e-300));
        s += x;
    }
    for (double& x : w) x /= s;
    return w;
}

inline Kernel random_kernel(RngStream& g, const SampleSpace& dom, const SampleSpace& cod) {
    std::vector<std::vector<double>> rows;
    rows.reserve(dom.size());
    for (std::size_t i = 0; i < dom.size(); ++i) rows.push_back(random_simplex(g, cod.size()));
    return Kernel::from_rows(dom, cod, rows);
}

inline ProbMeasure random_prob(RngStream& g, const SampleSpace& s) {
    return ProbMeasure(Measure::from_weights(s, random_simplex(g, s.size())));
}

inline double rows_tv(const Kernel& a, const Kernel& b) {
    double tv = 0.0;
    for (std::size_t i = 0; i < a.domain().size(); ++i)
        tv = std::max(tv, total_variation(a.at(Point::label(i)).get(), b.at(Point::label(i)).get()));
    return tv;
}

}  // namespace detail

/// Evaluates both sides of each monad/category law on random finite kernels
/// and probe measures; returns the max total-variation residual per law.
inline LawsReport laws_check(const LawsOptions& opts = {}) {
    LawsReport rep;
    SeedLineage root(opts.seed);
    for (std::size_t trial = 0; trial < opts.trials; ++trial) {
        RngStream g(root.child(trial));
        auto size = [&] { return 2 + static_cast<std::size_t>(g.next_double() * double(opts.max_size - 1)); };
        const SampleSpace x1 = SampleSpace::omega(size());
        const SampleSpace x2 = SampleSpace::omega(size());
        const SampleSpace x3 = SampleSpace::omega(size());
        const SampleSpace x4 = SampleSpace::omega(size());
        const Kernel t1 = detail::random_kernel(g, x1, x2);
        const Kernel t2 = detail::random_kernel(g, x2, x3);
        const Kernel t3 = detail::random_kernel(g, x3, x4);
        const ProbMeasure mu = detail::random_prob(g, x1);

        // functoriality on a probe measure
        {
            Measure lhs = pushforward_p(compose(t2, t1), mu).get();
            if (opts.fault_injection != 0.0) {
                lhs = add_measures(lhs, Measure::dirac(x3, Point::label(0)).scaled(opts.fault_injection));
            }
            const Measure rhs = pushforward_p(t2, pushforward_p(t1, mu)).get();
            rep.functoriality = std::max(rep.functoriality, total_variation(lhs, rhs));
        }

        // associativity of composition, row by row
        rep.associativity = std::max(
            rep.associativity,
            detail::rows_tv(compose(t3, compose(t2, t1)), compose(compose(t3, t2), t1)));

        // ev_P . P_*(ev_P) = ev_P . ev_P on a random element of P^3(X2)
        {
            CloudCloud nu3;
            const std::size_t outer = 2 + static_cast<std::size_t>(g.next_double() * 2);
            const auto outer_w = detail::random_simplex(g, outer);
            for (std::size_t j = 0; j < outer; ++j) {
                MeasureCloud cloud;
                const std::size_t inner = 2 + static_cast<std::size_t>(g.next_double() * 2);
                const auto inner_w = detail::random_simplex(g, inner);
                for (std::size_t i = 0; i < inner; ++i)
                    cloud.atoms.emplace_back(detail::random_prob(g, x2), inner_w[i]);
                nu3.atoms.emplace_back(std::move(cloud), outer_w[j]);
            }
            const Measure lhs = ev_p(pushforward_ev(nu3)).get();
            const Measure rhs = ev_p(ev_p(nu3)).get();
            rep.ev_associativity = std::max(rep.ev_associativity, total_variation(lhs, rhs));
        }

        // P_*(T) = ev_P . P_*(overline T)
        {
            MeasureCloud pushed;
            for (const Atom& a : mu.get().atoms())
                pushed.atoms.emplace_back(t1.at(a.location), a.weight);
            const Measure lhs = pushforward_p(t1, mu).get();
            const Measure rhs = ev_p(pushed).get();
            rep.pinduce = std::max(rep.pinduce, total_variation(lhs, rhs));
        }

        // unit laws
        rep.unit_compose =
            std::max({rep.unit_compose, detail::rows_tv(compose(Kernel::dirac(x2), t1), t1),
                      detail::rows_tv(compose(t1, Kernel::dirac(x1)), t1)});
        rep.unit_ev = std::max(
            rep.unit_ev, total_variation(ev_p(MeasureCloud::dirac(mu)).get(), mu.get()));
    }
    return rep;
}

}  // namespace markov

#endif
