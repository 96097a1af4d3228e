#ifndef MARKOV_MEASURE_HPP
#define MARKOV_MEASURE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "markov/density.hpp"
#include "markov/quadrature.hpp"
#include "markov/rng.hpp"
#include "markov/space.hpp"

namespace markov {

constexpr double kAtomMergeTol = 1e-12;
constexpr double kProbMassTol = 1e-12;

struct Atom {
    Point location;
    double weight = 0.0;
};

struct DensityComponent {
    Density density;
    double weight = 0.0;
};

/// Finite hybrid measure on a sample space: an atom list plus weighted named
/// density components. Signed weights are allowed; the probability-measure
/// and nonnegativity contracts are checked where operations require them.
/// Values are treated as immutable once shared.
class Measure {
public:
    explicit Measure(SampleSpace space) : space_(std::move(space)) {}

    static Measure zero(const SampleSpace& space) { return Measure(space); }

    static Measure dirac(const SampleSpace& space, const Point& at) {
        Measure m(space);
        m.add_atom(at, 1.0);
        return m;
    }

    /// Finite space, one weight per label.
    static Measure from_weights(const SampleSpace& space, const std::vector<double>& weights) {
        if (!space.is_finite() || weights.size() != space.size())
            throw std::invalid_argument("from_weights: one weight per label required");
        Measure m(space);
        for (std::size_t i = 0; i < weights.size(); ++i)
            if (weights[i] != 0.0) m.atoms_.push_back({Point::label(i), weights[i]});
        return m;
    }

    static Measure of_density(const Density& d, double weight = 1.0) {
        Measure m(d.space());
        m.add_density(d, weight);
        return m;
    }

    /// Bulk atom cloud; merges coincident locations via a lexicographic sort.
    static Measure from_points(const SampleSpace& space, std::vector<Point> points,
                               std::vector<double> weights) {
        if (points.size() != weights.size())
            throw std::invalid_argument("from_points: points/weights size mismatch");
        Measure m(space);
        if (space.is_finite()) {
            std::vector<double> dense(space.size(), 0.0);
            for (std::size_t i = 0; i < points.size(); ++i)
                dense[points[i].label_index()] += weights[i];
            return from_weights(space, dense);
        }
        std::vector<std::size_t> order(points.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return points[a].coords() < points[b].coords();
        });
        for (std::size_t k : order) {
            if (!space.contains(points[k]))
                throw std::invalid_argument("from_points: point outside space");
            if (!m.atoms_.empty() &&
                space.distance(m.atoms_.back().location, points[k]) <= kAtomMergeTol)
                m.atoms_.back().weight += weights[k];
            else
                m.atoms_.push_back({points[k], weights[k]});
        }
        return m;
    }

    Measure& add_atom(const Point& at, double weight) {
        if (!space_.contains(at)) throw std::invalid_argument("add_atom: location outside space");
        for (Atom& a : atoms_) {
            if (space_.distance(a.location, at) <= kAtomMergeTol) {
                a.weight += weight;
                return *this;
            }
        }
        atoms_.push_back({at, weight});
        return *this;
    }

    Measure& add_density(const Density& d, double weight) {
        if (d.space() != space_)
            throw std::invalid_argument("add_density: density lives on a different space");
        densities_.push_back({d, weight});
        return *this;
    }

    const SampleSpace& space() const { return space_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<DensityComponent>& densities() const { return densities_; }

    /// Set when the value was materialized by sampling rather than exactly.
    bool approximate = false;

    double total_mass() const {
        double m = 0.0;
        for (const Atom& a : atoms_) m += a.weight;
        for (const DensityComponent& d : densities_) m += d.weight;
        return m;
    }

    bool is_nonnegative() const {
        for (const Atom& a : atoms_)
            if (a.weight < 0.0) return false;
        for (const DensityComponent& d : densities_)
            if (d.weight < 0.0) return false;
        return true;
    }

    bool is_probability(double tol = kProbMassTol) const {
        return is_nonnegative() && std::fabs(total_mass() - 1.0) <= tol;
    }

    /// Dense weight vector on a finite space.
    std::vector<double> weights() const {
        if (!space_.is_finite()) throw std::logic_error("weights(): finite spaces only");
        std::vector<double> w(space_.size(), 0.0);
        for (const Atom& a : atoms_) w[a.location.label_index()] += a.weight;
        return w;
    }

    double region_mass(const Region& region) const {
        validate_region(region);
        double m = 0.0;
        for (const Atom& a : atoms_)
            if (region.contains(a.location)) m += a.weight;
        for (const DensityComponent& d : densities_) m += d.weight * d.density.region_mass(region);
        return m;
    }

    /// mu(D_r(x)) for the open metric ball; discrete metric on finite spaces.
    double ball(const Point& x, double r) const {
        if (!space_.contains(x)) throw std::invalid_argument("ball: point outside space");
        if (!(r > 0.0)) throw std::invalid_argument("ball: radius must be > 0");
        double m = 0.0;
        for (const Atom& a : atoms_)
            if (space_.distance(a.location, x) < r) m += a.weight;
        if (!densities_.empty()) {
            const auto& c = x.coords();
            for (const DensityComponent& d : densities_) m += d.weight * d.density.ball_mass(c, r);
        }
        return m;
    }

    /// Lebesgue density of the absolutely-continuous part at x.
    double pdf_value(const Point& x) const {
        if (densities_.empty()) return 0.0;
        double p = 0.0;
        for (const DensityComponent& d : densities_) p += d.weight * d.density.pdf(x.coords());
        return p;
    }

    /// Weight of the atom at x (within merge tolerance), 0 if none.
    double atom_mass_at(const Point& x) const {
        for (const Atom& a : atoms_)
            if (space_.distance(a.location, x) <= kAtomMergeTol) return a.weight;
        return 0.0;
    }

    Measure scaled(double c) const {
        Measure m(space_);
        m.atoms_ = atoms_;
        m.densities_ = densities_;
        m.approximate = approximate;
        for (Atom& a : m.atoms_) a.weight *= c;
        for (DensityComponent& d : m.densities_) d.weight *= c;
        return m;
    }

    /// Draw a point from the normalized measure.
    Point sample(RngStream& g) const {
        if (!is_nonnegative() || !(total_mass() > 0.0))
            throw std::invalid_argument("sample: needs a nonzero nonnegative measure");
        std::vector<double> ws;
        ws.reserve(atoms_.size() + densities_.size());
        for (const Atom& a : atoms_) ws.push_back(a.weight);
        for (const DensityComponent& d : densities_) ws.push_back(d.weight);
        const std::size_t k = draw_categorical(g, ws);
        if (k < atoms_.size()) return atoms_[k].location;
        return Point::vec(densities_[k - atoms_.size()].density.sample(g));
    }

    void validate_region(const Region& region) const {
        if (space_.is_finite()) {
            for (std::size_t l : region.labels)
                if (l >= space_.size())
                    throw std::invalid_argument("region label outside space");
            return;
        }
        for (const Box& b : region.boxes) {
            bool intersects = true;
            for (std::size_t i = 0; i < b.dim() && intersects; ++i)
                intersects = b.hi[i] >= space_.bounds().lo[i] && b.lo[i] <= space_.bounds().hi[i];
            if (b.dim() != space_.dim() || !intersects)
                throw std::invalid_argument("region box outside space");
        }
    }

private:
    SampleSpace space_;
    std::vector<Atom> atoms_;
    std::vector<DensityComponent> densities_;
};

/// Probability measure: a Measure validated to carry total mass 1.
class ProbMeasure {
public:
    explicit ProbMeasure(Measure m, double tol = kProbMassTol) : m_(std::move(m)) {
        if (!m_.is_nonnegative())
            throw std::invalid_argument("ProbMeasure: negative component weight");
        if (std::fabs(m_.total_mass() - 1.0) > tol)
            throw std::invalid_argument("ProbMeasure: total mass " +
                                        std::to_string(m_.total_mass()) + " != 1");
    }

    static ProbMeasure dirac(const SampleSpace& space, const Point& at) {
        return ProbMeasure(Measure::dirac(space, at));
    }

    const Measure& get() const { return m_; }
    operator const Measure&() const { return m_; }
    const SampleSpace& space() const { return m_.space(); }

private:
    Measure m_;
};

/// Simple (step) function: finite linear combination of region indicators.
class SimpleFunction {
public:
    SimpleFunction(SampleSpace space, std::vector<std::pair<Region, double>> terms)
        : space_(std::move(space)), terms_(std::move(terms)) {}

    static SimpleFunction indicator(const SampleSpace& space, Region region) {
        return SimpleFunction(space, {{std::move(region), 1.0}});
    }

    /// 1_X.
    static SimpleFunction one(const SampleSpace& space) {
        if (space.is_finite()) {
            std::vector<std::size_t> all(space.size());
            std::iota(all.begin(), all.end(), std::size_t{0});
            return indicator(space, Region::of_labels(std::move(all)));
        }
        return indicator(space, Region::of_boxes({space.bounds()}));
    }

    const SampleSpace& space() const { return space_; }
    const std::vector<std::pair<Region, double>>& terms() const { return terms_; }

    double operator()(const Point& p) const {
        double v = 0.0;
        for (const auto& [region, coeff] : terms_)
            if (region.contains(p)) v += coeff;
        return v;
    }

    double sup_abs_bound() const {
        double s = 0.0;
        for (const auto& [region, coeff] : terms_) s += std::fabs(coeff);
        return s;
    }

private:
    SampleSpace space_;
    std::vector<std::pair<Region, double>> terms_;
};

/// I_f(mu) = \int f dmu. Exact on atoms; density components via the closed
/// forms of the family registry.
inline double integrate(const SimpleFunction& f, const Measure& mu) {
    require_same_space(f.space(), mu.space(), "integrate");
    double v = 0.0;
    for (const Atom& a : mu.atoms()) v += a.weight * f(a.location);
    for (const DensityComponent& d : mu.densities())
        for (const auto& [region, coeff] : f.terms()) {
            mu.validate_region(region);
            v += d.weight * coeff * d.density.region_mass(region);
        }
    return v;
}

inline Measure add_measures(const Measure& a, const Measure& b) {
    require_same_space(a.space(), b.space(), "add_measures");
    Measure out = a;
    for (const Atom& at : b.atoms()) out.add_atom(at.location, at.weight);
    for (const DensityComponent& d : b.densities()) out.add_density(d.density, d.weight);
    out.approximate = a.approximate || b.approximate;
    return out;
}

/// mu(X)^{-1} mu; the retraction onto probability measures.
inline ProbMeasure normalize(const Measure& mu) {
    const double mass = mu.total_mass();
    if (!(mass > 0.0)) throw std::invalid_argument("normalize: total mass must be > 0");
    return ProbMeasure(mu.scaled(1.0 / mass), 1e-9);
}

inline double ball_probability(const Measure& mu, const Point& x, double r) {
    return mu.ball(x, r);
}

namespace detail {

inline double atoms_tv(const Measure& a, const Measure& b) {
    double tv = 0.0;
    std::vector<bool> used(b.atoms().size(), false);
    for (const Atom& pa : a.atoms()) {
        double diff = pa.weight;
        for (std::size_t j = 0; j < b.atoms().size(); ++j) {
            if (!used[j] && a.space().distance(pa.location, b.atoms()[j].location) <= kAtomMergeTol) {
                diff -= b.atoms()[j].weight;
                used[j] = true;
                break;
            }
        }
        tv += std::fabs(diff);
    }
    for (std::size_t j = 0; j < b.atoms().size(); ++j)
        if (!used[j]) tv += std::fabs(b.atoms()[j].weight);
    return tv;
}

inline bool same_density(const Density& x, const Density& y) {
    if (x.family_name() != y.family_name()) return false;
    if (x.family_name() == "normal")
        return x.normal_mean() == y.normal_mean() && x.normal_sd() == y.normal_sd();
    if (x.family_name() == "beta") return x.beta_a() == y.beta_a() && x.beta_b() == y.beta_b();
    if (x.family_name() == "piecewise")
        return x.piecewise_edges() == y.piecewise_edges() &&
               x.piecewise_values() == y.piecewise_values();
    return true;  // uniform over the same space
}

}  // namespace detail

/// Full total-variation norm ||a - b||_TV (not halved): sum of absolute
/// differences on a common refinement. Densities compare by matched closed
/// forms, falling back to 1-D quadrature of |f_a - f_b|.
inline double total_variation(const Measure& a, const Measure& b) {
    require_same_space(a.space(), b.space(), "total_variation");
    if (a.space().is_finite()) {
        const auto wa = a.weights();
        const auto wb = b.weights();
        double tv = 0.0;
        for (std::size_t i = 0; i < wa.size(); ++i) tv += std::fabs(wa[i] - wb[i]);
        return tv;
    }
    double tv = detail::atoms_tv(a, b);
    if (a.densities().empty() && b.densities().empty()) return tv;

    // net density weights after cancelling identical components
    std::vector<std::pair<const Density*, double>> net;
    for (const DensityComponent& d : a.densities()) net.emplace_back(&d.density, d.weight);
    for (const DensityComponent& d : b.densities()) {
        bool matched = false;
        for (auto& [den, w] : net) {
            if (detail::same_density(*den, d.density)) {
                w -= d.weight;
                matched = true;
                break;
            }
        }
        if (!matched) net.emplace_back(&d.density, -d.weight);
    }
    bool all_nonneg = true, all_nonpos = true;
    for (auto& [den, w] : net) {
        all_nonneg = all_nonneg && w >= 0.0;
        all_nonpos = all_nonpos && w <= 0.0;
    }
    if (all_nonneg || all_nonpos) {
        for (auto& [den, w] : net) tv += std::fabs(w);
        return tv;
    }
    if (a.space().dim() != 1)
        throw std::invalid_argument(
            "total_variation: incomparable density families without a grid fallback");
    const Box& box = a.space().bounds();
    tv += integrate_1d(
        [&](double x) {
            double f = 0.0;
            for (auto& [den, w] : net) f += w * den->pdf({x});
            return std::fabs(f);
        },
        box.lo[0], box.hi[0]);
    return tv;
}

/// Measurable map descriptor: finite label table, per-axis affine coordinate
/// formula, box partition into a finite space, or a general point rule.
class MeasurableMap {
    struct LabelTable {
        std::vector<std::size_t> table;
    };
    struct Affine {
        std::vector<double> scale, offset;
    };
    struct BoxPartition {
        std::vector<Region> cells;  // one region per codomain label
    };
    struct General {
        std::function<Point(const Point&)> fn;
    };

public:
    static MeasurableMap label_table(const SampleSpace& dom, const SampleSpace& cod,
                                     std::vector<std::size_t> table) {
        if (!dom.is_finite() || !cod.is_finite() || table.size() != dom.size())
            throw std::invalid_argument("label_table: one codomain label per domain label");
        for (std::size_t t : table)
            if (t >= cod.size()) throw std::invalid_argument("label_table: image outside codomain");
        return MeasurableMap(dom, cod, LabelTable{std::move(table)});
    }

    static MeasurableMap identity(const SampleSpace& s) {
        if (s.is_finite()) {
            std::vector<std::size_t> t(s.size());
            std::iota(t.begin(), t.end(), std::size_t{0});
            return label_table(s, s, std::move(t));
        }
        return affine(s, s, std::vector<double>(s.dim(), 1.0), std::vector<double>(s.dim(), 0.0));
    }

    static MeasurableMap affine(const SampleSpace& dom, const SampleSpace& cod,
                                std::vector<double> scale, std::vector<double> offset) {
        if (!dom.is_euclidean() || !cod.is_euclidean() || scale.size() != dom.dim() ||
            offset.size() != dom.dim() || cod.dim() != dom.dim())
            throw std::invalid_argument("affine: per-axis scale/offset with equal dims");
        return MeasurableMap(dom, cod, Affine{std::move(scale), std::move(offset)});
    }

    static MeasurableMap box_partition(const SampleSpace& dom, const SampleSpace& cod,
                                       std::vector<Region> cells) {
        if (!dom.is_euclidean() || !cod.is_finite() || cells.size() != cod.size())
            throw std::invalid_argument("box_partition: one cell region per codomain label");
        return MeasurableMap(dom, cod, BoxPartition{std::move(cells)});
    }

    static MeasurableMap general(const SampleSpace& dom, const SampleSpace& cod,
                                 std::function<Point(const Point&)> fn) {
        return MeasurableMap(dom, cod, General{std::move(fn)});
    }

    const SampleSpace& domain() const { return dom_; }
    const SampleSpace& codomain() const { return cod_; }

    Point apply(const Point& x) const {
        if (const auto* lt = std::get_if<LabelTable>(&rule_))
            return Point::label(lt->table[x.label_index()]);
        if (const auto* af = std::get_if<Affine>(&rule_)) {
            std::vector<double> y(x.coords());
            for (std::size_t i = 0; i < y.size(); ++i) y[i] = af->scale[i] * y[i] + af->offset[i];
            return Point::vec(std::move(y));
        }
        if (const auto* bp = std::get_if<BoxPartition>(&rule_)) {
            for (std::size_t i = 0; i < bp->cells.size(); ++i)
                if (bp->cells[i].contains(x)) return Point::label(i);
            throw std::invalid_argument("box_partition: point outside every cell");
        }
        return std::get<General>(rule_).fn(x);
    }

    bool is_affine() const { return std::holds_alternative<Affine>(rule_); }
    bool is_partition() const { return std::holds_alternative<BoxPartition>(rule_); }
    const std::vector<Region>& cells() const { return std::get<BoxPartition>(rule_).cells; }
    const std::vector<double>& affine_scale() const { return std::get<Affine>(rule_).scale; }
    const std::vector<double>& affine_offset() const { return std::get<Affine>(rule_).offset; }

private:
    using Rule = std::variant<LabelTable, Affine, BoxPartition, General>;
    MeasurableMap(SampleSpace dom, SampleSpace cod, Rule rule)
        : dom_(std::move(dom)), cod_(std::move(cod)), rule_(std::move(rule)) {}

    SampleSpace dom_;
    SampleSpace cod_;
    Rule rule_;
};

struct PushforwardOptions {
    std::size_t cloud_size = 100000;  // empirical fallback size
    std::uint64_t seed = 0;
};

/// M_*(kappa): atoms map exactly; densities map by the family's closed form
/// under affine maps, by cell masses under box partitions, and otherwise by a
/// seeded empirical cloud flagged as approximate.
inline Measure pushforward_measure(const MeasurableMap& kappa, const Measure& mu,
                                   const PushforwardOptions& opts = {}) {
    require_same_space(kappa.domain(), mu.space(), "pushforward_measure");
    const SampleSpace& cod = kappa.codomain();
    Measure out(cod);

    std::vector<Point> pts;
    std::vector<double> ws;
    for (const Atom& a : mu.atoms()) {
        Point y = kappa.apply(a.location);
        if (!cod.contains(y)) throw std::invalid_argument("pushforward: image outside codomain");
        pts.push_back(std::move(y));
        ws.push_back(a.weight);
    }

    bool approximate = mu.approximate;
    std::size_t component = 0;
    for (const DensityComponent& d : mu.densities()) {
        ++component;
        if (kappa.is_partition()) {
            for (std::size_t cell = 0; cell < kappa.cells().size(); ++cell) {
                const double m = d.density.region_mass(kappa.cells()[cell]);
                if (m != 0.0) {
                    pts.push_back(Point::label(cell));
                    ws.push_back(d.weight * m);
                }
            }
            continue;
        }
        if (kappa.is_affine()) {
            auto img = d.density.map_affine(kappa.affine_scale(), kappa.affine_offset(), cod);
            if (img) {
                out.add_density(*img, d.weight);
                continue;
            }
        }
        // sampled fallback for non-affine coordinate formulas
        RngStream g(SeedLineage(opts.seed).child(0x7066u).child(component));
        const double w = d.weight / static_cast<double>(opts.cloud_size);
        for (std::size_t k = 0; k < opts.cloud_size; ++k) {
            Point y = kappa.apply(Point::vec(d.density.sample(g)));
            if (!cod.contains(y))
                throw std::invalid_argument("pushforward: image outside codomain");
            pts.push_back(std::move(y));
            ws.push_back(w);
        }
        approximate = true;
    }

    Measure bulk = Measure::from_points(cod, std::move(pts), std::move(ws));
    for (const Atom& a : bulk.atoms()) out.add_atom(a.location, a.weight);
    out.approximate = approximate;
    return out;
}

}  // namespace markov

#endif
