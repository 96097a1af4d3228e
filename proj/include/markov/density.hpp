#ifndef MARKOV_DENSITY_HPP
#define MARKOV_DENSITY_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "markov/quadrature.hpp"
#include "markov/rng.hpp"
#include "markov/space.hpp"
#include "markov/special.hpp"

namespace markov {

/// Named density family over a euclidean sample space, normalized so that it
/// integrates to 1 over the space. Shipped families: uniform over the box,
/// axis-independent normal truncated to the box, beta(a, b) on [0, 1], and a
/// 1-D piecewise-constant grid.
class Density {
    struct Uniform {};
    struct Normal {
        std::vector<double> mean;
        std::vector<double> sd;
    };
    struct Beta {
        double a, b;
    };
    struct Piecewise {
        std::vector<double> edges;
        std::vector<double> values;  // normalized at construction
    };

public:
    static Density uniform(const SampleSpace& space) {
        require_euclidean(space);
        return Density(space, Uniform{});
    }

    static Density normal(const SampleSpace& space, std::vector<double> mean,
                          std::vector<double> sd) {
        require_euclidean(space);
        if (mean.size() != space.dim() || sd.size() != space.dim())
            throw std::invalid_argument("normal density: mean/sd must match space dim");
        for (double s : sd)
            if (!(s > 0.0)) throw std::invalid_argument("normal density: sd must be > 0");
        return Density(space, Normal{std::move(mean), std::move(sd)});
    }

    static Density beta(const SampleSpace& space, double a, double b) {
        require_euclidean(space);
        if (space.dim() != 1 || space.bounds().lo[0] > 0.0 || space.bounds().hi[0] < 1.0)
            throw std::invalid_argument("beta density requires a 1-D space containing [0,1]");
        if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta density: a, b must be > 0");
        return Density(space, Beta{a, b});
    }

    static Density piecewise(const SampleSpace& space, std::vector<double> edges,
                             std::vector<double> values) {
        require_euclidean(space);
        if (space.dim() != 1) throw std::invalid_argument("piecewise density is 1-D");
        if (edges.size() < 2 || values.size() + 1 != edges.size())
            throw std::invalid_argument("piecewise density: need edges = values + 1");
        double mass = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(edges[i] < edges[i + 1]))
                throw std::invalid_argument("piecewise density: edges must increase");
            if (values[i] < 0.0) throw std::invalid_argument("piecewise density: negative value");
            mass += values[i] * (edges[i + 1] - edges[i]);
        }
        if (!(mass > 0.0)) throw std::invalid_argument("piecewise density: zero mass");
        for (double& v : values) v /= mass;
        return Density(space, Piecewise{std::move(edges), std::move(values)});
    }

    const SampleSpace& space() const { return space_; }

    std::string family_name() const {
        if (std::holds_alternative<Uniform>(fam_)) return "uniform";
        if (std::holds_alternative<Normal>(fam_)) return "normal";
        if (std::holds_alternative<Beta>(fam_)) return "beta";
        return "piecewise";
    }

    const std::vector<double>& normal_mean() const { return std::get<Normal>(fam_).mean; }
    const std::vector<double>& normal_sd() const { return std::get<Normal>(fam_).sd; }
    double beta_a() const { return std::get<Beta>(fam_).a; }
    double beta_b() const { return std::get<Beta>(fam_).b; }
    const std::vector<double>& piecewise_edges() const { return std::get<Piecewise>(fam_).edges; }
    const std::vector<double>& piecewise_values() const { return std::get<Piecewise>(fam_).values; }

    double pdf(const std::vector<double>& x) const {
        if (!space_.bounds().contains(x)) return 0.0;
        if (const auto* u = std::get_if<Uniform>(&fam_)) {
            (void)u;
            return 1.0 / space_.bounds().volume();
        }
        if (const auto* n = std::get_if<Normal>(&fam_)) {
            double p = 1.0;
            for (std::size_t i = 0; i < x.size(); ++i)
                p *= normal_pdf((x[i] - n->mean[i]) / n->sd[i]) / (n->sd[i] * axis_z(*n, i));
            return p;
        }
        if (const auto* b = std::get_if<Beta>(&fam_)) return beta_pdf(b->a, b->b, x[0]);
        const auto& pw = std::get<Piecewise>(fam_);
        if (x[0] < pw.edges.front() || x[0] > pw.edges.back()) return 0.0;
        for (std::size_t i = 0; i + 1 < pw.edges.size(); ++i)
            if (x[0] <= pw.edges[i + 1]) return pw.values[i];
        return 0.0;
    }

    /// Mass of [a, b] per axis intersected with the support; exact for every
    /// shipped family.
    double interval_mass(std::size_t axis, double a, double b) const {
        const Box& box = space_.bounds();
        a = std::max(a, box.lo[axis]);
        b = std::min(b, box.hi[axis]);
        if (a >= b) return 0.0;
        if (std::holds_alternative<Uniform>(fam_))
            return (b - a) / (box.hi[axis] - box.lo[axis]);
        if (const auto* n = std::get_if<Normal>(&fam_)) {
            const double z = axis_z(*n, axis);
            return (normal_cdf((b - n->mean[axis]) / n->sd[axis]) -
                    normal_cdf((a - n->mean[axis]) / n->sd[axis])) /
                   z;
        }
        if (const auto* bt = std::get_if<Beta>(&fam_))
            return incomplete_beta(bt->a, bt->b, std::clamp(b, 0.0, 1.0)) -
                   incomplete_beta(bt->a, bt->b, std::clamp(a, 0.0, 1.0));
        const auto& pw = std::get<Piecewise>(fam_);
        double m = 0.0;
        for (std::size_t i = 0; i + 1 < pw.edges.size(); ++i) {
            const double lo = std::max(a, pw.edges[i]);
            const double hi = std::min(b, pw.edges[i + 1]);
            if (lo < hi) m += pw.values[i] * (hi - lo);
        }
        return m;
    }

    double box_mass(const Box& b) const {
        if (space_.dim() == 1) return interval_mass(0, b.lo[0], b.hi[0]);
        // axis-independent families only in d >= 2
        double m = 1.0;
        for (std::size_t i = 0; i < space_.dim(); ++i) m *= interval_mass(i, b.lo[i], b.hi[i]);
        return m;
    }

    double region_mass(const Region& region) const {
        if (space_.dim() == 1) {
            double m = 0.0;
            for (auto [lo, hi] : region.merged_intervals()) m += interval_mass(0, lo, hi);
            return m;
        }
        double m = 0.0;
        for (const Box& b : region.boxes) m += box_mass(b);
        return m;
    }

    /// Mass of the open ball D_r(center); exact in 1-D, quasi-Monte Carlo in
    /// higher dimension.
    double ball_mass(const std::vector<double>& center, double r) const {
        if (space_.dim() == 1) return interval_mass(0, center[0] - r, center[0] + r);
        Box cube;
        cube.lo.resize(space_.dim());
        cube.hi.resize(space_.dim());
        for (std::size_t i = 0; i < space_.dim(); ++i) {
            cube.lo[i] = std::max(center[i] - r, space_.bounds().lo[i]);
            cube.hi[i] = std::min(center[i] + r, space_.bounds().hi[i]);
            if (cube.lo[i] >= cube.hi[i]) return 0.0;
        }
        return integrate_qmc(
            [&](const std::vector<double>& x) {
                double s = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i)
                    s += (x[i] - center[i]) * (x[i] - center[i]);
                return s < r * r ? pdf(x) : 0.0;
            },
            cube);
    }

    std::vector<double> sample(RngStream& g) const {
        const Box& box = space_.bounds();
        std::vector<double> x(space_.dim());
        if (std::holds_alternative<Uniform>(fam_)) {
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * g.next_double();
            return x;
        }
        if (const auto* n = std::get_if<Normal>(&fam_)) {
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = truncated_normal(g, *n, i);
            return x;
        }
        if (const auto* b = std::get_if<Beta>(&fam_)) {
            x[0] = draw_beta(g, b->a, b->b);
            return x;
        }
        const auto& pw = std::get<Piecewise>(fam_);
        std::vector<double> bin_mass(pw.values.size());
        for (std::size_t i = 0; i < pw.values.size(); ++i)
            bin_mass[i] = pw.values[i] * (pw.edges[i + 1] - pw.edges[i]);
        const std::size_t i = draw_categorical(g, bin_mass);
        x[0] = pw.edges[i] + (pw.edges[i + 1] - pw.edges[i]) * g.next_double();
        return x;
    }

    /// Closed-form image under a per-axis affine map y_i = scale_i * x_i +
    /// offset_i, when the family is stable under it.
    std::optional<Density> map_affine(const std::vector<double>& scale,
                                      const std::vector<double>& offset,
                                      const SampleSpace& image) const {
        if (std::holds_alternative<Uniform>(fam_)) return Density::uniform(image);
        if (const auto* n = std::get_if<Normal>(&fam_)) {
            std::vector<double> mean(n->mean.size()), sd(n->sd.size());
            for (std::size_t i = 0; i < mean.size(); ++i) {
                mean[i] = scale[i] * n->mean[i] + offset[i];
                sd[i] = std::fabs(scale[i]) * n->sd[i];
            }
            return Density::normal(image, std::move(mean), std::move(sd));
        }
        if (const auto* pw = std::get_if<Piecewise>(&fam_)) {
            std::vector<double> edges(pw->edges.size()), values(pw->values.size());
            for (std::size_t i = 0; i < edges.size(); ++i)
                edges[i] = scale[0] * pw->edges[i] + offset[0];
            for (std::size_t i = 0; i < values.size(); ++i) values[i] = pw->values[i];
            if (scale[0] < 0.0) {
                std::reverse(edges.begin(), edges.end());
                std::reverse(values.begin(), values.end());
            }
            return Density::piecewise(image, std::move(edges), std::move(values));
        }
        // identity keeps a beta a beta; anything else leaves the registry
        if (scale[0] == 1.0 && offset[0] == 0.0) {
            const auto& b = std::get<Beta>(fam_);
            return Density::beta(image, b.a, b.b);
        }
        return std::nullopt;
    }

private:
    using Family = std::variant<Uniform, Normal, Beta, Piecewise>;

    Density(SampleSpace space, Family fam) : space_(std::move(space)), fam_(std::move(fam)) {}

    static void require_euclidean(const SampleSpace& s) {
        if (!s.is_euclidean())
            throw std::invalid_argument("density families live on euclidean spaces");
    }

    double axis_z(const Normal& n, std::size_t axis) const {
        const Box& box = space_.bounds();
        return normal_cdf((box.hi[axis] - n.mean[axis]) / n.sd[axis]) -
               normal_cdf((box.lo[axis] - n.mean[axis]) / n.sd[axis]);
    }

    double truncated_normal(RngStream& g, const Normal& n, std::size_t axis) const {
        const Box& box = space_.bounds();
        for (int tries = 0; tries < 10000; ++tries) {
            const double v = draw_normal(g, n.mean[axis], n.sd[axis]);
            if (v >= box.lo[axis] && v <= box.hi[axis]) return v;
        }
        // nearly-degenerate truncation: invert the cdf by bisection
        const double zlo = normal_cdf((box.lo[axis] - n.mean[axis]) / n.sd[axis]);
        const double zhi = normal_cdf((box.hi[axis] - n.mean[axis]) / n.sd[axis]);
        const double target = zlo + (zhi - zlo) * g.next_double();
        double lo = box.lo[axis], hi = box.hi[axis];
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (normal_cdf((mid - n.mean[axis]) / n.sd[axis]) < target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    SampleSpace space_;
    Family fam_;
};

}  // namespace markov

#endif
