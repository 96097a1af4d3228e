#ifndef MARKOV_STATMODEL_HPP
#define MARKOV_STATMODEL_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "markov/kernel.hpp"
#include "markov/measure.hpp"

namespace markov {

/// Statistical model: a sample space with a set of probability measures.
struct StatModel {
    SampleSpace space;
    std::vector<ProbMeasure> family;

    static StatModel from_family(const SampleSpace& space, std::vector<ProbMeasure> family) {
        for (const ProbMeasure& m : family) require_same_space(space, m.space(), "StatModel");
        return StatModel{space, std::move(family)};
    }

    /// Parametric family: materialize the kernel over a finite parameter space.
    static StatModel from_kernel(const Kernel& family_kernel) {
        if (!family_kernel.domain().is_finite())
            throw std::invalid_argument("StatModel::from_kernel: finite parameter space required");
        std::vector<ProbMeasure> fam;
        fam.reserve(family_kernel.domain().size());
        for (std::size_t i = 0; i < family_kernel.domain().size(); ++i)
            fam.push_back(family_kernel.at(Point::label(i)));
        return StatModel{family_kernel.codomain(), std::move(fam)};
    }
};

struct MorphismCheck {
    bool ok = false;
    double max_tv = 0.0;  // max distance from a pushed member to the dst family
};

/// T is a morphism (X, P_X) ~> (Y, P_Y) iff it pushes every family member
/// into the destination family.
inline MorphismCheck is_morphism(const Kernel& t, const StatModel& src, const StatModel& dst,
                                 double tol = 1e-9) {
    require_same_space(t.domain(), src.space, "is_morphism src");
    require_same_space(t.codomain(), dst.space, "is_morphism dst");
    MorphismCheck out;
    out.ok = true;
    for (const ProbMeasure& mu : src.family) {
        const Measure pushed = pushforward_p(t, mu).get();
        double best = std::numeric_limits<double>::infinity();
        for (const ProbMeasure& cand : dst.family)
            best = std::min(best, total_variation(pushed, cand.get()));
        out.max_tv = std::max(out.max_tv, best);
        out.ok = out.ok && best <= tol;
    }
    return out;
}

enum class SuffVerdict { sufficient, not_sufficient, inconclusive };

struct SufficiencyReport {
    SuffVerdict verdict = SuffVerdict::inconclusive;
    std::optional<Kernel> witness;  // conditional mapping p: Y ~> X when sufficient
    double max_deviation = 0.0;
};

/// Sufficiency of T for a finite model: the candidate conditional measure
/// d T_*(1_{x} mu) / d T_*(mu) must not depend on the family member mu
/// wherever T_*(mu) charges the cell. Cells with T_*(mu)(y) = 0 are skipped
/// for that mu.
inline SufficiencyReport check_sufficiency(const Kernel& t, const StatModel& model,
                                           double tol = 1e-9) {
    SufficiencyReport rep;
    if (!t.domain().is_finite() || !t.codomain().is_finite() || !t.is_finite_table() ||
        model.family.empty()) {
        rep.verdict = SuffVerdict::inconclusive;
        return rep;
    }
    require_same_space(t.domain(), model.space, "check_sufficiency");
    const std::size_t nx = t.domain().size();
    const std::size_t ny = t.codomain().size();

    std::vector<std::vector<double>> rows(nx);
    for (std::size_t x = 0; x < nx; ++x) rows[x] = t.at(Point::label(x)).get().weights();

    // ratio[y][x]: agreed conditional mass, NaN while undefined
    std::vector<std::vector<double>> ratio(ny, std::vector<double>(nx, std::nan("")));
    for (const ProbMeasure& mu : model.family) {
        const std::vector<double> w = mu.get().weights();
        std::vector<double> pushed(ny, 0.0);
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y) pushed[y] += w[x] * rows[x][y];
        for (std::size_t y = 0; y < ny; ++y) {
            if (pushed[y] <= 0.0) continue;
            for (std::size_t x = 0; x < nx; ++x) {
                const double r = w[x] * rows[x][y] / pushed[y];
                if (std::isnan(ratio[y][x]))
                    ratio[y][x] = r;
                else
                    rep.max_deviation = std::max(rep.max_deviation, std::fabs(ratio[y][x] - r));
            }
        }
    }
    if (rep.max_deviation > tol) {
        rep.verdict = SuffVerdict::not_sufficient;
        return rep;
    }
    rep.verdict = SuffVerdict::sufficient;

    // cells never charged by any member get an arbitrary (uniform) row
    std::vector<std::vector<double>> witness_rows(ny, std::vector<double>(nx, 1.0 / double(nx)));
    for (std::size_t y = 0; y < ny; ++y)
        if (!std::isnan(ratio[y][0])) witness_rows[y] = ratio[y];
    rep.witness = Kernel::from_rows(t.codomain(), t.domain(), witness_rows);
    return rep;
}

/// Factorization check for a finite family dominated by nu: the density
/// ratios between any two members must be constant on each fiber of kappa.
inline bool fisher_neyman_check(const StatModel& model, const Measure& nu,
                                const MeasurableMap& kappa, double tol = 1e-9) {
    if (!model.space.is_finite() || !kappa.codomain().is_finite())
        throw std::invalid_argument("fisher_neyman_check: finite spaces required");
    require_same_space(model.space, nu.space(), "fisher_neyman_check");
    require_same_space(model.space, kappa.domain(), "fisher_neyman_check");
    const std::size_t nx = model.space.size();
    const std::size_t ny = kappa.codomain().size();
    const std::vector<double> base = nu.weights();

    std::vector<std::vector<double>> dens;  // dens[member][x]
    for (const ProbMeasure& mu : model.family) {
        const std::vector<double> w = mu.get().weights();
        std::vector<double> f(nx, 0.0);
        for (std::size_t x = 0; x < nx; ++x) {
            if (base[x] > 0.0)
                f[x] = w[x] / base[x];
            else if (w[x] > 0.0)
                throw std::invalid_argument("fisher_neyman_check: family not dominated by nu");
        }
        dens.push_back(std::move(f));
    }

    std::vector<std::vector<std::size_t>> fibers(ny);
    for (std::size_t x = 0; x < nx; ++x)
        if (base[x] > 0.0) fibers[kappa.apply(Point::label(x)).label_index()].push_back(x);

    for (const auto& fiber : fibers) {
        if (fiber.empty()) continue;
        // support comparison first: each member charges all of the fiber's
        // common support or none of it
        std::vector<std::size_t> support;
        for (std::size_t x : fiber) {
            bool any = false;
            for (const auto& f : dens) any = any || f[x] > 0.0;
            if (any) support.push_back(x);
        }
        if (support.empty()) continue;
        std::size_t ref = dens.size();
        for (std::size_t m = 0; m < dens.size(); ++m) {
            std::size_t charged = 0;
            for (std::size_t x : support) charged += dens[m][x] > 0.0 ? 1 : 0;
            if (charged != 0 && charged != support.size()) return false;
            if (charged == support.size() && ref == dens.size()) ref = m;
        }
        if (ref == dens.size()) continue;
        for (std::size_t m = 0; m < dens.size(); ++m) {
            if (dens[m][support[0]] <= 0.0) continue;
            const double r0 = dens[m][support[0]] / dens[ref][support[0]];
            for (std::size_t x : support) {
                const double r = dens[m][x] / dens[ref][x];
                if (std::fabs(r - r0) > tol * std::max(1.0, std::fabs(r0))) return false;
            }
        }
    }
    return true;
}

/// (T2 . T1)_* must be the identity on mA's family and (T1 . T2)_* on mB's.
inline bool check_equivalence_pair(const Kernel& t1, const Kernel& t2, const StatModel& ma,
                                   const StatModel& mb, double tol = 1e-9) {
    for (const ProbMeasure& mu : ma.family)
        if (total_variation(pushforward_p(compose(t2, t1), mu).get(), mu.get()) > tol) return false;
    for (const ProbMeasure& mu : mb.family)
        if (total_variation(pushforward_p(compose(t1, t2), mu).get(), mu.get()) > tol) return false;
    return true;
}

/// Reproducing identity for a conditional mapping p of T:
/// p_*(1_B T_* mu)(A) = (T^*(1_B) mu)(A) over all singletons A, B and all
/// family members.
inline bool dual_sufficiency_check(const Kernel& t, const Kernel& p, const StatModel& model,
                                   double tol = 1e-9) {
    if (!t.domain().is_finite() || !t.codomain().is_finite())
        throw std::invalid_argument("dual_sufficiency_check: finite spaces required");
    require_same_space(t.domain(), model.space, "dual_sufficiency_check");
    require_same_space(p.domain(), t.codomain(), "dual_sufficiency_check");
    require_same_space(p.codomain(), t.domain(), "dual_sufficiency_check");
    const std::size_t nx = t.domain().size();
    const std::size_t ny = t.codomain().size();
    for (const ProbMeasure& mu : model.family) {
        const std::vector<double> w = mu.get().weights();
        std::vector<double> pushed(ny, 0.0);
        for (std::size_t x = 0; x < nx; ++x) {
            const std::vector<double> row = t.at(Point::label(x)).get().weights();
            for (std::size_t y = 0; y < ny; ++y) pushed[y] += w[x] * row[y];
        }
        for (std::size_t y = 0; y < ny; ++y) {
            const std::vector<double> prow = p.at(Point::label(y)).get().weights();
            const std::vector<double> trow_b = [&] {
                std::vector<double> v(nx);
                for (std::size_t x = 0; x < nx; ++x)
                    v[x] = t.at(Point::label(x)).get().weights()[y];
                return v;
            }();
            for (std::size_t x = 0; x < nx; ++x) {
                const double lhs = pushed[y] * prow[x];
                const double rhs = trow_b[x] * w[x];
                if (std::fabs(lhs - rhs) > tol) return false;
            }
        }
    }
    return true;
}

}  // namespace markov

#endif
