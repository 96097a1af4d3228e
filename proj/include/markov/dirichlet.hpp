#ifndef MARKOV_DIRICHLET_HPP
#define MARKOV_DIRICHLET_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "markov/measure.hpp"
#include "markov/rng.hpp"
#include "markov/special.hpp"
#include "markov/stats.hpp"

namespace markov {

/// Parameter of a Dirichlet distribution / measure: a nonzero nonnegative
/// base measure alpha.
struct DirichletParam {
    Measure base;

    explicit DirichletParam(Measure alpha) : base(std::move(alpha)) {
        if (!base.is_nonnegative() || !(base.total_mass() > 0.0))
            throw std::invalid_argument("DirichletParam: base must be nonnegative with mass > 0");
    }

    double concentration() const { return base.total_mass(); }

    /// Dense alpha vector on a finite space.
    std::vector<double> finite_alpha() const { return base.weights(); }
};

/// Point of the simplex: one coordinate per label.
using DirSample = std::vector<double>;

/// Lebesgue density of Dir(alpha) on the face spanned by the support of
/// alpha; zero off the face.
inline double dir_density(const DirichletParam& alpha, const DirSample& x) {
    const std::vector<double> a = alpha.finite_alpha();
    if (x.size() != a.size()) throw std::invalid_argument("dir_density: dimension mismatch");
    double sum = 0.0;
    for (double xi : x) {
        if (xi < 0.0) throw std::invalid_argument("dir_density: negative coordinate");
        sum += xi;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw std::invalid_argument("dir_density: x not in simplex");
    double log_norm = 0.0, log_kernel = 0.0, total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) {
            if (x[i] != 0.0) return 0.0;  // mass off the face
            continue;
        }
        total += a[i];
        log_norm -= log_gamma(a[i]);
        if (a[i] != 1.0)
            log_kernel += (a[i] - 1.0) * std::log(x[i]);
    }
    log_norm += log_gamma(total);
    return std::exp(log_norm + log_kernel);
}

/// i.i.d. Dir(alpha) draws by normalized Gamma variates; coordinates with
/// zero alpha stay exactly zero.
inline std::vector<DirSample> dir_sample(const DirichletParam& alpha, std::size_t n,
                                         const SeedLineage& seed) {
    const std::vector<double> a = alpha.finite_alpha();
    std::vector<DirSample> out;
    out.reserve(n);
    for (std::size_t d = 0; d < n; ++d) {
        RngStream g(seed.child(d));
        DirSample x(a.size(), 0.0);
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] > 0.0) {
                x[i] = draw_gamma(g, a[i]);
                s += x[i];
            }
        }
        for (double& xi : x) xi /= s;
        out.push_back(std::move(x));
    }
    return out;
}

/// Sums simplex coordinates over the cells of a finite partition map.
inline DirSample aggregate(const DirSample& sample, const MeasurableMap& partition) {
    if (!partition.domain().is_finite() || !partition.codomain().is_finite())
        throw std::invalid_argument("aggregate: finite partition map required");
    if (sample.size() != partition.domain().size())
        throw std::invalid_argument("aggregate: sample/domain size mismatch");
    DirSample out(partition.codomain().size(), 0.0);
    for (std::size_t i = 0; i < sample.size(); ++i)
        out[partition.apply(Point::label(i)).label_index()] += sample[i];
    return out;
}

/// Conjugate update on a finite space: alpha + delta_x.
inline DirichletParam dir_posterior(const DirichletParam& alpha, const Point& x) {
    return DirichletParam(add_measures(alpha.base, Measure::dirac(alpha.base.space(), x)));
}

struct StickConfig {
    std::optional<std::size_t> max_atoms;
    double remainder_tol = 1e-10;
};

/// Truncated draw from the Dirichlet measure D(alpha): atom locations q_i
/// from the normalized base, stick fractions theta_i ~ Beta(1, alpha(X)),
/// weights p_n = theta_n prod_{i<n}(1 - theta_i). The undrawn remainder is
/// recorded, never silently renormalized.
struct DPSample {
    std::vector<std::pair<Point, double>> atoms;  // (q_i, p_i) in draw order
    double remainder = 0.0;                       // prod (1 - theta_i)
    std::size_t truncation = 0;                   // atoms drawn
    std::vector<std::uint64_t> seed_path;
    Measure base;  // normalize(alpha), used for remainder attribution

    explicit DPSample(Measure base_measure) : base(std::move(base_measure)) {}

    /// Atoms only; total mass 1 - remainder.
    Measure atom_measure() const {
        std::vector<Point> pts;
        std::vector<double> ws;
        pts.reserve(atoms.size());
        for (const auto& [q, p] : atoms) {
            pts.push_back(q);
            ws.push_back(p);
        }
        return Measure::from_points(base.space(), std::move(pts), std::move(ws));
    }

    /// Atoms plus the remainder attributed to the normalized base.
    ProbMeasure to_prob_measure() const {
        Measure m = add_measures(atom_measure(), base.scaled(remainder));
        return ProbMeasure(std::move(m), 1e-9);
    }

    /// Pushes the draw through a measurable map: atoms map exactly, the base
    /// reference maps through the measure pushforward.
    DPSample push(const MeasurableMap& kappa) const {
        DPSample out(pushforward_measure(kappa, base));
        out.remainder = remainder;
        out.truncation = truncation;
        out.seed_path = seed_path;
        out.atoms.reserve(atoms.size());
        for (const auto& [q, p] : atoms) out.atoms.emplace_back(kappa.apply(q), p);
        return out;
    }
};

/// Weights of the stick-breaking product formula for given stick fractions.
inline std::vector<double> stick_weights(const std::vector<double>& thetas) {
    std::vector<double> p(thetas.size());
    double rem = 1.0;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        p[i] = thetas[i] * rem;
        rem *= 1.0 - thetas[i];
    }
    return p;
}

inline std::vector<DPSample> stick_breaking_sample(const DirichletParam& alpha,
                                                   const StickConfig& config, std::size_t n,
                                                   const SeedLineage& seed) {
    const double mass = alpha.concentration();
    const Measure base = normalize(alpha.base).get();
    const std::size_t cap = config.max_atoms.value_or(100000);
    std::vector<DPSample> out;
    out.reserve(n);
    for (std::size_t d = 0; d < n; ++d) {
        const SeedLineage lineage = seed.child(d);
        RngStream g(lineage);
        DPSample s(base);
        s.seed_path = lineage.path();
        double rem = 1.0;
        while (s.atoms.size() < cap && rem >= config.remainder_tol) {
            const double theta = draw_beta(g, 1.0, mass);
            const Point q = base.sample(g);
            s.atoms.emplace_back(q, theta * rem);
            rem *= 1.0 - theta;
        }
        s.remainder = rem;
        s.truncation = s.atoms.size();
        out.push_back(std::move(s));
    }
    return out;
}

/// Cell masses of a draw under a finite partition; the truncation remainder
/// is attributed to cells proportionally to the normalized base.
inline DirSample dp_project(const DPSample& sample, const MeasurableMap& partition) {
    if (!partition.codomain().is_finite())
        throw std::invalid_argument("dp_project: finite codomain required");
    DirSample cells(partition.codomain().size(), 0.0);
    for (const auto& [q, p] : sample.atoms)
        cells[partition.apply(q).label_index()] += p;
    if (sample.remainder > 0.0) {
        const std::vector<double> base_cells =
            pushforward_measure(partition, sample.base).weights();
        for (std::size_t j = 0; j < cells.size(); ++j)
            cells[j] += sample.remainder * base_cells[j];
    }
    return cells;
}

/// Conjugate update of the Dirichlet measure: alpha + sum_i delta_{x_i}.
inline DirichletParam dp_posterior(const DirichletParam& alpha, const std::vector<Point>& data) {
    Measure b = alpha.base;
    for (const Point& x : data) b = add_measures(b, Measure::dirac(alpha.base.space(), x));
    return DirichletParam(std::move(b));
}

// ---------------------------------------------------------------------------
// Distribution-equality verification reports
// ---------------------------------------------------------------------------

struct CellComparison {
    std::size_t cell = 0;
    MomentSummary a;
    MomentSummary b;
    double mean_gap = 0.0, mean_tol = 0.0;
    double var_gap = 0.0, var_tol = 0.0;
    double ks_scaled = 0.0;
    bool pass = false;
};

struct PartitionComparison {
    std::vector<CellComparison> cells;
    bool pass = true;
};

struct NaturalityReport {
    std::vector<PartitionComparison> partitions;
    bool all_pass = true;
};

namespace detail {

/// First-two-moments at 3 SE plus two-sample KS at 1% per cell.
inline PartitionComparison compare_cell_samples(const std::vector<DirSample>& a,
                                                const std::vector<DirSample>& b) {
    PartitionComparison out;
    const std::size_t cells = a.front().size();
    for (std::size_t c = 0; c < cells; ++c) {
        std::vector<double> xa, xb;
        xa.reserve(a.size());
        xb.reserve(b.size());
        for (const DirSample& s : a) xa.push_back(s[c]);
        for (const DirSample& s : b) xb.push_back(s[c]);
        CellComparison cc;
        cc.cell = c;
        cc.a = moment_summary(xa);
        cc.b = moment_summary(xb);
        cc.mean_gap = std::fabs(cc.a.mean - cc.b.mean);
        cc.mean_tol = 3.0 * std::sqrt(cc.a.se_mean * cc.a.se_mean + cc.b.se_mean * cc.b.se_mean);
        cc.var_gap = std::fabs(cc.a.variance - cc.b.variance);
        cc.var_tol =
            3.0 * std::sqrt(cc.a.se_variance * cc.a.se_variance + cc.b.se_variance * cc.b.se_variance);
        bool ks_pass = true;
        if (cc.a.variance > 0.0 || cc.b.variance > 0.0) {
            const KsResult ks = ks_two_sample(xa, xb);
            cc.ks_scaled = ks.scaled;
            ks_pass = ks.pass_at_1pct;
        }
        cc.pass = cc.mean_gap <= cc.mean_tol && cc.var_gap <= cc.var_tol && ks_pass;
        out.pass = out.pass && cc.pass;
        out.cells.push_back(cc);
    }
    return out;
}

}  // namespace detail

/// Naturality of the Dirichlet map: pushing D(alpha) forward along kappa
/// must agree in law with D(kappa_* alpha). Compares projected cell-mass
/// distributions for each supplied partition of the codomain.
inline NaturalityReport naturality_check(const DirichletParam& alpha, const MeasurableMap& kappa,
                                         std::size_t n, const SeedLineage& seed,
                                         const std::vector<MeasurableMap>& partitions_on_y,
                                         const StickConfig& config = {}) {
    const DirichletParam pushed_alpha(pushforward_measure(kappa, alpha.base));
    const std::vector<DPSample> draws_x = stick_breaking_sample(alpha, config, n, seed.child(1));
    const std::vector<DPSample> draws_y =
        stick_breaking_sample(pushed_alpha, config, n, seed.child(2));

    NaturalityReport rep;
    for (const MeasurableMap& partition : partitions_on_y) {
        std::vector<DirSample> a, b;
        a.reserve(n);
        b.reserve(n);
        for (const DPSample& s : draws_x) a.push_back(dp_project(s.push(kappa), partition));
        for (const DPSample& s : draws_y) b.push_back(dp_project(s, partition));
        PartitionComparison cmp = detail::compare_cell_samples(a, b);
        rep.all_pass = rep.all_pass && cmp.pass;
        rep.partitions.push_back(std::move(cmp));
    }
    return rep;
}

struct ContinuityStep {
    double mean_gap_max = 0.0;
    double mean_tol = 0.0;
    double var_gap_max = 0.0;
    double var_tol = 0.0;
    bool within = false;
};

struct ContinuityReport {
    std::vector<ContinuityStep> steps;
    bool final_within = false;
};

/// Moment distances between Dir(alpha_j) and the limit Dir(alpha) along a
/// parameter path; the contract is that the final distances sit inside the
/// Monte Carlo band.
inline ContinuityReport dir_continuity_probe(const std::vector<DirichletParam>& path,
                                             const DirichletParam& limit, std::size_t n,
                                             const SeedLineage& seed) {
    ContinuityReport rep;
    const std::vector<DirSample> ref = dir_sample(limit, n, seed.child(0));
    const std::size_t k = limit.finite_alpha().size();
    for (std::size_t j = 0; j < path.size(); ++j) {
        const std::vector<DirSample> cur = dir_sample(path[j], n, seed.child(j + 1));
        ContinuityStep step;
        for (std::size_t c = 0; c < k; ++c) {
            std::vector<double> xa, xb;
            for (const DirSample& s : cur) xa.push_back(s[c]);
            for (const DirSample& s : ref) xb.push_back(s[c]);
            const MomentSummary ma = moment_summary(xa);
            const MomentSummary mb = moment_summary(xb);
            step.mean_gap_max = std::max(step.mean_gap_max, std::fabs(ma.mean - mb.mean));
            step.mean_tol = std::max(
                step.mean_tol, 3.0 * std::sqrt(ma.se_mean * ma.se_mean + mb.se_mean * mb.se_mean));
            step.var_gap_max = std::max(step.var_gap_max, std::fabs(ma.variance - mb.variance));
            step.var_tol =
                std::max(step.var_tol, 3.0 * std::sqrt(ma.se_variance * ma.se_variance +
                                                       mb.se_variance * mb.se_variance));
        }
        step.within = step.mean_gap_max <= step.mean_tol && step.var_gap_max <= step.var_tol;
        rep.steps.push_back(step);
    }
    rep.final_within = !rep.steps.empty() && rep.steps.back().within;
    return rep;
}

}  // namespace markov

#endif
