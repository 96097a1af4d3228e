#ifndef MARKOV_BAYES_HPP
#define MARKOV_BAYES_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "markov/kernel.hpp"
#include "markov/measure.hpp"
#include "markov/special.hpp"

namespace markov {

/// Geometric radius schedule r_t = r0 * ratio^t driving the shrinking-ball
/// posterior limit.
struct RadiusSchedule {
    double r0 = 0.125;
    double ratio = 0.5;
    int max_steps = 40;
    int window = 3;
    double tolerance = 1e-6;

    static RadiusSchedule defaults_for(const SampleSpace& sample_space) {
        RadiusSchedule s;
        s.r0 = sample_space.diameter() / 8.0;
        return s;
    }

    void validate(const SampleSpace& sample_space) const {
        if (!(r0 > 0.0) || !(ratio > 0.0) || !(ratio < 1.0))
            throw std::invalid_argument("RadiusSchedule: need r0 > 0 and ratio in (0,1)");
        if (r0 > 0.5 * sample_space.diameter() + 1e-12)
            throw std::invalid_argument("RadiusSchedule: r0 exceeds half the space diameter");
        if (max_steps < 1 || window < 1)
            throw std::invalid_argument("RadiusSchedule: max_steps and window must be >= 1");
    }

    std::vector<double> radii() const {
        std::vector<double> rs(static_cast<std::size_t>(max_steps));
        double r = r0;
        for (double& v : rs) {
            v = r;
            r *= ratio;
        }
        return rs;
    }
};

/// Bayesian statistical model: parameter atoms with prior weights and one
/// likelihood measure per atom. The parameter space is either a finite label
/// space or a euclidean box carrying a particle cloud; measure-valued
/// parameters are indexed by a finite label space.
class BayesianModel {
public:
    static BayesianModel finite(const SampleSpace& theta, std::vector<double> prior,
                                const Kernel& likelihood) {
        if (!theta.is_finite() || prior.size() != theta.size())
            throw std::invalid_argument("BayesianModel::finite: one prior weight per label");
        require_same_space(theta, likelihood.domain(), "BayesianModel::finite");
        std::vector<Point> atoms;
        atoms.reserve(theta.size());
        for (std::size_t i = 0; i < theta.size(); ++i) atoms.push_back(Point::label(i));
        return BayesianModel(theta, likelihood.codomain(), std::move(atoms), std::move(prior),
                             likelihood);
    }

    static BayesianModel particles(const SampleSpace& theta, std::vector<Point> points,
                                   std::vector<double> prior, const Kernel& likelihood) {
        if (points.size() != prior.size() || points.empty())
            throw std::invalid_argument("BayesianModel::particles: points/prior size mismatch");
        require_same_space(theta, likelihood.domain(), "BayesianModel::particles");
        for (const Point& p : points)
            if (!theta.contains(p))
                throw std::invalid_argument("BayesianModel::particles: point outside theta space");
        return BayesianModel(theta, likelihood.codomain(), std::move(points), std::move(prior),
                             likelihood);
    }

    /// Parameters that are themselves probability measures on the sample
    /// space (e.g. Dirichlet-measure draws); indexed by p1..pN.
    static BayesianModel from_measures(std::vector<ProbMeasure> particle_measures,
                                       std::vector<double> prior) {
        if (particle_measures.empty() || particle_measures.size() != prior.size())
            throw std::invalid_argument("BayesianModel::from_measures: size mismatch");
        const SampleSpace theta = SampleSpace::omega(particle_measures.size());
        const Kernel lik = Kernel::finite_table(theta, particle_measures.front().space(),
                                                particle_measures);
        return finite(theta, std::move(prior), lik);
    }

    const SampleSpace& theta_space() const { return theta_space_; }
    const SampleSpace& sample_space() const { return sample_space_; }
    const Kernel& likelihood() const { return likelihood_; }
    std::size_t theta_count() const { return atoms_.size(); }
    const std::vector<Point>& theta_atoms() const { return atoms_; }
    const std::vector<double>& prior() const { return prior_; }
    const Measure& likelihood_at(std::size_t i) const { return likelihoods_[i]; }

    ProbMeasure prior_measure() const {
        Measure m(theta_space_);
        for (std::size_t i = 0; i < atoms_.size(); ++i) m.add_atom(atoms_[i], prior_[i]);
        return ProbMeasure(m, 1e-9);
    }

private:
    BayesianModel(SampleSpace theta, SampleSpace sample, std::vector<Point> atoms,
                  std::vector<double> prior, Kernel likelihood)
        : theta_space_(std::move(theta)),
          sample_space_(std::move(sample)),
          atoms_(std::move(atoms)),
          prior_(std::move(prior)),
          likelihood_(std::move(likelihood)) {
        double mass = 0.0;
        for (double w : prior_) {
            if (w < 0.0) throw std::invalid_argument("BayesianModel: negative prior weight");
            mass += w;
        }
        if (!(mass > 0.0)) throw std::invalid_argument("BayesianModel: zero prior mass");
        for (double& w : prior_) w /= mass;
        likelihoods_.reserve(atoms_.size());
        for (const Point& p : atoms_) {
            ProbMeasure row = likelihood_.at(p);
            require_same_space(sample_space_, row.space(), "BayesianModel likelihood");
            likelihoods_.push_back(row.get());
        }
    }

    SampleSpace theta_space_;
    SampleSpace sample_space_;
    std::vector<Point> atoms_;
    std::vector<double> prior_;
    std::vector<Measure> likelihoods_;
    Kernel likelihood_;
};

struct TraceRow {
    double r = 0.0;
    std::vector<double> numerators;
    double denominator = 0.0;
    std::vector<double> ratios;
};

struct PosteriorReport {
    std::string method;
    std::vector<double> posterior;      // weight per theta atom; mass 1 when converged
    std::vector<double> posterior_raw;  // last-radius weights before extrapolation
    std::vector<TraceRow> trace;
    std::vector<std::vector<std::size_t>> queries;
    bool converged = false;
    bool singular = false;
    bool monotone_denominator = true;
    bool extrapolated = false;
    bool dui_verified = true;
    double effective_sample_size = 0.0;

    Measure posterior_measure(const BayesianModel& model) const {
        Measure m(model.theta_space());
        for (std::size_t i = 0; i < posterior.size(); ++i)
            m.add_atom(model.theta_atoms()[i], posterior[i]);
        return m;
    }
};

namespace detail {

const double kLogUnderflow = std::log(1e-300);

inline double ess(const std::vector<double>& w) {
    double s = 0.0, s2 = 0.0;
    for (double x : w) {
        s += x;
        s2 += x * x;
    }
    return s2 > 0.0 ? s * s / s2 : 0.0;
}

/// Shared log-weight normalization; the exact and shrinking-ball paths both
/// finish here so the finite-space reduction is bit-identical.
inline bool normalize_log_weights(const std::vector<double>& logw, std::vector<double>& out) {
    const double m = *std::max_element(logw.begin(), logw.end());
    out.assign(logw.size(), 0.0);
    if (!std::isfinite(m) || m <= kLogUnderflow) return false;
    double sum = 0.0;
    for (std::size_t i = 0; i < logw.size(); ++i) {
        out[i] = std::exp(logw[i] - m);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return true;
}

inline PosteriorReport weight_posterior(const BayesianModel& model, std::vector<double> logw,
                                        const char* method) {
    PosteriorReport rep;
    rep.method = method;
    if (!normalize_log_weights(logw, rep.posterior)) {
        rep.singular = true;
        rep.converged = false;
        rep.posterior = model.prior();  // declared fallback
    } else {
        rep.converged = true;
    }
    rep.posterior_raw = rep.posterior;
    rep.effective_sample_size = ess(rep.posterior);
    return rep;
}

}  // namespace detail

/// (Gamma_p)_* prior on Theta x X.
inline Joint joint_distribution(const BayesianModel& model) {
    return graph(model.likelihood(), model.prior_measure());
}

/// mu_X = p_*(mu_Theta): the prior-weighted likelihood mixture.
inline Measure marginal(const BayesianModel& model) {
    std::vector<const Measure*> parts;
    parts.reserve(model.theta_count());
    for (std::size_t i = 0; i < model.theta_count(); ++i) parts.push_back(&model.likelihood_at(i));
    return detail::mix(model.sample_space(), parts, model.prior());
}

/// Exact Bayes on finite spaces: posterior(theta) prop. prior * prod p_theta({x_i}).
inline PosteriorReport exact_finite_posterior(const BayesianModel& model,
                                              const std::vector<Point>& data) {
    if (!model.sample_space().is_finite() || !model.theta_space().is_finite())
        throw std::invalid_argument("exact_finite_posterior: finite spaces required");
    std::vector<double> logw(model.theta_count());
    for (std::size_t i = 0; i < model.theta_count(); ++i) {
        double lw = std::log(model.prior()[i]);
        const std::vector<double> row = model.likelihood_at(i).weights();
        for (const Point& x : data) {
            const double p = row[x.label_index()];
            lw += p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
        }
        logw[i] = lw;
    }
    return detail::weight_posterior(model, std::move(logw), "exact");
}

/// Classical dominated-family Bayes: reweight by the product of likelihood
/// densities at the data (probability mass on finite sample spaces).
inline PosteriorReport classical_bayes_posterior(const BayesianModel& model,
                                                 const std::vector<Point>& data) {
    std::vector<double> logw(model.theta_count());
    const bool finite = model.sample_space().is_finite();
    for (std::size_t i = 0; i < model.theta_count(); ++i) {
        double lw = std::log(model.prior()[i]);
        for (const Point& x : data) {
            const double f = finite ? model.likelihood_at(i).weights()[x.label_index()]
                                    : model.likelihood_at(i).pdf_value(x);
            lw += f > 0.0 ? std::log(f) : -std::numeric_limits<double>::infinity();
        }
        logw[i] = lw;
    }
    return detail::weight_posterior(model, std::move(logw), "classical");
}

namespace detail {

// two-stage Richardson on a geometric radius schedule; removes the r and r^2
// error terms from the last three trace values
inline double richardson2(double f0, double f1, double f2, double rho) {
    if (f0 == f1 && f1 == f2) return f2;  // constant trace stays put
    const double l1a = (f1 - rho * f0) / (1.0 - rho);
    const double l1b = (f2 - rho * f1) / (1.0 - rho);
    return (l1b - rho * rho * l1a) / (1.0 - rho * rho);
}

}  // namespace detail

/// The shrinking-ball posterior: for each scheduled radius, reweights the
/// prior by the product of likelihood ball masses at the data and tracks the
/// queried set ratios until they stabilize. Works without any dominating
/// measure; on finite spaces with r < 1 it reduces exactly to finite Bayes.
inline PosteriorReport ball_posterior(const BayesianModel& model, const std::vector<Point>& data,
                                      const RadiusSchedule& schedule,
                                      std::vector<std::vector<std::size_t>> queries = {}) {
    schedule.validate(model.sample_space());
    for (const Point& x : data)
        if (!model.sample_space().contains(x))
            throw std::invalid_argument("ball_posterior: datum outside sample space");

    const std::size_t n = model.theta_count();
    if (queries.empty() && n <= 16) {
        for (std::size_t i = 0; i < n; ++i) queries.push_back({i});
    }

    PosteriorReport rep;
    rep.method = "ball";
    rep.queries = queries;

    std::vector<double> logw(n), post;
    std::vector<std::vector<double>> post_window;  // rolling posteriors for extrapolation
    std::vector<std::vector<double>> ratio_window;  // rolling query ratios for convergence
    // monotonicity of the traced ratios gates the extrapolation
    std::vector<char> nondecreasing(queries.size(), 1), nonincreasing(queries.size(), 1);
    std::vector<double> prev_ratios;

    double prev_den_log = std::numeric_limits<double>::infinity();
    bool have_values = false;
    for (double r : schedule.radii()) {
        for (std::size_t i = 0; i < n; ++i) {
            double lw = std::log(model.prior()[i]);
            for (const Point& x : data) {
                const double b = model.likelihood_at(i).ball(x, r);
                lw += b > 0.0 ? std::log(b) : -std::numeric_limits<double>::infinity();
            }
            logw[i] = lw;
        }
        const double den_log = log_sum_exp(logw.begin(), logw.end());
        if (std::isfinite(prev_den_log) && den_log > prev_den_log + 1e-12)
            rep.monotone_denominator = false;
        prev_den_log = den_log;

        TraceRow row;
        row.r = r;
        row.denominator = std::isfinite(den_log) ? std::exp(den_log) : 0.0;
        for (const auto& q : queries) {
            std::vector<double> sub;
            sub.reserve(q.size());
            for (std::size_t i : q) sub.push_back(logw[i]);
            const double num_log = log_sum_exp(sub.begin(), sub.end());
            row.numerators.push_back(std::isfinite(num_log) ? std::exp(num_log) : 0.0);
            row.ratios.push_back(std::isfinite(den_log) && std::isfinite(num_log)
                                     ? std::exp(num_log - den_log)
                                     : 0.0);
        }
        rep.trace.push_back(row);

        if (!detail::normalize_log_weights(logw, post)) {
            // every weight underflowed: the limit fails at this datum
            rep.singular = true;
            rep.converged = false;
            break;
        }
        have_values = true;
        if (!prev_ratios.empty()) {
            for (std::size_t k = 0; k < queries.size(); ++k) {
                if (row.ratios[k] < prev_ratios[k] - 1e-14) nondecreasing[k] = 0;
                if (row.ratios[k] > prev_ratios[k] + 1e-14) nonincreasing[k] = 0;
            }
        }
        prev_ratios = row.ratios;
        const std::size_t keep = std::max<std::size_t>(schedule.window + 1, 3);
        post_window.push_back(post);
        if (post_window.size() > keep) post_window.erase(post_window.begin());
        ratio_window.push_back(row.ratios);
        if (ratio_window.size() > static_cast<std::size_t>(schedule.window) + 1)
            ratio_window.erase(ratio_window.begin());

        // convergence: queried ratios (full posterior in TV when no queries)
        // stable across the window
        if (ratio_window.size() == static_cast<std::size_t>(schedule.window) + 1) {
            double delta = 0.0;
            if (!queries.empty()) {
                for (std::size_t w = 1; w < ratio_window.size(); ++w)
                    for (std::size_t k = 0; k < queries.size(); ++k)
                        delta = std::max(delta,
                                         std::fabs(ratio_window[w][k] - ratio_window[w - 1][k]));
            } else if (post_window.size() >= static_cast<std::size_t>(schedule.window) + 1) {
                for (std::size_t w = post_window.size() - schedule.window; w < post_window.size();
                     ++w) {
                    double tv = 0.0;
                    for (std::size_t i = 0; i < n; ++i)
                        tv += std::fabs(post_window[w][i] - post_window[w - 1][i]);
                    delta = std::max(delta, tv);
                }
            }
            if (delta < schedule.tolerance) {
                rep.converged = true;
                break;
            }
        }
    }

    if (rep.singular) {
        rep.posterior = model.prior();  // declared fallback
        rep.posterior_raw = rep.posterior;
        rep.effective_sample_size = detail::ess(rep.posterior);
        return rep;
    }
    if (!have_values) {
        rep.posterior = model.prior();
        rep.posterior_raw = rep.posterior;
        rep.singular = true;
        return rep;
    }
    rep.posterior_raw = post_window.back();
    rep.posterior = rep.posterior_raw;

    bool monotone = rep.monotone_denominator;
    for (std::size_t k = 0; k < queries.size() && monotone; ++k)
        monotone = nondecreasing[k] || nonincreasing[k];
    if (monotone && post_window.size() >= 3) {
        const std::size_t last = post_window.size() - 1;
        std::vector<double> extr(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            extr[i] = std::max(0.0, detail::richardson2(post_window[last - 2][i],
                                                        post_window[last - 1][i],
                                                        post_window[last][i], schedule.ratio));
            sum += extr[i];
        }
        if (sum > 0.0) {
            if (std::fabs(sum - 1.0) > 1e-12)
                for (double& x : extr) x /= sum;
            rep.posterior = std::move(extr);
            rep.extrapolated = true;
        }
    }
    rep.effective_sample_size = detail::ess(rep.posterior);
    return rep;
}

/// Ratio-of-derivatives form for atomless likelihoods: the ball-surface
/// factor cancels, so the posterior reduces to the density reweighting. Also
/// probes the finite-difference slopes of the ball masses over the schedule
/// against a fitted envelope; an unbounded tail marks the
/// differentiation-under-the-integral hypothesis unverified.
inline PosteriorReport lopital_posterior(const BayesianModel& model,
                                         const std::vector<Point>& data,
                                         const RadiusSchedule& schedule) {
    schedule.validate(model.sample_space());
    if (model.sample_space().is_finite())
        throw std::invalid_argument("lopital_posterior: euclidean sample space required");
    for (std::size_t i = 0; i < model.theta_count(); ++i)
        for (const Point& x : data)
            if (model.likelihood_at(i).atom_mass_at(x) > 0.0)
                throw std::invalid_argument(
                    "lopital_posterior: atom detected at a datum; use ball_posterior");

    PosteriorReport rep = classical_bayes_posterior(model, data);
    rep.method = "lopital";

    // envelope check on a capped subset of parameters
    const std::vector<double> rs = schedule.radii();
    const std::size_t stride = std::max<std::size_t>(1, model.theta_count() / 64);
    for (std::size_t i = 0; i < model.theta_count() && rep.dui_verified; i += stride) {
        for (const Point& x : data) {
            std::vector<double> slope;
            for (std::size_t t = 0; t + 1 < rs.size(); ++t) {
                const double num = model.likelihood_at(i).ball(x, rs[t]) -
                                   model.likelihood_at(i).ball(x, rs[t + 1]);
                slope.push_back(num / (rs[t] - rs[t + 1]));
            }
            const std::size_t half = slope.size() / 2;
            double envelope = 0.0, tail = 0.0;
            for (std::size_t t = 0; t < half; ++t) envelope = std::max(envelope, std::fabs(slope[t]));
            for (std::size_t t = half; t < slope.size(); ++t) tail = std::max(tail, std::fabs(slope[t]));
            if (tail > 2.0 * envelope + 1e-12) {
                rep.dui_verified = false;
                break;
            }
        }
    }
    return rep;
}

struct SingularProbeResult {
    std::vector<Point> grid;
    std::vector<bool> flagged;
    double probe_radius = 0.0;
    double flagged_mass = 0.0;  // marginal ball-mass estimate of the flagged region
};

inline std::vector<Point> default_probe_grid(const BayesianModel& model, std::size_t points = 101) {
    std::vector<Point> grid;
    if (model.sample_space().is_finite()) {
        for (std::size_t i = 0; i < model.sample_space().size(); ++i)
            grid.push_back(Point::label(i));
        return grid;
    }
    if (model.sample_space().dim() != 1)
        throw std::invalid_argument("default_probe_grid: 1-D euclidean grids only");
    const Box& b = model.sample_space().bounds();
    for (std::size_t i = 0; i < points; ++i)
        grid.push_back(Point::real(b.lo[0] + (b.hi[0] - b.lo[0]) * double(i) / double(points - 1)));
    return grid;
}

/// Flags probe points whose shrinking-ball denominator vanishes, i.e. data
/// at which the posterior limit fails; estimates the marginal mass of the
/// flagged region by ball-mass summation.
inline SingularProbeResult singular_set_probe(const BayesianModel& model,
                                              const std::vector<Point>& grid,
                                              const RadiusSchedule& schedule) {
    schedule.validate(model.sample_space());
    SingularProbeResult out;
    out.grid = grid;
    const std::vector<double> rs = schedule.radii();
    for (const Point& x : grid) {
        bool vanished = true;
        for (std::size_t i = 0; i < model.theta_count() && vanished; ++i)
            vanished = !(model.likelihood_at(i).ball(x, rs.back()) > 0.0);
        out.flagged.push_back(vanished);
    }
    if (model.sample_space().is_finite()) {
        out.probe_radius = 0.5;
    } else {
        double h = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            h = std::min(h, model.sample_space().distance(grid[i], grid[i + 1]));
        out.probe_radius = std::isfinite(h) ? 0.5 * h : 0.5 * rs.front();
    }
    const Measure mu_x = marginal(model);
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (out.flagged[i]) out.flagged_mass += mu_x.ball(grid[i], out.probe_radius);
    return out;
}

/// Mass of the flagged singular region under the posterior-updated marginal
/// p_*(mu_{Theta|X}); zero for a consistent update.
inline double consistency_check(const BayesianModel& model, const std::vector<Point>& data,
                                const RadiusSchedule& schedule) {
    const PosteriorReport rep = ball_posterior(model, data, schedule);
    if (!rep.converged)
        throw std::runtime_error("consistency_check: ball posterior did not converge");
    std::vector<const Measure*> parts;
    for (std::size_t i = 0; i < model.theta_count(); ++i) parts.push_back(&model.likelihood_at(i));
    const Measure updated = detail::mix(model.sample_space(), parts, rep.posterior);

    const SingularProbeResult probe =
        singular_set_probe(model, default_probe_grid(model), schedule);
    double mass = 0.0;
    for (std::size_t i = 0; i < probe.grid.size(); ++i)
        if (probe.flagged[i]) mass += updated.ball(probe.grid[i], probe.probe_radius);
    return mass;
}

/// Bayes inversion on finite models: Q: X ~> Theta reproduces the joint via
/// its graph and pushes the marginal back to the prior.
inline bool posterior_equivalence_check(const BayesianModel& model, const Kernel& q,
                                        double tol = 1e-10) {
    if (!model.sample_space().is_finite() || !model.theta_space().is_finite())
        throw std::invalid_argument("posterior_equivalence_check: finite spaces required");
    require_same_space(q.domain(), model.sample_space(), "posterior_equivalence_check");
    require_same_space(q.codomain(), model.theta_space(), "posterior_equivalence_check");
    const std::size_t nt = model.theta_count();
    const std::size_t nx = model.sample_space().size();
    const std::vector<double> mu_x = marginal(model).weights();

    double tv_joint = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
        const std::vector<double> qrow = q.at(Point::label(x)).get().weights();
        for (std::size_t i = 0; i < nt; ++i) {
            const double joint = model.prior()[i] * model.likelihood_at(i).weights()[x];
            tv_joint += std::fabs(mu_x[x] * qrow[i] - joint);
        }
    }
    if (tv_joint > tol) return false;

    const Measure pushed = pushforward_s(q, Measure::from_weights(model.sample_space(), mu_x));
    return total_variation(pushed, model.prior_measure().get()) <= tol;
}

}  // namespace markov

#endif
