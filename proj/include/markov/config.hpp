#ifndef MARKOV_CONFIG_HPP
#define MARKOV_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "markov/bayes.hpp"
#include "markov/dirichlet.hpp"
#include "markov/kernel.hpp"
#include "markov/measure.hpp"

namespace markov {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace cfg {

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return j;
}

inline SampleSpace parse_space(const json& j) {
    if (!j.is_object() || !j.contains("kind")) throw ConfigError("space: object with kind required");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "finite") return SampleSpace::finite(j.at("labels").get<std::vector<std::string>>());
    if (kind == "euclidean") {
        Box b;
        for (const auto& axis : j.at("bounds")) {
            if (!axis.is_array() || axis.size() != 2) throw ConfigError("space: bounds are [lo,hi] pairs");
            b.lo.push_back(axis[0].get<double>());
            b.hi.push_back(axis[1].get<double>());
        }
        return SampleSpace::box(std::move(b));
    }
    throw ConfigError("space: unknown kind '" + kind + "'");
}

inline json emit_space(const SampleSpace& s) {
    json j;
    if (s.is_finite()) {
        j["kind"] = "finite";
        j["labels"] = s.labels();
        return j;
    }
    j["kind"] = "euclidean";
    json bounds = json::array();
    for (std::size_t i = 0; i < s.dim(); ++i)
        bounds.push_back(json::array({s.bounds().lo[i], s.bounds().hi[i]}));
    j["bounds"] = bounds;
    return j;
}

inline Point parse_point(const SampleSpace& space, const json& j) {
    if (space.is_finite()) {
        if (j.is_string()) return Point::label(space.label_index(j.get<std::string>()));
        throw ConfigError("point on a finite space must be a label string");
    }
    if (j.is_number()) {
        if (space.dim() != 1) throw ConfigError("scalar point in a multi-dimensional space");
        return Point::real(j.get<double>());
    }
    if (j.is_array()) return Point::vec(j.get<std::vector<double>>());
    throw ConfigError("point must be a number, array, or label");
}

inline json emit_point(const SampleSpace& space, const Point& p) {
    if (space.is_finite()) return space.labels()[p.label_index()];
    if (space.dim() == 1) return p.x();
    return json(p.coords());
}

inline std::vector<double> broadcast(const json& j, std::size_t dim, const char* what) {
    if (j.is_number()) return std::vector<double>(dim, j.get<double>());
    auto v = j.get<std::vector<double>>();
    if (v.size() != dim) throw ConfigError(std::string(what) + ": expected " + std::to_string(dim) + " entries");
    return v;
}

/// Declarative measure syntax:
///   {"atoms": [[loc, w], ...], "densities": [{"family": ..., "weight": w}, ...]}
inline Measure parse_measure(const SampleSpace& space, const json& j) {
    Measure m(space);
    if (j.contains("atoms")) {
        for (const auto& a : j.at("atoms")) {
            if (!a.is_array() || a.size() != 2) throw ConfigError("measure atom: [location, weight]");
            m.add_atom(parse_point(space, a[0]), a[1].get<double>());
        }
    }
    if (j.contains("densities")) {
        for (const auto& d : j.at("densities")) {
            const std::string family = d.at("family").get<std::string>();
            const double w = d.value("weight", 1.0);
            if (family == "uniform") {
                m.add_density(Density::uniform(space), w);
            } else if (family == "normal") {
                m.add_density(Density::normal(space, broadcast(d.at("mean"), space.dim(), "normal mean"),
                                              broadcast(d.at("sd"), space.dim(), "normal sd")),
                              w);
            } else if (family == "beta") {
                m.add_density(Density::beta(space, d.at("a").get<double>(), d.at("b").get<double>()), w);
            } else if (family == "piecewise") {
                m.add_density(Density::piecewise(space, d.at("edges").get<std::vector<double>>(),
                                                 d.at("values").get<std::vector<double>>()),
                              w);
            } else {
                throw ConfigError("unknown density family '" + family + "'");
            }
        }
    }
    return m;
}

inline json emit_measure(const Measure& m) {
    json j;
    json atoms = json::array();
    for (const Atom& a : m.atoms())
        atoms.push_back(json::array({emit_point(m.space(), a.location), a.weight}));
    j["atoms"] = atoms;
    json densities = json::array();
    for (const DensityComponent& d : m.densities()) {
        json e;
        e["family"] = d.density.family_name();
        e["weight"] = d.weight;
        if (d.density.family_name() == "normal") {
            e["mean"] = d.density.normal_mean();
            e["sd"] = d.density.normal_sd();
        } else if (d.density.family_name() == "beta") {
            e["a"] = d.density.beta_a();
            e["b"] = d.density.beta_b();
        } else if (d.density.family_name() == "piecewise") {
            e["edges"] = d.density.piecewise_edges();
            e["values"] = d.density.piecewise_values();
        }
        densities.push_back(e);
    }
    j["densities"] = densities;
    return j;
}

}  // namespace cfg

/// Parametric likelihood families for the model config.
inline Kernel family_kernel(const std::string& family, double sd, const SampleSpace& theta,
                            const SampleSpace& sample_space) {
    if (family == "normal-location") {
        if (!sample_space.is_euclidean()) throw ConfigError("normal-location: euclidean sample space");
        return Kernel::parametric(theta, sample_space, [sample_space, sd](const Point& t) {
            std::vector<double> mean = t.coords();
            return ProbMeasure(Measure::of_density(
                Density::normal(sample_space, mean, std::vector<double>(mean.size(), sd))));
        });
    }
    if (family == "uniform-scale") {
        if (!sample_space.is_euclidean() || sample_space.dim() != 1)
            throw ConfigError("uniform-scale: 1-D euclidean sample space");
        return Kernel::parametric(theta, sample_space, [sample_space](const Point& t) {
            return ProbMeasure(
                Measure::of_density(Density::piecewise(sample_space, {0.0, t.x()}, {1.0})));
        });
    }
    if (family == "bernoulli") {
        if (!sample_space.is_finite() || sample_space.size() != 2)
            throw ConfigError("bernoulli: two-label sample space required");
        return Kernel::parametric(theta, sample_space, [sample_space](const Point& t) {
            return ProbMeasure(Measure::from_weights(sample_space, {1.0 - t.x(), t.x()}));
        });
    }
    throw ConfigError("unknown likelihood family '" + family + "'");
}

/// Parsed model-config document: sample space, parameter descriptor,
/// likelihood descriptor, data, method and schedule options.
class ModelConfig {
public:
    struct ThetaFinite {
        std::vector<std::string> labels;
        std::vector<double> values;  // parameter points for family likelihoods
        std::vector<double> prior;
    };
    struct ThetaParticles {
        std::size_t count = 0;
        SampleSpace space;
        Measure draw;
    };
    struct ThetaDp {
        Measure alpha;
        std::size_t particles = 0;
        StickConfig truncation;
    };
    struct LikTable {
        std::vector<Measure> rows;
    };
    struct LikFamily {
        std::string family;
        double sd = 1.0;
    };
    struct LikIdentity {};

    SampleSpace sample_space;
    std::variant<ThetaFinite, ThetaParticles, ThetaDp> theta;
    std::variant<LikTable, LikFamily, LikIdentity> likelihood;
    std::vector<Point> data;
    std::string method = "exact";
    std::optional<RadiusSchedule> schedule;
    std::vector<std::vector<std::size_t>> queries;

    static ModelConfig parse(const json& j) {
        if (!j.is_object()) throw ConfigError("config: top-level object required");
        ModelConfig c(cfg::parse_space(j.at("space")));

        const json& th = j.at("theta");
        const std::string tkind = th.at("kind").get<std::string>();
        if (tkind == "finite") {
            ThetaFinite tf;
            if (th.contains("labels")) tf.labels = th.at("labels").get<std::vector<std::string>>();
            if (th.contains("values")) tf.values = th.at("values").get<std::vector<double>>();
            if (tf.labels.empty()) {
                for (double v : tf.values) {
                    std::ostringstream os;
                    os << "theta=" << v;
                    tf.labels.push_back(os.str());
                }
            }
            if (tf.labels.empty()) throw ConfigError("theta.finite: labels or values required");
            tf.prior = th.at("prior").get<std::vector<double>>();
            if (tf.prior.size() != tf.labels.size())
                throw ConfigError("theta.finite: prior size must match labels");
            c.theta = std::move(tf);
        } else if (tkind == "particles") {
            SampleSpace tspace = cfg::parse_space(th.at("space"));
            ThetaParticles tp{th.at("count").get<std::size_t>(), tspace,
                              cfg::parse_measure(tspace, th.at("draw"))};
            if (tp.count == 0) throw ConfigError("theta.particles: count must be >= 1");
            c.theta = std::move(tp);
        } else if (tkind == "dp-prior") {
            ThetaDp td{cfg::parse_measure(c.sample_space, th.at("alpha")),
                       th.value("particles", std::size_t{1000}),
                       StickConfig{}};
            if (th.contains("truncation")) {
                const json& tr = th.at("truncation");
                if (tr.contains("max_atoms")) td.truncation.max_atoms = tr.at("max_atoms").get<std::size_t>();
                if (tr.contains("remainder_tol")) td.truncation.remainder_tol = tr.at("remainder_tol").get<double>();
            }
            c.theta = std::move(td);
        } else {
            throw ConfigError("theta: unknown kind '" + tkind + "'");
        }

        const json& lk = j.at("likelihood");
        const std::string lkind = lk.at("kind").get<std::string>();
        if (lkind == "table") {
            LikTable lt;
            for (const auto& row : lk.at("rows")) lt.rows.push_back(cfg::parse_measure(c.sample_space, row));
            c.likelihood = std::move(lt);
        } else if (lkind == "family") {
            c.likelihood = LikFamily{lk.at("family").get<std::string>(), lk.value("sd", 1.0)};
        } else if (lkind == "identity") {
            c.likelihood = LikIdentity{};
        } else {
            throw ConfigError("likelihood: unknown kind '" + lkind + "'");
        }

        if (j.contains("data"))
            for (const auto& d : j.at("data")) c.data.push_back(cfg::parse_point(c.sample_space, d));
        c.method = j.value("method", std::string("exact"));
        if (j.contains("schedule")) {
            const json& s = j.at("schedule");
            RadiusSchedule sch = RadiusSchedule::defaults_for(c.sample_space);
            sch.r0 = s.value("r0", sch.r0);
            sch.ratio = s.value("ratio", sch.ratio);
            sch.max_steps = s.value("steps", sch.max_steps);
            sch.window = s.value("window", sch.window);
            sch.tolerance = s.value("tolerance", sch.tolerance);
            c.schedule = sch;
        }
        if (j.contains("queries"))
            c.queries = j.at("queries").get<std::vector<std::vector<std::size_t>>>();
        return c;
    }

    static ModelConfig load(const std::string& path) { return parse(cfg::load_json(path)); }

    json emit() const {
        json j;
        j["space"] = cfg::emit_space(sample_space);
        if (const auto* tf = std::get_if<ThetaFinite>(&theta)) {
            j["theta"] = {{"kind", "finite"}, {"labels", tf->labels}, {"prior", tf->prior}};
            if (!tf->values.empty()) j["theta"]["values"] = tf->values;
        } else if (const auto* tp = std::get_if<ThetaParticles>(&theta)) {
            j["theta"] = {{"kind", "particles"},
                          {"count", tp->count},
                          {"space", cfg::emit_space(tp->space)},
                          {"draw", cfg::emit_measure(tp->draw)}};
        } else {
            const auto& td = std::get<ThetaDp>(theta);
            j["theta"] = {{"kind", "dp-prior"},
                          {"alpha", cfg::emit_measure(td.alpha)},
                          {"particles", td.particles}};
            json tr;
            if (td.truncation.max_atoms) tr["max_atoms"] = *td.truncation.max_atoms;
            tr["remainder_tol"] = td.truncation.remainder_tol;
            j["theta"]["truncation"] = tr;
        }
        if (const auto* lt = std::get_if<LikTable>(&likelihood)) {
            json rows = json::array();
            for (const Measure& m : lt->rows) rows.push_back(cfg::emit_measure(m));
            j["likelihood"] = {{"kind", "table"}, {"rows", rows}};
        } else if (const auto* lf = std::get_if<LikFamily>(&likelihood)) {
            j["likelihood"] = {{"kind", "family"}, {"family", lf->family}, {"sd", lf->sd}};
        } else {
            j["likelihood"] = {{"kind", "identity"}};
        }
        json data = json::array();
        for (const Point& p : data_points()) data.push_back(cfg::emit_point(sample_space, p));
        j["data"] = data;
        j["method"] = method;
        if (schedule) {
            j["schedule"] = {{"r0", schedule->r0},
                             {"ratio", schedule->ratio},
                             {"steps", schedule->max_steps},
                             {"window", schedule->window},
                             {"tolerance", schedule->tolerance}};
        }
        if (!queries.empty()) j["queries"] = queries;
        return j;
    }

    const std::vector<Point>& data_points() const { return data; }

    RadiusSchedule effective_schedule() const {
        return schedule ? *schedule : RadiusSchedule::defaults_for(sample_space);
    }

    /// Materializes the Bayesian model; sampling-based parameter descriptors
    /// draw from the given root seed.
    BayesianModel build_model(std::uint64_t seed) const {
        if (const auto* tf = std::get_if<ThetaFinite>(&theta)) {
            const SampleSpace tspace = SampleSpace::finite(tf->labels);
            Kernel lik = build_likelihood(tspace, tf->values);
            return BayesianModel::finite(tspace, tf->prior, lik);
        }
        if (const auto* tp = std::get_if<ThetaParticles>(&theta)) {
            RngStream g(SeedLineage(seed).child(0x7468u));
            std::vector<Point> points;
            points.reserve(tp->count);
            for (std::size_t i = 0; i < tp->count; ++i) points.push_back(tp->draw.sample(g));
            const std::vector<double> prior(tp->count, 1.0 / double(tp->count));
            Kernel lik = build_likelihood(tp->space, {});
            return BayesianModel::particles(tp->space, std::move(points), prior, lik);
        }
        const auto& td = std::get<ThetaDp>(theta);
        if (!std::holds_alternative<LikIdentity>(likelihood))
            throw ConfigError("dp-prior requires the identity likelihood");
        const DirichletParam alpha{td.alpha};
        const std::vector<DPSample> draws =
            stick_breaking_sample(alpha, td.truncation, td.particles, SeedLineage(seed).child(0x6470u));
        std::vector<ProbMeasure> measures;
        measures.reserve(draws.size());
        for (const DPSample& s : draws) measures.push_back(s.to_prob_measure());
        return BayesianModel::from_measures(std::move(measures),
                                            std::vector<double>(draws.size(), 1.0 / double(draws.size())));
    }

private:
    explicit ModelConfig(SampleSpace space)
        : sample_space(std::move(space)), theta(ThetaFinite{}), likelihood(LikIdentity{}) {}

    Kernel build_likelihood(const SampleSpace& tspace, const std::vector<double>& values) const {
        if (const auto* lt = std::get_if<LikTable>(&likelihood)) {
            if (!tspace.is_finite()) throw ConfigError("table likelihood needs a finite theta");
            std::vector<ProbMeasure> rows;
            for (const Measure& m : lt->rows) rows.emplace_back(m, 1e-9);
            return Kernel::finite_table(tspace, sample_space, std::move(rows));
        }
        if (const auto* lf = std::get_if<LikFamily>(&likelihood)) {
            if (tspace.is_finite()) {
                if (values.size() != tspace.size())
                    throw ConfigError("family likelihood with finite theta needs theta values");
                const SampleSpace value_space = SampleSpace::interval(
                    *std::min_element(values.begin(), values.end()) - 1.0,
                    *std::max_element(values.begin(), values.end()) + 1.0);
                const Kernel fam = family_kernel(lf->family, lf->sd, value_space, sample_space);
                std::vector<ProbMeasure> rows;
                for (double v : values) rows.push_back(fam.at(Point::real(v)));
                return Kernel::finite_table(tspace, sample_space, std::move(rows));
            }
            return family_kernel(lf->family, lf->sd, tspace, sample_space);
        }
        throw ConfigError("identity likelihood is only valid with a dp-prior theta");
    }
};

/// FNV-1a digest of a byte string; hex-encoded.
inline std::string digest_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace markov

#endif
