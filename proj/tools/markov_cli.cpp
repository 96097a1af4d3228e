// Command-line surface: posterior runs, law suites, Dirichlet sampling and
// verification, and sufficiency checks over JSON model configs.
//
// Exit codes: 0 = all checks pass, 1 = a check failed, 2 = usage/config error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "markov/markov.hpp"
#include "markov/statmodel.hpp"

namespace {

using namespace markov;
using nlohmann::json;

std::string join_args(int argc, char** argv) {
    std::ostringstream os;
    for (int i = 0; i < argc; ++i) os << (i ? " " : "") << argv[i];
    return os.str();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string out_path(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

struct GlobalFlags {
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    double tolerance = -1.0;  // negative = per-command default
};

int run_posterior(const GlobalFlags& g, const std::string& config_path, const std::string& method,
                  const std::string& schedule_arg, const std::string& data_arg,
                  const std::string& command) {
    StopWatch watch;
    const std::string raw = slurp(config_path);
    ModelConfig config = ModelConfig::parse(json::parse(raw));
    if (!method.empty()) config.method = method;
    if (!data_arg.empty()) {
        json data_json;
        try {
            data_json = json::parse(data_arg);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("--data is not a JSON array: ") + e.what());
        }
        config.data.clear();
        for (const auto& d : data_json) config.data.push_back(cfg::parse_point(config.sample_space, d));
    }
    RadiusSchedule schedule = config.effective_schedule();
    if (!schedule_arg.empty()) {
        double r0, ratio;
        int steps;
        char c1, c2;
        std::istringstream is(schedule_arg);
        if (!(is >> r0 >> c1 >> ratio >> c2 >> steps) || c1 != ',' || c2 != ',')
            throw ConfigError("--schedule expects r0,ratio,steps");
        schedule.r0 = r0;
        schedule.ratio = ratio;
        schedule.max_steps = steps;
    }
    if (g.tolerance > 0.0) schedule.tolerance = g.tolerance;

    const BayesianModel model = config.build_model(g.seed);
    PosteriorReport rep;
    if (config.method == "exact")
        rep = exact_finite_posterior(model, config.data_points());
    else if (config.method == "classical")
        rep = classical_bayes_posterior(model, config.data_points());
    else if (config.method == "ball")
        rep = ball_posterior(model, config.data_points(), schedule, config.queries);
    else if (config.method == "lopital")
        rep = lopital_posterior(model, config.data_points(), schedule);
    else
        throw ConfigError("unknown method '" + config.method + "'");

    RunReport run;
    run.command = command;
    run.seed = g.seed;
    run.config_digest = digest_hex(raw);
    run.results = posterior_to_json(rep);
    run.wall_ms = watch.ms();
    run.write(out_path(g.out_dir, "posterior_report.json"));
    write_text(out_path(g.out_dir, "posterior_trace.csv"), trace_csv(rep));

    std::cout << "method=" << rep.method << " converged=" << rep.converged
              << " singular=" << rep.singular << "\n";
    for (std::size_t i = 0; i < rep.posterior.size() && i < 16; ++i)
        std::cout << "  theta[" << i << "] = " << rep.posterior[i] << "\n";
    const bool ok = rep.method == "ball" ? (rep.converged && !rep.singular) : !rep.singular;
    return ok ? 0 : 1;
}

int run_laws_check(const GlobalFlags& g, std::size_t sizes, std::size_t trials, bool inject_fault,
                   const std::string& command) {
    StopWatch watch;
    LawsOptions opts;
    opts.seed = g.seed;
    opts.max_size = sizes;
    opts.trials = trials;
    opts.fault_injection = inject_fault ? 1e-3 : 0.0;
    const LawsReport rep = laws_check(opts);
    const double tol = g.tolerance > 0.0 ? g.tolerance : 1e-12;

    RunReport run;
    run.command = command;
    run.seed = g.seed;
    run.results = {{"functoriality", rep.functoriality},
                   {"associativity", rep.associativity},
                   {"ev_associativity", rep.ev_associativity},
                   {"pinduce", rep.pinduce},
                   {"unit_compose", rep.unit_compose},
                   {"unit_ev", rep.unit_ev},
                   {"tolerance", tol},
                   {"pass", rep.all_within(tol)}};
    run.wall_ms = watch.ms();
    run.write(out_path(g.out_dir, "laws_report.json"));
    std::cout << "max residual = " << rep.max_residual() << " (tolerance " << tol << ")\n";
    return rep.all_within(tol) ? 0 : 1;
}

DirichletParam alpha_from_config(const std::string& config_path) {
    if (config_path.empty()) {
        // default fixture: alpha = 2 * Uniform[0,1]
        const SampleSpace x = SampleSpace::interval(0.0, 1.0);
        return DirichletParam(Measure::of_density(Density::uniform(x), 2.0));
    }
    const json j = cfg::load_json(config_path);
    const SampleSpace space = cfg::parse_space(j.at("space"));
    return DirichletParam(cfg::parse_measure(space, j.at("alpha")));
}

int run_dp_sample(const GlobalFlags& g, const std::string& config_path, std::size_t n,
                  std::size_t max_atoms, double remainder_tol, const std::string& command) {
    StopWatch watch;
    const DirichletParam alpha = alpha_from_config(config_path);
    StickConfig sc;
    if (max_atoms > 0) sc.max_atoms = max_atoms;
    sc.remainder_tol = remainder_tol;
    const std::vector<DPSample> draws = stick_breaking_sample(alpha, sc, n, SeedLineage(g.seed));

    double max_remainder = 0.0;
    std::size_t total_atoms = 0;
    for (const DPSample& s : draws) {
        max_remainder = std::max(max_remainder, s.remainder);
        total_atoms += s.atoms.size();
    }
    RunReport run;
    run.command = command;
    run.seed = g.seed;
    if (!config_path.empty()) run.config_digest = digest_hex(slurp(config_path));
    run.results = {{"draws", n},
                   {"total_atoms", total_atoms},
                   {"max_remainder", max_remainder},
                   {"concentration", alpha.concentration()}};
    run.wall_ms = watch.ms();
    run.write(out_path(g.out_dir, "dp_report.json"));
    write_text(out_path(g.out_dir, "dp_atoms.csv"), dp_sample_csv(draws));
    std::cout << n << " draws, " << total_atoms << " atoms, max remainder " << max_remainder
              << "\n";
    return 0;
}

json cell_json(const CellComparison& c) {
    return {{"cell", c.cell},        {"mean_a", c.a.mean},     {"mean_b", c.b.mean},
            {"mean_gap", c.mean_gap}, {"mean_tol", c.mean_tol}, {"var_gap", c.var_gap},
            {"var_tol", c.var_tol},   {"ks_scaled", c.ks_scaled}, {"pass", c.pass}};
}

int run_dir_check(const GlobalFlags& g, std::size_t n, const std::string& command) {
    StopWatch watch;
    const SeedLineage root(g.seed);
    json results;
    bool all_pass = true;

    // aggregation: Dir(1,2,3) collapsed over {w1,w2}|{w3} vs Beta(3,3)
    {
        const SampleSpace o3 = SampleSpace::omega(3);
        const SampleSpace o2 = SampleSpace::omega(2);
        const DirichletParam alpha(Measure::from_weights(o3, {1.0, 2.0, 3.0}));
        const MeasurableMap collapse = MeasurableMap::label_table(o3, o2, {0, 0, 1});
        std::vector<double> first;
        for (const DirSample& s : dir_sample(alpha, n, root.child(1)))
            first.push_back(aggregate(s, collapse)[0]);
        const KsResult ks = ks_test(first, NamedCdf::beta(3.0, 3.0));
        results["aggregation"] = {{"ks_scaled", ks.scaled}, {"pass", ks.pass_at_1pct}};
        all_pass = all_pass && ks.pass_at_1pct;
    }

    // stick-breaking moments: alpha = 2*Uniform[0,1], A = [0, 0.5]
    const SampleSpace u01 = SampleSpace::interval(0.0, 1.0);
    const DirichletParam alpha_u(Measure::of_density(Density::uniform(u01), 2.0));
    const SampleSpace o2 = SampleSpace::omega(2);
    const MeasurableMap half = MeasurableMap::box_partition(
        u01, o2, {Region::of_interval(0.0, 0.5), Region::of_interval(0.5, 1.0)});
    {
        std::vector<double> pa;
        double max_remainder = 0.0;
        for (const DPSample& s : stick_breaking_sample(alpha_u, {}, n, root.child(2))) {
            pa.push_back(dp_project(s, half)[0]);
            max_remainder = std::max(max_remainder, s.remainder);
        }
        const MomentSummary m = moment_summary(pa);
        const bool mean_ok = std::fabs(m.mean - 0.5) <= 3.0 * m.se_mean;
        const bool var_ok = std::fabs(m.variance - 1.0 / 12.0) <= 3.0 * m.se_variance;
        const bool rem_ok = max_remainder <= 1e-10;
        results["dp_moments"] = {{"mean", m.mean},         {"variance", m.variance},
                                 {"max_remainder", max_remainder}, {"pass", mean_ok && var_ok && rem_ok}};
        all_pass = all_pass && mean_ok && var_ok && rem_ok;
    }

    // naturality: finite collapse and euclidean partition map
    {
        const SampleSpace o3 = SampleSpace::omega(3);
        const SampleSpace c2 = SampleSpace::omega(2);
        const DirichletParam alpha3(Measure::from_weights(o3, {1.0, 2.0, 3.0}));
        const MeasurableMap collapse = MeasurableMap::label_table(o3, c2, {0, 0, 1});
        const NaturalityReport finite_rep = naturality_check(
            alpha3, collapse, n, root.child(3), {MeasurableMap::identity(c2)});
        const NaturalityReport eucl_rep =
            naturality_check(alpha_u, half, n, root.child(4), {MeasurableMap::identity(o2)});
        json cells = json::array();
        for (const auto& p : finite_rep.partitions)
            for (const auto& c : p.cells) cells.push_back(cell_json(c));
        for (const auto& p : eucl_rep.partitions)
            for (const auto& c : p.cells) cells.push_back(cell_json(c));
        results["naturality"] = {{"cells", cells},
                                 {"pass", finite_rep.all_pass && eucl_rep.all_pass}};
        all_pass = all_pass && finite_rep.all_pass && eucl_rep.all_pass;
    }

    // conjugacy commutes with projection
    {
        const Point datum = Point::real(0.3);
        const DirichletParam posterior_alpha = dp_posterior(alpha_u, {datum});
        std::vector<DirSample> via_dp;
        for (const DPSample& s : stick_breaking_sample(posterior_alpha, {}, n, root.child(5)))
            via_dp.push_back(dp_project(s, half));
        const Measure alpha_cells = pushforward_measure(half, alpha_u.base);
        const DirichletParam projected(
            add_measures(alpha_cells, Measure::dirac(o2, half.apply(datum))));
        const std::vector<DirSample> via_dir = dir_sample(projected, n, root.child(6));
        const PartitionComparison cmp = markov::detail::compare_cell_samples(via_dp, via_dir);
        json cells = json::array();
        for (const auto& c : cmp.cells) cells.push_back(cell_json(c));
        results["conjugacy"] = {{"cells", cells}, {"pass", cmp.pass}};
        all_pass = all_pass && cmp.pass;
    }

    // continuity probe along (1 + 1/j, 1) -> (1, 1)
    {
        const SampleSpace w2 = SampleSpace::omega(2);
        std::vector<DirichletParam> path;
        for (int j = 1; j <= 256; j *= 2)
            path.push_back(DirichletParam(Measure::from_weights(w2, {1.0 + 1.0 / j, 1.0})));
        const DirichletParam limit(Measure::from_weights(w2, {1.0, 1.0}));
        const ContinuityReport rep = dir_continuity_probe(path, limit, n, root.child(7));
        results["continuity"] = {{"final_mean_gap", rep.steps.back().mean_gap_max},
                                 {"pass", rep.final_within}};
        all_pass = all_pass && rep.final_within;
    }

    RunReport run;
    run.command = command;
    run.seed = g.seed;
    run.results = results;
    run.results["pass"] = all_pass;
    run.wall_ms = watch.ms();
    run.write(out_path(g.out_dir, "dir_report.json"));
    std::cout << "dirichlet suite: " << (all_pass ? "pass" : "FAIL") << "\n";
    return all_pass ? 0 : 1;
}

Measure uniform_dominating(const StatModel& model) {
    return Measure::from_weights(model.space,
                                 std::vector<double>(model.space.size(), 1.0 / model.space.size()));
}

int run_sufficiency_check(const GlobalFlags& g, const std::string& config_path,
                          const std::string& command) {
    StopWatch watch;
    const std::string raw = slurp(config_path);
    const json j = json::parse(raw);
    const SampleSpace space = cfg::parse_space(j.at("space"));
    std::vector<ProbMeasure> family;
    for (const auto& m : j.at("family")) family.emplace_back(cfg::parse_measure(space, m), 1e-9);
    const StatModel model = StatModel::from_family(space, family);

    const json& st = j.at("statistic");
    const SampleSpace cod = cfg::parse_space(st.at("codomain"));
    std::vector<std::size_t> table;
    for (const auto& entry : st.at("map")) {
        if (entry.is_string())
            table.push_back(cod.label_index(entry.get<std::string>()));
        else
            table.push_back(entry.get<std::size_t>());
    }
    const MeasurableMap kappa = MeasurableMap::label_table(space, cod, table);
    const Kernel t = Kernel::deterministic(kappa);

    const SufficiencyReport rep = check_sufficiency(t, model);
    const bool fn = fisher_neyman_check(model, uniform_dominating(model), kappa);

    RunReport run;
    run.command = command;
    run.seed = g.seed;
    run.config_digest = digest_hex(raw);
    run.results = {{"verdict", rep.verdict == SuffVerdict::sufficient       ? "sufficient"
                               : rep.verdict == SuffVerdict::not_sufficient ? "not-sufficient"
                                                                            : "inconclusive"},
                   {"max_deviation", rep.max_deviation},
                   {"fisher_neyman", fn}};
    if (rep.witness) {
        json rows = json::array();
        for (std::size_t y = 0; y < cod.size(); ++y)
            rows.push_back(rep.witness->at(Point::label(y)).get().weights());
        run.results["witness_rows"] = rows;
    }
    run.wall_ms = watch.ms();
    run.write(out_path(g.out_dir, "sufficiency_report.json"));
    std::cout << "verdict: " << run.results["verdict"].get<std::string>()
              << " (fisher-neyman: " << (fn ? "true" : "false") << ")\n";
    return rep.verdict == SuffVerdict::sufficient ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Markov kernel calculus, shrinking-ball Bayes, and Dirichlet measures"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalFlags g;
    app.add_option("--seed", g.seed, "root seed threaded through all sampling");
    app.add_option("--out", g.out_dir, "output directory for reports");
    app.add_option("--tolerance", g.tolerance, "override the per-command check tolerance");

    std::string config_path, method, schedule_arg, data_arg;
    auto* posterior = app.add_subcommand("posterior", "run a posterior computation on a model config");
    posterior->add_option("--config", config_path, "model config JSON")->required();
    posterior->add_option("--method", method, "exact|classical|ball|lopital (overrides config)");
    posterior->add_option("--schedule", schedule_arg, "r0,ratio,steps");
    posterior->add_option("--data", data_arg, "JSON array overriding the config data list");

    std::size_t sizes = 6, trials = 100;
    bool inject_fault = false;
    auto* laws = app.add_subcommand("laws-check", "verify the monad/category laws on random kernels");
    laws->add_option("--sizes", sizes, "max space size");
    laws->add_option("--trials", trials, "random trials");
    laws->add_flag("--inject-fault", inject_fault, "testing hook: perturb one law");

    std::string dp_config;
    std::size_t dp_n = 1, dp_max_atoms = 0;
    double dp_remainder_tol = 1e-10;
    auto* dp = app.add_subcommand("dp-sample", "draw truncated stick-breaking samples");
    dp->add_option("--config", dp_config, "alpha spec JSON ({space, alpha})");
    dp->add_option("--n", dp_n, "number of draws");
    dp->add_option("--max-atoms", dp_max_atoms, "truncation atom cap (0 = remainder rule)");
    dp->add_option("--remainder-tol", dp_remainder_tol, "stop when the remainder falls below");

    std::size_t dir_n = 10000;
    auto* dir = app.add_subcommand("dir-check", "run the Dirichlet verification suite");
    dir->add_option("--n", dir_n, "draws per check");

    std::string suff_config;
    auto* suff = app.add_subcommand("sufficiency-check", "check a statistic against a finite model");
    suff->add_option("--config", suff_config, "sufficiency config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string command = join_args(argc, argv);
    try {
        if (posterior->parsed())
            return run_posterior(g, config_path, method, schedule_arg, data_arg, command);
        if (laws->parsed()) return run_laws_check(g, sizes, trials, inject_fault, command);
        if (dp->parsed())
            return run_dp_sample(g, dp_config, dp_n, dp_max_atoms, dp_remainder_tol, command);
        if (dir->parsed()) return run_dir_check(g, dir_n, command);
        if (suff->parsed()) return run_sufficiency_check(g, suff_config, command);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
