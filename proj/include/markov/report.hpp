#ifndef MARKOV_REPORT_HPP
#define MARKOV_REPORT_HPP

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "markov/bayes.hpp"
#include "markov/dirichlet.hpp"

namespace markov {

/// Reproducible run record: command echo, seed, config digest, and the
/// results payload. Replaying the command with the same seed reproduces the
/// payload (bit-for-bit for exact methods).
inline constexpr const char* kVersion = "0.1.0";

struct RunReport {
    std::string command;
    std::uint64_t seed = 0;
    std::string config_digest = "-";
    nlohmann::json results;
    double wall_ms = 0.0;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["version"] = kVersion;
        j["command"] = command;
        j["seed"] = seed;
        j["config_digest"] = config_digest;
        j["results"] = results;
        j["wall_ms"] = wall_ms;
        return j;
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write report: " + path);
        out << to_json().dump(2) << "\n";
    }
};

class StopWatch {
public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline nlohmann::json posterior_to_json(const PosteriorReport& rep) {
    nlohmann::json j;
    j["method"] = rep.method;
    j["posterior"] = rep.posterior;
    j["posterior_raw"] = rep.posterior_raw;
    j["converged"] = rep.converged;
    j["singular"] = rep.singular;
    j["monotone_denominator"] = rep.monotone_denominator;
    j["extrapolated"] = rep.extrapolated;
    j["dui_verified"] = rep.dui_verified;
    j["effective_sample_size"] = rep.effective_sample_size;
    j["queries"] = rep.queries;
    j["trace_rows"] = rep.trace.size();
    return j;
}

/// Trace CSV: r, one numerator per query, the denominator, one ratio per query.
inline std::string trace_csv(const PosteriorReport& rep) {
    std::ostringstream os;
    os.precision(17);
    os << "r";
    for (std::size_t k = 0; k < rep.queries.size(); ++k) os << ",num_" << k;
    os << ",den";
    for (std::size_t k = 0; k < rep.queries.size(); ++k) os << ",ratio_" << k;
    os << "\n";
    for (const TraceRow& row : rep.trace) {
        os << row.r;
        for (double v : row.numerators) os << "," << v;
        os << "," << row.denominator;
        for (double v : row.ratios) os << "," << v;
        os << "\n";
    }
    return os.str();
}

/// Stick-breaking atoms CSV: draw, atom index, location coordinates, weight,
/// remainder of the draw.
inline std::string dp_sample_csv(const std::vector<DPSample>& draws) {
    std::ostringstream os;
    os.precision(17);
    std::size_t dim = 1;
    if (!draws.empty() && !draws.front().atoms.empty() &&
        !draws.front().atoms.front().first.is_label())
        dim = draws.front().atoms.front().first.coords().size();
    os << "draw,i";
    for (std::size_t d = 0; d < dim; ++d) os << ",q" << d;
    os << ",p,remainder\n";
    for (std::size_t n = 0; n < draws.size(); ++n) {
        const DPSample& s = draws[n];
        for (std::size_t i = 0; i < s.atoms.size(); ++i) {
            os << n << "," << i;
            const Point& q = s.atoms[i].first;
            if (q.is_label())
                os << "," << q.label_index();
            else
                for (double c : q.coords()) os << "," << c;
            os << "," << s.atoms[i].second << "," << s.remainder << "\n";
        }
    }
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << text;
}

}  // namespace markov

#endif
