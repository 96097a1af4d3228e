#ifndef MARKOV_SPACE_HPP
#define MARKOV_SPACE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace markov {

/// A point of a sample space: a label index on finite spaces, a coordinate
/// vector on euclidean ones.
class Point {
public:
    Point() = default;

    static Point label(std::size_t index) {
        Point p;
        p.value_ = index;
        return p;
    }
    static Point real(double x) { return vec({x}); }
    static Point vec(std::vector<double> coords) {
        Point p;
        p.value_ = std::move(coords);
        return p;
    }

    bool is_label() const { return std::holds_alternative<std::size_t>(value_); }
    std::size_t label_index() const { return std::get<std::size_t>(value_); }
    const std::vector<double>& coords() const { return std::get<std::vector<double>>(value_); }
    double x() const { return coords().at(0); }

private:
    std::variant<std::size_t, std::vector<double>> value_;
};

/// Axis-aligned box in R^d.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }

    bool contains(const std::vector<double>& x) const {
        if (x.size() != lo.size()) return false;
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }

    double volume() const {
        double v = 1.0;
        for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
        return v;
    }
};

/// Sample space: either a finite label set Omega_k carrying the discrete
/// metric, or a bounded axis-aligned box in R^d with the Euclidean metric.
/// Cheap to copy; equality is structural.
class SampleSpace {
    struct FiniteData {
        std::vector<std::string> labels;
    };
    struct EuclideanData {
        Box bounds;
    };
    struct Impl {
        std::variant<FiniteData, EuclideanData> data;
    };

public:
    static SampleSpace finite(std::vector<std::string> labels) {
        if (labels.empty()) throw std::invalid_argument("finite space needs at least one label");
        for (std::size_t i = 0; i < labels.size(); ++i)
            for (std::size_t j = i + 1; j < labels.size(); ++j)
                if (labels[i] == labels[j])
                    throw std::invalid_argument("finite space labels must be distinct: " + labels[i]);
        SampleSpace s;
        s.impl_ = std::make_shared<Impl>(Impl{FiniteData{std::move(labels)}});
        return s;
    }

    /// Omega_k with labels "w1".."wk".
    static SampleSpace omega(std::size_t k) {
        std::vector<std::string> labels;
        labels.reserve(k);
        for (std::size_t i = 1; i <= k; ++i) labels.push_back("w" + std::to_string(i));
        return finite(std::move(labels));
    }

    static SampleSpace box(Box bounds) {
        if (bounds.lo.empty() || bounds.lo.size() != bounds.hi.size())
            throw std::invalid_argument("euclidean space needs dim >= 1");
        for (std::size_t i = 0; i < bounds.lo.size(); ++i)
            if (!(bounds.lo[i] < bounds.hi[i]))
                throw std::invalid_argument("euclidean bounds must define a nonempty box");
        SampleSpace s;
        s.impl_ = std::make_shared<Impl>(Impl{EuclideanData{std::move(bounds)}});
        return s;
    }

    static SampleSpace interval(double lo, double hi) { return box(Box{{lo}, {hi}}); }

    bool is_finite() const { return std::holds_alternative<FiniteData>(impl_->data); }
    bool is_euclidean() const { return !is_finite(); }

    const std::vector<std::string>& labels() const { return std::get<FiniteData>(impl_->data).labels; }
    std::size_t size() const { return labels().size(); }

    const Box& bounds() const { return std::get<EuclideanData>(impl_->data).bounds; }
    std::size_t dim() const { return bounds().dim(); }

    std::size_t label_index(const std::string& name) const {
        const auto& ls = labels();
        auto it = std::find(ls.begin(), ls.end(), name);
        if (it == ls.end()) throw std::invalid_argument("unknown label: " + name);
        return static_cast<std::size_t>(it - ls.begin());
    }

    bool contains(const Point& p) const {
        if (is_finite()) return p.is_label() && p.label_index() < size();
        return !p.is_label() && bounds().contains(p.coords());
    }

    /// Discrete metric on finite spaces, Euclidean on boxes.
    double distance(const Point& a, const Point& b) const {
        if (is_finite()) return a.label_index() == b.label_index() ? 0.0 : 1.0;
        const auto& u = a.coords();
        const auto& v = b.coords();
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
        return std::sqrt(s);
    }

    double diameter() const {
        if (is_finite()) return 1.0;
        const Box& b = bounds();
        double s = 0.0;
        for (std::size_t i = 0; i < b.dim(); ++i) s += (b.hi[i] - b.lo[i]) * (b.hi[i] - b.lo[i]);
        return std::sqrt(s);
    }

    friend bool operator==(const SampleSpace& a, const SampleSpace& b) {
        if (a.impl_ == b.impl_) return true;
        if (a.is_finite() != b.is_finite()) return false;
        if (a.is_finite()) return a.labels() == b.labels();
        return a.bounds().lo == b.bounds().lo && a.bounds().hi == b.bounds().hi;
    }
    friend bool operator!=(const SampleSpace& a, const SampleSpace& b) { return !(a == b); }

private:
    std::shared_ptr<const Impl> impl_;
};

inline void require_same_space(const SampleSpace& a, const SampleSpace& b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": sample space mismatch");
}

/// Measurable region: on finite spaces a label subset, on euclidean spaces a
/// finite union of boxes (assumed pairwise disjoint except in 1-D, where
/// overlapping intervals are merged before any mass computation).
struct Region {
    std::vector<std::size_t> labels;  // finite case
    std::vector<Box> boxes;           // euclidean case

    static Region of_labels(std::vector<std::size_t> ls) { return Region{std::move(ls), {}}; }
    static Region of_boxes(std::vector<Box> bs) { return Region{{}, std::move(bs)}; }
    static Region of_interval(double lo, double hi) { return of_boxes({Box{{lo}, {hi}}}); }

    bool contains(const Point& p) const {
        if (p.is_label()) {
            return std::find(labels.begin(), labels.end(), p.label_index()) != labels.end();
        }
        for (const Box& b : boxes)
            if (b.contains(p.coords())) return true;
        return false;
    }

    /// 1-D intervals, sorted and overlap-merged.
    std::vector<std::pair<double, double>> merged_intervals() const {
        std::vector<std::pair<double, double>> iv;
        iv.reserve(boxes.size());
        for (const Box& b : boxes) iv.emplace_back(b.lo[0], b.hi[0]);
        std::sort(iv.begin(), iv.end());
        std::vector<std::pair<double, double>> out;
        for (auto [lo, hi] : iv) {
            if (!out.empty() && lo <= out.back().second)
                out.back().second = std::max(out.back().second, hi);
            else
                out.emplace_back(lo, hi);
        }
        return out;
    }
};

}  // namespace markov

#endif
