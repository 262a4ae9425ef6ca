#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mvq {

// A finite weighted point set in R^d. Atoms are stored as a flat row-major
// coordinate block plus one nonnegative weight per atom. Immutable after
// construction; persistence diagrams are the d=2 case with unit weights.
class PointMeasure {
public:
    PointMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights);

    // All atoms get weight 1 (a sum of Dirac masses).
    static PointMeasure diracs(std::size_t dim, std::vector<double> coords);
    static PointMeasure empty(std::size_t dim);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return weights_.size(); }

    std::span<const double> point(std::size_t k) const {
        return {coords_.data() + k * dim_, dim_};
    }
    double weight(std::size_t k) const { return weights_[k]; }

    const std::vector<double>& coords() const { return coords_; }
    const std::vector<double>& weights() const { return weights_; }

    double mass() const;

    // Discrete integral: sum_k w_k f(x_k). F takes a span of d coordinates.
    template <typename F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < size(); ++k) acc += weights_[k] * f(point(k));
        return acc;
    }

    // Coordinate-identical atoms collapsed into one atom with summed weight,
    // first-occurrence order. Integration results are unchanged.
    PointMeasure merged() const;

    double max_point_norm() const;
    // On-demand bound check against a ball radius and a mass cap.
    bool within_bounds(double radius, double max_mass) const;

private:
    std::size_t dim_;
    std::vector<double> coords_;   // size() * dim_
    std::vector<double> weights_;  // size()
};

template <typename F>
double integrate(const PointMeasure& m, F&& f) {
    return m.integrate(static_cast<F&&>(f));
}

// Union of atoms with weights scaled by alpha and beta.
PointMeasure superpose(const PointMeasure& a, double alpha, const PointMeasure& b, double beta);

// An ordered list of measures sharing one dimension, optionally labeled.
class MeasureCollection {
public:
    MeasureCollection() = default;
    explicit MeasureCollection(std::vector<PointMeasure> measures);
    MeasureCollection(std::vector<PointMeasure> measures, std::vector<int> labels);

    std::size_t size() const { return measures_.size(); }
    bool empty() const { return measures_.empty(); }
    std::size_t dim() const;

    const PointMeasure& operator[](std::size_t i) const { return measures_[i]; }
    const std::vector<PointMeasure>& measures() const { return measures_; }

    bool has_labels() const { return labels_.has_value(); }
    const std::vector<int>& labels() const;
    void set_labels(std::vector<int> labels);

    // Same measures, labels dropped.
    MeasureCollection without_labels() const;
    MeasureCollection subset(std::span<const std::size_t> indices, bool keep_labels = true) const;

private:
    std::vector<PointMeasure> measures_;
    std::optional<std::vector<int>> labels_;
};

// The empirical mean measure: concatenation of every atom with each weight
// divided by the number of measures. Throws on an empty collection.
PointMeasure empirical_mean_support(const MeasureCollection& collection);

}  // namespace mvq
