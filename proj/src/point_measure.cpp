#include "mvq/point_measure.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

namespace mvq {

namespace {

// Hash key over the exact coordinate bytes of one atom. -0.0 is normalized
// to 0.0 first so numerically equal points always collide.
struct AtomKey {
    const double* data;
    std::size_t dim;

    bool operator==(const AtomKey& other) const {
        for (std::size_t i = 0; i < dim; ++i) {
            if (data[i] != other.data[i]) return false;
        }
        return true;
    }
};

struct AtomKeyHash {
    std::size_t operator()(const AtomKey& k) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::size_t i = 0; i < k.dim; ++i) {
            std::uint64_t bits;
            std::memcpy(&bits, &k.data[i], sizeof bits);
            h = (h ^ bits) * 0x100000001b3ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

PointMeasure::PointMeasure(std::size_t dim, std::vector<double> coords,
                           std::vector<double> weights)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
    if (dim_ == 0) throw std::invalid_argument("PointMeasure: dim must be positive");
    if (coords_.size() != weights_.size() * dim_)
        throw std::invalid_argument("PointMeasure: coords/weights length mismatch");
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("PointMeasure: weights must be finite and >= 0");
    }
    for (double& c : coords_) {
        if (!std::isfinite(c)) throw std::invalid_argument("PointMeasure: non-finite coordinate");
        if (c == 0.0) c = 0.0;  // -0.0 -> +0.0 so byte-level atom comparisons match numeric equality
    }
}

PointMeasure PointMeasure::diracs(std::size_t dim, std::vector<double> coords) {
    if (dim == 0 || coords.size() % dim != 0)
        throw std::invalid_argument("PointMeasure::diracs: coords not a multiple of dim");
    std::vector<double> weights(coords.size() / dim, 1.0);
    return {dim, std::move(coords), std::move(weights)};
}

PointMeasure PointMeasure::empty(std::size_t dim) { return {dim, {}, {}}; }

double PointMeasure::mass() const {
    double total = 0.0;
    for (double w : weights_) total += w;
    return total;
}

PointMeasure PointMeasure::merged() const {
    std::unordered_map<AtomKey, std::size_t, AtomKeyHash> slot;
    slot.reserve(size());
    std::vector<double> coords;
    std::vector<double> weights;
    coords.reserve(coords_.size());
    weights.reserve(weights_.size());
    for (std::size_t k = 0; k < size(); ++k) {
        AtomKey key{coords_.data() + k * dim_, dim_};
        // Keys point into coords_, which is stable for the whole loop.
        auto [it, inserted] = slot.try_emplace(key, weights.size());
        if (inserted) {
            coords.insert(coords.end(), key.data, key.data + dim_);
            weights.push_back(weights_[k]);
        } else {
            weights[it->second] += weights_[k];
        }
    }
    return {dim_, std::move(coords), std::move(weights)};
}

double PointMeasure::max_point_norm() const {
    double best = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
        double sq = 0.0;
        for (double c : point(k)) sq += c * c;
        if (sq > best) best = sq;
    }
    return std::sqrt(best);
}

bool PointMeasure::within_bounds(double radius, double max_mass) const {
    return max_point_norm() <= radius && mass() <= max_mass;
}

PointMeasure superpose(const PointMeasure& a, double alpha, const PointMeasure& b, double beta) {
    if (a.dim() != b.dim()) throw std::invalid_argument("superpose: dimension mismatch");
    std::vector<double> coords = a.coords();
    coords.insert(coords.end(), b.coords().begin(), b.coords().end());
    std::vector<double> weights;
    weights.reserve(a.size() + b.size());
    for (double w : a.weights()) weights.push_back(alpha * w);
    for (double w : b.weights()) weights.push_back(beta * w);
    return {a.dim(), std::move(coords), std::move(weights)};
}

MeasureCollection::MeasureCollection(std::vector<PointMeasure> measures)
    : measures_(std::move(measures)) {
    dim();  // validates homogeneity
}

MeasureCollection::MeasureCollection(std::vector<PointMeasure> measures, std::vector<int> labels)
    : measures_(std::move(measures)), labels_(std::move(labels)) {
    if (labels_->size() != measures_.size())
        throw std::invalid_argument("MeasureCollection: labels length mismatch");
    dim();
}

std::size_t MeasureCollection::dim() const {
    if (measures_.empty()) return 0;
    std::size_t d = measures_.front().dim();
    for (const auto& m : measures_) {
        if (m.dim() != d)
            throw std::invalid_argument("MeasureCollection: inconsistent dimension");
    }
    return d;
}

const std::vector<int>& MeasureCollection::labels() const {
    if (!labels_) throw std::logic_error("MeasureCollection: no labels attached");
    return *labels_;
}

void MeasureCollection::set_labels(std::vector<int> labels) {
    if (labels.size() != measures_.size())
        throw std::invalid_argument("MeasureCollection: labels length mismatch");
    labels_ = std::move(labels);
}

MeasureCollection MeasureCollection::without_labels() const {
    return MeasureCollection(measures_);
}

MeasureCollection MeasureCollection::subset(std::span<const std::size_t> indices,
                                            bool keep_labels) const {
    std::vector<PointMeasure> measures;
    measures.reserve(indices.size());
    for (std::size_t i : indices) measures.push_back(measures_.at(i));
    if (labels_ && keep_labels) {
        std::vector<int> labels;
        labels.reserve(indices.size());
        for (std::size_t i : indices) labels.push_back((*labels_)[i]);
        return {std::move(measures), std::move(labels)};
    }
    return MeasureCollection(std::move(measures));
}

PointMeasure empirical_mean_support(const MeasureCollection& collection) {
    if (collection.empty()) throw std::invalid_argument("empty collection");
    const std::size_t d = collection.dim();
    const double inv_n = 1.0 / static_cast<double>(collection.size());
    std::vector<double> coords;
    std::vector<double> weights;
    for (const auto& m : collection.measures()) {
        coords.insert(coords.end(), m.coords().begin(), m.coords().end());
        for (double w : m.weights()) weights.push_back(w * inv_n);
    }
    return {d, std::move(coords), std::move(weights)};
}

}  // namespace mvq
