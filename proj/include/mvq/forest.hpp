#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mvq/matrix.hpp"

namespace mvq {

struct ForestConfig {
    std::size_t n_trees = 100;
    enum class MaxFeatures { sqrt_features, all_features, fixed };
    MaxFeatures max_features = MaxFeatures::sqrt_features;
    std::size_t fixed_feature_count = 0;  // fixed mode only
    std::size_t min_samples_split = 2;
    std::optional<std::size_t> max_depth;  // nullopt = grow to purity
    bool bootstrap = true;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

// Axis-aligned CART trees, Gini impurity, midpoint thresholds. Splits with
// zero gain are taken as long as they separate distinct feature values, so
// trees grow to purity unless rows with identical features disagree.
class ForestModel {
public:
    struct Node {
        std::int32_t feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::vector<double> histogram;  // leaf class counts, class-index order
    };
    struct Tree {
        std::vector<Node> nodes;
    };

    // Canonical class ordering: ascending label value. Vote ties resolve to
    // the smallest label under this ordering.
    const std::vector<int>& classes() const { return classes_; }
    std::size_t n_features() const { return n_features_; }
    std::size_t n_trees() const { return trees_.size(); }

    int predict_row(std::span<const double> x) const;
    std::vector<int> predict(const FeatureMatrix& X) const;

    // Mean over trees of the impurity decrease contributed by each feature,
    // weighted by the fraction of samples reaching the split.
    const std::vector<double>& split_gain_totals() const { return split_gain_totals_; }

    const std::vector<Tree>& trees() const { return trees_; }

private:
    friend ForestModel fit_forest(const FeatureMatrix&, const std::vector<int>&,
                                  const ForestConfig&);
    std::vector<int> classes_;
    std::vector<Tree> trees_;
    std::vector<double> split_gain_totals_;
    std::size_t n_features_ = 0;
};

ForestModel fit_forest(const FeatureMatrix& X, const std::vector<int>& y,
                       const ForestConfig& cfg);

std::vector<int> predict(const ForestModel& model, const FeatureMatrix& X);
double accuracy(const ForestModel& model, const FeatureMatrix& X, const std::vector<int>& y);

}  // namespace mvq
