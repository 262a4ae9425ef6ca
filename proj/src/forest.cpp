#include "mvq/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "mvq/parallel.hpp"
#include "mvq/rng.hpp"

namespace mvq {

namespace {

double gini(std::span<const double> counts, double total) {
    double sum_sq = 0.0;
    for (double c : counts) sum_sq += c * c;
    return 1.0 - sum_sq / (total * total);
}

struct TreeBuilder {
    const FeatureMatrix& X;
    const std::vector<std::int32_t>& y_idx;  // class indices per row
    std::size_t n_classes;
    std::size_t mtry;
    std::size_t min_samples_split;
    std::size_t max_depth;  // SIZE_MAX when unlimited
    SplitMix64 rng;
    double total_rows;  // rows this tree trains on, for gain weighting

    ForestModel::Tree tree;
    std::vector<double> gain_totals;

    std::vector<std::int32_t> rows;                    // in-place partitioned
    std::vector<std::pair<double, std::int32_t>> scratch;  // (value, class)
    std::vector<std::size_t> feature_pool;
    std::vector<double> left_counts;

    TreeBuilder(const FeatureMatrix& X_, const std::vector<std::int32_t>& y_,
                std::size_t n_classes_, std::size_t mtry_, std::size_t min_split,
                std::size_t depth_cap, std::uint64_t seed)
        : X(X_), y_idx(y_), n_classes(n_classes_), mtry(mtry_), min_samples_split(min_split),
          max_depth(depth_cap), rng(seed), total_rows(0), gain_totals(X_.cols, 0.0),
          feature_pool(X_.cols), left_counts(n_classes_, 0.0) {
        std::iota(feature_pool.begin(), feature_pool.end(), 0);
    }

    std::int32_t build(std::size_t lo, std::size_t hi, std::size_t depth) {
        std::vector<double> counts(n_classes, 0.0);
        for (std::size_t i = lo; i < hi; ++i) counts[y_idx[rows[i]]] += 1.0;
        const double n = static_cast<double>(hi - lo);

        std::int32_t node_id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.emplace_back();

        bool pure = false;
        for (double c : counts) {
            if (c == n) pure = true;
        }
        if (pure || hi - lo < min_samples_split || depth >= max_depth) {
            tree.nodes[node_id].histogram = std::move(counts);
            return node_id;
        }

        // Candidate features: partial Fisher-Yates over the pool; the pool
        // order persists across nodes, which is fine since each draw is
        // uniform over all features.
        for (std::size_t i = 0; i < mtry; ++i) {
            std::size_t j = i + static_cast<std::size_t>(
                                    rng.next_below(feature_pool.size() - i));
            std::swap(feature_pool[i], feature_pool[j]);
        }

        const double parent_gini = gini(counts, n);
        double best_gain = -1.0;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;

        for (std::size_t f = 0; f < mtry; ++f) {
            const std::size_t feature = feature_pool[f];
            scratch.clear();
            for (std::size_t i = lo; i < hi; ++i)
                scratch.emplace_back(X.at(rows[i], feature), y_idx[rows[i]]);
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (scratch.front().first == scratch.back().first) continue;

            std::fill(left_counts.begin(), left_counts.end(), 0.0);
            double n_left = 0.0;
            for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
                left_counts[scratch[i].second] += 1.0;
                n_left += 1.0;
                if (scratch[i].first == scratch[i + 1].first) continue;
                double n_right = n - n_left;
                double g_left = gini(left_counts, n_left);
                double sum_sq_right = 0.0;
                for (std::size_t c = 0; c < n_classes; ++c) {
                    double r = counts[c] - left_counts[c];
                    sum_sq_right += r * r;
                }
                double g_right = 1.0 - sum_sq_right / (n_right * n_right);
                double gain = parent_gini - (n_left / n) * g_left - (n_right / n) * g_right;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = feature;
                    best_threshold = scratch[i].first + 0.5 * (scratch[i + 1].first - scratch[i].first);
                }
            }
        }

        if (best_gain < 0.0) {  // no candidate feature had two distinct values
            tree.nodes[node_id].histogram = std::move(counts);
            return node_id;
        }

        gain_totals[best_feature] += (n / total_rows) * best_gain;

        auto mid_it = std::stable_partition(
            rows.begin() + lo, rows.begin() + hi,
            [&](std::int32_t r) { return X.at(r, best_feature) < best_threshold; });
        std::size_t mid = static_cast<std::size_t>(mid_it - rows.begin());

        tree.nodes[node_id].feature = static_cast<std::int32_t>(best_feature);
        tree.nodes[node_id].threshold = best_threshold;
        std::int32_t left = build(lo, mid, depth + 1);
        std::int32_t right = build(mid, hi, depth + 1);
        tree.nodes[node_id].left = left;
        tree.nodes[node_id].right = right;
        return node_id;
    }
};

std::size_t leaf_of(const ForestModel::Tree& tree, std::span<const double> x) {
    std::size_t node = 0;
    while (tree.nodes[node].feature >= 0) {
        const auto& nd = tree.nodes[node];
        node = static_cast<std::size_t>(x[nd.feature] < nd.threshold ? nd.left : nd.right);
    }
    return node;
}

std::size_t argmax_smallest(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

}  // namespace

ForestModel fit_forest(const FeatureMatrix& X, const std::vector<int>& y,
                       const ForestConfig& cfg) {
    if (cfg.n_trees < 1) throw std::invalid_argument("forest: n_trees must be >= 1");
    if (X.rows < 2) throw std::invalid_argument("forest: need at least 2 samples");
    if (X.rows != y.size()) throw std::invalid_argument("forest: X/y length mismatch");
    if (X.cols < 1) throw std::invalid_argument("forest: no features");
    for (double v : X.data) {
        if (std::isnan(v)) throw std::invalid_argument("forest: NaN features");
    }

    std::set<int> class_set(y.begin(), y.end());
    if (class_set.size() < 2) throw std::invalid_argument("degenerate labels");
    std::vector<int> classes(class_set.begin(), class_set.end());

    std::vector<std::int32_t> y_idx(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        auto it = std::lower_bound(classes.begin(), classes.end(), y[i]);
        y_idx[i] = static_cast<std::int32_t>(it - classes.begin());
    }

    std::size_t mtry;
    switch (cfg.max_features) {
        case ForestConfig::MaxFeatures::all_features:
            mtry = X.cols;
            break;
        case ForestConfig::MaxFeatures::fixed:
            if (cfg.fixed_feature_count < 1)
                throw std::invalid_argument("forest: fixed_feature_count must be >= 1");
            mtry = std::min(cfg.fixed_feature_count, X.cols);
            break;
        case ForestConfig::MaxFeatures::sqrt_features:
        default:
            mtry = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::sqrt(static_cast<double>(X.cols))));
            break;
    }

    ForestModel model;
    model.classes_ = std::move(classes);
    model.n_features_ = X.cols;
    model.trees_.resize(cfg.n_trees);
    std::vector<std::vector<double>> per_tree_gains(cfg.n_trees);

    const std::size_t depth_cap = cfg.max_depth.value_or(SIZE_MAX);
    parallel_for(cfg.n_trees, cfg.threads, [&](std::size_t t) {
        std::uint64_t tree_seed = derive_seed(cfg.seed, t);
        TreeBuilder builder(X, y_idx, model.classes_.size(), mtry, cfg.min_samples_split,
                            depth_cap, derive_seed(tree_seed, 0x01));
        if (cfg.bootstrap) {
            SplitMix64 boot(derive_seed(tree_seed, 0x02));
            builder.rows.resize(X.rows);
            for (auto& r : builder.rows)
                r = static_cast<std::int32_t>(boot.next_below(X.rows));
        } else {
            builder.rows.resize(X.rows);
            std::iota(builder.rows.begin(), builder.rows.end(), 0);
        }
        builder.total_rows = static_cast<double>(builder.rows.size());
        builder.build(0, builder.rows.size(), 0);
        model.trees_[t] = std::move(builder.tree);
        per_tree_gains[t] = std::move(builder.gain_totals);
    });

    model.split_gain_totals_.assign(X.cols, 0.0);
    for (const auto& gains : per_tree_gains) {
        for (std::size_t f = 0; f < X.cols; ++f) model.split_gain_totals_[f] += gains[f];
    }
    for (double& g : model.split_gain_totals_) g /= static_cast<double>(cfg.n_trees);
    return model;
}

int ForestModel::predict_row(std::span<const double> x) const {
    if (x.size() != n_features_)
        throw std::invalid_argument("forest: feature width mismatch");
    std::vector<double> votes(classes_.size(), 0.0);
    for (const auto& tree : trees_) {
        const auto& hist = tree.nodes[leaf_of(tree, x)].histogram;
        votes[argmax_smallest(hist)] += 1.0;
    }
    return classes_[argmax_smallest(votes)];
}

std::vector<int> ForestModel::predict(const FeatureMatrix& X) const {
    std::vector<int> out(X.rows);
    for (std::size_t r = 0; r < X.rows; ++r) out[r] = predict_row(X.row(r));
    return out;
}

std::vector<int> predict(const ForestModel& model, const FeatureMatrix& X) {
    return model.predict(X);
}

double accuracy(const ForestModel& model, const FeatureMatrix& X, const std::vector<int>& y) {
    if (X.rows == 0) throw std::invalid_argument("empty evaluation set");
    if (X.rows != y.size()) throw std::invalid_argument("accuracy: X/y length mismatch");
    auto predicted = model.predict(X);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (predicted[i] == y[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(y.size());
}

}  // namespace mvq
