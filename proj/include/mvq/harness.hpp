#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvq/forest.hpp"
#include "mvq/point_measure.hpp"
#include "mvq/quantizer.hpp"
#include "mvq/vectorizer.hpp"

namespace mvq {

// Codebook source: the quantized mean measure, or a fixed regular grid of
// the same total budget for comparison.
enum class Baseline { quantized, grid };

// auto_select follows the dataset size: batch below the threshold,
// single-pass minibatch at or above it.
enum class QuantizerChoice { auto_select, batch, minibatch };
inline constexpr std::size_t kMinibatchThreshold = 1000;

struct ExperimentConfig {
    std::size_t budget = 100;
    ContrastFamily family = ContrastFamily::laplacian;
    double calibration_fraction = 0.10;
    double split_ratio = 0.70;  // train share of each class
    std::size_t n_repetitions = 10;
    QuantizerChoice quantizer = QuantizerChoice::auto_select;
    std::size_t minibatch_size = 1024;
    std::size_t quantizer_max_iterations = 300;
    double quantizer_tolerance = 1e-9;
    ForestConfig forest;  // seed is rederived per repetition
    BandwidthSpec bandwidth = BandwidthSpec::adaptive();
    Baseline baseline = Baseline::quantized;
    std::array<double, 4> grid_domain{0.0, 0.0, 1.0, 1.0};  // x0,y0,x1,y1
    std::uint64_t master_seed = 0;
    std::size_t threads = 1;
};

// A labeled collection plus optional per-measure content ids. When ids are
// present, splits and row order are keyed on them instead of positions, so
// reordering the dataset does not change any result.
struct LabeledDataset {
    MeasureCollection collection;
    std::vector<std::uint64_t> content_ids;  // empty, or one id per measure
};

struct ExperimentReport {
    std::vector<double> accuracies;  // one per repetition
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // population std over repetitions
    // Mean per-repetition wall time of calibration plus transforming the
    // entire dataset.
    double vectorization_seconds = 0.0;
    ExperimentConfig config;
    std::string host;
};

// Index sets of one repetition, as positions in the content-canonical
// ordering of the dataset. calibration is a subset of train; test is
// disjoint from both.
struct SplitPlan {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::vector<std::size_t> calibration;
};

// Dataset indices in canonical order: sorted by content id when ids are
// present, identity otherwise.
std::vector<std::size_t> canonical_order(const LabeledDataset& dataset);

SplitPlan plan_repetition(const LabeledDataset& dataset, const ExperimentConfig& cfg,
                          std::size_t repetition);

// Per repetition: seeded stratified split, unsupervised calibration on the
// configured fraction of the training measures, transform of the whole
// dataset, forest fit on the train rows, accuracy on the test rows.
ExperimentReport run_experiment(const LabeledDataset& dataset, const ExperimentConfig& cfg);

// floor(sqrt(b))^2 centers at the cell centers of a regular partition of
// the domain, adaptive bandwidths (all equal to half the grid step).
Codebook grid_codebook(std::size_t budget,
                       const std::array<double, 4>& domain = {0.0, 0.0, 1.0, 1.0});

struct AblationAxes {
    std::vector<std::size_t> budgets;
    bool family_pair = false;
    std::vector<double> calibration_fractions;
    bool include_grid = false;
};

struct AblationCell {
    std::string axis;     // "budget" | "family" | "calibration"
    std::string setting;  // value of the varied parameter
    ExperimentReport quantized;
    std::optional<ExperimentReport> grid;
};

// One parameter varied at a time around the base configuration.
std::vector<AblationCell> run_ablation(const LabeledDataset& dataset,
                                       const ExperimentConfig& base, const AblationAxes& axes);
std::string render_ablation_table(const std::vector<AblationCell>& cells);

// Constant-bandwidth grid: sigma = mu * 10^e where mu is the mean pairwise
// distance between codebook centers.
inline constexpr std::array<double, 13> kSweepExponents{
    -2.0, -1.5, -1.0, -0.5, -0.2, -0.1, 0.0, 0.1, 0.2, 0.5, 1.0, 1.5, 2.0};

struct SweepEntry {
    double exponent = 0.0;
    double mean_sigma = 0.0;  // mean over repetitions of mu * 10^e
    std::vector<double> accuracies;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
};

struct SweepReport {
    std::vector<SweepEntry> constant_entries;
    SweepEntry adaptive;              // the Eq-style per-center bandwidths
    double mean_pairwise_distance = 0.0;  // mean over repetitions of mu
    ExperimentConfig config;
};

// Shares the per-repetition codebook between the adaptive reference and all
// constant-sigma entries, so the adaptive entry reproduces run_experiment
// with adaptive bandwidths bit for bit.
SweepReport run_bandwidth_sweep(const LabeledDataset& dataset, const ExperimentConfig& cfg,
                                std::span<const double> exponents = kSweepExponents);

struct SeparationReport {
    double max_intra_gap = 0.0;  // largest inf-norm distance within a source
    double min_inter_gap = 0.0;  // smallest inf-norm distance across sources
    std::size_t samples_per_source = 0;
};

// Samples noisy copies of two atom sets (each atom perturbed uniformly in
// a ball of the given radius), calibrates unsupervised on the pooled
// sample, and reports the two inf-norm gap statistics of the embedding.
SeparationReport separation_probe(const PointMeasure& source_a, const PointMeasure& source_b,
                                  std::size_t samples_per_source, double noise_radius,
                                  std::size_t budget, std::uint64_t seed);

double mean_of(std::span<const double> values);
double population_std(std::span<const double> values);
std::string host_descriptor();

}  // namespace mvq
