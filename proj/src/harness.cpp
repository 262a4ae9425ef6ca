#include "mvq/harness.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mvq/parallel.hpp"
#include "mvq/rng.hpp"

namespace mvq {

namespace {

constexpr std::uint64_t kRepStream = 0x100;
constexpr std::uint64_t kSplitStream = 0x200;
constexpr std::uint64_t kQuantStream = 0x300;
constexpr std::uint64_t kForestStream = 0x400;
constexpr std::uint64_t kProbeSourceA = 0x500;
constexpr std::uint64_t kProbeSourceB = 0x600;

void validate(const LabeledDataset& dataset, const ExperimentConfig& cfg) {
    if (!dataset.collection.has_labels())
        throw std::invalid_argument("experiment: dataset has no labels");
    if (!dataset.content_ids.empty() && dataset.content_ids.size() != dataset.collection.size())
        throw std::invalid_argument("experiment: content_ids length mismatch");
    if (!(cfg.split_ratio > 0.0) || !(cfg.split_ratio < 1.0))
        throw std::invalid_argument("experiment: split_ratio must be in (0,1)");
    if (cfg.n_repetitions < 1)
        throw std::invalid_argument("experiment: n_repetitions must be >= 1");
    if (cfg.budget < 1) throw std::invalid_argument("experiment: budget must be >= 1");
}

QuantizerMode resolve_mode(QuantizerChoice choice, std::size_t n_measures) {
    switch (choice) {
        case QuantizerChoice::batch:
            return QuantizerMode::batch_lloyd;
        case QuantizerChoice::minibatch:
            return QuantizerMode::minibatch_macqueen;
        case QuantizerChoice::auto_select:
        default:
            return n_measures >= kMinibatchThreshold ? QuantizerMode::minibatch_macqueen
                                                     : QuantizerMode::batch_lloyd;
    }
}

QuantizerConfig quantizer_config(const ExperimentConfig& cfg, std::uint64_t seed,
                                 std::size_t n_measures) {
    QuantizerConfig qcfg;
    qcfg.budget = cfg.budget;
    qcfg.seed = seed;
    qcfg.max_iterations = cfg.quantizer_max_iterations;
    qcfg.relative_tolerance = cfg.quantizer_tolerance;
    qcfg.mode = resolve_mode(cfg.quantizer, n_measures);
    qcfg.minibatch_size = cfg.minibatch_size;
    return qcfg;
}

std::uint64_t repetition_seed(const ExperimentConfig& cfg, std::size_t rep) {
    return derive_seed(derive_seed(cfg.master_seed, kRepStream), rep);
}

// Builds the calibrated (or grid) map for one repetition and returns it
// together with the codebook it froze.
VectorizationMap build_map(const LabeledDataset& dataset, const ExperimentConfig& cfg,
                           const MeasureCollection& train_measures, std::uint64_t rep_seed) {
    if (cfg.baseline == Baseline::grid) {
        Codebook grid = grid_codebook(cfg.budget, cfg.grid_domain);
        if (cfg.bandwidth.kind == BandwidthSpec::Kind::constant)
            return make_map_constant(std::move(grid), cfg.bandwidth.sigma, cfg.family);
        return make_map_adaptive(std::move(grid), cfg.family);
    }
    QuantizerConfig qcfg =
        quantizer_config(cfg, derive_seed(rep_seed, kQuantStream), dataset.collection.size());
    return calibrate(train_measures, qcfg, cfg.family, cfg.calibration_fraction, cfg.bandwidth);
}

double mean_pairwise_center_distance(const Codebook& cb) {
    const std::size_t b = cb.size();
    if (b < 2) throw std::invalid_argument("mean pairwise distance needs b >= 2");
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < b; ++i) {
        auto ci = cb.center(i);
        for (std::size_t j = i + 1; j < b; ++j) {
            auto cj = cb.center(j);
            double sq = 0.0;
            for (std::size_t k = 0; k < cb.dim; ++k) {
                double diff = ci[k] - cj[k];
                sq += diff * diff;
            }
            total += std::sqrt(sq);
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

double inf_norm_distance(std::span<const double> a, std::span<const double> b) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = std::abs(a[i] - b[i]);
        if (d > best) best = d;
    }
    return best;
}

}  // namespace

double mean_of(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double total = 0.0;
    for (double v : values) total += v;
    return total / static_cast<double>(values.size());
}

double population_std(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    double mu = mean_of(values);
    double acc = 0.0;
    for (double v : values) acc += (v - mu) * (v - mu);
    return std::sqrt(acc / static_cast<double>(values.size()));
}

std::string host_descriptor() {
    utsname info{};
    std::ostringstream out;
    if (uname(&info) == 0)
        out << info.sysname << " " << info.release << " " << info.machine;
    else
        out << "unknown";
    out << ", " << std::thread::hardware_concurrency() << " hardware threads";
    return out.str();
}

std::vector<std::size_t> canonical_order(const LabeledDataset& dataset) {
    std::vector<std::size_t> order(dataset.collection.size());
    std::iota(order.begin(), order.end(), 0);
    if (!dataset.content_ids.empty()) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return dataset.content_ids[a] < dataset.content_ids[b];
        });
    }
    return order;
}

SplitPlan plan_repetition(const LabeledDataset& dataset, const ExperimentConfig& cfg,
                          std::size_t repetition) {
    validate(dataset, cfg);
    auto canon = canonical_order(dataset);
    const auto& labels = dataset.collection.labels();

    std::vector<int> classes(labels.begin(), labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

    std::uint64_t rep_seed = repetition_seed(cfg, repetition);
    std::uint64_t split_seed = derive_seed(rep_seed, kSplitStream);

    SplitPlan plan;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        std::vector<std::size_t> members;  // canonical positions of this class
        for (std::size_t pos = 0; pos < canon.size(); ++pos) {
            if (labels[canon[pos]] == classes[c]) members.push_back(pos);
        }
        if (members.size() < 2)
            throw std::invalid_argument("experiment: every class needs at least 2 measures");
        SplitMix64 rng(derive_seed(split_seed, c));
        shuffle(members, rng);
        auto n_train = static_cast<std::size_t>(
            std::llround(cfg.split_ratio * static_cast<double>(members.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
        plan.train.insert(plan.train.end(), members.begin(), members.begin() + n_train);
        plan.test.insert(plan.test.end(), members.begin() + n_train, members.end());
    }
    std::sort(plan.train.begin(), plan.train.end());
    std::sort(plan.test.begin(), plan.test.end());

    // Mirrors the subsample calibrate() performs internally: same seed, same
    // selection, resolved to canonical positions.
    std::uint64_t quant_seed = derive_seed(rep_seed, kQuantStream);
    auto picked = calibration_subsample(plan.train.size(), cfg.calibration_fraction, quant_seed);
    plan.calibration.reserve(picked.size());
    for (std::size_t i : picked) plan.calibration.push_back(plan.train[i]);
    return plan;
}

ExperimentReport run_experiment(const LabeledDataset& dataset, const ExperimentConfig& cfg) {
    validate(dataset, cfg);
    auto canon = canonical_order(dataset);
    const auto& labels = dataset.collection.labels();

    ExperimentReport report;
    report.config = cfg;
    report.host = host_descriptor();

    std::vector<double> vec_seconds;
    for (std::size_t rep = 0; rep < cfg.n_repetitions; ++rep) {
        SplitPlan plan = plan_repetition(dataset, cfg, rep);
        std::uint64_t rep_seed = repetition_seed(cfg, rep);

        std::vector<std::size_t> train_ds(plan.train.size());
        for (std::size_t i = 0; i < plan.train.size(); ++i) train_ds[i] = canon[plan.train[i]];
        MeasureCollection train_measures =
            dataset.collection.subset(train_ds, /*keep_labels=*/false);

        auto t0 = std::chrono::steady_clock::now();
        VectorizationMap map = build_map(dataset, cfg, train_measures, rep_seed);
        FeatureMatrix features(dataset.collection.size(), map.budget());
        {
            // Rows in canonical order; parallel rows stay bitwise identical.
            const auto& collection = dataset.collection;
            parallel_for(collection.size(), cfg.threads, [&](std::size_t pos) {
                map.transform_into(collection[canon[pos]], features.row(pos));
            });
        }
        auto t1 = std::chrono::steady_clock::now();
        vec_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());

        FeatureMatrix train_X = features.select_rows(plan.train);
        FeatureMatrix test_X = features.select_rows(plan.test);
        std::vector<int> train_y(plan.train.size());
        for (std::size_t i = 0; i < plan.train.size(); ++i)
            train_y[i] = labels[canon[plan.train[i]]];
        std::vector<int> test_y(plan.test.size());
        for (std::size_t i = 0; i < plan.test.size(); ++i) test_y[i] = labels[canon[plan.test[i]]];

        ForestConfig fc = cfg.forest;
        fc.seed = derive_seed(rep_seed, kForestStream);
        fc.threads = cfg.threads;
        ForestModel model = fit_forest(train_X, train_y, fc);
        report.accuracies.push_back(accuracy(model, test_X, test_y));
    }

    report.mean_accuracy = mean_of(report.accuracies);
    report.std_accuracy = population_std(report.accuracies);
    report.vectorization_seconds = mean_of(vec_seconds);
    return report;
}

Codebook grid_codebook(std::size_t budget, const std::array<double, 4>& domain) {
    if (budget < 4) throw std::invalid_argument("grid codebook needs budget >= 4");
    const auto g = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(budget))));
    const double x0 = domain[0], y0 = domain[1], x1 = domain[2], y1 = domain[3];
    if (!(x1 > x0) || !(y1 > y0)) throw std::invalid_argument("grid codebook: bad domain");
    const double sx = (x1 - x0) / static_cast<double>(g);
    const double sy = (y1 - y0) / static_cast<double>(g);
    Codebook cb;
    cb.dim = 2;
    cb.centers.reserve(g * g * 2);
    for (std::size_t ix = 0; ix < g; ++ix) {
        for (std::size_t iy = 0; iy < g; ++iy) {
            cb.centers.push_back(x0 + (static_cast<double>(ix) + 0.5) * sx);
            cb.centers.push_back(y0 + (static_cast<double>(iy) + 0.5) * sy);
        }
    }
    cb.sigmas = compute_sigmas(cb);
    return cb;
}

std::vector<AblationCell> run_ablation(const LabeledDataset& dataset,
                                       const ExperimentConfig& base, const AblationAxes& axes) {
    std::vector<AblationCell> cells;
    auto run_cell = [&](const std::string& axis, const std::string& setting,
                        ExperimentConfig cfg) {
        AblationCell cell;
        cell.axis = axis;
        cell.setting = setting;
        cfg.baseline = Baseline::quantized;
        cell.quantized = run_experiment(dataset, cfg);
        if (axes.include_grid) {
            cfg.baseline = Baseline::grid;
            cell.grid = run_experiment(dataset, cfg);
        }
        cells.push_back(std::move(cell));
    };

    for (std::size_t b : axes.budgets) {
        ExperimentConfig cfg = base;
        cfg.budget = b;
        run_cell("budget", std::to_string(b), cfg);
    }
    if (axes.family_pair) {
        for (ContrastFamily family : {ContrastFamily::gaussian, ContrastFamily::laplacian}) {
            ExperimentConfig cfg = base;
            cfg.family = family;
            run_cell("family", to_string(family), cfg);
        }
    }
    for (double fraction : axes.calibration_fractions) {
        ExperimentConfig cfg = base;
        cfg.calibration_fraction = fraction;
        std::ostringstream setting;
        setting << fraction;
        run_cell("calibration", setting.str(), cfg);
    }
    return cells;
}

std::string render_ablation_table(const std::vector<AblationCell>& cells) {
    std::ostringstream out;
    auto emit = [&](const char* row_name, auto accessor) {
        out << row_name;
        for (const auto& cell : cells) {
            const ExperimentReport* r = accessor(cell);
            out << "  ";
            if (r) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%5.1f+-%.1f", 100.0 * r->mean_accuracy,
                              100.0 * r->std_accuracy);
                out << buf;
            } else {
                out << "      ---  ";
            }
        }
        out << "\n";
    };
    out << "cell     ";
    for (const auto& cell : cells) out << "  " << cell.axis << "=" << cell.setting;
    out << "\n";
    emit("quantized", [](const AblationCell& c) { return &c.quantized; });
    bool any_grid = false;
    for (const auto& cell : cells) any_grid = any_grid || cell.grid.has_value();
    if (any_grid)
        emit("grid     ",
             [](const AblationCell& c) { return c.grid ? &*c.grid : nullptr; });
    return out.str();
}

SweepReport run_bandwidth_sweep(const LabeledDataset& dataset, const ExperimentConfig& cfg,
                                std::span<const double> exponents) {
    validate(dataset, cfg);
    if (cfg.baseline == Baseline::grid)
        throw std::invalid_argument("bandwidth sweep runs on the quantized baseline");
    auto canon = canonical_order(dataset);
    const auto& labels = dataset.collection.labels();

    SweepReport report;
    report.config = cfg;
    report.adaptive.exponent = 0.0;
    report.constant_entries.resize(exponents.size());
    for (std::size_t e = 0; e < exponents.size(); ++e)
        report.constant_entries[e].exponent = exponents[e];

    std::vector<double> mus;
    std::vector<std::vector<double>> sigmas_used(exponents.size());

    for (std::size_t rep = 0; rep < cfg.n_repetitions; ++rep) {
        SplitPlan plan = plan_repetition(dataset, cfg, rep);
        std::uint64_t rep_seed = repetition_seed(cfg, rep);

        std::vector<std::size_t> train_ds(plan.train.size());
        for (std::size_t i = 0; i < plan.train.size(); ++i) train_ds[i] = canon[plan.train[i]];
        MeasureCollection train_measures =
            dataset.collection.subset(train_ds, /*keep_labels=*/false);

        // One codebook per repetition, shared by the adaptive reference and
        // every constant-sigma entry.
        QuantizerConfig qcfg = quantizer_config(cfg, derive_seed(rep_seed, kQuantStream),
                                                dataset.collection.size());
        auto calib_indices = calibration_subsample(train_measures.size(),
                                                   cfg.calibration_fraction, qcfg.seed);
        Codebook codebook = fit_codebook(train_measures.subset(calib_indices), qcfg);
        double mu = mean_pairwise_center_distance(codebook);
        mus.push_back(mu);

        std::vector<int> train_y(plan.train.size());
        for (std::size_t i = 0; i < plan.train.size(); ++i)
            train_y[i] = labels[canon[plan.train[i]]];
        std::vector<int> test_y(plan.test.size());
        for (std::size_t i = 0; i < plan.test.size(); ++i) test_y[i] = labels[canon[plan.test[i]]];

        auto evaluate = [&](const VectorizationMap& map) {
            FeatureMatrix features(dataset.collection.size(), map.budget());
            const auto& collection = dataset.collection;
            parallel_for(collection.size(), cfg.threads, [&](std::size_t pos) {
                map.transform_into(collection[canon[pos]], features.row(pos));
            });
            FeatureMatrix train_X = features.select_rows(plan.train);
            FeatureMatrix test_X = features.select_rows(plan.test);
            ForestConfig fc = cfg.forest;
            fc.seed = derive_seed(rep_seed, kForestStream);
            fc.threads = cfg.threads;
            ForestModel model = fit_forest(train_X, train_y, fc);
            return accuracy(model, test_X, test_y);
        };

        report.adaptive.accuracies.push_back(evaluate(make_map_adaptive(codebook, cfg.family)));
        for (std::size_t e = 0; e < exponents.size(); ++e) {
            double sigma = mu * std::pow(10.0, exponents[e]);
            sigmas_used[e].push_back(sigma);
            report.constant_entries[e].accuracies.push_back(
                evaluate(make_map_constant(codebook, sigma, cfg.family)));
        }
    }

    report.mean_pairwise_distance = mean_of(mus);
    report.adaptive.mean_accuracy = mean_of(report.adaptive.accuracies);
    report.adaptive.std_accuracy = population_std(report.adaptive.accuracies);
    for (std::size_t e = 0; e < exponents.size(); ++e) {
        auto& entry = report.constant_entries[e];
        entry.mean_sigma = mean_of(sigmas_used[e]);
        entry.mean_accuracy = mean_of(entry.accuracies);
        entry.std_accuracy = population_std(entry.accuracies);
    }
    return report;
}

namespace {

// One noisy copy: every atom shifted by an independent uniform draw from
// the ball of the given radius.
PointMeasure perturb(const PointMeasure& source, double radius, SplitMix64& rng) {
    if (radius == 0.0) return source;
    const std::size_t d = source.dim();
    std::vector<double> coords = source.coords();
    std::vector<double> direction(d);
    for (std::size_t k = 0; k < source.size(); ++k) {
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            // Box-Muller; 1-u keeps the log argument in (0,1].
            double u1 = 1.0 - rng.next_double();
            double u2 = rng.next_double();
            double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
            direction[i] = z;
            norm_sq += z * z;
        }
        double norm = std::sqrt(norm_sq);
        if (norm == 0.0) {
            direction.assign(d, 0.0);
            direction[0] = 1.0;
            norm = 1.0;
        }
        double r = radius * std::pow(rng.next_double(), 1.0 / static_cast<double>(d));
        for (std::size_t i = 0; i < d; ++i) coords[k * d + i] += (r / norm) * direction[i];
    }
    return {d, std::move(coords), source.weights()};
}

}  // namespace

SeparationReport separation_probe(const PointMeasure& source_a, const PointMeasure& source_b,
                                  std::size_t samples_per_source, double noise_radius,
                                  std::size_t budget, std::uint64_t seed) {
    if (source_a.dim() != source_b.dim())
        throw std::invalid_argument("separation probe: dimension mismatch");
    if (samples_per_source < 2)
        throw std::invalid_argument("separation probe: need at least 2 samples per source");

    std::vector<PointMeasure> pool;
    pool.reserve(2 * samples_per_source);
    for (std::size_t s = 0; s < samples_per_source; ++s) {
        SplitMix64 rng(derive_seed(derive_seed(seed, kProbeSourceA), s));
        pool.push_back(perturb(source_a, noise_radius, rng));
    }
    for (std::size_t s = 0; s < samples_per_source; ++s) {
        SplitMix64 rng(derive_seed(derive_seed(seed, kProbeSourceB), s));
        pool.push_back(perturb(source_b, noise_radius, rng));
    }
    MeasureCollection pooled(std::move(pool));

    QuantizerConfig qcfg;
    qcfg.budget = budget;
    qcfg.seed = derive_seed(seed, kQuantStream);
    qcfg.mode = resolve_mode(QuantizerChoice::auto_select, pooled.size());
    VectorizationMap map = calibrate(pooled, qcfg, ContrastFamily::laplacian, 1.0);
    FeatureMatrix features = transform_batch(map, pooled);

    SeparationReport report;
    report.samples_per_source = samples_per_source;
    double max_intra = 0.0;
    double min_inter = std::numeric_limits<double>::infinity();
    const std::size_t n = samples_per_source;
    for (std::size_t i = 0; i < features.rows; ++i) {
        for (std::size_t j = i + 1; j < features.rows; ++j) {
            double d = inf_norm_distance(features.row(i), features.row(j));
            bool same_source = (i < n) == (j < n);
            if (same_source) {
                if (d > max_intra) max_intra = d;
            } else if (d < min_inter) {
                min_inter = d;
            }
        }
    }
    report.max_intra_gap = max_intra;
    report.min_inter_gap = min_inter;
    return report;
}

}  // namespace mvq
