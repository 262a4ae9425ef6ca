#include "mvq/json_io.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "mvq/measure_io.hpp"
#include "mvq/rng.hpp"

namespace mvq {

nlohmann::json codebook_to_json(const Codebook& codebook, std::optional<ContrastFamily> family) {
    nlohmann::json j;
    j["dim"] = codebook.dim;
    auto centers = nlohmann::json::array();
    for (std::size_t i = 0; i < codebook.size(); ++i) {
        auto c = codebook.center(i);
        centers.push_back(std::vector<double>(c.begin(), c.end()));
    }
    j["centers"] = std::move(centers);
    j["sigmas"] = codebook.has_sigmas() ? nlohmann::json(codebook.sigmas) : nlohmann::json();
    j["family"] = family ? nlohmann::json(to_string(*family)) : nlohmann::json();
    return j;
}

ParsedCodebook codebook_from_json(const nlohmann::json& j) {
    ParsedCodebook out;
    out.codebook.dim = j.at("dim").get<std::size_t>();
    if (out.codebook.dim == 0) throw std::runtime_error("codebook: dim must be positive");
    for (const auto& row : j.at("centers")) {
        auto c = row.get<std::vector<double>>();
        if (c.size() != out.codebook.dim)
            throw std::runtime_error("codebook: center width does not match dim");
        out.codebook.centers.insert(out.codebook.centers.end(), c.begin(), c.end());
    }
    if (j.contains("sigmas") && !j.at("sigmas").is_null()) {
        out.codebook.sigmas = j.at("sigmas").get<std::vector<double>>();
        if (out.codebook.sigmas.size() != out.codebook.size())
            throw std::runtime_error("codebook: sigmas length mismatch");
    }
    if (j.contains("family") && !j.at("family").is_null())
        out.family = contrast_family_from_string(j.at("family").get<std::string>());
    return out;
}

nlohmann::json map_to_json(const VectorizationMap& map) {
    return codebook_to_json(map.codebook(), map.family());
}

VectorizationMap map_from_json(const nlohmann::json& j) {
    ParsedCodebook parsed = codebook_from_json(j);
    if (!parsed.codebook.has_sigmas())
        throw std::runtime_error("vectorization map: sigmas not set");
    if (!parsed.family) throw std::runtime_error("vectorization map: family not set");
    return {std::move(parsed.codebook), *parsed.family};
}

nlohmann::json orbit_manifest(const OrbitDatasetSpec& spec) {
    nlohmann::json j;
    j["parameters"] = spec.parameters;
    j["orbits_per_class"] = spec.orbits_per_class;
    j["n_iterations"] = spec.n_iterations;
    j["master_seed"] = spec.master_seed;
    j["rng"] = kRngAlgorithm;
    j["format"] = "measure_csv_v1";
    return j;
}

namespace {

std::string baseline_name(Baseline b) { return b == Baseline::grid ? "grid" : "quantized"; }

Baseline baseline_from_string(const std::string& s) {
    if (s == "grid") return Baseline::grid;
    if (s == "quantized") return Baseline::quantized;
    throw std::runtime_error("unknown baseline: '" + s + "'");
}

std::string quantizer_name(QuantizerChoice q) {
    switch (q) {
        case QuantizerChoice::batch:
            return "batch";
        case QuantizerChoice::minibatch:
            return "minibatch";
        default:
            return "auto";
    }
}

QuantizerChoice quantizer_from_string(const std::string& s) {
    if (s == "batch") return QuantizerChoice::batch;
    if (s == "minibatch") return QuantizerChoice::minibatch;
    if (s == "auto") return QuantizerChoice::auto_select;
    throw std::runtime_error("unknown quantizer mode: '" + s + "'");
}

}  // namespace

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["budget"] = cfg.budget;
    j["family"] = to_string(cfg.family);
    j["calibration_fraction"] = cfg.calibration_fraction;
    j["split_ratio"] = cfg.split_ratio;
    j["n_repetitions"] = cfg.n_repetitions;
    j["quantizer"] = quantizer_name(cfg.quantizer);
    j["minibatch_size"] = cfg.minibatch_size;
    j["quantizer_max_iterations"] = cfg.quantizer_max_iterations;
    j["quantizer_tolerance"] = cfg.quantizer_tolerance;
    j["n_trees"] = cfg.forest.n_trees;
    j["bandwidth"] = cfg.bandwidth.kind == BandwidthSpec::Kind::constant
                         ? nlohmann::json(cfg.bandwidth.sigma)
                         : nlohmann::json("adaptive");
    j["baseline"] = baseline_name(cfg.baseline);
    j["grid_domain"] = cfg.grid_domain;
    j["master_seed"] = cfg.master_seed;
    j["threads"] = cfg.threads;
    j["rng"] = kRngAlgorithm;
    return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known{
        "budget",        "family",       "calibration_fraction",
        "split_ratio",   "n_repetitions", "quantizer",
        "minibatch_size", "quantizer_max_iterations", "quantizer_tolerance",
        "n_trees",       "bandwidth",    "baseline",
        "grid_domain",   "master_seed",  "threads",
        "rng"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key()))
            throw std::runtime_error("unknown experiment config key: '" + it.key() + "'");
    }
    ExperimentConfig cfg;
    if (j.contains("budget")) cfg.budget = j["budget"].get<std::size_t>();
    if (j.contains("family"))
        cfg.family = contrast_family_from_string(j["family"].get<std::string>());
    if (j.contains("calibration_fraction"))
        cfg.calibration_fraction = j["calibration_fraction"].get<double>();
    if (j.contains("split_ratio")) cfg.split_ratio = j["split_ratio"].get<double>();
    if (j.contains("n_repetitions")) cfg.n_repetitions = j["n_repetitions"].get<std::size_t>();
    if (j.contains("quantizer"))
        cfg.quantizer = quantizer_from_string(j["quantizer"].get<std::string>());
    if (j.contains("minibatch_size")) cfg.minibatch_size = j["minibatch_size"].get<std::size_t>();
    if (j.contains("quantizer_max_iterations"))
        cfg.quantizer_max_iterations = j["quantizer_max_iterations"].get<std::size_t>();
    if (j.contains("quantizer_tolerance"))
        cfg.quantizer_tolerance = j["quantizer_tolerance"].get<double>();
    if (j.contains("n_trees")) cfg.forest.n_trees = j["n_trees"].get<std::size_t>();
    if (j.contains("bandwidth")) {
        if (j["bandwidth"].is_number())
            cfg.bandwidth = BandwidthSpec::constant(j["bandwidth"].get<double>());
        else if (j["bandwidth"].get<std::string>() == "adaptive")
            cfg.bandwidth = BandwidthSpec::adaptive();
        else
            throw std::runtime_error("bandwidth must be \"adaptive\" or a number");
    }
    if (j.contains("baseline"))
        cfg.baseline = baseline_from_string(j["baseline"].get<std::string>());
    if (j.contains("grid_domain")) cfg.grid_domain = j["grid_domain"].get<std::array<double, 4>>();
    if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<std::size_t>();
    return cfg;
}

nlohmann::json experiment_report_to_json(const ExperimentReport& report) {
    nlohmann::json j;
    j["accuracies"] = report.accuracies;
    j["mean_accuracy"] = report.mean_accuracy;
    j["std_accuracy"] = report.std_accuracy;
    j["config"] = experiment_config_to_json(report.config);
    j["timing"] = {{"vectorization_seconds", report.vectorization_seconds},
                   {"host", report.host}};
    return j;
}

nlohmann::json ablation_to_json(const std::vector<AblationCell>& cells) {
    auto arr = nlohmann::json::array();
    for (const auto& cell : cells) {
        nlohmann::json c;
        c["axis"] = cell.axis;
        c["setting"] = cell.setting;
        c["quantized"] = experiment_report_to_json(cell.quantized);
        if (cell.grid) c["grid"] = experiment_report_to_json(*cell.grid);
        arr.push_back(std::move(c));
    }
    return nlohmann::json{{"cells", std::move(arr)}};
}

nlohmann::json sweep_to_json(const SweepReport& report) {
    nlohmann::json j;
    auto entry_json = [](const SweepEntry& e, bool constant) {
        nlohmann::json out;
        if (constant) {
            out["exponent"] = e.exponent;
            out["mean_sigma"] = e.mean_sigma;
        }
        out["accuracies"] = e.accuracies;
        out["mean_accuracy"] = e.mean_accuracy;
        out["std_accuracy"] = e.std_accuracy;
        return out;
    };
    auto arr = nlohmann::json::array();
    for (const auto& e : report.constant_entries) arr.push_back(entry_json(e, true));
    j["constant"] = std::move(arr);
    j["adaptive"] = entry_json(report.adaptive, false);
    j["mean_pairwise_distance"] = report.mean_pairwise_distance;
    j["config"] = experiment_config_to_json(report.config);
    return j;
}

nlohmann::json separation_to_json(const SeparationReport& report) {
    return {{"max_intra_gap", report.max_intra_gap},
            {"min_inter_gap", report.min_inter_gap},
            {"samples_per_source", report.samples_per_source},
            {"separated", report.min_inter_gap > report.max_intra_gap}};
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return j;
}

void save_json_file(const nlohmann::json& j, const std::string& path) {
    atomic_write_file(path, j.dump(2) + "\n");
}

}  // namespace mvq
