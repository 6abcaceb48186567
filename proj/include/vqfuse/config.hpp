#pragma once

// Pipeline and scenario configuration as flat key/value JSON objects.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "vqfuse/localization.hpp"
#include "vqfuse/scenario.hpp"

namespace vqfuse {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline std::string to_string(ScoringMode mode) {
    return mode == ScoringMode::fused ? "fused" : "measurement_only";
}

inline ScoringMode parse_mode(const std::string& s) {
    if (s == "fused") return ScoringMode::fused;
    if (s == "measurement_only") return ScoringMode::measurement_only;
    throw ConfigError("unknown mode '" + s + "' (expected fused or measurement_only)");
}

struct PipelineConfig {
    double b = kDefaultPriorStrength;
    double w = kDefaultMeasurementWeight;
    double gate_threshold = kDefaultGateThreshold;
    double sample_rate = 1.0;
    int smoothing_window = 1;
    double min_peak_height = 0.0;
    double iou_min = 0.3;
    double track_score_min = 0.3;
    ScoringMode mode = ScoringMode::fused;

    bool operator==(const PipelineConfig&) const = default;

    void validate() const {
        if (!(b > 0.0 && std::isfinite(b))) throw ConfigError("b must be positive");
        if (!(w > 0.0 && std::isfinite(w))) throw ConfigError("w must be positive");
        if (!(gate_threshold >= 0.0 && gate_threshold <= 1.0)) throw ConfigError("gate_threshold must lie in [0,1]");
        if (!(sample_rate > 0.0 && sample_rate <= 1.0)) throw ConfigError("sample_rate must lie in (0,1]");
        if (smoothing_window < 1 || smoothing_window % 2 == 0)
            throw ConfigError("smoothing_window must be an odd positive integer");
        if (!std::isfinite(min_peak_height)) throw ConfigError("min_peak_height must be finite");
        if (!(iou_min >= 0.0 && iou_min <= 1.0)) throw ConfigError("iou_min must lie in [0,1]");
        if (!std::isfinite(track_score_min)) throw ConfigError("track_score_min must be finite");
    }

    LocalizationConfig localization() const {
        LocalizationConfig cfg;
        cfg.fusion = FusionParams{b, w, gate_threshold, mode};
        cfg.sample_rate = sample_rate;
        cfg.peaks = PeakParams{smoothing_window, min_peak_height};
        cfg.tracker = TrackerParams{iou_min, track_score_min};
        return cfg;
    }
};

namespace config_detail {

template <typename T>
T get(const nlohmann::json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

inline nlohmann::json read_object(std::istream& in, const std::string& what) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(what + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(what + ": expected a flat JSON object");
    return j;
}

inline nlohmann::json read_object_file(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + what + " '" + path + "'");
    return read_object(in, what + " '" + path + "'");
}

}  // namespace config_detail

/// Overlays the keys present in `j` onto `cfg`; unknown keys are rejected.
inline void apply_config(PipelineConfig& cfg, const nlohmann::json& j) {
    using config_detail::get;
    for (const auto& [key, value] : j.items()) {
        if (key == "b") cfg.b = get<double>(value, key);
        else if (key == "w") cfg.w = get<double>(value, key);
        else if (key == "gate_threshold") cfg.gate_threshold = get<double>(value, key);
        else if (key == "sample_rate") cfg.sample_rate = get<double>(value, key);
        else if (key == "smoothing_window") cfg.smoothing_window = get<int>(value, key);
        else if (key == "min_peak_height") cfg.min_peak_height = get<double>(value, key);
        else if (key == "iou_min") cfg.iou_min = get<double>(value, key);
        else if (key == "track_score_min") cfg.track_score_min = get<double>(value, key);
        else if (key == "mode") cfg.mode = parse_mode(get<std::string>(value, key));
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

inline PipelineConfig parse_pipeline_config(std::istream& in) {
    PipelineConfig cfg;
    apply_config(cfg, config_detail::read_object(in, "pipeline config"));
    cfg.validate();
    return cfg;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
    PipelineConfig cfg;
    apply_config(cfg, config_detail::read_object_file(path, "pipeline config"));
    cfg.validate();
    return cfg;
}

inline nlohmann::ordered_json to_json(const PipelineConfig& cfg) {
    nlohmann::ordered_json j;
    j["b"] = cfg.b;
    j["w"] = cfg.w;
    j["gate_threshold"] = cfg.gate_threshold;
    j["sample_rate"] = cfg.sample_rate;
    j["smoothing_window"] = cfg.smoothing_window;
    j["min_peak_height"] = cfg.min_peak_height;
    j["iou_min"] = cfg.iou_min;
    j["track_score_min"] = cfg.track_score_min;
    j["mode"] = to_string(cfg.mode);
    return j;
}

inline void save_pipeline_config(const PipelineConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write config '" + path + "'");
    out << to_json(cfg).dump(2) << '\n';
}

inline void apply_config(ScenarioConfig& cfg, const nlohmann::json& j) {
    using config_detail::get;
    for (const auto& [key, value] : j.items()) {
        if (key == "n_clips") cfg.n_clips = get<std::int64_t>(value, key);
        else if (key == "frames_per_clip") cfg.frames_per_clip = get<std::int64_t>(value, key);
        else if (key == "proposals_per_frame") cfg.proposals_per_frame = get<std::int64_t>(value, key);
        else if (key == "gt_visibility") cfg.gt_visibility = get<double>(value, key);
        else if (key == "fp_rate_prior") cfg.fp_rate_prior = get<double>(value, key);
        else if (key == "fp_rate_measurement") cfg.fp_rate_measurement = get<double>(value, key);
        else if (key == "fp_correlation") cfg.fp_correlation = get<double>(value, key);
        else if (key == "score_noise_sd") cfg.score_noise_sd = get<double>(value, key);
        else if (key == "measurement_noise_sd") cfg.measurement_noise_sd = get<double>(value, key);
        else if (key == "box_jitter_sd") cfg.box_jitter_sd = get<double>(value, key);
        else if (key == "seed") cfg.seed = get<std::uint64_t>(value, key);
        else throw ConfigError("unknown scenario key '" + key + "'");
    }
}

inline ScenarioConfig load_scenario_config(const std::string& path) {
    ScenarioConfig cfg;
    apply_config(cfg, config_detail::read_object_file(path, "scenario config"));
    return cfg;
}

}  // namespace vqfuse
