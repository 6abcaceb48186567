#pragma once

// File-level entry points behind the `vqfuse` command line tool.

#include <ostream>
#include <string>

#include "vqfuse/config.hpp"
#include "vqfuse/io.hpp"
#include "vqfuse/pipeline.hpp"
#include "vqfuse/scenario.hpp"
#include "vqfuse/tuner.hpp"

namespace vqfuse {

inline void cmd_generate(const ScenarioConfig& cfg, const std::string& clips_path,
                         const std::string& annotations_path) {
    Scenario sc = generate_scenario(cfg);
    save_records(clips_path, std::move(sc.clips));
    save_records(annotations_path, std::move(sc.annotations));
}

/// Writes one prediction per (clip, query) and the matching signal dump.
/// Returns the number of queries that had no localizable peak.
inline std::size_t cmd_localize(const std::string& clips_path, const PipelineConfig& cfg,
                                const std::string& predictions_path, const std::string& signals_path,
                                unsigned workers = 0, const WarningSink& warn = warn_to_stderr) {
    cfg.validate();
    const auto clips = load_clips(clips_path, warn);
    LocalizationOutput out = localize_all(clips, cfg, workers);
    std::size_t misses = 0;
    for (const auto& p : out.predictions) misses += p.track ? 0 : 1;
    save_records(predictions_path, std::move(out.predictions));
    save_records(signals_path, std::move(out.signals));
    return misses;
}

inline MetricReport cmd_evaluate(const std::string& predictions_path, const std::string& annotations_path,
                                 const std::string& report_path, const EvalConfig& eval = {},
                                 std::ostream* table = nullptr, const std::string& label = "predictions") {
    const auto predictions = load_predictions(predictions_path);
    const auto annotations = load_annotations(annotations_path);
    MetricReport report = evaluate(predictions, annotations, eval);
    save_report(report, report_path);
    if (table) *table << format_report_table({{label, report}});
    return report;
}

inline SearchResult cmd_tune(const std::string& clips_path, const std::string& annotations_path,
                             const SearchSpace& space, const PipelineConfig& base,
                             const std::string& best_config_path, const std::string& trial_log_path,
                             unsigned workers = 0, const WarningSink& warn = warn_to_stderr) {
    const auto clips = load_clips(clips_path, warn);
    const auto annotations = load_annotations(annotations_path);
    SearchResult result = random_search(space, clips, annotations, base, {}, workers);
    PipelineConfig best = base;
    best.b = result.best_b;
    best.w = result.best_w;
    save_pipeline_config(best, best_config_path);
    auto log = io_detail::open_out(trial_log_path);
    write_trial_log(log, result.trials);
    return result;
}

}  // namespace vqfuse
