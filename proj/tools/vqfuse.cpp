#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vqfuse/vqfuse.hpp"

namespace {

struct PipelineFlags {
    std::string config;
    std::optional<std::string> mode;
    std::optional<double> b, w, gate_threshold, sample_rate, min_peak_height, iou_min, track_score_min;
    std::optional<int> smoothing_window;

    void add_to(CLI::App* app) {
        app->add_option("--config", config, "Pipeline config file (flat JSON)");
        app->add_option("--mode", mode, "fused | measurement_only");
        app->add_option("--b", b, "Prior strength b");
        app->add_option("--w", w, "Measurement weight w");
        app->add_option("--gate-threshold", gate_threshold, "Gate threshold on both scores");
        app->add_option("--sample-rate", sample_rate, "Fraction of frames kept, in (0,1]");
        app->add_option("--smoothing-window", smoothing_window, "Odd moving-average window for peaks");
        app->add_option("--min-peak-height", min_peak_height, "Drop peaks below this value");
        app->add_option("--iou-min", iou_min, "Tracker IoU threshold");
        app->add_option("--track-score-min", track_score_min, "Tracker score threshold");
    }

    vqfuse::PipelineConfig resolve() const {
        vqfuse::PipelineConfig cfg = config.empty() ? vqfuse::PipelineConfig{} : vqfuse::load_pipeline_config(config);
        if (mode) cfg.mode = vqfuse::parse_mode(*mode);
        if (b) cfg.b = *b;
        if (w) cfg.w = *w;
        if (gate_threshold) cfg.gate_threshold = *gate_threshold;
        if (sample_rate) cfg.sample_rate = *sample_rate;
        if (smoothing_window) cfg.smoothing_window = *smoothing_window;
        if (min_peak_height) cfg.min_peak_height = *min_peak_height;
        if (iou_min) cfg.iou_min = *iou_min;
        if (track_score_min) cfg.track_score_min = *track_score_min;
        cfg.validate();
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian fusion of proposal similarity scores for visual query localization"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic scenario (clips + annotations)");
    std::string gen_config, gen_output, gen_annotations;
    std::optional<std::uint64_t> gen_seed;
    std::optional<std::int64_t> n_clips, n_frames, n_proposals;
    std::optional<double> visibility, fp_prior, fp_meas, fp_corr, score_noise, meas_noise, jitter;
    gen->add_option("--config", gen_config, "Scenario config file (flat JSON)");
    gen->add_option("--output", gen_output, "Clips output file")->required();
    gen->add_option("--annotations", gen_annotations, "Annotations output file")->required();
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_option("--clips", n_clips, "Number of clips");
    gen->add_option("--frames", n_frames, "Frames per clip");
    gen->add_option("--proposals", n_proposals, "Proposals per frame");
    gen->add_option("--visibility", visibility, "Per-frame visibility of the object in an occurrence");
    gen->add_option("--fp-prior", fp_prior, "Distractor false-pass rate of the prior source");
    gen->add_option("--fp-measurement", fp_meas, "Distractor false-pass rate of the measurement source");
    gen->add_option("--fp-correlation", fp_corr, "Coupling of the two sources' false passes");
    gen->add_option("--score-noise", score_noise, "Std. dev. of the true object's scores");
    gen->add_option("--measurement-noise", meas_noise, "Std. dev. of the true object's measurement score");
    gen->add_option("--box-jitter", jitter, "Std. dev. of proposal box jitter in pixels");

    // localize
    auto* loc = app.add_subcommand("localize", "Localize the last occurrence of each query");
    PipelineFlags loc_flags;
    std::string loc_input, loc_output, loc_signals;
    unsigned loc_workers = 0;
    loc_flags.add_to(loc);
    loc->add_option("--input", loc_input, "Clips file")->required();
    loc->add_option("--output", loc_output, "Predictions output file")->required();
    loc->add_option("--signals", loc_signals, "Signal dump file (default: <output>.signals.jsonl)");
    loc->add_option("--workers", loc_workers, "Worker threads (0 = all cores)");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Score predictions against annotations");
    std::string ev_input, ev_annotations, ev_output, ev_label = "predictions";
    ev->add_option("--input", ev_input, "Predictions file")->required();
    ev->add_option("--annotations", ev_annotations, "Annotations file")->required();
    ev->add_option("--output", ev_output, "Report output file")->required();
    ev->add_option("--label", ev_label, "Row label in the printed table");

    // tune
    auto* tune = app.add_subcommand("tune", "Random search over b and w");
    PipelineFlags tune_flags;
    std::string tune_input, tune_annotations, tune_output, tune_log, objective = "tAP";
    std::vector<double> b_range{0.5, 20.0}, w_range{0.5, 20.0};
    std::int64_t trials = 50;
    std::uint64_t tune_seed = 0;
    unsigned tune_workers = 0;
    tune_flags.add_to(tune);
    tune->add_option("--input", tune_input, "Clips file")->required();
    tune->add_option("--annotations", tune_annotations, "Annotations file")->required();
    tune->add_option("--output", tune_output, "Best config output file")->required();
    tune->add_option("--trial-log", tune_log, "Trial log (default: <output>.trials.tsv)");
    tune->add_option("--trials", trials, "Number of trials");
    tune->add_option("--seed", tune_seed, "Random seed");
    tune->add_option("--objective", objective, "tAP | stAP | success | recovery");
    tune->add_option("--b-range", b_range, "low high")->expected(2);
    tune->add_option("--w-range", w_range, "low high")->expected(2);
    tune->add_option("--workers", tune_workers, "Worker threads (0 = all cores)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            vqfuse::ScenarioConfig cfg =
                gen_config.empty() ? vqfuse::ScenarioConfig{} : vqfuse::load_scenario_config(gen_config);
            if (gen_seed) cfg.seed = *gen_seed;
            if (n_clips) cfg.n_clips = *n_clips;
            if (n_frames) cfg.frames_per_clip = *n_frames;
            if (n_proposals) cfg.proposals_per_frame = *n_proposals;
            if (visibility) cfg.gt_visibility = *visibility;
            if (fp_prior) cfg.fp_rate_prior = *fp_prior;
            if (fp_meas) cfg.fp_rate_measurement = *fp_meas;
            if (fp_corr) cfg.fp_correlation = *fp_corr;
            if (score_noise) cfg.score_noise_sd = *score_noise;
            if (meas_noise) cfg.measurement_noise_sd = *meas_noise;
            if (jitter) cfg.box_jitter_sd = *jitter;
            vqfuse::cmd_generate(cfg, gen_output, gen_annotations);
        } else if (*loc) {
            const auto cfg = loc_flags.resolve();
            const std::string signals = loc_signals.empty() ? loc_output + ".signals.jsonl" : loc_signals;
            const auto misses = vqfuse::cmd_localize(loc_input, cfg, loc_output, signals, loc_workers);
            if (misses > 0) std::cerr << misses << " queries had no localizable peak\n";
        } else if (*ev) {
            vqfuse::cmd_evaluate(ev_input, ev_annotations, ev_output, {}, &std::cout, ev_label);
        } else if (*tune) {
            vqfuse::SearchSpace space;
            space.b_range = {b_range[0], b_range[1]};
            space.w_range = {w_range[0], w_range[1]};
            space.n_trials = trials;
            space.seed = tune_seed;
            space.objective = vqfuse::parse_objective(objective);
            const std::string log = tune_log.empty() ? tune_output + ".trials.tsv" : tune_log;
            const auto result = vqfuse::cmd_tune(tune_input, tune_annotations, space, tune_flags.resolve(),
                                                 tune_output, log, tune_workers);
            std::cout << "best b=" << vqfuse::format_number(result.best_b)
                      << " w=" << vqfuse::format_number(result.best_w) << " " << objective << "="
                      << vqfuse::format_number(result.best_objective) << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
