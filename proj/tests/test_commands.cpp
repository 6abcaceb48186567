#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vqfuse/commands.hpp"

using namespace vqfuse;
namespace fs = std::filesystem;

namespace {

class Commands : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("vqfuse_cmd_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ScenarioConfig noisy_config() {
    ScenarioConfig cfg;
    cfg.n_clips = 15;
    cfg.frames_per_clip = 30;
    cfg.proposals_per_frame = 6;
    cfg.gt_visibility = 0.9;
    cfg.fp_rate_prior = 0.3;
    cfg.fp_rate_measurement = 0.3;
    cfg.score_noise_sd = 0.05;
    cfg.box_jitter_sd = 2.0;
    cfg.seed = 77;
    return cfg;
}

}  // namespace

TEST_F(Commands, NoiselessEndToEndIsPerfect) {
    ScenarioConfig cfg;
    cfg.n_clips = 10;
    cfg.frames_per_clip = 40;
    cfg.proposals_per_frame = 5;
    cfg.seed = 42;
    cmd_generate(cfg, path("clips.jsonl"), path("ann.jsonl"));
    EXPECT_EQ(cmd_localize(path("clips.jsonl"), PipelineConfig{}, path("pred.jsonl"), path("sig.jsonl")), 0u);
    std::ostringstream table;
    const MetricReport r = cmd_evaluate(path("pred.jsonl"), path("ann.jsonl"), path("report.json"), {}, &table, "fused");
    EXPECT_EQ(r.tAP, 1.0);
    EXPECT_EQ(r.stAP, 1.0);
    EXPECT_EQ(r.success, 1.0);
    EXPECT_EQ(r.recovery, 1.0);
    EXPECT_EQ(load_report(path("report.json")), r);
    EXPECT_NE(table.str().find("| fused | 100.00% | 100.00% | 100.00% | 100.00% |"), std::string::npos);
}

TEST_F(Commands, HalfSampleRateHalvesTheSignal) {
    ClipData clip{"c", "q", {}};
    for (FrameIndex f = 0; f < 10; ++f)
        clip.frames.push_back({f, {{{10, 10, 50, 50}, PriorBelief(0.8), 0.8, {}}}});
    save_records(path("clips.jsonl"), std::vector<ClipData>{clip});
    PipelineConfig cfg;
    cfg.sample_rate = 0.5;
    cmd_localize(path("clips.jsonl"), cfg, path("pred.jsonl"), path("sig.jsonl"));
    std::ifstream in(path("sig.jsonl"));
    const auto signals = read_signals(in);
    ASSERT_EQ(signals.size(), 1u);
    EXPECT_EQ(signals[0].signal.frame_idxs, (std::vector<FrameIndex>{0, 2, 4, 6, 8}));
}

TEST_F(Commands, UnknownClipInPredictionsFailsEvaluation) {
    ScenarioConfig cfg;
    cfg.n_clips = 2;
    cfg.frames_per_clip = 12;
    cfg.proposals_per_frame = 2;
    cmd_generate(cfg, path("clips.jsonl"), path("ann.jsonl"));
    save_records(path("pred.jsonl"), std::vector<Prediction>{{"not_a_clip", "query_0", std::nullopt}});
    EXPECT_THROW(cmd_evaluate(path("pred.jsonl"), path("ann.jsonl"), path("report.json")), EvaluationError);
}

TEST_F(Commands, LocalizeIsByteIdenticalAcrossRunsAndWorkers) {
    cmd_generate(noisy_config(), path("clips.jsonl"), path("ann.jsonl"));
    const std::string first = slurp(path("clips.jsonl"));
    cmd_generate(noisy_config(), path("clips.jsonl"), path("ann.jsonl"));
    EXPECT_EQ(slurp(path("clips.jsonl")), first);

    cmd_localize(path("clips.jsonl"), PipelineConfig{}, path("p1.jsonl"), path("s1.jsonl"), 1);
    cmd_localize(path("clips.jsonl"), PipelineConfig{}, path("p8.jsonl"), path("s8.jsonl"), 8);
    EXPECT_EQ(slurp(path("p1.jsonl")), slurp(path("p8.jsonl")));
    EXPECT_EQ(slurp(path("s1.jsonl")), slurp(path("s8.jsonl")));
    EXPECT_FALSE(slurp(path("p1.jsonl")).empty());
}

TEST_F(Commands, MeasurementOnlyIgnoresFusionParameters) {
    cmd_generate(noisy_config(), path("clips.jsonl"), path("ann.jsonl"));
    PipelineConfig a;
    a.mode = ScoringMode::measurement_only;
    PipelineConfig b = a;
    b.b = 17.0;
    b.w = 0.7;
    b.gate_threshold = 0.2;
    cmd_localize(path("clips.jsonl"), a, path("pa.jsonl"), path("sa.jsonl"));
    cmd_localize(path("clips.jsonl"), b, path("pb.jsonl"), path("sb.jsonl"));
    EXPECT_EQ(slurp(path("pa.jsonl")), slurp(path("pb.jsonl")));
    EXPECT_EQ(slurp(path("sa.jsonl")), slurp(path("sb.jsonl")));
}

TEST_F(Commands, TuneWritesConfigAndLog) {
    cmd_generate(noisy_config(), path("clips.jsonl"), path("ann.jsonl"));
    SearchSpace space;
    space.n_trials = 5;
    const SearchResult r =
        cmd_tune(path("clips.jsonl"), path("ann.jsonl"), space, PipelineConfig{}, path("best.json"), path("log.tsv"));
    const PipelineConfig best = load_pipeline_config(path("best.json"));
    EXPECT_EQ(best.b, r.best_b);
    EXPECT_EQ(best.w, r.best_w);
    EXPECT_EQ(best.gate_threshold, 0.65);

    std::ifstream log(path("log.tsv"));
    std::string line;
    int lines = 0;
    while (std::getline(log, line)) ++lines;
    EXPECT_EQ(lines, 6);
}

TEST_F(Commands, MissingInputFile) {
    EXPECT_THROW(cmd_localize(path("absent.jsonl"), PipelineConfig{}, path("p.jsonl"), path("s.jsonl")), IoError);
}
