#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "vqfuse/metrics.hpp"

using namespace vqfuse;

namespace {

std::vector<TimedBox> track_over(FrameIndex first, FrameIndex last, BoundingBox box) {
    std::vector<TimedBox> out;
    for (FrameIndex f = first; f <= last; ++f) out.push_back({f, box});
    return out;
}

ResponseTrack as_response(const std::vector<TimedBox>& boxes, double confidence) {
    ResponseTrack t;
    for (const auto& b : boxes) t.entries.push_back({b.frame_idx, b.box, confidence});
    t.peak_frame = boxes.back().frame_idx;
    t.confidence = confidence;
    return t;
}

}  // namespace

TEST(TemporalIou, Examples) {
    EXPECT_DOUBLE_EQ(temporal_iou({5, 10}, {8, 13}), 3.0 / 9.0);
    EXPECT_EQ(temporal_iou({4, 9}, {4, 9}), 1.0);
    EXPECT_EQ(temporal_iou({0, 3}, {5, 9}), 0.0);
    EXPECT_EQ(temporal_iou({7, 7}, {7, 7}), 1.0);
}

TEST(TemporalIou, SymmetricAndBounded) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> f(0, 50);
    for (int i = 0; i < 1000; ++i) {
        int a = f(rng), b = f(rng), c = f(rng), d = f(rng);
        FrameInterval x{std::min(a, b), std::max(a, b)}, y{std::min(c, d), std::max(c, d)};
        const double v = temporal_iou(x, y);
        EXPECT_EQ(v, temporal_iou(y, x));
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(SpatiotemporalIou, Examples) {
    const auto gt = track_over(0, 4, {5, 0, 15, 10});
    EXPECT_EQ(spatiotemporal_iou(gt, gt), 1.0);
    // Each frame: intersection 50, union 150.
    EXPECT_DOUBLE_EQ(spatiotemporal_iou(track_over(0, 4, {0, 0, 10, 10}), gt), 1.0 / 3.0);
    EXPECT_EQ(spatiotemporal_iou(track_over(10, 12, {5, 0, 15, 10}), gt), 0.0);
}

TEST(SpatiotemporalIou, MissingFramesOnlyAddToUnion) {
    const auto gt = track_over(0, 3, {0, 0, 10, 10});
    const auto pred = track_over(0, 1, {0, 0, 10, 10});
    EXPECT_DOUBLE_EQ(spatiotemporal_iou(pred, gt), 0.5);
}

TEST(SpatiotemporalIou, Symmetric) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    std::uniform_int_distribution<int> f(0, 20);
    for (int i = 0; i < 500; ++i) {
        auto random_track = [&] {
            std::vector<TimedBox> t;
            int a = f(rng), b = f(rng);
            for (int k = std::min(a, b); k <= std::max(a, b); ++k) {
                double x = u(rng), y = u(rng);
                t.push_back({k, {x, y, x + 1 + u(rng), y + 1 + u(rng)}});
            }
            return t;
        };
        const auto p = random_track(), g = random_track();
        EXPECT_NEAR(spatiotemporal_iou(p, g), spatiotemporal_iou(g, p), 1e-15);
    }
}

TEST(AveragePrecision, Examples) {
    EXPECT_DOUBLE_EQ(average_precision({true, false}, 2), 0.5);
    EXPECT_DOUBLE_EQ(average_precision({true, true, true}, 3), 1.0);
    EXPECT_EQ(average_precision({false, false}, 2), 0.0);
    EXPECT_EQ(average_precision({}, 2), 0.0);
}

TEST(AveragePrecision, AllPointInterpolation) {
    // [FP, TP, TP] over 3 positives: recall 1/3 and 2/3 reached at precision
    // 1/2 and 2/3; interpolation lifts the first to 2/3. AP = 2/3 * 2/3.
    EXPECT_NEAR(average_precision({false, true, true}, 3), 4.0 / 9.0, 1e-15);
}

TEST(AveragePrecision, FlippingATruePositiveNeverIncreasesAp) {
    std::mt19937_64 rng(3);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 1000; ++i) {
        std::vector<bool> m(1 + i % 20);
        for (std::size_t k = 0; k < m.size(); ++k) m[k] = coin(rng);
        const std::size_t positives = m.size() + i % 3;
        const double base = average_precision(m, positives);
        for (std::size_t k = 0; k < m.size(); ++k) {
            if (!m[k]) continue;
            auto flipped = m;
            flipped[k] = false;
            EXPECT_LE(average_precision(flipped, positives), base + 1e-15);
        }
    }
}

TEST(Evaluate, PerfectPredictions) {
    std::vector<ClipAnnotation> anns;
    std::vector<Prediction> preds;
    for (int q = 0; q < 4; ++q) {
        const auto gt = track_over(10 + q, 20 + q, {10.0 * q, 5, 10.0 * q + 30, 40});
        anns.push_back({"clip" + std::to_string(q), "q", gt});
        preds.push_back({"clip" + std::to_string(q), "q", as_response(gt, 0.5 + 0.1 * q)});
    }
    const MetricReport r = evaluate(preds, anns);
    EXPECT_EQ(r.tAP, 1.0);
    EXPECT_EQ(r.stAP, 1.0);
    EXPECT_EQ(r.success, 1.0);
    EXPECT_EQ(r.recovery, 1.0);
}

TEST(Evaluate, SingletonPerfectPrediction) {
    const auto gt = track_over(3, 3, {1, 1, 2, 2});
    const std::vector<ClipAnnotation> anns{{"c", "q", gt}};
    const std::vector<Prediction> preds{{"c", "q", as_response(gt, 0.7)}};
    const MetricReport r = evaluate(preds, anns);
    EXPECT_EQ(r.tAP, 1.0);
    EXPECT_EQ(r.stAP, 1.0);
    EXPECT_EQ(r.success, 1.0);
    EXPECT_EQ(r.recovery, 1.0);
}

TEST(Evaluate, HalfPerfectHalfMissed) {
    const auto gt_a = track_over(0, 9, {0, 0, 20, 20});
    const auto gt_b = track_over(0, 9, {50, 50, 80, 80});
    const std::vector<ClipAnnotation> anns{{"a", "q", gt_a}, {"b", "q", gt_b}};
    // b is predicted in the wrong place and time with lower confidence.
    const std::vector<Prediction> preds{{"a", "q", as_response(gt_a, 0.9)},
                                        {"b", "q", as_response(track_over(20, 25, {300, 300, 320, 320}), 0.4)}};
    const MetricReport r = evaluate(preds, anns);
    EXPECT_DOUBLE_EQ(r.tAP, 0.5);
    EXPECT_DOUBLE_EQ(r.stAP, 0.5);
    EXPECT_DOUBLE_EQ(r.success, 0.5);
    EXPECT_DOUBLE_EQ(r.recovery, 0.5);

    // A missing prediction and an unlocalized prediction count the same way.
    const std::vector<Prediction> only_a{{"a", "q", as_response(gt_a, 0.9)}};
    const std::vector<Prediction> b_miss{{"a", "q", as_response(gt_a, 0.9)}, {"b", "q", std::nullopt}};
    EXPECT_EQ(evaluate(only_a, anns).tAP, 0.5);
    EXPECT_EQ(evaluate(b_miss, anns), evaluate(only_a, anns));
}

TEST(Evaluate, EmptyPredictionSet) {
    const std::vector<ClipAnnotation> anns{{"a", "q", track_over(0, 3, {0, 0, 5, 5})}};
    const MetricReport r = evaluate({}, anns);
    EXPECT_EQ(r.tAP, 0.0);
    EXPECT_EQ(r.stAP, 0.0);
    EXPECT_EQ(r.success, 0.0);
    EXPECT_EQ(r.recovery, 0.0);
    EXPECT_EQ(evaluate({}, {}).tAP, 0.0);
}

TEST(Evaluate, KeyErrors) {
    const std::vector<ClipAnnotation> anns{{"a", "q", track_over(0, 3, {0, 0, 5, 5})}};
    const std::vector<Prediction> unknown{{"zzz", "q", std::nullopt}};
    EXPECT_THROW(evaluate(unknown, anns), EvaluationError);
    const std::vector<Prediction> dup{{"a", "q", std::nullopt}, {"a", "q", std::nullopt}};
    EXPECT_THROW(evaluate(dup, anns), EvaluationError);
    const std::vector<ClipAnnotation> dup_anns{anns[0], anns[0]};
    EXPECT_THROW(evaluate({}, dup_anns), EvaluationError);
}

TEST(Evaluate, ThresholdsAreConfigurable) {
    const auto gt = track_over(0, 9, {0, 0, 10, 10});
    const std::vector<ClipAnnotation> anns{{"a", "q", gt}};
    // tIoU = 5/10.
    const std::vector<Prediction> preds{{"a", "q", as_response(track_over(5, 9, {0, 0, 10, 10}), 0.9)}};
    EvalConfig cfg;
    cfg.temporal_thresholds = {0.5};
    EXPECT_EQ(evaluate(preds, anns, cfg).tAP, 1.0);
    cfg.temporal_thresholds = {0.6};
    EXPECT_EQ(evaluate(preds, anns, cfg).tAP, 0.0);
    cfg.recovery_iou = 0.99;
    EXPECT_DOUBLE_EQ(evaluate(preds, anns, cfg).recovery, 0.5);
}

TEST(Evaluate, PermutationInvariantAndBounded) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> f(0, 30);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<ClipAnnotation> anns;
        std::vector<Prediction> preds;
        for (int q = 0; q < 12; ++q) {
            const std::string id = "clip" + std::to_string(q);
            int a = f(rng), b = f(rng);
            anns.push_back({id, "q", track_over(std::min(a, b), std::max(a, b), {10, 10, 40, 40})});
            if (u(rng) < 0.2) continue;
            int c = f(rng), d = f(rng);
            // Coarse confidences produce ties.
            preds.push_back({id, "q", as_response(track_over(std::min(c, d), std::max(c, d), {15, 10, 45, 40}),
                                                  std::round(u(rng) * 4) / 4)});
        }
        const MetricReport base = evaluate(preds, anns);
        for (double v : {base.tAP, base.stAP, base.success, base.recovery}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        std::shuffle(preds.begin(), preds.end(), rng);
        std::shuffle(anns.begin(), anns.end(), rng);
        EXPECT_EQ(evaluate(preds, anns), base);
    }
}
