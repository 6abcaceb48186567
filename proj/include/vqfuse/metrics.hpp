#pragma once

// Evaluation of response tracks against ground truth: temporal AP (tAP),
// spatio-temporal AP (stAP), success and recovery.

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vqfuse/geometry.hpp"
#include "vqfuse/localization.hpp"

namespace vqfuse {

class EvaluationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct TimedBox {
    FrameIndex frame_idx = 0;
    BoundingBox box;
    bool operator==(const TimedBox&) const = default;
};

struct ClipAnnotation {
    std::string clip_id;
    std::string query_id;
    std::vector<TimedBox> gt_track;
    bool operator==(const ClipAnnotation&) const = default;
};

/// A query with no localizable peak carries an empty track and counts as a miss.
struct Prediction {
    std::string clip_id;
    std::string query_id;
    std::optional<ResponseTrack> track;
    bool operator==(const Prediction&) const = default;
};

/// Inclusive frame range.
struct FrameInterval {
    FrameIndex first = 0;
    FrameIndex last = 0;
};

struct EvalConfig {
    std::vector<double> temporal_thresholds{0.25, 0.5, 0.75, 0.95};
    std::vector<double> spatiotemporal_thresholds{0.25, 0.5, 0.75, 0.95};
    double success_threshold = 0.05;
    double recovery_iou = 0.5;
};

struct QueryBreakdown {
    std::string clip_id;
    std::string query_id;
    bool localized = false;
    double confidence = 0.0;
    double temporal_iou = 0.0;
    double spatiotemporal_iou = 0.0;
    double recovered_fraction = 0.0;
    bool operator==(const QueryBreakdown&) const = default;
};

struct MetricReport {
    double tAP = 0.0;
    double stAP = 0.0;
    double success = 0.0;
    double recovery = 0.0;
    std::vector<QueryBreakdown> per_query;
    bool operator==(const MetricReport&) const = default;
};

inline double temporal_iou(FrameInterval pred, FrameInterval gt) {
    const FrameIndex inter =
        std::max<FrameIndex>(std::min(pred.last, gt.last) - std::max(pred.first, gt.first) + 1, 0);
    // Counted as index sets, so a gap between disjoint ranges is not part of the union.
    const FrameIndex uni = (pred.last - pred.first + 1) + (gt.last - gt.first + 1) - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

/// Sum of per-frame box intersections over sum of per-frame unions, across
/// the union of annotated frames; a frame present in one track only adds its
/// box area to the union.
inline double spatiotemporal_iou(std::span<const TimedBox> pred, std::span<const TimedBox> gt) {
    std::map<FrameIndex, std::pair<const BoundingBox*, const BoundingBox*>> frames;
    for (const auto& p : pred) frames[p.frame_idx].first = &p.box;
    for (const auto& g : gt) frames[g.frame_idx].second = &g.box;
    double inter = 0.0, uni = 0.0;
    for (const auto& [idx, boxes] : frames) {
        const auto [p, g] = boxes;
        if (p && g) {
            inter += intersection_area(*p, *g);
            uni += union_area(*p, *g);
        } else {
            uni += p ? p->area() : g->area();
        }
    }
    return uni > 0.0 ? inter / uni : 0.0;
}

/// All-point interpolated AP for predictions already sorted by descending
/// confidence; `total_positives` is the number of annotated queries.
inline double average_precision(const std::vector<bool>& ranked_matches, std::size_t total_positives) {
    if (total_positives == 0 || ranked_matches.empty()) return 0.0;
    std::vector<double> precision, recall;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < ranked_matches.size(); ++i) {
        if (ranked_matches[i]) ++tp;
        precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(total_positives));
    }
    for (std::size_t i = precision.size() - 1; i > 0; --i)
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t i = 0; i < recall.size(); ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return ap;
}

inline std::vector<TimedBox> timed_boxes(const ResponseTrack& track) {
    std::vector<TimedBox> out;
    out.reserve(track.entries.size());
    for (const auto& e : track.entries) out.push_back({e.frame_idx, e.box});
    return out;
}

/// Fraction of ground-truth frames whose predicted box overlaps at IoU >= min_iou.
inline double recovered_fraction(std::span<const TimedBox> pred, std::span<const TimedBox> gt, double min_iou) {
    if (gt.empty()) return 0.0;
    std::map<FrameIndex, const BoundingBox*> by_frame;
    for (const auto& p : pred) by_frame[p.frame_idx] = &p.box;
    std::size_t hit = 0;
    for (const auto& g : gt) {
        const auto it = by_frame.find(g.frame_idx);
        if (it != by_frame.end() && iou(*it->second, g.box) >= min_iou) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(gt.size());
}

inline MetricReport evaluate(std::span<const Prediction> predictions, std::span<const ClipAnnotation> annotations,
                             const EvalConfig& cfg = {}) {
    using Key = std::pair<std::string, std::string>;
    std::map<Key, const ClipAnnotation*> gt_by_key;
    for (const auto& a : annotations) {
        if (a.gt_track.empty())
            throw EvaluationError("annotation " + a.clip_id + "/" + a.query_id + " has an empty track");
        if (!gt_by_key.emplace(Key{a.clip_id, a.query_id}, &a).second)
            throw EvaluationError("duplicate annotation key " + a.clip_id + "/" + a.query_id);
    }
    std::map<Key, const Prediction*> pred_by_key;
    for (const auto& p : predictions) {
        const Key key{p.clip_id, p.query_id};
        if (!gt_by_key.contains(key))
            throw EvaluationError("prediction " + p.clip_id + "/" + p.query_id + " has no matching annotation");
        if (!pred_by_key.emplace(key, &p).second)
            throw EvaluationError("duplicate prediction key " + p.clip_id + "/" + p.query_id);
    }

    MetricReport report;
    if (gt_by_key.empty()) return report;

    for (const auto& [key, ann] : gt_by_key) {
        QueryBreakdown q;
        q.clip_id = key.first;
        q.query_id = key.second;
        const auto it = pred_by_key.find(key);
        if (it != pred_by_key.end() && it->second->track && !it->second->track->entries.empty()) {
            const ResponseTrack& track = *it->second->track;
            const auto pred_boxes = timed_boxes(track);
            q.localized = true;
            q.confidence = track.confidence;
            q.temporal_iou = temporal_iou({track.first_frame(), track.last_frame()},
                                          {ann->gt_track.front().frame_idx, ann->gt_track.back().frame_idx});
            q.spatiotemporal_iou = spatiotemporal_iou(pred_boxes, ann->gt_track);
            q.recovered_fraction = recovered_fraction(pred_boxes, ann->gt_track, cfg.recovery_iou);
        }
        report.per_query.push_back(std::move(q));
    }

    // Ranked list: localized queries by descending confidence, ties by key.
    std::vector<const QueryBreakdown*> ranked;
    for (const auto& q : report.per_query)
        if (q.localized) ranked.push_back(&q);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const QueryBreakdown* x, const QueryBreakdown* y) { return x->confidence > y->confidence; });

    const std::size_t positives = report.per_query.size();
    auto mean_ap = [&](const std::vector<double>& thresholds, double QueryBreakdown::*overlap) {
        if (thresholds.empty()) return 0.0;
        double sum = 0.0;
        for (double tau : thresholds) {
            std::vector<bool> matches;
            for (const auto* q : ranked) matches.push_back(q->*overlap >= tau);
            sum += average_precision(matches, positives);
        }
        return sum / static_cast<double>(thresholds.size());
    };
    report.tAP = mean_ap(cfg.temporal_thresholds, &QueryBreakdown::temporal_iou);
    report.stAP = mean_ap(cfg.spatiotemporal_thresholds, &QueryBreakdown::spatiotemporal_iou);

    double success = 0.0, recovery = 0.0;
    for (const auto& q : report.per_query) {
        if (q.localized && q.spatiotemporal_iou >= cfg.success_threshold) success += 1.0;
        recovery += q.recovered_fraction;
    }
    report.success = success / static_cast<double>(positives);
    report.recovery = recovery / static_cast<double>(positives);
    return report;
}

}  // namespace vqfuse
