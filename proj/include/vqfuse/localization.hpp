#pragma once

// Temporal localization of the most recent occurrence of a query object:
// per-frame best fused score -> similarity signal -> local maxima ->
// most recent peak -> response track grown forward and backward by a tracker.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqfuse/fusion.hpp"
#include "vqfuse/geometry.hpp"

namespace vqfuse {

class LocalizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using FrameIndex = std::int64_t;

struct FeaturePair {
    FeatureVector bbox;
    FeatureVector query;
    bool operator==(const FeaturePair&) const = default;
};

struct Proposal {
    BoundingBox box;
    PriorBelief prior;
    double measurement_s = 0.0;
    // Present when the prior was derived from embeddings rather than given directly.
    std::optional<FeaturePair> features;
    bool operator==(const Proposal&) const = default;
};

struct FrameProposals {
    FrameIndex frame_idx = 0;
    std::vector<Proposal> proposals;
    bool operator==(const FrameProposals&) const = default;
};

struct ClipData {
    std::string clip_id;
    std::string query_id;
    std::vector<FrameProposals> frames;
    bool operator==(const ClipData&) const = default;
};

enum class ScoringMode { fused, measurement_only };

struct FusionParams {
    double b = kDefaultPriorStrength;
    double w = kDefaultMeasurementWeight;
    double gate_threshold = kDefaultGateThreshold;
    ScoringMode mode = ScoringMode::fused;
};

struct PeakParams {
    int smoothing_window = 1;
    double min_height = 0.0;
};

struct TrackerParams {
    double iou_min = 0.3;
    double track_score_min = 0.3;
};

struct LocalizationConfig {
    FusionParams fusion;
    double sample_rate = 1.0;
    PeakParams peaks;
    TrackerParams tracker;
};

struct SimilaritySignal {
    std::vector<double> values;
    std::vector<FrameIndex> frame_idxs;
    bool operator==(const SimilaritySignal&) const = default;
};

struct TrackEntry {
    FrameIndex frame_idx = 0;
    BoundingBox box;
    double score = 0.0;
    bool operator==(const TrackEntry&) const = default;
};

struct ResponseTrack {
    std::vector<TrackEntry> entries;
    FrameIndex peak_frame = 0;
    double confidence = 0.0;
    bool operator==(const ResponseTrack&) const = default;

    FrameIndex first_frame() const { return entries.front().frame_idx; }
    FrameIndex last_frame() const { return entries.back().frame_idx; }
};

// One retained frame after scoring.
struct ScoredFrame {
    std::size_t frame_pos = 0;  // position in ClipData::frames
    FrameIndex frame_idx = 0;
    std::vector<double> scores;  // parallel to the frame's proposals
    std::optional<std::size_t> best;
};

struct SignalResult {
    SimilaritySignal signal;
    std::vector<ScoredFrame> frames;  // parallel to signal.values
};

/// Per-proposal scores for one frame. In measurement_only mode the prior is
/// ignored and the raw measurement score is used ungated.
inline std::vector<double> score_frame(const FrameProposals& frame, const FusionParams& params) {
    std::vector<double> out;
    if (frame.proposals.empty()) return out;
    out.reserve(frame.proposals.size());
    if (params.mode == ScoringMode::measurement_only) {
        for (const auto& p : frame.proposals) out.push_back(p.measurement_s);
        return out;
    }
    std::vector<ScoredInput> inputs;
    inputs.reserve(frame.proposals.size());
    for (const auto& p : frame.proposals) inputs.push_back({p.prior, p.measurement_s});
    for (const auto& f : score_frame_proposals(inputs, params.b, params.w, params.gate_threshold))
        out.push_back(f.value);
    return out;
}

inline std::size_t sample_stride(double sample_rate) {
    if (!(sample_rate > 0.0 && sample_rate <= 1.0))
        throw LocalizationError("sample rate must lie in (0,1]");
    return static_cast<std::size_t>(std::llround(1.0 / sample_rate));
}

/// Keeps frames 0, stride, 2*stride, ... (by position) and records each
/// retained frame's maximum score. Frames with no proposals or only zero
/// scores contribute 0 and have no best proposal.
inline SignalResult build_signal(std::span<const FrameProposals> frames, const FusionParams& params,
                                 double sample_rate = 1.0) {
    if (frames.empty()) throw LocalizationError("empty clip");
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].frame_idx <= frames[i - 1].frame_idx)
            throw LocalizationError("frames not sorted by strictly increasing frame_idx at frame " +
                                    std::to_string(frames[i].frame_idx));
    }
    const std::size_t stride = sample_stride(sample_rate);

    SignalResult result;
    for (std::size_t pos = 0; pos < frames.size(); pos += stride) {
        ScoredFrame sf;
        sf.frame_pos = pos;
        sf.frame_idx = frames[pos].frame_idx;
        sf.scores = score_frame(frames[pos], params);
        double top = 0.0;
        for (std::size_t i = 0; i < sf.scores.size(); ++i) {
            if (sf.scores[i] > top) {
                top = sf.scores[i];
                sf.best = i;
            }
        }
        result.signal.values.push_back(top);
        result.signal.frame_idxs.push_back(sf.frame_idx);
        result.frames.push_back(std::move(sf));
    }
    return result;
}

/// Centered moving average; the window is truncated at the edges.
inline std::vector<double> smooth_signal(std::span<const double> values, int window) {
    if (window < 1 || window % 2 == 0) throw LocalizationError("smoothing window must be an odd positive integer");
    std::vector<double> out(values.begin(), values.end());
    if (window == 1) return out;
    const auto half = static_cast<std::ptrdiff_t>(window / 2);
    const auto n = static_cast<std::ptrdiff_t>(values.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
        double sum = 0.0;
        for (std::ptrdiff_t j = lo; j <= hi; ++j) sum += values[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

/// Local maxima of the (optionally smoothed) signal, ascending.
///
/// A run of equal values is a peak when it is strictly above every shoulder it
/// has and has at least one shoulder; the run reports its last index. So
/// endpoints need only beat their single neighbour and a constant signal has
/// no peaks. A single-sample signal is its own peak.
inline std::vector<std::size_t> find_peaks(std::span<const double> values, int smoothing_window = 1,
                                           double min_height = 0.0) {
    if (values.empty()) throw LocalizationError("empty signal");
    const std::vector<double> v = smooth_signal(values, smoothing_window);
    const std::size_t n = v.size();
    std::vector<std::size_t> peaks;
    if (n == 1) {
        if (v[0] >= min_height) peaks.push_back(0);
        return peaks;
    }
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[j + 1] == v[i]) ++j;
        const bool has_left = i > 0;
        const bool has_right = j + 1 < n;
        const bool above_left = !has_left || v[i] > v[i - 1];
        const bool above_right = !has_right || v[i] > v[j + 1];
        if ((has_left || has_right) && above_left && above_right && v[j] >= min_height) peaks.push_back(j);
        i = j + 1;
    }
    return peaks;
}

inline std::size_t most_recent_peak(std::span<const std::size_t> peaks) {
    if (peaks.empty()) throw LocalizationError("no peak found");
    return *std::max_element(peaks.begin(), peaks.end());
}

struct TrackStep {
    std::size_t proposal = 0;
    BoundingBox box;
    double score = 0.0;
};

/// Continues a track into one frame: best IoU with the previous box among
/// candidates clearing both thresholds; ties go to the higher score, then the
/// earlier proposal.
inline std::optional<TrackStep> reference_tracker_step(const BoundingBox& prev_box, const FrameProposals& frame,
                                                       std::span<const double> scores,
                                                       const TrackerParams& params = {}) {
    std::optional<TrackStep> best;
    double best_iou = -1.0;
    for (std::size_t i = 0; i < frame.proposals.size(); ++i) {
        const double overlap = iou(prev_box, frame.proposals[i].box);
        if (overlap < params.iou_min || scores[i] < params.track_score_min) continue;
        if (!best || overlap > best_iou || (overlap == best_iou && scores[i] > best->score)) {
            best = TrackStep{i, frame.proposals[i].box, scores[i]};
            best_iou = overlap;
        }
    }
    return best;
}

template <typename T>
concept TrackerPolicy = requires(T t, const BoundingBox& box, const FrameProposals& frame,
                                 std::span<const double> scores) {
    { t(box, frame, scores) } -> std::convertible_to<std::optional<TrackStep>>;
};

struct ReferenceTracker {
    TrackerParams params;
    std::optional<TrackStep> operator()(const BoundingBox& prev, const FrameProposals& frame,
                                        std::span<const double> scores) const {
        return reference_tracker_step(prev, frame, scores, params);
    }
};

/// Grows a track from the best proposal at signal position `peak`, first
/// backward then forward through retained frames, stopping in each direction
/// at the first frame the tracker cannot continue into.
template <TrackerPolicy Tracker>
ResponseTrack assemble_track(const ClipData& clip, const SignalResult& scored, std::size_t peak,
                             Tracker&& tracker) {
    if (peak >= scored.frames.size()) throw LocalizationError("peak index outside the signal");
    const ScoredFrame& peak_frame = scored.frames[peak];
    if (!peak_frame.best)
        throw LocalizationError("peak frame " + std::to_string(peak_frame.frame_idx) + " has no best proposal");

    const auto& peak_prop = clip.frames[peak_frame.frame_pos].proposals[*peak_frame.best];
    const double peak_score = peak_frame.scores[*peak_frame.best];

    auto extend = [&](std::ptrdiff_t step) {
        std::vector<TrackEntry> out;
        BoundingBox prev = peak_prop.box;
        for (auto pos = static_cast<std::ptrdiff_t>(peak) + step;
             pos >= 0 && pos < static_cast<std::ptrdiff_t>(scored.frames.size()); pos += step) {
            const ScoredFrame& sf = scored.frames[static_cast<std::size_t>(pos)];
            const auto next = tracker(prev, clip.frames[sf.frame_pos], std::span<const double>(sf.scores));
            if (!next) break;
            out.push_back(TrackEntry{sf.frame_idx, next->box, next->score});
            prev = next->box;
        }
        return out;
    };

    ResponseTrack track;
    track.peak_frame = peak_frame.frame_idx;
    track.confidence = peak_score;
    auto backward = extend(-1);
    track.entries.assign(backward.rbegin(), backward.rend());
    track.entries.push_back(TrackEntry{peak_frame.frame_idx, peak_prop.box, peak_score});
    auto forward = extend(+1);
    track.entries.insert(track.entries.end(), forward.begin(), forward.end());
    return track;
}

struct LocalizationResult {
    SimilaritySignal signal;
    std::optional<ResponseTrack> track;  // empty when no peak carries a proposal
};

/// Full per-clip localization. Peaks whose frame has no scoring proposal
/// (possible after smoothing) are not eligible as the most recent peak.
template <TrackerPolicy Tracker>
LocalizationResult localize_clip(const ClipData& clip, const LocalizationConfig& cfg, Tracker&& tracker) {
    SignalResult scored = build_signal(clip.frames, cfg.fusion, cfg.sample_rate);
    LocalizationResult result;
    std::vector<std::size_t> peaks =
        find_peaks(scored.signal.values, cfg.peaks.smoothing_window, cfg.peaks.min_height);
    std::erase_if(peaks, [&](std::size_t p) { return !scored.frames[p].best.has_value(); });
    if (!peaks.empty())
        result.track = assemble_track(clip, scored, most_recent_peak(peaks), std::forward<Tracker>(tracker));
    result.signal = std::move(scored.signal);
    return result;
}

inline LocalizationResult localize_clip(const ClipData& clip, const LocalizationConfig& cfg) {
    return localize_clip(clip, cfg, ReferenceTracker{cfg.tracker});
}

}  // namespace vqfuse
