#pragma once

// Synthetic clips with a known final occurrence and two score sources whose
// false positives can be independent or coupled.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqfuse/counter_rng.hpp"
#include "vqfuse/fusion.hpp"
#include "vqfuse/localization.hpp"
#include "vqfuse/metrics.hpp"

namespace vqfuse {

struct ScenarioConfig {
    std::int64_t n_clips = 10;
    std::int64_t frames_per_clip = 60;
    std::int64_t proposals_per_frame = 8;
    double gt_visibility = 1.0;
    double fp_rate_prior = 0.0;
    double fp_rate_measurement = 0.0;
    double fp_correlation = 0.0;
    double score_noise_sd = 0.0;
    double box_jitter_sd = 0.0;
    std::uint64_t seed = 0;
    // Noise on the true object's measurement score; falls back to score_noise_sd.
    std::optional<double> measurement_noise_sd;

    double measurement_sd() const { return measurement_noise_sd.value_or(score_noise_sd); }

    void validate() const {
        auto unit = [](double v, const char* name) {
            if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
        };
        if (n_clips < 1) throw std::invalid_argument("n_clips must be positive");
        if (frames_per_clip < 1) throw std::invalid_argument("frames_per_clip must be positive");
        if (proposals_per_frame < 1) throw std::invalid_argument("proposals_per_frame must be positive");
        unit(gt_visibility, "gt_visibility");
        unit(fp_rate_prior, "fp_rate_prior");
        unit(fp_rate_measurement, "fp_rate_measurement");
        unit(fp_correlation, "fp_correlation");
        if (!(score_noise_sd >= 0.0)) throw std::invalid_argument("score_noise_sd must be non-negative");
        if (!(box_jitter_sd >= 0.0)) throw std::invalid_argument("box_jitter_sd must be non-negative");
        if (measurement_noise_sd && !(*measurement_noise_sd >= 0.0))
            throw std::invalid_argument("measurement_noise_sd must be non-negative");
    }
};

struct Scenario {
    std::vector<ClipData> clips;
    std::vector<ClipAnnotation> annotations;
};

namespace scenario_detail {

inline constexpr double kImageWidth = 640.0;
inline constexpr double kImageHeight = 480.0;
inline constexpr double kPassThreshold = kDefaultGateThreshold;
inline constexpr double kTrueScoreMean = 0.9;
inline constexpr std::uint64_t kClipLevel = ~std::uint64_t{0};

enum Stream : std::uint64_t { kLayout = 1, kVisibility, kSlot, kTrueBox, kDistractor };

// Truncated to [0, 1] by rejection; clipped if rejection keeps failing.
inline double truncated_normal(CounterRng& rng, double mean, double sd) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        const double x = rng.normal(mean, sd);
        if (x >= 0.0 && x <= 1.0) return x;
    }
    return std::clamp(mean, 0.0, 1.0);
}

inline double passing_score(CounterRng& rng) { return kPassThreshold + (1.0 - kPassThreshold) * (1.0 - rng.uniform()); }
inline double failing_score(CounterRng& rng) { return kPassThreshold * rng.uniform(); }

inline BoundingBox clamp_box(double x1, double y1, double x2, double y2) {
    if (x1 > x2) std::swap(x1, x2);
    if (y1 > y2) std::swap(y1, y2);
    x1 = std::clamp(x1, 0.0, kImageWidth - 2.0);
    y1 = std::clamp(y1, 0.0, kImageHeight - 2.0);
    x2 = std::clamp(x2, x1 + 1.0, kImageWidth);
    y2 = std::clamp(y2, y1 + 1.0, kImageHeight);
    return BoundingBox{x1, y1, x2, y2};
}

struct Occurrence {
    std::int64_t first = 0;
    std::int64_t last = -1;
    double x = 0, y = 0, w = 0, h = 0;  // box at `first`
    double vx = 0, vy = 0;              // pixels per frame

    bool contains(std::int64_t f) const { return f >= first && f <= last; }

    BoundingBox box_at(std::int64_t f) const {
        const double t = static_cast<double>(f - first);
        const double x1 = std::clamp(x + vx * t, 0.0, kImageWidth - w);
        const double y1 = std::clamp(y + vy * t, 0.0, kImageHeight - h);
        return BoundingBox{x1, y1, x1 + w, y1 + h};
    }
};

inline Occurrence make_occurrence(CounterRng& rng, std::int64_t first, std::int64_t last) {
    Occurrence o;
    o.first = first;
    o.last = last;
    o.w = rng.uniform(60.0, 160.0);
    o.h = rng.uniform(60.0, 160.0);
    o.x = rng.uniform(0.0, kImageWidth - o.w);
    o.y = rng.uniform(0.0, kImageHeight - o.h);
    o.vx = rng.uniform(-3.0, 3.0);
    o.vy = rng.uniform(-3.0, 3.0);
    return o;
}

}  // namespace scenario_detail

/// One clip and its annotation; a pure function of (cfg, clip_index).
///
/// The final occurrence runs to the last frame of the clip; about half of
/// the clips also contain an earlier, separate occurrence. Within an
/// occurrence each frame shows the object with probability gt_visibility
/// (the final occurrence always keeps at least one visible frame). The
/// annotation lists the visible frames of the final occurrence.
inline std::pair<ClipData, ClipAnnotation> generate_clip(const ScenarioConfig& cfg, std::int64_t clip_index) {
    using namespace scenario_detail;
    const auto seed = cfg.seed;
    const auto clip_key = static_cast<std::uint64_t>(clip_index);
    const std::int64_t n_frames = cfg.frames_per_clip;

    CounterRng layout({seed, clip_key, kClipLevel, kLayout});
    const std::int64_t min_len = std::max<std::int64_t>(1, n_frames / 6);
    const std::int64_t max_len = std::max<std::int64_t>(min_len, n_frames / 3);
    const std::int64_t final_len = layout.uniform_int(min_len, max_len);
    std::vector<Occurrence> occurrences;
    occurrences.push_back(make_occurrence(layout, n_frames - final_len, n_frames - 1));
    const std::int64_t room = n_frames - final_len - 1;  // frames available before a one-frame gap
    const bool has_earlier = layout.bernoulli(0.5);
    if (room >= 2 && has_earlier) {
        const std::int64_t len = layout.uniform_int(1, std::max<std::int64_t>(1, room / 2));
        const std::int64_t start = layout.uniform_int(0, room - len);
        occurrences.push_back(make_occurrence(layout, start, start + len - 1));
    }

    std::vector<bool> visible(static_cast<std::size_t>(n_frames), false);
    std::vector<const Occurrence*> occ_at(static_cast<std::size_t>(n_frames), nullptr);
    for (const auto& occ : occurrences) {
        bool any = false;
        for (std::int64_t f = occ.first; f <= occ.last; ++f) {
            CounterRng vis({seed, clip_key, static_cast<std::uint64_t>(f), kVisibility});
            const auto i = static_cast<std::size_t>(f);
            occ_at[i] = &occ;
            visible[i] = vis.bernoulli(cfg.gt_visibility);
            any = any || visible[i];
        }
        if (&occ == &occurrences.front() && !any) visible[static_cast<std::size_t>(occ.last)] = true;
    }

    char id[32];
    std::snprintf(id, sizeof id, "clip_%05lld", static_cast<long long>(clip_index));
    ClipData clip{id, "query_0", {}};
    ClipAnnotation ann{id, "query_0", {}};

    const double p1 = cfg.fp_rate_prior, p2 = cfg.fp_rate_measurement, c = cfg.fp_correlation;
    const double p_both = c * std::min(p1, p2) + (1.0 - c) * p1 * p2;

    for (std::int64_t f = 0; f < n_frames; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        const auto fkey = static_cast<std::uint64_t>(f);
        FrameProposals frame{f, {}};
        std::optional<std::int64_t> gt_slot;
        if (visible[fi]) {
            CounterRng slot({seed, clip_key, fkey, kSlot});
            gt_slot = slot.uniform_int(0, cfg.proposals_per_frame - 1);
        }
        for (std::int64_t s = 0; s < cfg.proposals_per_frame; ++s) {
            Proposal p;
            if (gt_slot && *gt_slot == s) {
                CounterRng rng({seed, clip_key, fkey, kTrueBox});
                const BoundingBox truth = occ_at[fi]->box_at(f);
                const double j = cfg.box_jitter_sd;
                p.box = clamp_box(rng.normal(truth.x1, j), rng.normal(truth.y1, j), rng.normal(truth.x2, j),
                                  rng.normal(truth.y2, j));
                p.prior = PriorBelief(truncated_normal(rng, kTrueScoreMean, cfg.score_noise_sd));
                p.measurement_s = truncated_normal(rng, kTrueScoreMean, cfg.measurement_sd());
                if (occ_at[fi] == &occurrences.front()) ann.gt_track.push_back({f, truth});
            } else {
                CounterRng rng({seed, clip_key, fkey, kDistractor, static_cast<std::uint64_t>(s)});
                const double w = rng.uniform(20.0, 150.0);
                const double h = rng.uniform(20.0, 150.0);
                const double x = rng.uniform(0.0, kImageWidth - w);
                const double y = rng.uniform(0.0, kImageHeight - h);
                p.box = BoundingBox{x, y, x + w, y + h};
                // Joint outcome: both pass, only the prior passes, only the measurement passes, neither.
                const double u = rng.uniform();
                const bool prior_pass = u < p1;
                const bool meas_pass = u < p_both || (u >= p1 && u < p1 + p2 - p_both);
                p.prior = PriorBelief(prior_pass ? passing_score(rng) : failing_score(rng));
                p.measurement_s = meas_pass ? passing_score(rng) : failing_score(rng);
            }
            frame.proposals.push_back(std::move(p));
        }
        clip.frames.push_back(std::move(frame));
    }
    return {std::move(clip), std::move(ann)};
}

inline Scenario generate_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    Scenario out;
    out.clips.reserve(static_cast<std::size_t>(cfg.n_clips));
    out.annotations.reserve(static_cast<std::size_t>(cfg.n_clips));
    for (std::int64_t i = 0; i < cfg.n_clips; ++i) {
        auto [clip, ann] = generate_clip(cfg, i);
        out.clips.push_back(std::move(clip));
        out.annotations.push_back(std::move(ann));
    }
    return out;
}

}  // namespace vqfuse
