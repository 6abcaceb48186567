#pragma once

// Beta-Bernoulli fusion of two per-proposal similarity scores.
//
// The prior source (high-dimensional embedding similarity) sets the mean of a
// Beta(a, b) prior with a fixed b. The measurement source (a continuous score
// s in [0,1]) is mapped to w pseudo-trials with w*s pseudo-successes, and the
// fused similarity is the mean of the conjugate posterior, gated so that both
// sources must individually clear a threshold.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vqfuse {

inline constexpr double kDefaultPriorStrength = 4.85;   // b
inline constexpr double kDefaultMeasurementWeight = 5.0; // w
inline constexpr double kDefaultGateThreshold = 0.65;

// Means this close to 1 are capped before computing a = b*m/(1-m).
inline constexpr double kMeanCeiling = 1.0 - 1e-12;

class FusionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct FeatureVector {
    std::vector<double> values;

    FeatureVector() = default;
    explicit FeatureVector(std::vector<double> v) : values(std::move(v)) { validate(); }
    FeatureVector(std::initializer_list<double> v) : values(v) { validate(); }

    void validate() const {
        if (values.empty()) throw FusionError("feature vector is empty");
        bool any_positive = false;
        for (double x : values) {
            if (!std::isfinite(x)) throw FusionError("feature vector has a non-finite component");
            if (x < 0.0) throw FusionError("feature vector has a negative component");
            any_positive = any_positive || x > 0.0;
        }
        if (!any_positive) throw FusionError("feature vector has zero norm");
    }

    std::size_t size() const noexcept { return values.size(); }
    bool operator==(const FeatureVector&) const = default;
};

/// Expected value of the prior, E[x] in [0, 1].
struct PriorBelief {
    double mean = 0.0;

    PriorBelief() = default;
    explicit PriorBelief(double m) : mean(m) {
        if (!(m >= 0.0 && m <= 1.0)) throw FusionError("prior mean outside [0,1]: " + std::to_string(m));
    }
    bool operator==(const PriorBelief&) const = default;
};

struct BetaParams {
    double a = 1.0;
    double b = 1.0;

    BetaParams() = default;
    BetaParams(double a_, double b_) : a(a_), b(b_) {
        if (!(a > 0.0 && std::isfinite(a) && b > 0.0 && std::isfinite(b)))
            throw FusionError("Beta parameters must be positive and finite");
    }
    bool operator==(const BetaParams&) const = default;
};

/// Measurement-source score s and its confidence weight w (pseudo-trials).
struct Measurement {
    double s = 0.0;
    double w = kDefaultMeasurementWeight;

    Measurement() = default;
    Measurement(double s_, double w_) : s(s_), w(w_) {
        if (!(s >= 0.0 && s <= 1.0)) throw FusionError("measurement score outside [0,1]: " + std::to_string(s));
        if (!(w > 0.0 && std::isfinite(w))) throw FusionError("measurement weight must be positive and finite");
    }
    bool operator==(const Measurement&) const = default;
};

/// Fractional trial/success counts; k is never rounded.
struct PseudoCounts {
    double n = 0.0;
    double k = 0.0;
    bool operator==(const PseudoCounts&) const = default;
};

struct FusedScore {
    double value = 0.0;
    bool gate = false;
    bool degenerate = false;
    bool operator==(const FusedScore&) const = default;
};

inline PriorBelief cosine_similarity(const FeatureVector& u, const FeatureVector& v) {
    if (u.size() != v.size())
        throw FusionError("feature dimension mismatch: " + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
    double dot = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u.values[i] * v.values[i];
        uu += u.values[i] * u.values[i];
        vv += v.values[i] * v.values[i];
    }
    if (!(uu > 0.0) || !(vv > 0.0)) throw FusionError("zero-norm feature vector");
    return PriorBelief(std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), 0.0, 1.0));
}

/// Shape the prior so that a/(a+b) equals the prior mean.
/// Mean 1 belongs to the degenerate path and mean 0 to gate failure; both are rejected here.
inline BetaParams beta_from_mean(PriorBelief prior, double b) {
    if (!(b > 0.0 && std::isfinite(b))) throw FusionError("prior strength b must be positive and finite");
    if (!(prior.mean > 0.0 && prior.mean < 1.0)) throw FusionError("prior mean must lie in (0,1)");
    const double m = std::min(prior.mean, kMeanCeiling);
    return BetaParams(b * m / (1.0 - m), b);
}

inline PseudoCounts map_measurement(const Measurement& m) {
    return PseudoCounts{m.w, m.w * m.s};
}

inline BetaParams posterior(const BetaParams& prior, const PseudoCounts& counts) {
    return BetaParams(prior.a + counts.k, prior.b + counts.n - counts.k);
}

inline double posterior_mean(const BetaParams& p) {
    return p.a / (p.a + p.b);
}

inline bool gate(PriorBelief prior, const Measurement& m, double threshold = kDefaultGateThreshold) {
    return prior.mean > threshold && m.s > threshold;
}

inline void check_threshold(double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw FusionError("gate threshold outside [0,1]");
}

/// Fuses one (prior, measurement) pair. A prior mean of exactly 1 sets the
/// degenerate flag; the kept proposal scores 1 until frame-level rules apply.
inline FusedScore fuse(PriorBelief prior, const Measurement& m, double b,
                       double threshold = kDefaultGateThreshold) {
    check_threshold(threshold);
    if (!(b > 0.0 && std::isfinite(b))) throw FusionError("prior strength b must be positive and finite");
    const bool degenerate = prior.mean == 1.0;
    if (!gate(prior, m, threshold)) return FusedScore{0.0, false, degenerate};
    if (degenerate) return FusedScore{1.0, true, true};
    const double value = posterior_mean(posterior(beta_from_mean(prior, b), map_measurement(m)));
    return FusedScore{value, true, false};
}

struct ScoredInput {
    PriorBelief prior;
    double s = 0.0;
};

/// Scores every proposal of one frame, then resolves proposals whose prior
/// mean is exactly 1: the one with the highest passing measurement score is
/// kept at 1 and everything else in the frame is zeroed; if none passes,
/// only the mean-1 proposals are zeroed.
inline std::vector<FusedScore> score_frame_proposals(std::span<const ScoredInput> proposals, double b,
                                                     double w, double threshold = kDefaultGateThreshold) {
    if (proposals.empty()) throw FusionError("score_frame_proposals: empty proposal list");
    std::vector<FusedScore> scores;
    scores.reserve(proposals.size());
    for (const auto& p : proposals) scores.push_back(fuse(p.prior, Measurement(p.s, w), b, threshold));

    std::optional<std::size_t> kept;
    bool any_degenerate = false;
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        if (!scores[i].degenerate) continue;
        any_degenerate = true;
        if (proposals[i].s > threshold && (!kept || proposals[i].s > proposals[*kept].s)) kept = i;
    }
    if (!any_degenerate) return scores;

    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (kept) {
            if (i != *kept) scores[i] = FusedScore{0.0, false, scores[i].degenerate};
        } else if (scores[i].degenerate) {
            scores[i] = FusedScore{0.0, false, true};
        }
    }
    if (kept) scores[*kept] = FusedScore{1.0, true, true};
    return scores;
}

}  // namespace vqfuse
