#pragma once

// Random search over the prior strength b and measurement weight w.

#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqfuse/counter_rng.hpp"
#include "vqfuse/io.hpp"
#include "vqfuse/pipeline.hpp"

namespace vqfuse {

enum class Objective { tAP, stAP, success, recovery };

inline Objective parse_objective(const std::string& s) {
    if (s == "tAP") return Objective::tAP;
    if (s == "stAP") return Objective::stAP;
    if (s == "success") return Objective::success;
    if (s == "recovery") return Objective::recovery;
    throw std::invalid_argument("unknown objective '" + s + "'");
}

inline double objective_value(const MetricReport& r, Objective o) {
    switch (o) {
        case Objective::tAP: return r.tAP;
        case Objective::stAP: return r.stAP;
        case Objective::success: return r.success;
        case Objective::recovery: return r.recovery;
    }
    return 0.0;
}

struct Range {
    double low = 0.0;
    double high = 0.0;
};

struct SearchSpace {
    Range b_range{0.5, 20.0};
    Range w_range{0.5, 20.0};
    std::int64_t n_trials = 50;
    std::uint64_t seed = 0;
    Objective objective = Objective::tAP;

    void validate() const {
        auto check = [](Range r, const char* name) {
            if (!(r.low > 0.0 && r.low < r.high && std::isfinite(r.high)))
                throw std::invalid_argument(std::string(name) + " must satisfy 0 < low < high");
        };
        check(b_range, "b range");
        check(w_range, "w range");
        if (n_trials < 1) throw std::invalid_argument("n_trials must be at least 1");
    }
};

struct Trial {
    std::int64_t index = 0;
    double b = 0.0;
    double w = 0.0;
    double objective = 0.0;
    bool operator==(const Trial&) const = default;
};

struct SearchResult {
    double best_b = 0.0;
    double best_w = 0.0;
    double best_objective = 0.0;
    std::vector<Trial> trials;
};

/// Trial t's (b, w) comes from a stream keyed by (seed, t), so the samples
/// do not depend on how trials are scheduled.
inline std::pair<double, double> sample_trial(const SearchSpace& space, std::int64_t t) {
    CounterRng rng({space.seed, static_cast<std::uint64_t>(t), 0x7475'6e65ULL});
    const double b = rng.uniform(space.b_range.low, space.b_range.high);
    const double w = rng.uniform(space.w_range.low, space.w_range.high);
    return {b, w};
}

/// Evaluates every sampled (b, w) with the rest of `base` unchanged and
/// returns the best; ties go to the earlier trial.
inline SearchResult random_search(const SearchSpace& space, std::span<const ClipData> clips,
                                  std::span<const ClipAnnotation> annotations, const PipelineConfig& base,
                                  const EvalConfig& eval = {}, unsigned workers = 0) {
    space.validate();
    if (clips.empty()) throw std::invalid_argument("random_search: empty clip set");
    base.validate();

    SearchResult result;
    result.trials.resize(static_cast<std::size_t>(space.n_trials));
    parallel_for(result.trials.size(), workers, [&](std::size_t t) {
        const auto [b, w] = sample_trial(space, static_cast<std::int64_t>(t));
        PipelineConfig cfg = base;
        cfg.b = b;
        cfg.w = w;
        const MetricReport report = run_and_evaluate(clips, annotations, cfg, eval, 1);
        result.trials[t] = Trial{static_cast<std::int64_t>(t), b, w, objective_value(report, space.objective)};
    });

    const Trial* best = &result.trials.front();
    for (const auto& trial : result.trials)
        if (trial.objective > best->objective) best = &trial;
    result.best_b = best->b;
    result.best_w = best->w;
    result.best_objective = best->objective;
    return result;
}

inline void write_trial_log(std::ostream& out, std::span<const Trial> trials) {
    out << "trial\tb\tw\tobjective\n";
    for (const auto& t : trials)
        out << t.index << '\t' << format_number(t.b) << '\t' << format_number(t.w) << '\t'
            << format_number(t.objective) << '\n';
}

}  // namespace vqfuse
