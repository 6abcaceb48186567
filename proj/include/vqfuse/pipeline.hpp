#pragma once

// Whole-dataset localization and evaluation over a bounded worker pool.
// Results are collected by clip position and sorted by (clip_id, query_id),
// so the worker count never changes the output.

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "vqfuse/config.hpp"
#include "vqfuse/io.hpp"
#include "vqfuse/localization.hpp"
#include "vqfuse/metrics.hpp"

namespace vqfuse {

inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
/// exception thrown by any task is rethrown after all threads join.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    workers = std::min<unsigned>(resolve_workers(workers), static_cast<unsigned>(std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = n;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

struct LocalizationOutput {
    std::vector<Prediction> predictions;
    std::vector<SignalDump> signals;
};

inline LocalizationOutput localize_all(std::span<const ClipData> clips, const PipelineConfig& cfg,
                                       unsigned workers = 0) {
    cfg.validate();
    const LocalizationConfig loc = cfg.localization();
    LocalizationOutput out;
    out.predictions.resize(clips.size());
    out.signals.resize(clips.size());
    parallel_for(clips.size(), workers, [&](std::size_t i) {
        const ClipData& clip = clips[i];
        LocalizationResult r = localize_clip(clip, loc);
        out.predictions[i] = Prediction{clip.clip_id, clip.query_id, std::move(r.track)};
        out.signals[i] = SignalDump{clip.clip_id, clip.query_id, std::move(r.signal)};
    });
    auto by_key = [](const auto& a, const auto& b) {
        return std::tie(a.clip_id, a.query_id) < std::tie(b.clip_id, b.query_id);
    };
    std::stable_sort(out.predictions.begin(), out.predictions.end(), by_key);
    std::stable_sort(out.signals.begin(), out.signals.end(), by_key);
    return out;
}

inline MetricReport run_and_evaluate(std::span<const ClipData> clips, std::span<const ClipAnnotation> annotations,
                                     const PipelineConfig& cfg, const EvalConfig& eval = {}, unsigned workers = 0) {
    const LocalizationOutput out = localize_all(clips, cfg, workers);
    return evaluate(out.predictions, annotations, eval);
}

}  // namespace vqfuse
