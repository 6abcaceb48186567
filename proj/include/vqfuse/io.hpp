#pragma once

// Newline-delimited JSON records for clips, annotations, predictions and
// similarity signals, plus the metric report, its text table and the tuner
// trial log. Numbers are written in shortest round-trip form.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "vqfuse/fusion.hpp"
#include "vqfuse/localization.hpp"
#include "vqfuse/metrics.hpp"

namespace vqfuse {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;
using WarningSink = std::function<void(const std::string&)>;

inline void warn_to_stderr(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace io_detail {

struct Where {
    std::string source;
    std::size_t line = 0;
    std::string clip_id;
    std::optional<FrameIndex> frame_idx;

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        std::ostringstream os;
        os << source << ":" << line;
        if (!clip_id.empty()) os << " clip " << clip_id;
        if (frame_idx) os << " frame " << *frame_idx;
        os << " field '" << field << "': " << what;
        throw IoError(os.str());
    }
};

inline const Json& require(const Json& j, const char* key, const Where& at) {
    if (!j.is_object()) at.fail(key, "enclosing record is not an object");
    const auto it = j.find(key);
    if (it == j.end()) at.fail(key, "missing");
    return *it;
}

inline double number(const Json& j, const char* key, const Where& at) {
    const Json& v = require(j, key, at);
    if (!v.is_number()) at.fail(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) at.fail(key, "not finite");
    return d;
}

inline std::string text(const Json& j, const char* key, const Where& at) {
    const Json& v = require(j, key, at);
    if (!v.is_string() || v.get<std::string>().empty()) at.fail(key, "expected a non-empty string");
    return v.get<std::string>();
}

inline FrameIndex frame_index(const Json& j, const char* key, const Where& at) {
    const Json& v = require(j, key, at);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) at.fail(key, "expected a non-negative integer");
    return v.get<FrameIndex>();
}

inline const Json& array(const Json& j, const char* key, const Where& at) {
    const Json& v = require(j, key, at);
    if (!v.is_array()) at.fail(key, "expected an array");
    return v;
}

inline BoundingBox box(const Json& j, const char* key, const Where& at) {
    const Json& v = require(j, key, at);
    BoundingBox b{number(v, "x1", at), number(v, "y1", at), number(v, "x2", at), number(v, "y2", at)};
    if (const auto why = b.violation(); !why.empty()) at.fail(key, "invalid box: " + why);
    return b;
}

inline FeatureVector features(const Json& j, const char* key, const Where& at) {
    const Json& v = array(j, key, at);
    std::vector<double> values;
    for (const auto& x : v) {
        if (!x.is_number()) at.fail(key, "expected an array of numbers");
        values.push_back(x.get<double>());
    }
    try {
        return FeatureVector(std::move(values));
    } catch (const FusionError& e) {
        at.fail(key, e.what());
    }
}

inline Json box_json(const BoundingBox& b) {
    Json j;
    j["x1"] = b.x1;
    j["y1"] = b.y1;
    j["x2"] = b.x2;
    j["y2"] = b.y2;
    return j;
}

template <typename Fn>
void for_each_line(std::istream& in, const std::string& source, Fn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw IoError(source + ":" + std::to_string(lineno) + ": parse error: " + e.what());
        }
        fn(j, Where{source, lineno, {}, {}});
    }
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    return out;
}

}  // namespace io_detail

// ---- clips ----------------------------------------------------------------

inline Json to_json(const Proposal& p) {
    Json j;
    j["box"] = io_detail::box_json(p.box);
    if (p.features) {
        j["feature_bbox"] = p.features->bbox.values;
        j["feature_query"] = p.features->query.values;
    } else {
        j["prior_mean"] = p.prior.mean;
    }
    j["measurement_s"] = p.measurement_s;
    return j;
}

inline Json to_json(const ClipData& clip) {
    Json j;
    j["clip_id"] = clip.clip_id;
    j["query_id"] = clip.query_id;
    Json frames = Json::array();
    for (const auto& f : clip.frames) {
        Json fj;
        fj["frame_idx"] = f.frame_idx;
        Json props = Json::array();
        for (const auto& p : f.proposals) props.push_back(to_json(p));
        fj["proposals"] = std::move(props);
        frames.push_back(std::move(fj));
    }
    j["frames"] = std::move(frames);
    return j;
}

/// Parses one clip record. A proposal carries either prior_mean or a
/// feature_bbox/feature_query pair; prior means outside [0,1] are clamped
/// with a warning.
inline ClipData clip_from_json(const Json& j, io_detail::Where at, const WarningSink& warn = warn_to_stderr) {
    using namespace io_detail;
    ClipData clip;
    clip.clip_id = text(j, "clip_id", at);
    at.clip_id = clip.clip_id;
    clip.query_id = text(j, "query_id", at);
    for (const auto& fj : array(j, "frames", at)) {
        at.frame_idx.reset();
        FrameProposals frame;
        frame.frame_idx = frame_index(fj, "frame_idx", at);
        at.frame_idx = frame.frame_idx;
        if (!clip.frames.empty() && frame.frame_idx <= clip.frames.back().frame_idx)
            at.fail("frame_idx", "frames must be strictly increasing");
        for (const auto& pj : array(fj, "proposals", at)) {
            Proposal p;
            p.box = box(pj, "box", at);
            const bool has_mean = pj.contains("prior_mean");
            const bool has_features = pj.contains("feature_bbox") || pj.contains("feature_query");
            if (has_mean == has_features)
                at.fail("prior_mean", "exactly one of prior_mean or feature_bbox/feature_query must be present");
            if (has_mean) {
                double m = number(pj, "prior_mean", at);
                if (m < 0.0 || m > 1.0) {
                    warn(at.source + ":" + std::to_string(at.line) + " clip " + clip.clip_id + " frame " +
                         std::to_string(frame.frame_idx) + ": prior_mean " + format_number(m) +
                         " clamped to [0,1]");
                    m = std::clamp(m, 0.0, 1.0);
                }
                p.prior = PriorBelief(m);
            } else {
                FeaturePair fp{features(pj, "feature_bbox", at), features(pj, "feature_query", at)};
                try {
                    p.prior = cosine_similarity(fp.bbox, fp.query);
                } catch (const FusionError& e) {
                    at.fail("feature_query", e.what());
                }
                p.features = std::move(fp);
            }
            p.measurement_s = number(pj, "measurement_s", at);
            if (p.measurement_s < 0.0 || p.measurement_s > 1.0) at.fail("measurement_s", "outside [0,1]");
            frame.proposals.push_back(std::move(p));
        }
        clip.frames.push_back(std::move(frame));
    }
    return clip;
}

inline std::vector<ClipData> read_clips(std::istream& in, const std::string& source = "<clips>",
                                        const WarningSink& warn = warn_to_stderr) {
    std::vector<ClipData> clips;
    std::set<std::pair<std::string, std::string>> seen;
    io_detail::for_each_line(in, source, [&](const Json& j, io_detail::Where at) {
        ClipData clip = clip_from_json(j, at, warn);
        if (!seen.emplace(clip.clip_id, clip.query_id).second) {
            at.clip_id = clip.clip_id;
            at.fail("query_id", "duplicate (clip_id, query_id)");
        }
        clips.push_back(std::move(clip));
    });
    return clips;
}

inline std::vector<ClipData> load_clips(const std::string& path, const WarningSink& warn = warn_to_stderr) {
    auto in = io_detail::open_in(path);
    return read_clips(in, path, warn);
}

// ---- annotations ----------------------------------------------------------

inline Json to_json(const ClipAnnotation& a) {
    Json j;
    j["clip_id"] = a.clip_id;
    j["query_id"] = a.query_id;
    Json track = Json::array();
    for (const auto& e : a.gt_track) {
        Json ej;
        ej["frame_idx"] = e.frame_idx;
        ej["box"] = io_detail::box_json(e.box);
        track.push_back(std::move(ej));
    }
    j["gt_track"] = std::move(track);
    return j;
}

inline std::vector<ClipAnnotation> read_annotations(std::istream& in, const std::string& source = "<annotations>") {
    using namespace io_detail;
    std::vector<ClipAnnotation> out;
    std::set<std::pair<std::string, std::string>> seen;
    for_each_line(in, source, [&](const Json& j, Where at) {
        ClipAnnotation a;
        a.clip_id = text(j, "clip_id", at);
        at.clip_id = a.clip_id;
        a.query_id = text(j, "query_id", at);
        for (const auto& ej : array(j, "gt_track", at)) {
            at.frame_idx.reset();
            TimedBox tb;
            tb.frame_idx = frame_index(ej, "frame_idx", at);
            at.frame_idx = tb.frame_idx;
            if (!a.gt_track.empty() && tb.frame_idx <= a.gt_track.back().frame_idx)
                at.fail("frame_idx", "gt_track frames must be strictly increasing");
            tb.box = box(ej, "box", at);
            a.gt_track.push_back(tb);
        }
        if (a.gt_track.empty()) at.fail("gt_track", "must contain at least one entry");
        if (!seen.emplace(a.clip_id, a.query_id).second) at.fail("query_id", "duplicate (clip_id, query_id)");
        out.push_back(std::move(a));
    });
    return out;
}

inline std::vector<ClipAnnotation> load_annotations(const std::string& path) {
    auto in = io_detail::open_in(path);
    return read_annotations(in, path);
}

// ---- predictions and signals ---------------------------------------------

inline Json to_json(const Prediction& p) {
    Json j;
    j["clip_id"] = p.clip_id;
    j["query_id"] = p.query_id;
    if (!p.track) {
        j["track"] = nullptr;
        return j;
    }
    Json t;
    Json entries = Json::array();
    for (const auto& e : p.track->entries) {
        Json ej;
        ej["frame_idx"] = e.frame_idx;
        ej["box"] = io_detail::box_json(e.box);
        ej["score"] = e.score;
        entries.push_back(std::move(ej));
    }
    t["entries"] = std::move(entries);
    t["peak_frame"] = p.track->peak_frame;
    t["confidence"] = p.track->confidence;
    j["track"] = std::move(t);
    return j;
}

inline std::vector<Prediction> read_predictions(std::istream& in, const std::string& source = "<predictions>") {
    using namespace io_detail;
    std::vector<Prediction> out;
    for_each_line(in, source, [&](const Json& j, Where at) {
        Prediction p;
        p.clip_id = text(j, "clip_id", at);
        at.clip_id = p.clip_id;
        p.query_id = text(j, "query_id", at);
        const Json& tj = require(j, "track", at);
        if (!tj.is_null()) {
            ResponseTrack t;
            for (const auto& ej : array(tj, "entries", at)) {
                at.frame_idx.reset();
                TrackEntry e;
                e.frame_idx = frame_index(ej, "frame_idx", at);
                at.frame_idx = e.frame_idx;
                if (!t.entries.empty() && e.frame_idx <= t.entries.back().frame_idx)
                    at.fail("frame_idx", "track entries must be strictly increasing");
                e.box = box(ej, "box", at);
                e.score = number(ej, "score", at);
                t.entries.push_back(e);
            }
            at.frame_idx.reset();
            if (t.entries.empty()) at.fail("entries", "a track must contain its peak entry");
            t.peak_frame = frame_index(tj, "peak_frame", at);
            t.confidence = number(tj, "confidence", at);
            const bool has_peak = std::any_of(t.entries.begin(), t.entries.end(),
                                              [&](const TrackEntry& e) { return e.frame_idx == t.peak_frame; });
            if (!has_peak) at.fail("peak_frame", "not contained in the track entries");
            p.track = std::move(t);
        }
        out.push_back(std::move(p));
    });
    return out;
}

inline std::vector<Prediction> load_predictions(const std::string& path) {
    auto in = io_detail::open_in(path);
    return read_predictions(in, path);
}

struct SignalDump {
    std::string clip_id;
    std::string query_id;
    SimilaritySignal signal;
    bool operator==(const SignalDump&) const = default;
};

inline Json to_json(const SignalDump& s) {
    Json j;
    j["clip_id"] = s.clip_id;
    j["query_id"] = s.query_id;
    j["frame_idxs"] = s.signal.frame_idxs;
    j["values"] = s.signal.values;
    return j;
}

inline std::vector<SignalDump> read_signals(std::istream& in, const std::string& source = "<signals>") {
    using namespace io_detail;
    std::vector<SignalDump> out;
    for_each_line(in, source, [&](const Json& j, Where at) {
        SignalDump s;
        s.clip_id = text(j, "clip_id", at);
        at.clip_id = s.clip_id;
        s.query_id = text(j, "query_id", at);
        for (const auto& v : array(j, "frame_idxs", at)) {
            if (!v.is_number_integer()) at.fail("frame_idxs", "expected integers");
            s.signal.frame_idxs.push_back(v.get<FrameIndex>());
        }
        for (const auto& v : array(j, "values", at)) {
            if (!v.is_number()) at.fail("values", "expected numbers");
            s.signal.values.push_back(v.get<double>());
        }
        if (s.signal.values.size() != s.signal.frame_idxs.size()) at.fail("values", "length differs from frame_idxs");
        out.push_back(std::move(s));
    });
    return out;
}

/// Writes one record per line ordered by (clip_id, query_id).
template <typename Record>
void write_records(std::ostream& out, std::vector<Record> records) {
    std::stable_sort(records.begin(), records.end(), [](const Record& a, const Record& b) {
        return std::tie(a.clip_id, a.query_id) < std::tie(b.clip_id, b.query_id);
    });
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

template <typename Record>
void save_records(const std::string& path, std::vector<Record> records) {
    auto out = io_detail::open_out(path);
    write_records(out, std::move(records));
    if (!out) throw IoError("failed writing '" + path + "'");
}

// ---- metric report --------------------------------------------------------

inline Json to_json(const MetricReport& r) {
    Json j;
    j["tAP"] = r.tAP;
    j["stAP"] = r.stAP;
    j["success"] = r.success;
    j["recovery"] = r.recovery;
    Json rows = Json::array();
    for (const auto& q : r.per_query) {
        Json qj;
        qj["clip_id"] = q.clip_id;
        qj["query_id"] = q.query_id;
        qj["localized"] = q.localized;
        qj["confidence"] = q.confidence;
        qj["temporal_iou"] = q.temporal_iou;
        qj["spatiotemporal_iou"] = q.spatiotemporal_iou;
        qj["recovered_fraction"] = q.recovered_fraction;
        rows.push_back(std::move(qj));
    }
    j["per_query"] = std::move(rows);
    return j;
}

inline MetricReport report_from_json(const Json& j) {
    using namespace io_detail;
    const Where at{"<report>", 1, {}, {}};
    MetricReport r;
    r.tAP = number(j, "tAP", at);
    r.stAP = number(j, "stAP", at);
    r.success = number(j, "success", at);
    r.recovery = number(j, "recovery", at);
    for (const auto& qj : array(j, "per_query", at)) {
        QueryBreakdown q;
        q.clip_id = text(qj, "clip_id", at);
        q.query_id = text(qj, "query_id", at);
        const Json& loc = require(qj, "localized", at);
        if (!loc.is_boolean()) at.fail("localized", "expected a boolean");
        q.localized = loc.get<bool>();
        q.confidence = number(qj, "confidence", at);
        q.temporal_iou = number(qj, "temporal_iou", at);
        q.spatiotemporal_iou = number(qj, "spatiotemporal_iou", at);
        q.recovered_fraction = number(qj, "recovered_fraction", at);
        r.per_query.push_back(std::move(q));
    }
    return r;
}

inline void save_report(const MetricReport& r, const std::string& path) {
    auto out = io_detail::open_out(path);
    out << to_json(r).dump(2) << '\n';
}

inline MetricReport load_report(const std::string& path) {
    auto in = io_detail::open_in(path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
    return report_from_json(j);
}

inline std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
    return buf;
}

/// Human-readable table: one row per method, columns tAP, stAP, success, recovery.
inline std::string format_report_table(const std::vector<std::pair<std::string, MetricReport>>& rows) {
    std::ostringstream os;
    os << "| Method | tAP | stAP | success | recovery |\n";
    os << "|---|---|---|---|---|\n";
    for (const auto& [name, r] : rows)
        os << "| " << name << " | " << percent(r.tAP) << " | " << percent(r.stAP) << " | " << percent(r.success)
           << " | " << percent(r.recovery) << " |\n";
    return os.str();
}

}  // namespace vqfuse
