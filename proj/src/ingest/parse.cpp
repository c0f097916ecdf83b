#include "timeqa/ingest/parse.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include "timeqa/core/errors.hpp"
#include "timeqa/core/io.hpp"

namespace timeqa::ingest {

using nlohmann::json;

namespace {

// Field access with aliases. Corpus-native files name the same fields
// differently (start_time vs start_s, ...), so each lookup lists alternatives.
class Record {
public:
    Record(const json& j, std::size_t index) : j_(j), index_(index) {
        if (!j.is_object()) fail("record must be an object");
    }

    [[noreturn]] void fail(const std::string& what) const { throw SchemaViolation(index_, what); }

    const json* find(std::initializer_list<const char*> names) const {
        for (const char* n : names) {
            auto it = j_.find(n);
            if (it != j_.end() && !it->is_null()) return &*it;
        }
        return nullptr;
    }

    const json& need(std::initializer_list<const char*> names) const {
        if (const json* v = find(names)) return *v;
        fail(std::string("missing field '") + *names.begin() + "'");
    }

    std::string str(std::initializer_list<const char*> names) const {
        const json& v = need(names);
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        fail(std::string("field '") + *names.begin() + "' must be a string");
    }

    std::string str_or(std::initializer_list<const char*> names, std::string fallback) const {
        return find(names) ? str(names) : std::move(fallback);
    }

    double number(std::initializer_list<const char*> names) const {
        const json& v = need(names);
        if (!v.is_number()) fail(std::string("field '") + *names.begin() + "' must be a number");
        return v.get<double>();
    }

    std::optional<double> number_opt(std::initializer_list<const char*> names) const {
        if (!find(names)) return std::nullopt;
        return number(names);
    }

    int integer(std::initializer_list<const char*> names) const {
        const json& v = need(names);
        if (!v.is_number_integer()) fail(std::string("field '") + *names.begin() + "' must be an integer");
        return v.get<int>();
    }

    const json& array(std::initializer_list<const char*> names) const {
        const json& v = need(names);
        if (!v.is_array()) fail(std::string("field '") + *names.begin() + "' must be an array");
        return v;
    }

    Record child(const json& j) const { return Record(j, index_); }
    std::size_t index() const noexcept { return index_; }
    const json& raw() const noexcept { return j_; }

private:
    const json& j_;
    std::size_t index_;
};

void check_interval(const Record& r, double start, double end, const std::string& what) {
    if (!(start < end)) {
        std::ostringstream ss;
        ss << what << ": start_s (" << start << ") must be < end_s (" << end << ")";
        throw TemporalInconsistency(r.index(), ss.str());
    }
}

void read_common(const Record& r, NormalizedClip& clip, const ParseOptions& opt) {
    clip.clip_id = r.str({"clip_id", "video_id", "video_uid"});
    clip.video_uri = r.str_or({"video_uri", "video_path"}, clip.clip_id);
    auto fps = r.number_opt({"fps"});
    auto duration = r.number_opt({"duration_s", "duration", "length"});
    auto frames = r.find({"frame_count"}) ? std::optional<int>(r.integer({"frame_count"})) : std::nullopt;
    if (!duration && frames && fps && *fps > 0) duration = *frames / *fps;
    if (!duration) r.fail("missing field 'duration_s'");
    clip.duration_s = *duration;
    if (!frames) {
        double rate = fps ? *fps : opt.default_fps;
        if (!(rate > 0)) r.fail("missing field 'frame_count' (and no fps to derive it)");
        frames = static_cast<int>(std::lround(clip.duration_s * rate));
    }
    clip.frame_count = *frames;
    if (r.find({"frame_width", "width"})) clip.frame_width = r.integer({"frame_width", "width"});
    if (r.find({"frame_height", "height"})) clip.frame_height = r.integer({"frame_height", "height"});
}

Box pixel_box(const Record& r, const NormalizedClip& clip, int frame, const json& bbox) {
    if (clip.frame_width <= 0 || clip.frame_height <= 0)
        r.fail("pixel boxes need frame_width and frame_height");
    Record b = r.child(bbox);
    const double xmin = b.number({"xmin"}), ymin = b.number({"ymin"});
    const double xmax = b.number({"xmax"}), ymax = b.number({"ymax"});
    const double w = clip.frame_width, h = clip.frame_height;
    return Box{frame, (xmin + xmax) / 2 / w, (ymin + ymax) / 2 / h, (xmax - xmin) / w, (ymax - ymin) / h};
}

// VidOR layout: "subject/objects" (tid -> category) plus per-frame "trajectories".
std::vector<BBoxTrack> vidor_tracks(const Record& r, const NormalizedClip& clip) {
    std::map<long long, BBoxTrack> by_tid;
    for (const auto& obj : r.array({"subject/objects"})) {
        Record o = r.child(obj);
        auto tid = o.need({"tid"}).get<long long>();
        by_tid[tid] = BBoxTrack{std::to_string(tid), o.str({"category"}), {}};
    }
    const json& traj = r.array({"trajectories"});
    for (std::size_t f = 0; f < traj.size(); ++f) {
        for (const auto& entry : traj[f]) {
            Record e = r.child(entry);
            auto tid = e.need({"tid"}).get<long long>();
            auto it = by_tid.find(tid);
            if (it == by_tid.end()) r.fail("trajectory references unknown tid " + std::to_string(tid));
            it->second.boxes.push_back(pixel_box(r, clip, static_cast<int>(f), e.need({"bbox"})));
        }
    }
    std::vector<BBoxTrack> out;
    for (auto& [tid, track] : by_tid)
        if (!track.boxes.empty()) out.push_back(std::move(track));
    return out;
}

std::vector<BBoxTrack> read_tracks(const Record& r, const NormalizedClip& clip) {
    if (r.find({"trajectories"})) return vidor_tracks(r, clip);
    std::vector<BBoxTrack> tracks;
    for (const auto& tj : r.array({"tracks"})) {
        Record t = r.child(tj);
        BBoxTrack track{t.str({"object_id", "tid"}), t.str({"category"}), {}};
        for (const auto& bj : t.array({"boxes"})) {
            Record b = t.child(bj);
            const int frame = b.integer({"frame_index", "frame"});
            if (b.find({"x_center"})) {
                track.boxes.push_back(Box{frame, b.number({"x_center"}), b.number({"y_center"}), b.number({"width"}),
                                          b.number({"height"})});
            } else if (b.find({"bbox"})) {
                track.boxes.push_back(pixel_box(r, clip, frame, b.need({"bbox"})));
            } else {
                track.boxes.push_back(pixel_box(r, clip, frame, bj));
            }
        }
        tracks.push_back(std::move(track));
    }
    return tracks;
}

bool essential_flag(const Record& s) {
    if (const json* v = s.find({"is_essential"})) {
        if (v->is_boolean()) return v->get<bool>();
        s.fail("field 'is_essential' must be a boolean");
    }
    // Ego4D Goal-Step marks relevance as a string.
    if (const json* v = s.find({"is_relevant", "essential"})) {
        if (v->is_boolean()) return v->get<bool>();
        if (v->is_string()) return v->get<std::string>() == "essential";
    }
    return false;
}

StepSequence read_steps(const Record& r) {
    StepSequence seq;
    seq.goal_description = r.str({"goal_description", "goal"});
    for (const auto& sj : r.array({"steps", "segments"})) {
        Record s = r.child(sj);
        Step step{s.str({"description", "step_description"}), s.number({"start_s", "start_time"}),
                  s.number({"end_s", "end_time"}), essential_flag(s)};
        check_interval(r, step.start_s, step.end_s, "step '" + step.description + "'");
        seq.steps.push_back(std::move(step));
    }
    return seq;
}

std::vector<TemporalEvent> read_events(const Record& r, const NormalizedClip& clip) {
    std::vector<TemporalEvent> events;
    if (r.find({"events"})) {
        for (const auto& ej : r.array({"events"})) {
            Record e = r.child(ej);
            TemporalEvent ev{e.str({"description", "sentence"}), e.number({"start_s", "start"}),
                             e.number({"end_s", "end"}), clip.duration_s};
            check_interval(r, ev.start_s, ev.end_s, "event '" + ev.description + "'");
            events.push_back(std::move(ev));
        }
        return events;
    }
    // ActivityNet Captions: parallel "timestamps" and "sentences" arrays.
    const json& stamps = r.array({"timestamps"});
    const json& sentences = r.array({"sentences"});
    if (stamps.size() != sentences.size()) r.fail("timestamps and sentences differ in length");
    for (std::size_t i = 0; i < stamps.size(); ++i) {
        if (!stamps[i].is_array() || stamps[i].size() != 2 || !stamps[i][0].is_number() || !stamps[i][1].is_number())
            r.fail("timestamps[" + std::to_string(i) + "] must be [start, end]");
        TemporalEvent ev{sentences[i].get<std::string>(), stamps[i][0].get<double>(), stamps[i][1].get<double>(),
                         clip.duration_s};
        check_interval(r, ev.start_s, ev.end_s, "event '" + ev.description + "'");
        events.push_back(std::move(ev));
    }
    return events;
}

std::vector<ActionInterval> read_actions(const Record& r) {
    std::vector<ActionInterval> actions;
    const json& v = r.need({"actions"});
    if (v.is_string()) {
        // Charades: "c092 11.90 21.20;c147 0.00 12.60"
        std::istringstream all(v.get<std::string>());
        std::string part;
        while (std::getline(all, part, ';')) {
            if (part.find_first_not_of(' ') == std::string::npos) continue;
            std::istringstream fields(part);
            ActionInterval a;
            if (!(fields >> a.action_label >> a.start_s >> a.end_s)) r.fail("malformed action entry '" + part + "'");
            check_interval(r, a.start_s, a.end_s, "action '" + a.action_label + "'");
            actions.push_back(std::move(a));
        }
        return actions;
    }
    if (!v.is_array()) r.fail("field 'actions' must be an array or a Charades action string");
    for (const auto& aj : v) {
        Record a = r.child(aj);
        ActionInterval act{a.str({"action_label", "label"}), a.number({"start_s", "start"}), a.number({"end_s", "end"})};
        check_interval(r, act.start_s, act.end_s, "action '" + act.action_label + "'");
        actions.push_back(std::move(act));
    }
    return actions;
}

NormalizedClip parse_record(SchemaId schema, const json& j, std::size_t index, const ParseOptions& opt) {
    Record r(j, index);
    if (const json* declared = r.find({"schema"})) {
        if (!declared->is_string() || parse_schema_id(declared->get<std::string>()) != schema)
            r.fail("record declares a different schema than " + std::string(to_string(schema)));
    }
    NormalizedClip clip;
    read_common(r, clip, opt);
    switch (schema) {
        case SchemaId::bbox_track: clip.payload = read_tracks(r, clip); break;
        case SchemaId::goal_step: clip.payload = read_steps(r); break;
        case SchemaId::timestamped_caption: clip.payload = read_events(r, clip); break;
        case SchemaId::action_interval: clip.payload = read_actions(r); break;
    }
    auto violations = validate_clip(clip);
    if (!violations.empty()) r.fail(violations.front());
    return clip;
}

// Splits a document into records, unwrapping the supported container layouts.
std::vector<json> split_records(SchemaId schema, std::string_view text) {
    std::vector<json> records;
    json doc = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
    if (!doc.is_discarded()) {
        if (doc.is_array()) return doc.get<std::vector<json>>();
        if (doc.is_object()) {
            if (auto it = doc.find("clips"); it != doc.end() && it->is_array()) return it->get<std::vector<json>>();
            if (auto it = doc.find("videos"); it != doc.end() && it->is_array()) return it->get<std::vector<json>>();
            const bool keyed_by_video = schema == SchemaId::timestamped_caption && !doc.contains("clip_id") &&
                                        !doc.empty() && doc.begin()->is_object() &&
                                        doc.begin()->contains("timestamps");
            if (keyed_by_video) {
                // ActivityNet Captions: {"v_xxx": {...}, ...}. Object keys iterate
                // sorted, so order is stable.
                for (auto& [key, value] : doc.items()) {
                    json rec = value;
                    if (rec.is_object()) rec["clip_id"] = key;
                    records.push_back(std::move(rec));
                }
                return records;
            }
            records.push_back(std::move(doc));
            return records;
        }
    }
    // Line-delimited records.
    std::size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json rec = json::parse(line.begin(), line.end(), nullptr, false);
        if (rec.is_discarded()) throw SchemaViolation(line_no, "line is not valid JSON");
        records.push_back(std::move(rec));
        ++line_no;
    }
    return records;
}

}  // namespace

std::vector<NormalizedClip> parse_corpus_text(SchemaId schema, std::string_view text, const ParseOptions& options) {
    auto records = split_records(schema, text);
    if (records.empty()) throw EmptyCorpus("corpus contains no records");
    std::vector<NormalizedClip> clips;
    clips.reserve(records.size());
    std::set<std::string> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto clip = parse_record(schema, records[i], i, options);
        if (!seen.insert(clip.clip_id).second) throw SchemaViolation(i, "duplicate clip_id '" + clip.clip_id + "'");
        clips.push_back(std::move(clip));
    }
    return clips;
}

std::vector<NormalizedClip> parse_corpus(SchemaId schema, const std::filesystem::path& path,
                                         const ParseOptions& options) {
    if (!std::filesystem::exists(path)) throw Error("corpus file not found: " + path.string());
    try {
        return parse_corpus_text(schema, read_text(path), options);
    } catch (const EmptyCorpus&) {
        throw EmptyCorpus("corpus " + path.string() + " contains no records");
    }
}

std::vector<NormalizedClip> parse_corpora(const std::vector<CorpusSource>& sources, const ParseOptions& options) {
    std::vector<std::future<std::vector<NormalizedClip>>> jobs;
    jobs.reserve(sources.size());
    for (const auto& src : sources)
        jobs.push_back(std::async(std::launch::async, [&src, &options] { return parse_corpus(src.schema, src.path, options); }));
    std::vector<NormalizedClip> all;
    for (auto& job : jobs) {
        auto part = job.get();
        std::move(part.begin(), part.end(), std::back_inserter(all));
    }
    return all;
}

json clip_to_json(const NormalizedClip& clip) {
    json j{{"schema", to_string(clip.schema())},
           {"clip_id", clip.clip_id},
           {"video_uri", clip.video_uri},
           {"duration_s", clip.duration_s},
           {"frame_count", clip.frame_count},
           {"frame_width", clip.frame_width},
           {"frame_height", clip.frame_height}};
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::vector<BBoxTrack>>) {
                json tracks = json::array();
                for (const auto& t : p) {
                    json boxes = json::array();
                    for (const auto& b : t.boxes)
                        boxes.push_back({{"frame_index", b.frame_index},
                                         {"x_center", b.x_center},
                                         {"y_center", b.y_center},
                                         {"width", b.width},
                                         {"height", b.height}});
                    tracks.push_back({{"object_id", t.object_id}, {"category", t.category}, {"boxes", boxes}});
                }
                j["tracks"] = std::move(tracks);
            } else if constexpr (std::is_same_v<T, StepSequence>) {
                json steps = json::array();
                for (const auto& s : p.steps)
                    steps.push_back({{"description", s.description},
                                     {"start_s", s.start_s},
                                     {"end_s", s.end_s},
                                     {"is_essential", s.is_essential}});
                j["goal_description"] = p.goal_description;
                j["steps"] = std::move(steps);
            } else if constexpr (std::is_same_v<T, std::vector<TemporalEvent>>) {
                json events = json::array();
                for (const auto& e : p)
                    events.push_back({{"description", e.description}, {"start_s", e.start_s}, {"end_s", e.end_s}});
                j["events"] = std::move(events);
            } else {
                json actions = json::array();
                for (const auto& a : p)
                    actions.push_back({{"action_label", a.action_label}, {"start_s", a.start_s}, {"end_s", a.end_s}});
                j["actions"] = std::move(actions);
            }
        },
        clip.payload);
    return j;
}

NormalizedClip clip_from_json(const json& j, std::size_t record_index) {
    Record r(j, record_index);
    auto schema = parse_schema_id(r.str({"schema"}));
    if (!schema) r.fail("unknown schema");
    return parse_record(*schema, j, record_index, ParseOptions{});
}

}  // namespace timeqa::ingest
