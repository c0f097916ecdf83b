#include "timeqa/ingest/clip.hpp"

#include <sstream>

namespace timeqa::ingest {

std::string_view to_string(SchemaId s) noexcept {
    switch (s) {
        case SchemaId::bbox_track: return "bbox_track";
        case SchemaId::goal_step: return "goal_step";
        case SchemaId::timestamped_caption: return "timestamped_caption";
        case SchemaId::action_interval: return "action_interval";
    }
    return "?";
}

std::optional<SchemaId> parse_schema_id(std::string_view s) noexcept {
    for (auto id : {SchemaId::bbox_track, SchemaId::goal_step, SchemaId::timestamped_caption, SchemaId::action_interval})
        if (s == to_string(id)) return id;
    return std::nullopt;
}

namespace {

std::string num(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

void check_tracks(const std::vector<BBoxTrack>& tracks, const NormalizedClip& clip, std::vector<std::string>& out) {
    if (tracks.empty()) out.emplace_back("tracks: must be non-empty");
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        const auto& track = tracks[t];
        const std::string at = "tracks[" + std::to_string(t) + "]";
        if (track.object_id.empty()) out.push_back(at + ".object_id: must be non-empty");
        if (track.boxes.empty()) out.push_back(at + ".boxes: must be non-empty");
        for (std::size_t b = 0; b < track.boxes.size(); ++b) {
            const auto& box = track.boxes[b];
            const std::string bat = at + ".boxes[" + std::to_string(b) + "]";
            if (box.frame_index < 0) out.push_back(bat + ".frame_index: must be >= 0");
            if (clip.frame_count > 0 && box.frame_index >= clip.frame_count)
                out.push_back(bat + ".frame_index: must be < frame_count");
            if (b > 0 && box.frame_index <= track.boxes[b - 1].frame_index)
                out.push_back(bat + ".frame_index: must be strictly increasing");
            if (!(box.x_center >= 0 && box.x_center <= 1))
                out.push_back(bat + ".x_center: must be in [0,1], got " + num(box.x_center));
            if (!(box.y_center >= 0 && box.y_center <= 1))
                out.push_back(bat + ".y_center: must be in [0,1], got " + num(box.y_center));
            if (!(box.width > 0 && box.width <= 1)) out.push_back(bat + ".width: must be in (0,1], got " + num(box.width));
            if (!(box.height > 0 && box.height <= 1))
                out.push_back(bat + ".height: must be in (0,1], got " + num(box.height));
        }
    }
}

void check_steps(const StepSequence& seq, std::vector<std::string>& out) {
    for (std::size_t i = 0; i < seq.steps.size(); ++i) {
        const auto& s = seq.steps[i];
        const std::string at = "steps[" + std::to_string(i) + "]";
        if (!(s.start_s < s.end_s)) out.push_back(at + ": start_s must be < end_s");
        if (s.start_s < 0) out.push_back(at + ".start_s: must be >= 0");
        if (i > 0 && s.start_s < seq.steps[i - 1].end_s)
            out.push_back("steps[" + std::to_string(i - 1) + "] and " + at +
                          ": steps must be non-overlapping and chronologically ordered");
    }
}

void check_events(const std::vector<TemporalEvent>& events, std::vector<std::string>& out) {
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        const std::string at = "events[" + std::to_string(i) + "]";
        if (!(e.start_s >= 0)) out.push_back(at + ".start_s: must be >= 0");
        if (!(e.start_s < e.end_s)) out.push_back(at + ": start_s must be < end_s");
        if (!(e.end_s <= e.video_duration_s)) out.push_back(at + ".end_s: must be <= video_duration_s");
    }
}

void check_actions(const std::vector<ActionInterval>& actions, std::vector<std::string>& out) {
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const auto& a = actions[i];
        const std::string at = "actions[" + std::to_string(i) + "]";
        if (a.action_label.empty()) out.push_back(at + ".action_label: must be non-empty");
        if (!(a.start_s < a.end_s)) out.push_back(at + ": start_s must be < end_s");
    }
}

}  // namespace

std::vector<std::string> validate_clip(const NormalizedClip& clip) {
    std::vector<std::string> out;
    if (clip.clip_id.empty()) out.emplace_back("clip_id: must be non-empty");
    if (!(clip.duration_s > 0)) out.emplace_back("duration_s: must be > 0");
    if (clip.frame_count <= 0) out.emplace_back("frame_count: must be > 0");
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::vector<BBoxTrack>>)
                check_tracks(p, clip, out);
            else if constexpr (std::is_same_v<T, StepSequence>)
                check_steps(p, out);
            else if constexpr (std::is_same_v<T, std::vector<TemporalEvent>>)
                check_events(p, out);
            else
                check_actions(p, out);
        },
        clip.payload);
    return out;
}

}  // namespace timeqa::ingest
