#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace timeqa::ingest {

/// One annotated box. Coordinates are normalized to [0, 1], origin top-left.
struct Box {
    int frame_index = 0;
    double x_center = 0;
    double y_center = 0;
    double width = 0;
    double height = 0;
};

struct BBoxTrack {
    std::string object_id;
    std::string category;
    std::vector<Box> boxes;  // strictly increasing frame_index
};

struct Step {
    std::string description;
    double start_s = 0;
    double end_s = 0;
    bool is_essential = false;
};

struct StepSequence {
    std::string goal_description;
    std::vector<Step> steps;
};

struct TemporalEvent {
    std::string description;
    double start_s = 0;
    double end_s = 0;
    double video_duration_s = 0;
};

struct ActionInterval {
    std::string action_label;
    double start_s = 0;
    double end_s = 0;
};

enum class SchemaId { bbox_track, goal_step, timestamped_caption, action_interval };

std::string_view to_string(SchemaId s) noexcept;
std::optional<SchemaId> parse_schema_id(std::string_view s) noexcept;

using ClipPayload = std::variant<std::vector<BBoxTrack>, StepSequence, std::vector<TemporalEvent>, std::vector<ActionInterval>>;

struct NormalizedClip {
    std::string clip_id;
    std::string video_uri;
    double duration_s = 0;
    int frame_count = 0;
    int frame_width = 0;  // 0 when the source does not declare it
    int frame_height = 0;
    ClipPayload payload;

    SchemaId schema() const noexcept { return static_cast<SchemaId>(payload.index()); }
    double fps() const noexcept { return duration_s > 0 ? frame_count / duration_s : 0.0; }
};

/// Every broken type invariant, each naming the field and rule. Empty iff valid.
std::vector<std::string> validate_clip(const NormalizedClip& clip);

}  // namespace timeqa::ingest
