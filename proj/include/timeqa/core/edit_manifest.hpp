#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <variant>
#include <vector>

namespace timeqa {

// Edit operations. Times are seconds on the timeline of the sequence produced
// by the preceding operations; frame indices are 0-based positions in it.
struct Crop {
    double start_s = 0;
    double end_s = 0;
    bool operator==(const Crop&) const = default;
};

struct Reverse {
    bool operator==(const Reverse&) const = default;
};

enum class ConcatPosition { before, after };

/// Joins another video's full frame grid before or after the current sequence.
struct Concat {
    std::string other_uri;
    ConcatPosition position = ConcatPosition::after;
    int other_frame_count = 0;
    bool operator==(const Concat&) const = default;
};

/// Reduces the sequence to the single frame at `index`.
struct ExtractFrame {
    int index = 0;
    bool operator==(const ExtractFrame&) const = default;
};

/// Copies the frame at `index` to the front; the rest of the sequence is untouched.
struct PrependFrame {
    int index = 0;
    bool operator==(const PrependFrame&) const = default;
};

using EditOp = std::variant<Crop, Reverse, Concat, ExtractFrame, PrependFrame>;

/// Declarative edit plan over one source video. Never executed in-process:
/// `replay` computes the resulting frame order, and the transcoder plan
/// renderer turns it into external commands.
struct EditManifest {
    std::string source_uri;
    double source_duration_s = 0;
    int source_frame_count = 0;
    int frame_width = 0;   // 0 when unknown
    int frame_height = 0;
    std::vector<EditOp> ops;

    double fps() const noexcept { return source_duration_s > 0 ? source_frame_count / source_duration_s : 0.0; }

    bool operator==(const EditManifest&) const = default;
};

struct FrameRef {
    std::string uri;
    int index = 0;
    bool operator==(const FrameRef&) const = default;
};

/// Every broken invariant, in operation order. Empty for a valid manifest.
std::vector<std::string> manifest_violations(const EditManifest& m);

/// Throws InvalidManifest with the first violation.
void validate_manifest(const EditManifest& m);

/// Deterministic frame sequence the manifest realizes. Throws InvalidManifest.
std::vector<FrameRef> replay(const EditManifest& m);

std::string_view op_name(const EditOp& op) noexcept;

void to_json(nlohmann::json& j, const EditOp& op);
void from_json(const nlohmann::json& j, EditOp& op);
void to_json(nlohmann::json& j, const EditManifest& m);
void from_json(const nlohmann::json& j, EditManifest& m);

}  // namespace timeqa
