#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "timeqa/core/edit_manifest.hpp"
#include "timeqa/core/types.hpp"

namespace timeqa::taskgen {

struct NextStep {
    std::string description;
    bool operator==(const NextStep&) const = default;
};

/// Three action labels in chronological order.
struct ActionOrder {
    std::array<std::string, 3> labels;
    bool operator==(const ActionOrder&) const = default;
};

using AnswerPayload = std::variant<Direction, NextStep, DurationBucket, IntervalBucket, ActionOrder>;

/// The dimension a payload kind belongs to.
Dimension dimension_of(const AnswerPayload& a) noexcept;

/// Canonical answer token: the direction/bucket name, the step text, or the
/// labels joined by " | ". Used for balancing and long-tail counts.
std::string answer_key(const AnswerPayload& a);

/// A labeled sample before QA templating.
struct LabeledCandidate {
    Dimension dimension = Dimension::dynamic;
    std::string clip_id;
    /// Unique within (dimension, clip_id); identifies the window/event/split.
    std::string key;
    double window_start_s = 0;
    AnswerPayload answer;
    /// Placeholder values: object, goal, activity, actions.
    std::map<std::string, std::string> context;
    /// Reasoning only: other step descriptions of the same goal.
    std::vector<std::string> distractor_pool;
    /// Reasoning only: number of observed steps (the answer is step observed_steps + 1).
    int observed_steps = 0;
    std::optional<EditManifest> edit;
};

/// Placeholders a dimension's question templates may use; all are present in context.
std::vector<std::string> required_context(Dimension d);

/// Sorts by (clip_id, window_start_s, key).
void canonical_sort(std::vector<LabeledCandidate>& cands);

/// Per-reason drop counters from one generator run.
using DropCounts = std::map<std::string, std::size_t>;

struct GenerationResult {
    std::vector<LabeledCandidate> candidates;
    DropCounts drops;
};

}  // namespace timeqa::taskgen
