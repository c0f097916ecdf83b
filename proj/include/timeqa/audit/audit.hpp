#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "timeqa/judge/cache.hpp"
#include "timeqa/judge/judge.hpp"
#include "timeqa/qagen/item.hpp"

namespace timeqa::audit {

/// Appended verbatim to every judge probe.
inline constexpr std::string_view kEvalPrompt =
    "Answer with the option's letter from the given choices directly and only give the best option";

struct JudgeVerdict {
    std::string item_id;
    std::string judge_id;
    judge::Condition condition = judge::Condition::single_frame;
    std::string raw_response;
    std::optional<char> chosen_letter;
    bool correct = false;
    /// Position in the edited sequence shown to the judge; -1 for blind probes.
    int frame_index = -1;
    /// The judge never answered; counted as incorrect.
    bool unavailable = false;
};

/// Scores a raw reply against the item's answer letter.
JudgeVerdict make_verdict(const qagen::QAItem& item, const std::string& judge_id, judge::Condition condition,
                          std::string raw_response, int frame_index);

/// Prompt sent to judges: the item's question followed by the evaluation prompt.
std::string probe_prompt(const qagen::QAItem& item);

struct FramePick {
    FrameRef frame;
    int sequence_index = 0;
    int sequence_length = 0;
};

/// Seeded frame of the item's edited video. With an empty `judge_id` every
/// judge sees the same frame; otherwise the draw is per judge.
FramePick pick_frame(const qagen::QAItem& item, std::uint64_t seed, const std::string& judge_id = {});

/// Path of the extracted still a single-frame probe attaches.
std::filesystem::path frame_path(const std::filesystem::path& frames_dir, const std::string& item_id, int sequence_index);

struct ProbeOptions {
    std::filesystem::path frames_dir = "frames";
    int retries = 3;
    bool shared_frame = true;
};

/// Probes one item under one condition. Replies are cached by (item, judge,
/// condition, frame, prompt). A judge that stays unavailable yields an
/// incorrect verdict flagged `unavailable` (not cached).
JudgeVerdict probe_item(const qagen::QAItem& item, judge::Judge& judge, judge::Condition condition, std::uint64_t seed,
                        judge::ResponseCache* cache = nullptr, const ProbeOptions& opts = {});

struct FilterDecision {
    std::string item_id;
    std::vector<JudgeVerdict> verdicts;
    bool filtered = false;
};

/// The shortcut predicate: at least two of three judges correct.
bool is_shortcut(const std::array<bool, 3>& correct) noexcept;

struct FilterResult {
    std::vector<qagen::QAItem> kept;
    std::vector<FilterDecision> removed;
    std::vector<FilterDecision> decisions;  // one per judged item, input order
    /// Items without exactly three single-frame verdicts; in neither list.
    std::vector<std::string> incomplete;
};

/// Removes every item that at least two judges answer correctly from one frame.
/// Items with incomplete verdicts are reported, not kept or removed.
FilterResult majority_filter(const std::vector<qagen::QAItem>& items,
                             const std::map<std::string, std::vector<JudgeVerdict>>& single_frame_verdicts);

/// Re-shuffles options so that, per dimension, correct-letter positions differ
/// by at most one between the most and least used letter. Options, answer text
/// and stem are preserved; only order, letter and rendered question change.
std::vector<qagen::QAItem> rebalance_options(std::vector<qagen::QAItem> items, std::uint64_t seed);

/// Correct-letter position counts per dimension (multiple-choice items only).
std::map<Dimension, std::vector<std::size_t>> letter_positions(const std::vector<qagen::QAItem>& items);

struct AccuracyCell {
    std::size_t n = 0;
    double acc_s = 0;
    double acc_b = 0;
    double acc_r = 0;
};

struct DiagnosticsReport {
    AccuracyCell overall;
    std::map<Dimension, AccuracyCell> per_dimension;
};

/// Mean of 1/option_count over the items.
double analytic_random(const std::vector<qagen::QAItem>& items);

/// Acc_s and Acc_b are mean correctness of the per-item single-frame and
/// blind verdicts; Acc_r is analytic. Throws IncompleteVerdicts when an item
/// lacks a verdict for either condition.
DiagnosticsReport compute_diagnostics(const std::vector<qagen::QAItem>& items,
                                      const std::map<std::string, JudgeVerdict>& single_frame,
                                      const std::map<std::string, JudgeVerdict>& blind);

struct AuditConfig {
    ProbeOptions probe;
    /// Index of the judge probed for the diagnostics.
    int diagnostic_judge = 0;
    /// Per-judge request concurrency; missing entries default to 4.
    std::vector<int> max_in_flight;
    /// Per-judge retry budget; missing entries use probe.retries.
    std::vector<int> retries;
};

struct AuditResult {
    std::vector<qagen::QAItem> benchmark;  // kept, rebalanced, sorted by item_id
    std::vector<FilterDecision> removed;
    std::vector<std::string> incomplete;
    std::vector<JudgeVerdict> verdicts;  // every probe, grouped by phase
    DiagnosticsReport before;            // diagnostic judge on the candidates
    DiagnosticsReport after;             // diagnostic judge on the final benchmark
    std::size_t open_ended_excluded = 0;
    std::size_t unavailable_verdicts = 0;
};

/// Probes every multiple-choice item with three judges on one frame, drops
/// shortcut items, rebalances option positions and runs the diagnostics.
/// Throws ConfigInvalid unless exactly three judges are given.
AuditResult run_audit(const std::vector<qagen::QAItem>& items, const std::vector<judge::Judge*>& judges,
                      const AuditConfig& cfg, judge::ResponseCache* cache, std::uint64_t seed);

/// Frames the single-frame probes attach: "<item_id> <source_uri> <source_frame> <path>" per line.
std::string frame_plan(const std::vector<qagen::QAItem>& items, const std::vector<judge::Judge*>& judges,
                       const AuditConfig& cfg, std::uint64_t seed);

/// Per-dimension tables of the filter outcome and both diagnostics.
std::string report_text(const AuditResult& r);

nlohmann::json to_json(const JudgeVerdict& v);
nlohmann::json to_json(const FilterDecision& d);
nlohmann::json to_json(const DiagnosticsReport& d);

}  // namespace timeqa::audit
