#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "timeqa/core/edit_manifest.hpp"
#include "timeqa/judge/cache.hpp"
#include "timeqa/judge/judge.hpp"

namespace timeqa::mtp {

enum class Role { user, assistant };

struct Turn {
    Role role = Role::user;
    std::string text;
    bool operator==(const Turn&) const = default;
};

struct InstructionSample {
    std::string sample_id;
    std::string video_uri;
    int frame_count = 0;
    std::vector<Turn> conversation;
    std::optional<bool> temporal_flag;
    bool operator==(const InstructionSample&) const = default;
};

enum class AuxTask { none, frame_index, assigned_qa };
std::string_view to_string(AuxTask t) noexcept;

struct AugmentedSample {
    InstructionSample base;
    AuxTask aux_task = AuxTask::none;
    std::string aux_prompt;
    std::string aux_answer;
    std::optional<EditManifest> edit;
    std::optional<std::string> partner_id;
};

struct MtpRatios {
    double frame_index_fraction = 0.25;
    double assigned_qa_fraction = 0.5;
    /// Throws ConfigInvalid unless both are in [0,1] and their sum is <= 1.
    void validate() const;
};

struct MtpConfig {
    MtpRatios ratios;
    int min_frames = 8;
    /// Base of frame positions in prompts and answers.
    int index_base = 1;
    int max_in_flight = 4;
    int retries = 3;
};

/// Prompt assets: the auxiliary-task pools and the gate classification prompt.
struct PromptPools {
    std::vector<std::string> frame_index;  // placeholders: {num_frames}, {first_index}, {last_index}
    std::vector<std::string> assigned_qa;  // placeholder: {position} ("first" / "second")
    std::string gate;                      // placeholder: {conversation}

    /// Loads frame_index.txt, assigned_qa.txt and gate.txt from `dir`.
    static PromptPools load(const std::filesystem::path& dir);
};

/// Throws SchemaViolation when the conversation is empty or does not alternate starting with the user.
void check_sample(const InstructionSample& s, std::size_t record_index = 0);

/// yes -> true, no -> false, anything else nullopt.
std::optional<bool> parse_yes_no(std::string_view reply);

struct GateStats {
    std::size_t judge_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t unparseable = 0;
};

/// Sets temporal_flag on every sample lacking one from the judge's yes/no
/// reply to the gate prompt. Replies are cached by (sample_id, prompt hash).
/// An unparseable reply flags the sample (never augment ambiguous samples).
/// Throws JudgeUnavailable once retries are exhausted.
std::vector<InstructionSample> gate_temporal(const std::vector<InstructionSample>& samples, judge::Judge& gate,
                                             judge::ResponseCache& cache, const std::string& gate_prompt,
                                             int max_in_flight, int retries, GateStats* stats = nullptr);

/// Prepends a copy of a seeded frame p in [base, frame_count - 1 + base];
/// the auxiliary answer is p. Throws TooFewFrames.
AugmentedSample build_frame_index_task(const InstructionSample& sample, const PromptPools& prompts,
                                       const MtpConfig& cfg, std::uint64_t seed);

/// Concatenates the partner's video before or after the original (fair seeded
/// coin) and instructs the model to answer about the original only. The
/// original conversation is kept verbatim. Throws SelfPartner.
AugmentedSample build_assigned_qa_task(const InstructionSample& sample, const InstructionSample& partner,
                                       const PromptPools& prompts, std::uint64_t seed);

struct MtpResult {
    std::vector<AugmentedSample> samples;  // input order
    std::map<std::string, std::size_t> counts;
    GateStats gate;
};

/// Flagged samples pass through untouched; every unflagged sample gets
/// frame_index with probability frame_index_fraction, assigned_qa with
/// assigned_qa_fraction, nothing otherwise. Samples without a flag are gated
/// first (a null `gate` treats them as unflagged). Failed builds fall back to none.
MtpResult apply_mtp(const std::vector<InstructionSample>& samples, const MtpConfig& cfg, const PromptPools& prompts,
                    judge::Judge* gate, judge::ResponseCache* cache, std::uint64_t seed);

/// The conversation a trainer consumes: aux exchange first for frame_index,
/// instruction prefixed to the first user turn for assigned_qa.
std::vector<Turn> rendered_conversation(const AugmentedSample& s);

std::vector<InstructionSample> load_samples(const std::filesystem::path& path);
InstructionSample sample_from_json(const nlohmann::json& j, std::size_t record_index = 0);
nlohmann::json to_json(const InstructionSample& s);
nlohmann::json to_json(const AugmentedSample& s);

}  // namespace timeqa::mtp
