#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "timeqa/core/edit_manifest.hpp"
#include "timeqa/core/types.hpp"
#include "timeqa/qagen/templates.hpp"
#include "timeqa/taskgen/candidate.hpp"

namespace timeqa::qagen {

struct Provenance {
    int template_index = -1;
    int instruction_index = -1;  // -1 for open-ended items
    std::uint64_t seed = 0;
    std::string source_clip;
    std::string candidate_key;
    std::string parent_item;  // set on reversal siblings
    bool operator==(const Provenance&) const = default;
};

struct QAItem {
    std::string item_id;
    Dimension dimension = Dimension::dynamic;
    QAFormat format = QAFormat::open_ended;
    /// Full prompt text; for multiple choice it ends with the lettered options.
    std::string question;
    /// Prompt without the option listing (instruction + question for multiple choice).
    std::string stem;
    std::vector<std::string> options;
    /// Option letter for multiple choice, otherwise the answer text.
    std::string answer;
    std::string answer_text;
    /// Canonical answer value (see taskgen::answer_key).
    std::string label;
    std::string clip_id;
    std::optional<EditManifest> edit;
    Provenance provenance;

    bool operator==(const QAItem&) const = default;
};

struct OptionSet {
    std::vector<std::string> options;
    std::size_t correct_index = 0;
};

/// Human-readable answer for a payload; also the option text for multiple choice.
std::string answer_phrase(const taskgen::AnswerPayload& answer);

/// Options per dimension: the full answer space for Dynamic/Duration/Location,
/// the answer plus three other permutations for Order, the answer plus three
/// sampled sibling steps for Reasoning. The correct position is uniform in `seed`.
/// Throws InsufficientDistractors.
OptionSet build_options(const taskgen::LabeledCandidate& cand, std::uint64_t seed);

/// Builds the item. Multiple choice needs both `instruction` and `options`;
/// open-ended must have neither. Throws FormatMismatch.
QAItem assemble_item(const taskgen::LabeledCandidate& cand, const std::string& question,
                     const std::optional<std::string>& instruction, const std::optional<OptionSet>& options,
                     Provenance provenance);

/// `stem` followed by "A. ..." lines.
std::string render_mc_question(const std::string& stem, const std::vector<std::string>& options);

/// Throws FormatMismatch when an item breaks the QAItem invariants.
void check_item(const QAItem& item);

/// 16 hex characters of SHA-256 over the identifying fields.
std::string make_item_id(Dimension d, const std::string& clip_id, const std::string& candidate_key, QAFormat format,
                         int template_index, std::uint64_t seed);

struct QagenConfig {
    /// Probability that a candidate becomes a multiple-choice item.
    double mc_fraction = 0.5;
};

struct QagenResult {
    std::vector<QAItem> items;  // sorted by item_id
    std::map<std::string, std::size_t> drops;
};

QagenResult generate_items(const std::vector<taskgen::LabeledCandidate>& cands, const TemplateLibrary& templates,
                           const QagenConfig& cfg, std::uint64_t seed);

void sort_by_id(std::vector<QAItem>& items);

void to_json(nlohmann::json& j, const QAItem& item);
void from_json(const nlohmann::json& j, QAItem& item);

}  // namespace timeqa::qagen
