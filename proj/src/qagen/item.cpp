#include "timeqa/qagen/item.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>

#include "timeqa/core/errors.hpp"
#include "timeqa/core/hash.hpp"
#include "timeqa/core/rng.hpp"

namespace timeqa::qagen {

using taskgen::ActionOrder;
using taskgen::AnswerPayload;
using taskgen::LabeledCandidate;
using taskgen::NextStep;

namespace {

std::string order_phrase(const std::array<std::string, 3>& l) { return l[0] + ", then " + l[1] + ", then " + l[2]; }

std::string bucket_phrase(DurationBucket b) {
    switch (b) {
        case DurationBucket::short_span: return "a short portion of the video";
        case DurationBucket::medium_span: return "a moderate portion of the video";
        case DurationBucket::long_span: return "most of the video";
    }
    return {};
}

std::string bucket_phrase(IntervalBucket b) {
    switch (b) {
        case IntervalBucket::start: return "at the beginning of the video";
        case IntervalBucket::middle: return "in the middle of the video";
        case IntervalBucket::end: return "at the end of the video";
    }
    return {};
}

// Shuffles the options and reports where the correct one landed.
OptionSet shuffled(std::vector<std::string> options, const std::string& correct, Rng& rng) {
    rng.shuffle(options);
    const auto index = static_cast<std::size_t>(std::find(options.begin(), options.end(), correct) - options.begin());
    return {std::move(options), index};
}

}  // namespace

std::string answer_phrase(const AnswerPayload& answer) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Direction>)
                return std::string(to_string(v));
            else if constexpr (std::is_same_v<T, NextStep>)
                return v.description;
            else if constexpr (std::is_same_v<T, ActionOrder>)
                return order_phrase(v.labels);
            else
                return bucket_phrase(v);
        },
        answer);
}

OptionSet build_options(const LabeledCandidate& cand, std::uint64_t seed) {
    Rng rng(seed);
    const std::string correct = answer_phrase(cand.answer);
    return std::visit(
        [&](const auto& v) -> OptionSet {
            using T = std::decay_t<decltype(v)>;
            std::vector<std::string> opts;
            if constexpr (std::is_same_v<T, Direction>) {
                for (auto d : kAllDirections) opts.push_back(answer_phrase(d));
            } else if constexpr (std::is_same_v<T, DurationBucket>) {
                for (auto b : kAllDurations) opts.push_back(bucket_phrase(b));
            } else if constexpr (std::is_same_v<T, IntervalBucket>) {
                for (auto b : kAllIntervals) opts.push_back(bucket_phrase(b));
            } else if constexpr (std::is_same_v<T, ActionOrder>) {
                std::array<std::string, 3> perm = v.labels;
                std::sort(perm.begin(), perm.end());
                std::vector<std::string> wrong;
                do {
                    if (perm != v.labels) wrong.push_back(order_phrase(perm));
                } while (std::next_permutation(perm.begin(), perm.end()));
                for (auto i : rng.sample_indices(wrong.size(), 3)) opts.push_back(wrong[i]);
                opts.push_back(correct);
            } else {
                std::vector<std::string> pool;
                std::set<std::string> seen{correct};
                for (const auto& s : cand.distractor_pool)
                    if (seen.insert(s).second) pool.push_back(s);
                if (pool.size() < 3)
                    throw InsufficientDistractors("reasoning candidate " + cand.clip_id + "/" + cand.key + " has " +
                                                  std::to_string(pool.size()) + " distinct sibling step(s), needs 3");
                for (auto i : rng.sample_indices(pool.size(), 3)) opts.push_back(pool[i]);
                opts.push_back(correct);
            }
            return shuffled(std::move(opts), correct, rng);
        },
        cand.answer);
}

std::string render_mc_question(const std::string& stem, const std::vector<std::string>& options) {
    std::string q = stem;
    for (std::size_t i = 0; i < options.size(); ++i) {
        q += '\n';
        q += letter_for(i);
        q += ". ";
        q += options[i];
    }
    return q;
}

std::string make_item_id(Dimension d, const std::string& clip_id, const std::string& candidate_key, QAFormat format,
                         int template_index, std::uint64_t seed) {
    std::string material = std::string(to_string(d)) + '\x1f' + clip_id + '\x1f' + candidate_key + '\x1f' +
                           std::string(to_string(format)) + '\x1f' + std::to_string(template_index) + '\x1f' +
                           std::to_string(seed);
    return sha256_hex(material).substr(0, 16);
}

QAItem assemble_item(const LabeledCandidate& cand, const std::string& question,
                     const std::optional<std::string>& instruction, const std::optional<OptionSet>& options,
                     Provenance provenance) {
    QAItem item;
    item.dimension = cand.dimension;
    item.clip_id = cand.clip_id;
    item.edit = cand.edit;
    item.label = taskgen::answer_key(cand.answer);
    item.answer_text = answer_phrase(cand.answer);
    provenance.source_clip = cand.clip_id;
    provenance.candidate_key = cand.key;

    if (options.has_value() != instruction.has_value())
        throw FormatMismatch("multiple-choice items need both an instruction and options");
    if (options) {
        if (options->options.empty() || options->options.size() > 26)
            throw FormatMismatch("option count must be in [1, 26]");
        if (options->correct_index >= options->options.size()) throw FormatMismatch("correct_index out of range");
        if (options->options[options->correct_index] != item.answer_text)
            throw FormatMismatch("correct option differs from the candidate answer");
        item.format = QAFormat::multiple_choice;
        item.stem = *instruction + "\n" + question;
        item.options = options->options;
        item.question = render_mc_question(item.stem, item.options);
        item.answer = std::string(1, letter_for(options->correct_index));
    } else {
        item.format = QAFormat::open_ended;
        item.stem = question;
        item.question = question;
        item.answer = item.answer_text;
        provenance.instruction_index = -1;
    }
    item.item_id = make_item_id(item.dimension, cand.clip_id, cand.key, item.format, provenance.template_index,
                                provenance.seed);
    item.provenance = std::move(provenance);
    check_item(item);
    return item;
}

void check_item(const QAItem& item) {
    const std::string at = "item " + item.item_id + ": ";
    if (item.format == QAFormat::open_ended) {
        if (!item.options.empty()) throw FormatMismatch(at + "open-ended item has options");
        return;
    }
    if (item.options.empty()) throw FormatMismatch(at + "multiple-choice item has no options");
    std::set<std::string> distinct(item.options.begin(), item.options.end());
    if (distinct.size() != item.options.size()) throw FormatMismatch(at + "options are not pairwise distinct");
    if (item.answer.size() != 1) throw FormatMismatch(at + "answer must be a single letter");
    auto idx = index_for(item.answer[0]);
    if (!idx || *idx >= item.options.size() || item.answer[0] != letter_for(*idx))
        throw FormatMismatch(at + "answer letter out of range");
    if (item.options[*idx] != item.answer_text) throw FormatMismatch(at + "answer_text differs from the lettered option");

    // The lettered listing in the prompt must match the option list.
    std::size_t listed = 0;
    std::size_t pos = 0;
    const std::string& q = item.question;
    while (pos <= q.size()) {
        auto nl = q.find('\n', pos);
        auto line = std::string_view(q).substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        if (line.size() >= 3 && line[0] >= 'A' && line[0] <= 'Z' && line[1] == '.' && line[2] == ' ') ++listed;
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    if (listed != item.options.size())
        throw FormatMismatch(at + std::to_string(listed) + " lettered lines for " + std::to_string(item.options.size()) +
                             " options");
}

void sort_by_id(std::vector<QAItem>& items) {
    std::stable_sort(items.begin(), items.end(), [](const QAItem& a, const QAItem& b) { return a.item_id < b.item_id; });
}

QagenResult generate_items(const std::vector<LabeledCandidate>& cands, const TemplateLibrary& templates,
                           const QagenConfig& cfg, std::uint64_t seed) {
    QagenResult out;
    for (const auto& cand : cands) {
        const std::string dim(to_string(cand.dimension));
        Rng rng(derive_seed(seed, {"qagen", dim, cand.clip_id, cand.key}));
        const bool mc = rng.uniform01() < cfg.mc_fraction;
        try {
            Provenance prov;
            prov.seed = seed;
            auto q = render_template(cand, templates.get(cand.dimension, TemplateKind::question),
                                     derive_seed(seed, {"qagen", "question", dim, cand.clip_id, cand.key}));
            prov.template_index = q.template_index;
            if (!mc) {
                out.items.push_back(assemble_item(cand, q.text, std::nullopt, std::nullopt, prov));
                continue;
            }
            auto instr = render_template(cand, templates.get(cand.dimension, TemplateKind::instruction),
                                         derive_seed(seed, {"qagen", "instruction", dim, cand.clip_id, cand.key}));
            prov.instruction_index = instr.template_index;
            auto opts = build_options(cand, derive_seed(seed, {"qagen", "options", dim, cand.clip_id, cand.key}));
            out.items.push_back(assemble_item(cand, q.text, instr.text, opts, prov));
        } catch (const InsufficientDistractors& e) {
            ++out.drops[dim + ": insufficient distractors"];
            spdlog::debug("qagen: drop {}", e.what());
        }
    }
    sort_by_id(out.items);
    return out;
}

void to_json(nlohmann::json& j, const QAItem& item) {
    j = nlohmann::json{{"item_id", item.item_id},
                       {"dimension", to_string(item.dimension)},
                       {"format", to_string(item.format)},
                       {"question", item.question},
                       {"stem", item.stem},
                       {"options", item.options},
                       {"answer", item.answer},
                       {"answer_text", item.answer_text},
                       {"label", item.label},
                       {"clip_id", item.clip_id},
                       {"provenance",
                        {{"template_index", item.provenance.template_index},
                         {"instruction_index", item.provenance.instruction_index},
                         {"seed", item.provenance.seed},
                         {"source_clip", item.provenance.source_clip},
                         {"candidate_key", item.provenance.candidate_key},
                         {"parent_item", item.provenance.parent_item}}}};
    j["edit"] = item.edit ? nlohmann::json(*item.edit) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, QAItem& item) {
    item.item_id = j.at("item_id").get<std::string>();
    auto dim = parse_dimension(j.at("dimension").get<std::string>());
    if (!dim) throw FormatMismatch("unknown dimension in item " + item.item_id);
    item.dimension = *dim;
    auto fmt = parse_format(j.at("format").get<std::string>());
    if (!fmt) throw FormatMismatch("unknown format in item " + item.item_id);
    item.format = *fmt;
    item.question = j.at("question").get<std::string>();
    item.stem = j.value("stem", item.question);
    item.options = j.value("options", std::vector<std::string>{});
    item.answer = j.at("answer").get<std::string>();
    item.answer_text = j.value("answer_text", item.answer);
    item.label = j.value("label", item.answer_text);
    item.clip_id = j.value("clip_id", std::string{});
    if (auto it = j.find("edit"); it != j.end() && !it->is_null())
        item.edit = it->get<EditManifest>();
    else
        item.edit.reset();
    if (auto it = j.find("provenance"); it != j.end()) {
        const auto& p = *it;
        item.provenance.template_index = p.value("template_index", -1);
        item.provenance.instruction_index = p.value("instruction_index", -1);
        item.provenance.seed = p.value("seed", std::uint64_t{0});
        item.provenance.source_clip = p.value("source_clip", std::string{});
        item.provenance.candidate_key = p.value("candidate_key", std::string{});
        item.provenance.parent_item = p.value("parent_item", std::string{});
    }
}

}  // namespace timeqa::qagen
