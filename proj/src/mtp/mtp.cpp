#include "timeqa/mtp/mtp.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>

#include "timeqa/core/errors.hpp"
#include "timeqa/core/hash.hpp"
#include "timeqa/core/io.hpp"
#include "timeqa/core/parallel.hpp"
#include "timeqa/core/rng.hpp"
#include "timeqa/qagen/templates.hpp"

namespace timeqa::mtp {

std::string_view to_string(AuxTask t) noexcept {
    switch (t) {
        case AuxTask::none: return "none";
        case AuxTask::frame_index: return "frame_index";
        case AuxTask::assigned_qa: return "assigned_qa";
    }
    return "?";
}

void MtpRatios::validate() const {
    auto in_unit = [](double v) { return v >= 0 && v <= 1; };
    if (!in_unit(frame_index_fraction) || !in_unit(assigned_qa_fraction))
        throw ConfigInvalid("MTP ratios must lie in [0, 1]");
    if (frame_index_fraction + assigned_qa_fraction > 1 + 1e-12)
        throw ConfigInvalid("MTP ratios must sum to at most 1");
}

PromptPools PromptPools::load(const std::filesystem::path& dir) {
    PromptPools p;
    p.frame_index = qagen::load_template_lines(dir / "frame_index.txt");
    p.assigned_qa = qagen::load_template_lines(dir / "assigned_qa.txt");
    p.gate = read_text(dir / "gate.txt");
    return p;
}

void check_sample(const InstructionSample& s, std::size_t record_index) {
    if (s.sample_id.empty()) throw SchemaViolation(record_index, "sample_id must be non-empty");
    if (s.frame_count <= 0) throw SchemaViolation(record_index, "frame_count must be > 0");
    if (s.conversation.empty()) throw SchemaViolation(record_index, "conversation must be non-empty");
    for (std::size_t i = 0; i < s.conversation.size(); ++i) {
        const Role expected = i % 2 == 0 ? Role::user : Role::assistant;
        if (s.conversation[i].role != expected)
            throw SchemaViolation(record_index, "conversation must alternate roles starting with user (turn " +
                                                    std::to_string(i) + ")");
    }
}

std::optional<bool> parse_yes_no(std::string_view reply) {
    std::string word;
    for (char c : reply) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!word.empty()) {
            break;
        } else if (!std::isspace(static_cast<unsigned char>(c)) && !std::ispunct(static_cast<unsigned char>(c))) {
            return std::nullopt;
        }
    }
    if (word == "yes") return true;
    if (word == "no") return false;
    return std::nullopt;
}

namespace {

std::string conversation_text(const std::vector<Turn>& conv) {
    std::string out;
    for (const auto& t : conv) {
        if (!out.empty()) out += '\n';
        out += t.role == Role::user ? "User: " : "Assistant: ";
        out += t.text;
    }
    return out;
}

EditManifest grid_manifest(const InstructionSample& s) {
    // MTP edits address the sampled frame grid; one grid step is one time unit.
    EditManifest m;
    m.source_uri = s.video_uri;
    m.source_frame_count = s.frame_count;
    m.source_duration_s = s.frame_count;
    return m;
}

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
    if (pool.empty()) throw Error("MTP prompt pool is empty");
    return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

}  // namespace

std::vector<InstructionSample> gate_temporal(const std::vector<InstructionSample>& samples, judge::Judge& gate,
                                             judge::ResponseCache& cache, const std::string& gate_prompt,
                                             int max_in_flight, int retries, GateStats* stats) {
    std::vector<InstructionSample> out = samples;
    std::vector<std::size_t> pending;
    std::vector<std::string> prompts(samples.size()), keys(samples.size());
    GateStats local;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].temporal_flag) continue;
        prompts[i] = qagen::substitute(gate_prompt, {{"conversation", conversation_text(out[i].conversation)}});
        keys[i] = sha256_hex(out[i].sample_id + '\x1f' + sha256_hex(prompts[i]));
        pending.push_back(i);
    }

    std::vector<std::string> replies(samples.size());
    std::vector<char> from_cache(samples.size(), 0);
    parallel_for(pending.size(), max_in_flight, [&](std::size_t k) {
        const auto i = pending[k];
        if (auto hit = cache.get(keys[i])) {
            replies[i] = *hit;
            from_cache[i] = 1;
            return;
        }
        replies[i] = judge::complete_with_retries(gate, judge::JudgeRequest{prompts[i], std::nullopt}, retries);
        cache.put(keys[i], replies[i]);
    });

    for (auto i : pending) {
        if (from_cache[i])
            ++local.cache_hits;
        else
            ++local.judge_calls;
        auto verdict = parse_yes_no(replies[i]);
        if (!verdict) {
            ++local.unparseable;
            spdlog::warn("gate: unparseable verdict for {}: '{}' (flagged as temporal)", out[i].sample_id, replies[i]);
        }
        out[i].temporal_flag = verdict.value_or(true);
    }
    if (stats) *stats = local;
    return out;
}

AugmentedSample build_frame_index_task(const InstructionSample& sample, const PromptPools& prompts,
                                       const MtpConfig& cfg, std::uint64_t seed) {
    if (sample.frame_count < cfg.min_frames)
        throw TooFewFrames("sample " + sample.sample_id + " has " + std::to_string(sample.frame_count) +
                           " frames, frame-index task needs " + std::to_string(cfg.min_frames));
    Rng rng(derive_seed(seed, {"mtp", "frame", sample.sample_id}));
    const auto index = static_cast<int>(rng.below(static_cast<std::uint64_t>(sample.frame_count)));

    AugmentedSample a;
    a.base = sample;
    a.aux_task = AuxTask::frame_index;
    a.edit = grid_manifest(sample);
    a.edit->ops.push_back(PrependFrame{index});
    Rng prompt_rng(derive_seed(seed, {"mtp", "frame-prompt", sample.sample_id}));
    a.aux_prompt = qagen::substitute(pick(prompts.frame_index, prompt_rng),
                                     {{"num_frames", std::to_string(sample.frame_count)},
                                      {"first_index", std::to_string(cfg.index_base)},
                                      {"last_index", std::to_string(sample.frame_count - 1 + cfg.index_base)}});
    a.aux_answer = std::to_string(index + cfg.index_base);
    return a;
}

AugmentedSample build_assigned_qa_task(const InstructionSample& sample, const InstructionSample& partner,
                                       const PromptPools& prompts, std::uint64_t seed) {
    if (partner.sample_id == sample.sample_id) throw SelfPartner("sample " + sample.sample_id + " cannot partner itself");
    Rng rng(derive_seed(seed, {"mtp", "order", sample.sample_id}));
    const bool original_first = rng.bernoulli(0.5);

    AugmentedSample a;
    a.base = sample;
    a.aux_task = AuxTask::assigned_qa;
    a.partner_id = partner.sample_id;
    a.edit = grid_manifest(sample);
    a.edit->ops.push_back(Concat{partner.video_uri, original_first ? ConcatPosition::after : ConcatPosition::before,
                                 partner.frame_count});
    Rng prompt_rng(derive_seed(seed, {"mtp", "assigned-prompt", sample.sample_id}));
    a.aux_prompt = qagen::substitute(pick(prompts.assigned_qa, prompt_rng),
                                     {{"position", original_first ? "first" : "second"}});
    return a;
}

MtpResult apply_mtp(const std::vector<InstructionSample>& input, const MtpConfig& cfg, const PromptPools& prompts,
                    judge::Judge* gate, judge::ResponseCache* cache, std::uint64_t seed) {
    cfg.ratios.validate();
    MtpResult result;
    std::vector<InstructionSample> samples = input;
    const bool needs_gate = std::any_of(samples.begin(), samples.end(), [](const auto& s) { return !s.temporal_flag; });
    if (gate && needs_gate) {
        judge::ResponseCache scratch;
        samples = gate_temporal(samples, *gate, cache ? *cache : scratch, prompts.gate, cfg.max_in_flight, cfg.retries,
                                &result.gate);
    }

    std::vector<std::size_t> unflagged;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (!samples[i].temporal_flag.value_or(false)) unflagged.push_back(i);

    // Partner draws: walk seeded permutations of the unflagged pool, one epoch at a time.
    std::vector<std::size_t> epoch;
    std::size_t cursor = 0, epoch_no = 0;
    auto next_partner = [&](std::size_t self) -> std::optional<std::size_t> {
        if (unflagged.size() < 2) return std::nullopt;
        for (std::size_t guard = 0; guard < 2 * unflagged.size() + 2; ++guard) {
            if (cursor >= epoch.size()) {
                epoch = unflagged;
                Rng prng(derive_seed(seed, {"mtp", "partners", std::to_string(epoch_no++)}));
                prng.shuffle(epoch);
                cursor = 0;
            }
            auto cand = epoch[cursor++];
            if (cand != self) return cand;
        }
        return std::nullopt;
    };

    result.samples.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        AugmentedSample passthrough{s, AuxTask::none, {}, {}, std::nullopt, std::nullopt};
        if (s.temporal_flag.value_or(false)) {
            ++result.counts["temporal_passthrough"];
            result.samples.push_back(std::move(passthrough));
            continue;
        }
        Rng rng(derive_seed(seed, {"mtp", "task", s.sample_id}));
        const double u = rng.uniform01();
        AuxTask task = AuxTask::none;
        if (u < cfg.ratios.frame_index_fraction)
            task = AuxTask::frame_index;
        else if (u < cfg.ratios.frame_index_fraction + cfg.ratios.assigned_qa_fraction)
            task = AuxTask::assigned_qa;

        try {
            if (task == AuxTask::frame_index) {
                result.samples.push_back(build_frame_index_task(s, prompts, cfg, seed));
            } else if (task == AuxTask::assigned_qa) {
                auto partner = next_partner(i);
                if (!partner) throw SelfPartner("no partner available for " + s.sample_id);
                result.samples.push_back(build_assigned_qa_task(s, samples[*partner], prompts, seed));
            } else {
                result.samples.push_back(std::move(passthrough));
            }
            ++result.counts[std::string(to_string(task))];
        } catch (const Error& e) {
            spdlog::info("mtp: {} falls back to none: {}", s.sample_id, e.what());
            ++result.counts["fallback_none"];
            result.samples.push_back(std::move(passthrough));
        }
    }
    return result;
}

std::vector<Turn> rendered_conversation(const AugmentedSample& s) {
    std::vector<Turn> conv;
    switch (s.aux_task) {
        case AuxTask::none: return s.base.conversation;
        case AuxTask::frame_index:
            conv.push_back({Role::user, s.aux_prompt});
            conv.push_back({Role::assistant, s.aux_answer});
            conv.insert(conv.end(), s.base.conversation.begin(), s.base.conversation.end());
            return conv;
        case AuxTask::assigned_qa:
            conv = s.base.conversation;
            conv.front().text = s.aux_prompt + "\n" + conv.front().text;
            return conv;
    }
    return conv;
}

namespace {

nlohmann::json turns_json(const std::vector<Turn>& conv) {
    auto arr = nlohmann::json::array();
    for (const auto& t : conv) arr.push_back({{"role", t.role == Role::user ? "user" : "assistant"}, {"text", t.text}});
    return arr;
}

}  // namespace

InstructionSample sample_from_json(const nlohmann::json& j, std::size_t record_index) {
    if (!j.is_object()) throw SchemaViolation(record_index, "record must be an object");
    InstructionSample s;
    try {
        s.sample_id = j.contains("sample_id") ? j["sample_id"].get<std::string>() : j.at("id").get<std::string>();
        s.video_uri = j.contains("video_uri") ? j["video_uri"].get<std::string>() : j.at("video").get<std::string>();
        s.frame_count = j.contains("frame_count") ? j["frame_count"].get<int>() : j.at("num_frames").get<int>();
        if (j.contains("conversation")) {
            for (const auto& t : j["conversation"]) {
                const auto role = t.at("role").get<std::string>();
                if (role != "user" && role != "assistant") throw SchemaViolation(record_index, "unknown role '" + role + "'");
                s.conversation.push_back({role == "user" ? Role::user : Role::assistant, t.at("text").get<std::string>()});
            }
        } else {
            // LLaVA-style {"from": "human"|"gpt", "value": ...}
            for (const auto& t : j.at("conversations")) {
                const auto from = t.at("from").get<std::string>();
                s.conversation.push_back({from == "human" ? Role::user : Role::assistant, t.at("value").get<std::string>()});
            }
        }
        if (auto it = j.find("temporal_flag"); it != j.end() && !it->is_null()) s.temporal_flag = it->get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaViolation(record_index, e.what());
    }
    check_sample(s, record_index);
    return s;
}

std::vector<InstructionSample> load_samples(const std::filesystem::path& path) {
    std::vector<InstructionSample> out;
    std::size_t index = 0;
    for (const auto& line : read_lines(path)) {
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw SchemaViolation(index, "line is not valid JSON");
        out.push_back(sample_from_json(j, index++));
    }
    if (out.empty()) throw EmptyCorpus("instruction dataset " + path.string() + " is empty");
    return out;
}

nlohmann::json to_json(const InstructionSample& s) {
    nlohmann::json j{{"sample_id", s.sample_id},
                     {"video_uri", s.video_uri},
                     {"frame_count", s.frame_count},
                     {"conversation", turns_json(s.conversation)}};
    j["temporal_flag"] = s.temporal_flag ? nlohmann::json(*s.temporal_flag) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const AugmentedSample& s) {
    nlohmann::json j = to_json(s.base);
    j["aux_task"] = to_string(s.aux_task);
    j["aux_prompt"] = s.aux_prompt;
    j["aux_answer"] = s.aux_answer;
    j["edit"] = s.edit ? nlohmann::json(*s.edit) : nlohmann::json(nullptr);
    j["partner_id"] = s.partner_id ? nlohmann::json(*s.partner_id) : nlohmann::json(nullptr);
    j["original_conversation"] = j["conversation"];
    j["conversation"] = turns_json(rendered_conversation(s));
    return j;
}

}  // namespace timeqa::mtp
