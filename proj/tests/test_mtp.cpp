#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "support/support.hpp"
#include "timeqa/core/errors.hpp"
#include "timeqa/mtp/mtp.hpp"

using namespace timeqa;
using namespace timeqa::mtp;

namespace {

InstructionSample sample(const std::string& id, int frames = 16, std::optional<bool> flag = false,
                         const std::string& question = "What is on the table?") {
    return {id, id + ".mp4", frames, {{Role::user, question}, {Role::assistant, "A red cup."}}, flag};
}

PromptPools pools() {
    PromptPools p;
    p.frame_index = {"The first frame is repeated from position {first_index} to {last_index} of {num_frames}."};
    p.assigned_qa = {"Two videos are joined. Answer about the {position} one."};
    p.gate = "Is this temporal? {conversation}";
    return p;
}

// Replies from a fixed table keyed by a word in the prompt.
class ScriptedGate : public judge::Judge {
public:
    ScriptedGate() : Judge("gate") {}

protected:
    std::string do_complete(const judge::JudgeRequest& r) override {
        if (r.prompt.find("after") != std::string::npos) return "Yes.";
        if (r.prompt.find("maybe") != std::string::npos) return "maybe";
        return "no";
    }
};

}  // namespace

TEST_SUITE("mtp") {
    TEST_CASE("parse_yes_no") {
        CHECK(parse_yes_no("Yes") == true);
        CHECK(parse_yes_no("  no, it is static") == false);
        CHECK(parse_yes_no("YES.") == true);
        CHECK_FALSE(parse_yes_no("maybe").has_value());
        CHECK_FALSE(parse_yes_no("").has_value());
    }

    TEST_CASE("gate records verdicts and flags unparseable replies") {
        std::vector<InstructionSample> in = {sample("a", 16, std::nullopt, "What happens after the man opens the door?"),
                                             sample("b", 16, std::nullopt, "What color is the car?"),
                                             sample("c", 16, std::nullopt, "maybe?"), sample("d", 16, false)};
        ScriptedGate gate;
        judge::ResponseCache cache;
        GateStats stats;
        auto out = gate_temporal(in, gate, cache, pools().gate, 2, 0, &stats);
        CHECK(out[0].temporal_flag == true);
        CHECK(out[1].temporal_flag == false);
        CHECK(out[2].temporal_flag == true);
        CHECK(out[3].temporal_flag == false);
        CHECK(stats.judge_calls == 3);
        CHECK(stats.unparseable == 1);
    }

    TEST_CASE("warm gate cache makes zero calls and identical output") {
        tsupport::TempDir dir;
        std::vector<InstructionSample> in;
        for (int i = 0; i < 50; ++i)
            in.push_back(sample("s" + std::to_string(i), 16, std::nullopt, i % 3 ? "What is it?" : "What after that?"));
        ScriptedGate g1;
        std::string first;
        {
            judge::ResponseCache cache(dir / "gate.jsonl");
            auto r = apply_mtp(in, MtpConfig{}, pools(), &g1, &cache, 4);
            for (const auto& s : r.samples) first += to_json(s).dump() + "\n";
        }
        CHECK(g1.calls() == 50);
        ScriptedGate g2;
        judge::ResponseCache cache(dir / "gate.jsonl");
        auto r = apply_mtp(in, MtpConfig{}, pools(), &g2, &cache, 4);
        std::string second;
        for (const auto& s : r.samples) second += to_json(s).dump() + "\n";
        CHECK(g2.calls() == 0);
        CHECK(r.gate.cache_hits == 50);
        CHECK(first == second);
    }

    TEST_CASE("frame index task") {
        MtpConfig cfg;
        auto s = sample("f");
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            auto a = build_frame_index_task(s, pools(), cfg, seed);
            auto frames = replay(*a.edit);
            REQUIRE(frames.size() == 17);
            const int p = std::stoi(a.aux_answer);
            CHECK(p >= 1);
            CHECK(p <= 16);
            CHECK(frames[0].index + cfg.index_base == p);
            std::vector<FrameRef> rest(frames.begin() + 1, frames.end());
            CHECK(rest == replay(EditManifest{s.video_uri, 16, 16, 0, 0, {}}));
            CHECK(a.base.conversation == s.conversation);
            CHECK(a.aux_prompt.find("1 to 16 of 16") != std::string::npos);
        }
        cfg.index_base = 0;
        auto z = build_frame_index_task(s, pools(), cfg, 1);
        CHECK(replay(*z.edit)[0].index == std::stoi(z.aux_answer));

        CHECK_THROWS_AS(build_frame_index_task(sample("short", 4), pools(), MtpConfig{}, 1), TooFewFrames);

        auto conv = rendered_conversation(build_frame_index_task(s, pools(), MtpConfig{}, 3));
        REQUIRE(conv.size() == 4);
        CHECK(conv[2] == s.conversation[0]);
        CHECK(conv[3] == s.conversation[1]);
    }

    TEST_CASE("assigned QA task") {
        auto s = sample("orig", 16);
        auto partner = sample("other", 10);
        std::size_t original_first = 0;
        for (std::uint64_t seed = 0; seed < 10000; ++seed) {
            auto a = build_assigned_qa_task(s, partner, pools(), seed);
            auto frames = replay(*a.edit);
            REQUIRE(frames.size() == 26);
            const bool first = frames.front().uri == s.video_uri;
            original_first += first;
            const std::size_t off = first ? 0 : 10;
            for (int i = 0; i < 16; ++i) {
                CHECK(frames[off + i].uri == s.video_uri);
                CHECK(frames[off + i].index == i);
            }
            CHECK(a.base.conversation == s.conversation);
            CHECK(a.aux_prompt.find(first ? "first" : "second") != std::string::npos);
            CHECK(a.partner_id == "other");
        }
        CHECK(std::abs(original_first / 10000.0 - 0.5) <= 0.02);
        CHECK_THROWS_AS(build_assigned_qa_task(s, s, pools(), 1), SelfPartner);

        auto conv = rendered_conversation(build_assigned_qa_task(s, partner, pools(), 2));
        REQUIRE(conv.size() == 2);
        CHECK(conv[1].text == "A red cup.");
        CHECK(conv[0].text.find("What is on the table?") != std::string::npos);
    }

    TEST_CASE("ratios converge at n = 10000") {
        std::vector<InstructionSample> in;
        for (int i = 0; i < 10000; ++i) in.push_back(sample("u" + std::to_string(i)));
        auto r = apply_mtp(in, MtpConfig{}, pools(), nullptr, nullptr, 42);
        const double fi = static_cast<double>(r.counts["frame_index"]);
        const double aq = static_cast<double>(r.counts["assigned_qa"]);
        CHECK(std::abs(fi - 2500) <= 100);
        CHECK(std::abs(aq - 5000) <= 130);
        CHECK(std::abs(fi - 2500) <= 3 * std::sqrt(10000 * 0.25 * 0.75));
        CHECK(std::abs(aq - 5000) <= 3 * std::sqrt(10000 * 0.5 * 0.5));
        for (std::size_t i = 0; i < in.size(); ++i) {
            CHECK(r.samples[i].base.sample_id == in[i].sample_id);
            if (r.samples[i].partner_id) CHECK(*r.samples[i].partner_id != in[i].sample_id);
        }
    }

    TEST_CASE("zero ratios and flagged samples pass through") {
        std::vector<InstructionSample> in;
        for (int i = 0; i < 300; ++i) in.push_back(sample("p" + std::to_string(i), 16, i % 2 == 0));
        MtpConfig none;
        none.ratios = {0, 0};
        auto r = apply_mtp(in, none, pools(), nullptr, nullptr, 1);
        for (std::size_t i = 0; i < in.size(); ++i) {
            CHECK(r.samples[i].aux_task == AuxTask::none);
            CHECK(r.samples[i].base == in[i]);
        }
        MtpConfig all;
        all.ratios = {0.5, 0.5};
        for (auto& s : in) s.temporal_flag = true;
        auto f = apply_mtp(in, all, pools(), nullptr, nullptr, 1);
        for (const auto& s : f.samples) CHECK(s.aux_task == AuxTask::none);
        CHECK(f.counts["temporal_passthrough"] == 300);
    }

    TEST_CASE("ratio validation") {
        CHECK_THROWS_AS((MtpRatios{0.6, 0.5}).validate(), ConfigInvalid);
        CHECK_THROWS_AS((MtpRatios{-0.1, 0.5}).validate(), ConfigInvalid);
        CHECK_NOTHROW((MtpRatios{0.5, 0.5}).validate());
    }

    TEST_CASE("sample parsing") {
        auto llava = nlohmann::json::parse(R"({"id":"x","video":"x.mp4","num_frames":12,
            "conversations":[{"from":"human","value":"<video>\nWhat?"},{"from":"gpt","value":"This."}]})");
        auto s = sample_from_json(llava);
        CHECK(s.sample_id == "x");
        CHECK(s.frame_count == 12);
        REQUIRE(s.conversation.size() == 2);
        CHECK(s.conversation[1].role == Role::assistant);
        CHECK(sample_from_json(to_json(s)) == s);
        auto bad = llava;
        bad["conversations"] = nlohmann::json::array();
        CHECK_THROWS_AS(sample_from_json(bad), SchemaViolation);
    }
}
