#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "support/support.hpp"
#include "timeqa/audit/audit.hpp"
#include "timeqa/core/errors.hpp"

using namespace timeqa;
using namespace timeqa::audit;
using judge::Condition;

namespace {

std::vector<qagen::QAItem> items_for(Dimension d, int n, std::size_t correct) {
    std::vector<qagen::QAItem> out;
    for (int i = 0; i < n; ++i)
        out.push_back(tsupport::mc_item(d, std::string(to_string(d)) + std::to_string(i), tsupport::default_options(d), correct));
    return out;
}

class FailingJudge : public judge::Judge {
public:
    using Judge::Judge;

protected:
    std::string do_complete(const judge::JudgeRequest&) override { throw JudgeUnavailable("connection refused"); }
};

}  // namespace

TEST_SUITE("audit") {
    TEST_CASE("verdict scoring") {
        auto item = tsupport::mc_item(Dimension::dynamic, "i", tsupport::default_options(Dimension::dynamic), 1);
        CHECK(make_verdict(item, "j", Condition::single_frame, "B", 0).correct);
        auto wrong = make_verdict(item, "j", Condition::single_frame, "The answer is (C).", 0);
        CHECK(wrong.chosen_letter == 'C');
        CHECK_FALSE(wrong.correct);
        auto empty = make_verdict(item, "j", Condition::blind, "", -1);
        CHECK_FALSE(empty.chosen_letter.has_value());
        CHECK_FALSE(empty.correct);
        CHECK(make_verdict(item, "j", Condition::blind, "Zebra", -1).chosen_letter == std::nullopt);
        CHECK(probe_prompt(item) == item.question + "\n" + std::string(kEvalPrompt));
    }

    TEST_CASE("shortcut truth table") {
        for (int bits = 0; bits < 8; ++bits) {
            const std::array<bool, 3> c = {(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0};
            const int ones = c[0] + c[1] + c[2];
            CHECK(is_shortcut(c) == (ones >= 2));

            auto item = tsupport::mc_item(Dimension::location, "t" + std::to_string(bits),
                                          tsupport::default_options(Dimension::location), 0);
            std::vector<JudgeVerdict> vs;
            for (int j = 0; j < 3; ++j)
                vs.push_back(make_verdict(item, "j" + std::to_string(j), Condition::single_frame, c[j] ? "A" : "B", 0));
            auto r = majority_filter({item}, {{item.item_id, vs}});
            CHECK(r.removed.size() == (ones >= 2 ? 1u : 0u));
            CHECK(r.kept.size() == (ones >= 2 ? 0u : 1u));
        }
    }

    TEST_CASE("incomplete verdicts are reported, not kept") {
        auto items = items_for(Dimension::order, 2, 0);
        std::vector<JudgeVerdict> two;
        for (int j = 0; j < 2; ++j) two.push_back(make_verdict(items[0], "j", Condition::single_frame, "B", 0));
        auto r = majority_filter(items, {{items[0].item_id, two}});
        CHECK(r.kept.empty());
        CHECK(r.removed.empty());
        CHECK(r.incomplete == std::vector<std::string>{items[0].item_id, items[1].item_id});
    }

    TEST_CASE("rebalance from all-A") {
        std::vector<qagen::QAItem> items;
        for (auto d : kAllDimensions) {
            auto part = items_for(d, 101, 0);
            items.insert(items.end(), part.begin(), part.end());
        }
        auto out = rebalance_options(items, 6);
        CHECK(out == rebalance_options(items, 6));
        for (const auto& [d, counts] : letter_positions(out)) {
            CHECK(counts.size() == static_cast<std::size_t>(option_count(d)));
            CHECK(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()) <= 1);
        }
        REQUIRE(out.size() == items.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const auto& a = items[i];
            const auto& b = out[i];
            CHECK(a.item_id == b.item_id);
            CHECK(b.answer_text == a.answer_text);
            CHECK(b.stem == a.stem);
            CHECK(std::multiset<std::string>(a.options.begin(), a.options.end()) ==
                  std::multiset<std::string>(b.options.begin(), b.options.end()));
            CHECK(std::count(b.options.begin(), b.options.end(), b.answer_text) == 1);
            qagen::check_item(b);
        }
        auto single = items_for(Dimension::dynamic, 1, 2);
        auto one = rebalance_options(single, 1);
        CHECK(one[0].answer_text == single[0].answer_text);
    }

    TEST_CASE("rebalance property on random positions") {
        std::mt19937_64 rng(2);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<qagen::QAItem> items;
            const int n = 1 + static_cast<int>(rng() % 60);
            for (int i = 0; i < n; ++i) {
                auto d = kAllDimensions[rng() % 5];
                auto opts = tsupport::default_options(d);
                items.push_back(tsupport::mc_item(d, "r" + std::to_string(i), opts, rng() % opts.size()));
            }
            for (const auto& [d, counts] : letter_positions(rebalance_options(items, trial)))
                CHECK(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()) <= 1);
        }
    }

    TEST_CASE("analytic random accuracy") {
        CHECK(analytic_random(items_for(Dimension::order, 40, 0)) == 0.25);
        std::vector<qagen::QAItem> mix;
        for (auto d : kAllDimensions) {
            auto part = items_for(d, 100, 0);
            mix.insert(mix.end(), part.begin(), part.end());
        }
        CHECK(analytic_random(mix) == doctest::Approx((1.0 / 3 + 1.0 / 3 + 0.25 + 0.25 + 0.25) / 5).epsilon(1e-12));
        CHECK(std::abs(analytic_random(mix) * 100 - 28.3) <= 0.1);
    }

    TEST_CASE("diagnostics") {
        auto items = items_for(Dimension::dynamic, 4, 0);
        std::map<std::string, JudgeVerdict> s, b;
        for (const auto& it : items) {
            s[it.item_id] = make_verdict(it, "j", Condition::single_frame, "B", 0);
            b[it.item_id] = make_verdict(it, "j", Condition::blind, it.item_id == items[0].item_id ? "A" : "C", -1);
        }
        auto r = compute_diagnostics(items, s, b);
        CHECK(r.overall.acc_s == 0.0);
        CHECK(r.overall.acc_b == 0.25);
        CHECK(r.overall.acc_r == 0.25);
        CHECK(r.per_dimension.at(Dimension::dynamic).n == 4);
        s.erase(items[1].item_id);
        CHECK_THROWS_AS(compute_diagnostics(items, s, b), IncompleteVerdicts);
    }

    TEST_CASE("probes are cached and unavailable judges count incorrect") {
        tsupport::TempDir dir;
        auto items = items_for(Dimension::location, 5, 0);
        judge::FixedLetterJudge j("fixed", "A");
        {
            judge::ResponseCache cache(dir / "c.jsonl");
            for (const auto& it : items) CHECK(probe_item(it, j, Condition::single_frame, 1, &cache).correct);
        }
        CHECK(j.calls() == 5);
        judge::ResponseCache warm(dir / "c.jsonl");
        for (const auto& it : items) probe_item(it, j, Condition::single_frame, 1, &warm);
        CHECK(j.calls() == 5);
        probe_item(items[0], j, Condition::blind, 1, &warm);
        CHECK(j.calls() == 6);

        FailingJudge down("down");
        ProbeOptions opts;
        opts.retries = 2;
        auto v = probe_item(items[0], down, Condition::single_frame, 1, &warm, opts);
        CHECK(v.unavailable);
        CHECK_FALSE(v.correct);
        CHECK(down.calls() == 3);
    }

    TEST_CASE("frame picks are seeded and shared across judges by default") {
        auto item = items_for(Dimension::dynamic, 1, 0)[0];
        item.edit = EditManifest{"v.mp4", 10, 100, 0, 0, {Crop{2.0, 4.0}}};
        auto a = pick_frame(item, 3);
        CHECK(a.sequence_length == 20);
        CHECK(a.frame.index == 20 + a.sequence_index);
        CHECK(pick_frame(item, 3).sequence_index == a.sequence_index);
        std::set<int> seen;
        for (int j = 0; j < 30; ++j) seen.insert(pick_frame(item, 3, "j" + std::to_string(j)).sequence_index);
        CHECK(seen.size() > 1);
    }

    TEST_CASE("run_audit needs three judges and re-runs without calls") {
        judge::FixedLetterJudge a("a", "A"), b("b", "B"), c("c", "C");
        auto items = items_for(Dimension::order, 30, 0);
        auto extra = items_for(Dimension::location, 30, 1);
        items.insert(items.end(), extra.begin(), extra.end());
        CHECK_THROWS_AS(run_audit(items, {&a, &b}, AuditConfig{}, nullptr, 1), ConfigInvalid);

        tsupport::TempDir dir;
        AuditResult first;
        {
            judge::ResponseCache cache(dir / "v.jsonl");
            first = run_audit(items, {&a, &b, &c}, AuditConfig{}, &cache, 1);
        }
        CHECK(first.benchmark.size() == 60);
        CHECK(first.removed.empty());
        const auto calls = a.calls() + b.calls() + c.calls();
        judge::ResponseCache warm(dir / "v.jsonl");
        auto second = run_audit(items, {&a, &b, &c}, AuditConfig{}, &warm, 1);
        CHECK(a.calls() + b.calls() + c.calls() == calls);
        CHECK(second.benchmark == first.benchmark);
    }
}
