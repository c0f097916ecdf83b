#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "support/support.hpp"
#include "timeqa/core/errors.hpp"
#include "timeqa/core/rng.hpp"
#include "timeqa/qagen/item.hpp"
#include "timeqa/qagen/templates.hpp"

using namespace timeqa;
using namespace timeqa::qagen;
using taskgen::LabeledCandidate;

namespace {

LabeledCandidate cand_of(taskgen::AnswerPayload answer, const std::string& key = "k") {
    LabeledCandidate c;
    c.dimension = taskgen::dimension_of(answer);
    c.clip_id = "clip";
    c.key = key;
    c.answer = std::move(answer);
    c.context = {{"object", "dog"}, {"goal", "make tea"}, {"activity", "diving"}, {"actions", "a, b, c"}};
    return c;
}

LabeledCandidate reasoning_cand(std::vector<std::string> pool) {
    auto c = cand_of(taskgen::NextStep{"pour water"});
    c.distractor_pool = std::move(pool);
    return c;
}

}  // namespace

TEST_SUITE("qagen") {
    TEST_CASE("substitute and render_question") {
        CHECK(substitute("When does {activity} occur?", {{"activity", "diving"}}) == "When does diving occur?");
        try {
            substitute("What follows in {goal}?", {{"activity", "diving"}});
            FAIL("expected UnresolvedPlaceholder");
        } catch (const UnresolvedPlaceholder& e) {
            CHECK(e.name() == "goal");
        }
        CHECK(placeholders("{a} and {b} then {a}") == std::vector<std::string>{"a", "b", "a"});

        TemplatePool pool{Dimension::location, TemplateKind::question,
                          {"When does {activity} occur?", "At what point is {activity} seen?"}};
        auto c = cand_of(IntervalBucket::start);
        for (std::uint64_t s = 0; s < 20; ++s) {
            auto text = render_question(c, pool, s);
            CHECK(text == render_question(c, pool, s));
            CHECK(text.find('{') == std::string::npos);
            CHECK(text.find("diving") != std::string::npos);
        }
        TemplatePool wrong = pool;
        wrong.kind = TemplateKind::instruction;
        CHECK_THROWS_AS(render_question(c, wrong, 1), Error);
    }

    TEST_CASE("template files skip comments and blanks") {
        tsupport::TempDir dir;
        auto path = dir.path() / "t.txt";
        std::ofstream(path) << "# header\n\nOne {object}?\n  \nTwo {object}?\n";
        CHECK(load_template_lines(path) == std::vector<std::string>{"One {object}?", "Two {object}?"});
        std::ofstream(path) << "# only a comment\n";
        CHECK_THROWS_AS(load_template_lines(path), Error);
    }

    TEST_CASE("shipped template pools have ten entries with resolvable placeholders") {
        auto lib = TemplateLibrary::load(tsupport::source_dir() / "assets" / "templates");
        for (auto d : kAllDimensions) {
            const auto required = taskgen::required_context(d);
            for (auto k : {TemplateKind::question, TemplateKind::instruction}) {
                const auto& pool = lib.get(d, k);
                CHECK(pool.templates.size() == 10);
                for (const auto& t : pool.templates)
                    for (const auto& p : placeholders(t))
                        CHECK(std::find(required.begin(), required.end(), p) != required.end());
            }
        }
    }

    TEST_CASE("option sets per dimension") {
        auto dyn = build_options(cand_of(Direction::right), 3);
        CHECK(dyn.options.size() == 4);
        CHECK(std::set<std::string>(dyn.options.begin(), dyn.options.end()) ==
              std::set<std::string>{"left", "right", "up", "down"});
        CHECK(dyn.options[dyn.correct_index] == "right");

        CHECK(build_options(cand_of(DurationBucket::short_span), 3).options.size() == 3);
        CHECK(build_options(cand_of(IntervalBucket::middle), 3).options.size() == 3);

        for (std::uint64_t s = 0; s < 50; ++s) {
            auto ord = build_options(cand_of(taskgen::ActionOrder{{"A", "B", "C"}}), s);
            REQUIRE(ord.options.size() == 4);
            CHECK(std::set<std::string>(ord.options.begin(), ord.options.end()).size() == 4);
            CHECK(std::count(ord.options.begin(), ord.options.end(), "A, then B, then C") == 1);
            CHECK(ord.options[ord.correct_index] == "A, then B, then C");
            for (const auto& o : ord.options) {
                CHECK(o.find('A') != std::string::npos);
                CHECK(o.find('B') != std::string::npos);
                CHECK(o.find('C') != std::string::npos);
            }
        }

        auto re = build_options(reasoning_cand({"boil water", "pour water", "add leaves", "steep", "boil water"}), 5);
        REQUIRE(re.options.size() == 4);
        CHECK(std::count(re.options.begin(), re.options.end(), "pour water") == 1);
        CHECK(std::set<std::string>(re.options.begin(), re.options.end()).size() == 4);

        CHECK_THROWS_AS(build_options(reasoning_cand({"boil water", "pour water"}), 5), InsufficientDistractors);
        CHECK_THROWS_AS(build_options(reasoning_cand({"boil water", "steep", "boil water", "pour water"}), 5),
                        InsufficientDistractors);
    }

    TEST_CASE("assemble_item formats") {
        auto open = assemble_item(cand_of(DurationBucket::short_span), "How long?", std::nullopt, std::nullopt, {});
        CHECK(open.format == QAFormat::open_ended);
        CHECK(open.options.empty());
        CHECK(open.answer_text == "a short portion of the video");

        auto loc = cand_of(IntervalBucket::end);
        OptionSet opts{{"at the beginning of the video", "in the middle of the video", "at the end of the video"}, 2};
        auto mc = assemble_item(loc, "When?", std::string("Pick one."), opts, {});
        CHECK(mc.answer == "C");
        CHECK(mc.question == "Pick one.\nWhen?\nA. at the beginning of the video\nB. in the middle of the video\n"
                             "C. at the end of the video");

        CHECK_THROWS_AS(assemble_item(loc, "When?", std::nullopt, opts, {}), FormatMismatch);
        CHECK_THROWS_AS(assemble_item(loc, "When?", std::string("Pick."), std::nullopt, {}), FormatMismatch);
        OptionSet bad = opts;
        bad.correct_index = 3;
        CHECK_THROWS_AS(assemble_item(loc, "When?", std::string("Pick."), bad, {}), FormatMismatch);
        bad.correct_index = 0;
        CHECK_THROWS_AS(assemble_item(loc, "When?", std::string("Pick."), bad, {}), FormatMismatch);

        auto broken = mc;
        broken.question += "\nD. extra";
        CHECK_THROWS_AS(check_item(broken), FormatMismatch);
        broken = mc;
        broken.options[0] = broken.options[1];
        CHECK_THROWS_AS(check_item(broken), FormatMismatch);
    }

    TEST_CASE("correct position is uniform within 2 points over 10000 items") {
        const taskgen::AnswerPayload answers[] = {Direction::up, DurationBucket::long_span, IntervalBucket::start,
                                                  taskgen::ActionOrder{{"x", "y", "z"}}};
        for (const auto& a : answers) {
            auto c = cand_of(a);
            const auto n = static_cast<std::size_t>(option_count(c.dimension));
            std::vector<int> hist(n, 0);
            for (std::uint64_t s = 0; s < 10000; ++s) ++hist[build_options(c, derive_seed(7, {std::to_string(s)})).correct_index];
            for (auto h : hist) CHECK(std::abs(h / 10000.0 - 1.0 / n) <= 0.02);
        }
    }

    TEST_CASE("generate_items is reproducible and every MC item has one correct option") {
        std::vector<LabeledCandidate> cands;
        for (int i = 0; i < 200; ++i) {
            auto c = cand_of(kAllDirections[i % 4], "k" + std::to_string(i));
            c.clip_id = "clip" + std::to_string(i);
            cands.push_back(c);
        }
        auto a = generate_items(cands, tsupport::small_templates(), QagenConfig{}, 11);
        auto b = generate_items(cands, tsupport::small_templates(), QagenConfig{}, 11);
        CHECK(a.items == b.items);
        std::size_t mc = 0;
        for (const auto& it : a.items) {
            check_item(it);
            if (it.format == QAFormat::multiple_choice) {
                ++mc;
                CHECK(std::count(it.options.begin(), it.options.end(), it.answer_text) == 1);
            }
        }
        CHECK(mc > 60);
        CHECK(mc < 140);
        CHECK(std::is_sorted(a.items.begin(), a.items.end(),
                             [](const QAItem& x, const QAItem& y) { return x.item_id < y.item_id; }));

        nlohmann::json j = a.items.front();
        CHECK(j.get<QAItem>() == a.items.front());
    }
}
