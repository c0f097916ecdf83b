#include <doctest.h>

#include <random>

#include "support/support.hpp"
#include "timeqa/audit/audit.hpp"
#include "timeqa/core/errors.hpp"
#include "timeqa/eval/letter.hpp"
#include "timeqa/eval/score.hpp"

using namespace timeqa;
using namespace timeqa::eval;

TEST_SUITE("eval") {
    TEST_CASE("extract_letter examples") {
        CHECK(extract_letter("B", 4) == 'B');
        CHECK(extract_letter("(c) because the action ends early", 4) == 'C');
        CHECK_FALSE(extract_letter("The event happens early", 4).has_value());
        CHECK(extract_letter("b", 4) == 'B');
        CHECK(extract_letter("Answer: D.", 4) == 'D');
        CHECK(extract_letter("The answer is (C).", 4) == 'C');
        CHECK(extract_letter("A dog walks left, so B", 4) == 'B');
        CHECK(extract_letter("I think it is A", 4) == 'A');
        CHECK_FALSE(extract_letter("D", 3).has_value());
        CHECK(extract_letter("E or B", 4) == 'B');
        CHECK_FALSE(extract_letter("", 4).has_value());
    }

    TEST_CASE("extract_letter finds every bare letter in range") {
        for (int n = 2; n <= 26; ++n)
            for (int i = 0; i < 26; ++i) {
                const char c = static_cast<char>('A' + i);
                const std::string bare(1, c), wrapped = "(" + bare + ")";
                if (i < n) {
                    CHECK(extract_letter(bare, n) == c);
                    CHECK(extract_letter(wrapped, n) == c);
                    CHECK(extract_letter("  " + bare + ". because", n) == c);
                } else {
                    CHECK_FALSE(extract_letter(bare, n).has_value());
                }
            }
    }

    TEST_CASE("scoring") {
        std::vector<qagen::QAItem> bench;
        std::vector<PredictionRecord> perfect;
        for (auto d : kAllDimensions)
            for (int i = 0; i < 3 + static_cast<int>(d) * 5; ++i) {
                auto it = tsupport::mc_item(d, std::string(to_string(d)) + std::to_string(i), tsupport::default_options(d),
                                            static_cast<std::size_t>(i) % tsupport::default_options(d).size());
                perfect.push_back({it.item_id, "(" + it.answer + ")"});
                bench.push_back(std::move(it));
            }
        auto r = score(bench, perfect);
        CHECK(r.average == 1.0);
        for (const auto& [d, s] : r.per_dimension) CHECK(s.accuracy == 1.0);
        CHECK(score(bench, perfect).average == r.average);
        CHECK(to_text(r).find("AVG") != std::string::npos);

        // Unweighted mean: one dimension right, the rest wrong.
        std::vector<PredictionRecord> one_dim;
        for (const auto& it : bench)
            one_dim.push_back({it.item_id, it.dimension == Dimension::location ? it.answer : "no idea"});
        auto u = score(bench, one_dim);
        CHECK(u.average == doctest::Approx(0.2));
        CHECK(u.unparsed_count == bench.size() - r.per_dimension.at(Dimension::location).total);

        auto missing = score(bench, {});
        CHECK(missing.average == 0.0);
        CHECK(missing.missing_count == bench.size());

        CHECK_THROWS_AS(score(bench, {{"nope", "A"}}), UnknownItemId);
    }

    TEST_CASE("always-A on a rebalanced benchmark scores 1/num_options") {
        std::vector<qagen::QAItem> bench;
        for (auto d : kAllDimensions)
            for (int i = 0; i < 120; ++i)
                bench.push_back(tsupport::mc_item(d, std::string(to_string(d)) + std::to_string(i),
                                                  tsupport::default_options(d), 0));
        bench = audit::rebalance_options(bench, 5);
        std::vector<PredictionRecord> preds;
        for (const auto& it : bench) preds.push_back({it.item_id, "A"});
        auto r = score(bench, preds);
        for (const auto& [d, s] : r.per_dimension) {
            const double n = static_cast<double>(s.total);
            CHECK(std::abs(s.accuracy - 1.0 / option_count(d)) <= 1.0 / n + 1e-12);
        }
    }
}
