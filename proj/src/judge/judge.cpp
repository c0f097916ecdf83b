#include "timeqa/judge/judge.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <set>

#include "timeqa/core/errors.hpp"
#include "timeqa/judge/http_judge.hpp"

namespace timeqa::judge {

std::string_view to_string(Condition c) noexcept {
    switch (c) {
        case Condition::single_frame: return "single_frame";
        case Condition::blind: return "blind";
        case Condition::full_video: return "full_video";
    }
    return "?";
}

std::optional<Condition> parse_condition(std::string_view s) noexcept {
    for (auto c : {Condition::single_frame, Condition::blind, Condition::full_video})
        if (s == to_string(c)) return c;
    return std::nullopt;
}

std::unique_ptr<Judge> make_judge(const JudgeSpec& spec) {
    if (spec.id.empty()) throw ConfigInvalid("judge spec needs an id");
    if (spec.kind == "http") return std::make_unique<HttpJudge>(spec);
    if (spec.kind == "stub") return std::make_unique<FixedLetterJudge>(spec.id, spec.stub_letter);
    if (spec.kind == "stub_gate") return std::make_unique<KeywordGateJudge>(spec.id);
    throw ConfigInvalid("judge '" + spec.id + "': unknown kind '" + spec.kind + "'");
}

std::string complete_with_retries(Judge& judge, const JudgeRequest& request, int retries) {
    std::string last_error;
    for (int attempt = 0; attempt <= std::max(retries, 0); ++attempt) {
        try {
            return judge.complete(request);
        } catch (const JudgeUnavailable& e) {
            last_error = e.what();
            spdlog::warn("judge {}: attempt {} failed: {}", judge.id(), attempt + 1, last_error);
        }
    }
    throw JudgeUnavailable("judge " + judge.id() + " unavailable after " + std::to_string(std::max(retries, 0) + 1) +
                           " attempt(s): " + last_error);
}

std::string KeywordGateJudge::do_complete(const JudgeRequest& request) {
    static const std::set<std::string> kCues = {"before", "after", "then",    "first",  "last",     "finally",
                                                "while",  "during", "when",   "until",  "begin",    "begins",
                                                "start",  "starts", "end",    "ends",   "next",     "previous",
                                                "order",  "sequence", "earlier", "later", "afterwards", "beginning"};
    std::string_view text = request.prompt;
    const auto open = text.rfind("<conversation>");
    const auto close = text.rfind("</conversation>");
    if (open != std::string_view::npos && close != std::string_view::npos && close > open)
        text = text.substr(open + 14, close - open - 14);

    std::string word;
    auto flush = [&] {
        bool hit = kCues.count(word) > 0;
        word.clear();
        return hit;
    };
    for (char c : text) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (flush()) {
            return "yes";
        }
    }
    return flush() ? "yes" : "no";
}

}  // namespace timeqa::judge
