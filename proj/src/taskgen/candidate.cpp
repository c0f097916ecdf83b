#include "timeqa/taskgen/candidate.hpp"

#include <algorithm>
#include <tuple>

namespace timeqa::taskgen {

Dimension dimension_of(const AnswerPayload& a) noexcept {
    switch (a.index()) {
        case 0: return Dimension::dynamic;
        case 1: return Dimension::reasoning;
        case 2: return Dimension::duration;
        case 3: return Dimension::location;
        default: return Dimension::order;
    }
}

std::string answer_key(const AnswerPayload& a) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NextStep>)
                return v.description;
            else if constexpr (std::is_same_v<T, ActionOrder>)
                return v.labels[0] + " | " + v.labels[1] + " | " + v.labels[2];
            else
                return std::string(to_string(v));
        },
        a);
}

std::vector<std::string> required_context(Dimension d) {
    switch (d) {
        case Dimension::dynamic: return {"object"};
        case Dimension::reasoning: return {"goal"};
        case Dimension::duration:
        case Dimension::location: return {"activity"};
        case Dimension::order: return {"actions"};
    }
    return {};
}

void canonical_sort(std::vector<LabeledCandidate>& cands) {
    std::stable_sort(cands.begin(), cands.end(), [](const LabeledCandidate& a, const LabeledCandidate& b) {
        return std::tie(a.clip_id, a.window_start_s, a.key) < std::tie(b.clip_id, b.window_start_s, b.key);
    });
}

}  // namespace timeqa::taskgen
