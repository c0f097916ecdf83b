#include "timeqa/eval/letter.hpp"

#include <cctype>
#include <stdexcept>

namespace timeqa::eval {

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
char upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

}  // namespace

std::optional<char> extract_letter(std::string_view raw, int num_options) {
    if (num_options < 2 || num_options > 26) throw std::invalid_argument("extract_letter: num_options must be in [2, 26]");
    auto in_range = [&](char c) { return upper(c) >= 'A' && upper(c) < 'A' + num_options; };

    const auto whole = trim(raw);
    if (whole.size() == 1 && is_alpha(whole[0])) return in_range(whole[0]) ? std::optional<char>(upper(whole[0])) : std::nullopt;

    const std::size_t n = raw.size();
    for (std::size_t i = 0; i < n; ++i) {
        const char c = raw[i];
        if (!is_alpha(c)) continue;
        const bool left_clear = i == 0 || !is_alnum(raw[i - 1]);
        const bool right_clear = i + 1 == n || !is_alnum(raw[i + 1]);
        if (!left_clear || !right_clear) continue;

        const char before = i > 0 ? raw[i - 1] : '\0';
        const char after = i + 1 < n ? raw[i + 1] : '\0';
        const bool after_after_clear = i + 2 >= n || is_space(raw[i + 2]) || !is_alnum(raw[i + 2]);

        bool match = false;
        if (before == '(' && after == ')') {
            match = true;
        } else if ((after == '.' || after == ')') && after_after_clear) {
            match = true;
        } else if (std::isupper(static_cast<unsigned char>(c))) {
            match = true;
            // "A man ..." / "I think ..." at the start of the reply.
            if ((c == 'A' || c == 'I') && trim(raw.substr(0, i)).empty()) {
                std::size_t j = i + 1;
                while (j < n && raw[j] == ' ') ++j;
                if (j > i + 1 && j < n && std::islower(static_cast<unsigned char>(raw[j]))) match = false;
            }
        }
        if (match && in_range(c)) return upper(c);
    }
    return std::nullopt;
}

}  // namespace timeqa::eval
