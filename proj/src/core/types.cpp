#include "timeqa/core/types.hpp"

#include <cctype>

namespace timeqa {

std::string_view to_string(Dimension d) noexcept {
    switch (d) {
        case Dimension::dynamic: return "dynamic";
        case Dimension::reasoning: return "reasoning";
        case Dimension::duration: return "duration";
        case Dimension::location: return "location";
        case Dimension::order: return "order";
    }
    return "?";
}

std::string_view short_code(Dimension d) noexcept {
    switch (d) {
        case Dimension::dynamic: return "DY";
        case Dimension::reasoning: return "RE";
        case Dimension::duration: return "DU";
        case Dimension::location: return "LO";
        case Dimension::order: return "OR";
    }
    return "??";
}

std::optional<Dimension> parse_dimension(std::string_view s) noexcept {
    for (auto d : kAllDimensions)
        if (s == to_string(d)) return d;
    return std::nullopt;
}

int option_count(Dimension d) noexcept {
    switch (d) {
        case Dimension::location:
        case Dimension::duration: return 3;
        case Dimension::dynamic:
        case Dimension::order:
        case Dimension::reasoning: return 4;
    }
    return 0;
}

std::string_view to_string(Direction d) noexcept {
    switch (d) {
        case Direction::left: return "left";
        case Direction::right: return "right";
        case Direction::up: return "up";
        case Direction::down: return "down";
    }
    return "?";
}

std::optional<Direction> parse_direction(std::string_view s) noexcept {
    for (auto d : kAllDirections)
        if (s == to_string(d)) return d;
    return std::nullopt;
}

Direction opposite(Direction d) noexcept {
    switch (d) {
        case Direction::left: return Direction::right;
        case Direction::right: return Direction::left;
        case Direction::up: return Direction::down;
        case Direction::down: return Direction::up;
    }
    return d;
}

std::string_view to_string(IntervalBucket b) noexcept {
    switch (b) {
        case IntervalBucket::start: return "start";
        case IntervalBucket::middle: return "middle";
        case IntervalBucket::end: return "end";
    }
    return "?";
}

std::optional<IntervalBucket> parse_interval(std::string_view s) noexcept {
    for (auto b : kAllIntervals)
        if (s == to_string(b)) return b;
    return std::nullopt;
}

std::string_view to_string(DurationBucket b) noexcept {
    switch (b) {
        case DurationBucket::short_span: return "short";
        case DurationBucket::medium_span: return "medium";
        case DurationBucket::long_span: return "long";
    }
    return "?";
}

std::optional<DurationBucket> parse_duration(std::string_view s) noexcept {
    for (auto b : kAllDurations)
        if (s == to_string(b)) return b;
    return std::nullopt;
}

std::string_view to_string(QAFormat f) noexcept {
    return f == QAFormat::open_ended ? "open_ended" : "multiple_choice";
}

std::optional<QAFormat> parse_format(std::string_view s) noexcept {
    if (s == "open_ended") return QAFormat::open_ended;
    if (s == "multiple_choice") return QAFormat::multiple_choice;
    return std::nullopt;
}

char letter_for(std::size_t index) noexcept { return static_cast<char>('A' + index); }

std::optional<std::size_t> index_for(char letter) noexcept {
    auto c = static_cast<unsigned char>(letter);
    if (!std::isalpha(c)) return std::nullopt;
    return static_cast<std::size_t>(std::toupper(c) - 'A');
}

}  // namespace timeqa
