#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace timeqa {

/// The five temporal facets a QA item can target.
enum class Dimension { dynamic, reasoning, duration, location, order };

inline constexpr std::array<Dimension, 5> kAllDimensions = {
    Dimension::location, Dimension::duration, Dimension::dynamic, Dimension::order, Dimension::reasoning};

std::string_view to_string(Dimension d) noexcept;
/// Two-letter column code used in score tables (LO, DU, DY, OR, RE).
std::string_view short_code(Dimension d) noexcept;
std::optional<Dimension> parse_dimension(std::string_view s) noexcept;

/// Number of multiple-choice options each dimension uses.
int option_count(Dimension d) noexcept;

/// Image coordinates: origin top-left, y grows downward.
enum class Direction { left, right, up, down };

inline constexpr std::array<Direction, 4> kAllDirections = {Direction::left, Direction::right, Direction::up,
                                                            Direction::down};

std::string_view to_string(Direction d) noexcept;
std::optional<Direction> parse_direction(std::string_view s) noexcept;
Direction opposite(Direction d) noexcept;

enum class IntervalBucket { start, middle, end };
inline constexpr std::array<IntervalBucket, 3> kAllIntervals = {IntervalBucket::start, IntervalBucket::middle,
                                                                IntervalBucket::end};
std::string_view to_string(IntervalBucket b) noexcept;
std::optional<IntervalBucket> parse_interval(std::string_view s) noexcept;

// Ordered short < medium < long.
enum class DurationBucket { short_span, medium_span, long_span };
inline constexpr std::array<DurationBucket, 3> kAllDurations = {DurationBucket::short_span, DurationBucket::medium_span,
                                                                DurationBucket::long_span};
std::string_view to_string(DurationBucket b) noexcept;
std::optional<DurationBucket> parse_duration(std::string_view s) noexcept;

enum class QAFormat { open_ended, multiple_choice };
std::string_view to_string(QAFormat f) noexcept;
std::optional<QAFormat> parse_format(std::string_view s) noexcept;

/// 0 -> 'A'. Index must be < 26.
char letter_for(std::size_t index) noexcept;
/// 'A'/'a' -> 0; nullopt for anything that is not a latin letter.
std::optional<std::size_t> index_for(char letter) noexcept;

}  // namespace timeqa
