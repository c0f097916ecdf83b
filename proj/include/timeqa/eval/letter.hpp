#pragma once

#include <optional>
#include <string_view>

namespace timeqa::eval {

/// Option letter chosen by a free-text model reply, or nullopt.
///
/// Recognized forms, scanning left to right, first in-range match wins:
/// "(x)" and "x." / "x)" standing alone (any case), an isolated upper-case
/// letter, and a reply that is nothing but a single letter (any case).
/// A sentence-initial "A"/"I" followed by a lower-case word is read as an
/// article or pronoun, not an answer. Letters at or beyond `num_options`
/// are not matches. num_options must be in [2, 26].
std::optional<char> extract_letter(std::string_view raw_output, int num_options);

}  // namespace timeqa::eval
