#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "timeqa/qagen/item.hpp"

namespace timeqa::debias {

using qagen::QAItem;

struct BalanceReport {
    Dimension dimension = Dimension::dynamic;
    std::map<std::string, std::size_t> per_answer_counts;
    std::size_t max_min_gap = 0;
    std::size_t downsampled = 0;
    std::size_t reversal_pairs = 0;
    std::vector<std::string> warnings;
};

struct DebiasResult {
    std::vector<QAItem> items;
    std::vector<BalanceReport> reports;
};

/// Answer values a balanced dimension must cover (every direction or bucket),
/// including values with zero items.
std::vector<std::string> answer_space(Dimension d);

/// Per dimension in `dims`, removes items (seeded, uniform within each answer
/// value) from every answer value whose count exceeds min + gap, bringing it
/// down to the minimum. Items of other dimensions pass through. Never edits items.
/// A report warning is emitted when the minimum is 0 and items had to go.
DebiasResult balance_answers(const std::vector<QAItem>& items, const std::set<Dimension>& dims, int gap,
                             std::uint64_t seed);

/// Per dimension in `dims`, caps every label's count at floor(cap_multiplier * median label count).
DebiasResult downsample_longtail(const std::vector<QAItem>& items, const std::set<Dimension>& dims,
                                 double cap_multiplier, std::uint64_t seed);

/// Time-reversed sibling of a Dynamic item: reverse appended to its manifest,
/// opposite direction as answer, options re-shuffled by `seed`.
QAItem reversal_sibling(const QAItem& item, std::uint64_t seed);

/// Appends a reversal sibling for a seeded `fraction` of eligible Dynamic items
/// (those with a crop manifest and no reverse yet). Originals are kept.
std::vector<QAItem> add_reversal_augmentation(const std::vector<QAItem>& items, double fraction, std::uint64_t seed,
                                              std::size_t* pairs_added = nullptr);

/// Keeps at most quota[d] items of each listed dimension (seeded).
std::vector<QAItem> apply_quotas(const std::vector<QAItem>& items, const std::map<Dimension, std::size_t>& quota,
                                 std::uint64_t seed);

struct DebiasConfig {
    int balance_gap = 1;
    double longtail_cap = 3.0;
    double reversal_fraction = 0.5;
    std::map<Dimension, std::size_t> quotas;
};

/// Reversal augmentation, answer balancing, long-tail downsampling and quotas,
/// in that order. Output sorted by item_id; one report per dimension.
DebiasResult run_debias(const std::vector<QAItem>& items, const DebiasConfig& cfg, std::uint64_t seed);

/// max - min over the counts of `space` (missing values count as 0).
std::size_t max_min_gap(const std::map<std::string, std::size_t>& counts, const std::vector<std::string>& space);

nlohmann::json to_json(const BalanceReport& r);

}  // namespace timeqa::debias
