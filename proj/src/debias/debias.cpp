#include "timeqa/debias/debias.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "timeqa/core/errors.hpp"
#include "timeqa/core/hash.hpp"
#include "timeqa/core/rng.hpp"

namespace timeqa::debias {

namespace {

using Groups = std::map<std::string, std::vector<const QAItem*>>;

Groups group_by_label(const std::vector<QAItem>& items, Dimension d) {
    Groups g;
    for (const auto& it : items)
        if (it.dimension == d) g[it.label].push_back(&it);
    for (auto& [label, v] : g)
        std::sort(v.begin(), v.end(), [](const QAItem* a, const QAItem* b) { return a->item_id < b->item_id; });
    return g;
}

// Seeded subset of `group` with `keep` members.
void keep_sample(const std::vector<const QAItem*>& group, std::size_t keep, Rng& rng, std::set<std::string>& removed) {
    if (keep >= group.size()) return;
    std::vector<bool> kept(group.size(), false);
    for (auto i : rng.sample_indices(group.size(), keep)) kept[i] = true;
    for (std::size_t i = 0; i < group.size(); ++i)
        if (!kept[i]) removed.insert(group[i]->item_id);
}

std::vector<QAItem> without(const std::vector<QAItem>& items, const std::set<std::string>& removed) {
    std::vector<QAItem> out;
    out.reserve(items.size() - std::min(items.size(), removed.size()));
    for (const auto& it : items)
        if (!removed.count(it.item_id)) out.push_back(it);
    return out;
}

std::map<std::string, std::size_t> label_counts(const std::vector<QAItem>& items, Dimension d) {
    std::map<std::string, std::size_t> c;
    for (const auto& it : items)
        if (it.dimension == d) ++c[it.label];
    return c;
}

}  // namespace

std::vector<std::string> answer_space(Dimension d) {
    std::vector<std::string> out;
    switch (d) {
        case Dimension::dynamic:
            for (auto x : kAllDirections) out.emplace_back(to_string(x));
            break;
        case Dimension::duration:
            for (auto x : kAllDurations) out.emplace_back(to_string(x));
            break;
        case Dimension::location:
            for (auto x : kAllIntervals) out.emplace_back(to_string(x));
            break;
        default: break;
    }
    return out;
}

std::size_t max_min_gap(const std::map<std::string, std::size_t>& counts, const std::vector<std::string>& space) {
    std::vector<std::size_t> values;
    for (const auto& v : space) {
        auto it = counts.find(v);
        values.push_back(it == counts.end() ? 0 : it->second);
    }
    for (const auto& [label, n] : counts)
        if (std::find(space.begin(), space.end(), label) == space.end()) values.push_back(n);
    if (values.empty()) return 0;
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *hi - *lo;
}

DebiasResult balance_answers(const std::vector<QAItem>& items, const std::set<Dimension>& dims, int gap,
                             std::uint64_t seed) {
    if (gap < 0) throw ConfigInvalid("balance_gap must be >= 0");
    std::set<std::string> removed;
    std::vector<BalanceReport> reports;
    for (auto d : dims) {
        auto groups = group_by_label(items, d);
        auto space = answer_space(d);
        for (const auto& v : space) groups[v];  // zero-count answer values still set the minimum
        std::size_t lo = groups.begin()->second.size();
        for (const auto& [label, g] : groups) lo = std::min(lo, g.size());

        BalanceReport rep;
        rep.dimension = d;
        for (const auto& [label, g] : groups) {
            if (g.size() <= lo + static_cast<std::size_t>(gap)) continue;
            Rng rng(derive_seed(seed, {"debias", "balance", to_string(d), label}));
            keep_sample(g, lo, rng, removed);
            rep.downsampled += g.size() - lo;
        }
        if (lo == 0 && rep.downsampled > 0) {
            rep.warnings.push_back("BalanceWarning: " + std::string(to_string(d)) +
                                   " has an answer value with no items; dimension emptied to stay balanced");
            spdlog::warn("debias: {}", rep.warnings.back());
        }
        reports.push_back(std::move(rep));
    }
    DebiasResult out{without(items, removed), {}};
    for (auto& rep : reports) {
        rep.per_answer_counts = label_counts(out.items, rep.dimension);
        for (const auto& v : answer_space(rep.dimension)) rep.per_answer_counts.try_emplace(v, 0);
        rep.max_min_gap = max_min_gap(rep.per_answer_counts, answer_space(rep.dimension));
        out.reports.push_back(std::move(rep));
    }
    return out;
}

DebiasResult downsample_longtail(const std::vector<QAItem>& items, const std::set<Dimension>& dims,
                                 double cap_multiplier, std::uint64_t seed) {
    if (!(cap_multiplier > 0)) throw ConfigInvalid("longtail_cap must be > 0");
    std::set<std::string> removed;
    std::vector<BalanceReport> reports;
    for (auto d : dims) {
        BalanceReport rep;
        rep.dimension = d;
        auto groups = group_by_label(items, d);
        if (!groups.empty()) {
            std::vector<std::size_t> freq;
            for (const auto& [label, g] : groups) freq.push_back(g.size());
            std::sort(freq.begin(), freq.end());
            const auto n = freq.size();
            const double median = n % 2 ? static_cast<double>(freq[n / 2])
                                        : (static_cast<double>(freq[n / 2 - 1]) + static_cast<double>(freq[n / 2])) / 2;
            const auto cap = static_cast<std::size_t>(std::floor(cap_multiplier * median));
            for (const auto& [label, g] : groups) {
                if (g.size() <= cap) continue;
                Rng rng(derive_seed(seed, {"debias", "longtail", to_string(d), label}));
                keep_sample(g, cap, rng, removed);
                rep.downsampled += g.size() - cap;
            }
        }
        reports.push_back(std::move(rep));
    }
    DebiasResult out{without(items, removed), {}};
    for (auto& rep : reports) {
        rep.per_answer_counts = label_counts(out.items, rep.dimension);
        rep.max_min_gap = max_min_gap(rep.per_answer_counts, {});
        out.reports.push_back(std::move(rep));
    }
    return out;
}

QAItem reversal_sibling(const QAItem& item, std::uint64_t seed) {
    if (item.dimension != Dimension::dynamic) throw Error("reversal applies to dynamic items only");
    auto dir = parse_direction(item.label);
    if (!dir) throw Error("dynamic item " + item.item_id + " has no direction label");
    if (!item.edit) throw Error("dynamic item " + item.item_id + " has no edit manifest");

    QAItem s = item;
    const auto flipped = opposite(*dir);
    s.item_id = sha256_hex(item.item_id + "|reverse").substr(0, 16);
    s.label = std::string(to_string(flipped));
    s.answer_text = s.label;
    s.edit->ops.push_back(Reverse{});
    s.provenance.parent_item = item.item_id;
    if (s.format == QAFormat::multiple_choice) {
        Rng rng(derive_seed(seed, {"debias", "reversal-options", item.item_id}));
        rng.shuffle(s.options);
        auto pos = static_cast<std::size_t>(std::find(s.options.begin(), s.options.end(), s.answer_text) - s.options.begin());
        if (pos == s.options.size()) throw FormatMismatch("item " + item.item_id + " lacks the opposite direction option");
        s.answer = std::string(1, letter_for(pos));
        s.question = qagen::render_mc_question(s.stem, s.options);
    } else {
        s.answer = s.answer_text;
    }
    qagen::check_item(s);
    return s;
}

std::vector<QAItem> add_reversal_augmentation(const std::vector<QAItem>& items, double fraction, std::uint64_t seed,
                                              std::size_t* pairs_added) {
    std::vector<QAItem> out = items;
    std::size_t pairs = 0;
    std::set<std::string> has_sibling;
    for (const auto& it : items)
        if (!it.provenance.parent_item.empty()) has_sibling.insert(it.provenance.parent_item);
    for (const auto& it : items) {
        if (it.dimension != Dimension::dynamic || !it.edit || it.edit->ops.empty()) continue;
        if (!it.provenance.parent_item.empty() || has_sibling.count(it.item_id)) continue;
        const bool already_reversed = std::any_of(it.edit->ops.begin(), it.edit->ops.end(),
                                                  [](const EditOp& op) { return std::holds_alternative<Reverse>(op); });
        if (already_reversed) continue;
        Rng rng(derive_seed(seed, {"debias", "reversal-pick", it.item_id}));
        if (!(rng.uniform01() < fraction)) continue;
        out.push_back(reversal_sibling(it, seed));
        ++pairs;
    }
    if (pairs_added) *pairs_added = pairs;
    return out;
}

std::vector<QAItem> apply_quotas(const std::vector<QAItem>& items, const std::map<Dimension, std::size_t>& quota,
                                 std::uint64_t seed) {
    std::set<std::string> removed;
    for (const auto& [d, limit] : quota) {
        std::vector<const QAItem*> members;
        for (const auto& it : items)
            if (it.dimension == d) members.push_back(&it);
        std::sort(members.begin(), members.end(), [](const QAItem* a, const QAItem* b) { return a->item_id < b->item_id; });
        Rng rng(derive_seed(seed, {"debias", "quota", to_string(d)}));
        keep_sample(members, limit, rng, removed);
    }
    return without(items, removed);
}

DebiasResult run_debias(const std::vector<QAItem>& items, const DebiasConfig& cfg, std::uint64_t seed) {
    std::size_t pairs = 0;
    auto augmented = add_reversal_augmentation(items, cfg.reversal_fraction, seed, &pairs);
    auto balanced = balance_answers(augmented, {Dimension::dynamic, Dimension::duration, Dimension::location},
                                    cfg.balance_gap, seed);
    auto flattened = downsample_longtail(balanced.items, {Dimension::reasoning, Dimension::order}, cfg.longtail_cap, seed);
    auto final_items = apply_quotas(flattened.items, cfg.quotas, seed);
    qagen::sort_by_id(final_items);

    DebiasResult out;
    out.items = std::move(final_items);
    std::map<Dimension, BalanceReport> by_dim;
    for (auto& r : balanced.reports) by_dim[r.dimension] = r;
    for (auto& r : flattened.reports) by_dim[r.dimension] = r;
    for (auto d : kAllDimensions) {
        auto& rep = by_dim[d];
        rep.dimension = d;
        auto space = answer_space(d);
        rep.per_answer_counts = label_counts(out.items, d);
        for (const auto& v : space) rep.per_answer_counts.try_emplace(v, 0);
        rep.max_min_gap = max_min_gap(rep.per_answer_counts, space);
        if (d == Dimension::dynamic) rep.reversal_pairs = pairs;
        out.reports.push_back(rep);
    }
    return out;
}

nlohmann::json to_json(const BalanceReport& r) {
    return nlohmann::json{{"dimension", to_string(r.dimension)},
                          {"per_answer_counts", r.per_answer_counts},
                          {"max_min_gap", r.max_min_gap},
                          {"downsampled", r.downsampled},
                          {"reversal_pairs", r.reversal_pairs},
                          {"warnings", r.warnings}};
}

}  // namespace timeqa::debias
