#include "timeqa/audit/audit.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "timeqa/core/errors.hpp"
#include "timeqa/core/hash.hpp"
#include "timeqa/core/parallel.hpp"
#include "timeqa/core/rng.hpp"
#include "timeqa/eval/letter.hpp"

namespace timeqa::audit {

using judge::Condition;
using qagen::QAItem;

std::string probe_prompt(const QAItem& item) { return item.question + "\n" + std::string(kEvalPrompt); }

JudgeVerdict make_verdict(const QAItem& item, const std::string& judge_id, Condition condition,
                          std::string raw_response, int frame_index) {
    JudgeVerdict v;
    v.item_id = item.item_id;
    v.judge_id = judge_id;
    v.condition = condition;
    v.frame_index = frame_index;
    v.chosen_letter = eval::extract_letter(raw_response, static_cast<int>(std::max<std::size_t>(item.options.size(), 2)));
    v.raw_response = std::move(raw_response);
    v.correct = v.chosen_letter && item.answer.size() == 1 && *v.chosen_letter == item.answer[0];
    return v;
}

FramePick pick_frame(const QAItem& item, std::uint64_t seed, const std::string& judge_id) {
    if (!item.edit) return {FrameRef{item.clip_id, 0}, 0, 1};
    const auto sequence = replay(*item.edit);
    if (sequence.empty()) throw InvalidManifest("item " + item.item_id + ": edit yields no frames");
    Rng rng(derive_seed(seed, {"audit", "frame", item.item_id, judge_id}));
    const auto i = static_cast<std::size_t>(rng.below(sequence.size()));
    return {sequence[i], static_cast<int>(i), static_cast<int>(sequence.size())};
}

std::filesystem::path frame_path(const std::filesystem::path& frames_dir, const std::string& item_id, int sequence_index) {
    return frames_dir / (item_id + "_f" + std::to_string(sequence_index) + ".png");
}

JudgeVerdict probe_item(const QAItem& item, judge::Judge& judge, Condition condition, std::uint64_t seed,
                        judge::ResponseCache* cache, const ProbeOptions& opts) {
    judge::JudgeRequest request{probe_prompt(item), judge::VisualInput{}};
    auto& visual = *request.visual;
    visual.condition = condition;
    if (item.edit) {
        visual.width = item.edit->frame_width;
        visual.height = item.edit->frame_height;
    }
    int frame_index = -1;
    if (condition == Condition::single_frame) {
        auto pick = pick_frame(item, seed, opts.shared_frame ? std::string() : judge.id());
        visual.frame = pick.frame;
        visual.sequence_index = pick.sequence_index;
        visual.image_path = frame_path(opts.frames_dir, item.item_id, pick.sequence_index);
        frame_index = pick.sequence_index;
    }

    const auto key = sha256_hex(item.item_id + '\x1f' + judge.id() + '\x1f' + std::string(judge::to_string(condition)) +
                                '\x1f' + std::to_string(frame_index) + '\x1f' + sha256_hex(request.prompt));
    if (cache) {
        if (auto hit = cache->get(key)) return make_verdict(item, judge.id(), condition, *hit, frame_index);
    }
    try {
        auto reply = judge::complete_with_retries(judge, request, opts.retries);
        if (cache) cache->put(key, reply);
        return make_verdict(item, judge.id(), condition, std::move(reply), frame_index);
    } catch (const JudgeUnavailable& e) {
        spdlog::error("audit: {} counted incorrect: {}", item.item_id, e.what());
        auto v = make_verdict(item, judge.id(), condition, "", frame_index);
        v.unavailable = true;
        return v;
    }
}

bool is_shortcut(const std::array<bool, 3>& correct) noexcept {
    return std::count(correct.begin(), correct.end(), true) >= 2;
}

FilterResult majority_filter(const std::vector<QAItem>& items,
                             const std::map<std::string, std::vector<JudgeVerdict>>& single_frame_verdicts) {
    FilterResult out;
    for (const auto& item : items) {
        auto it = single_frame_verdicts.find(item.item_id);
        const bool complete =
            it != single_frame_verdicts.end() && it->second.size() == 3 &&
            std::all_of(it->second.begin(), it->second.end(), [](const JudgeVerdict& v) {
                return v.condition == Condition::single_frame;
            });
        if (!complete) {
            spdlog::warn("audit: {} lacks three single-frame verdicts; skipped", item.item_id);
            out.incomplete.push_back(item.item_id);
            continue;
        }
        FilterDecision d{item.item_id, it->second, false};
        d.filtered = is_shortcut({d.verdicts[0].correct, d.verdicts[1].correct, d.verdicts[2].correct});
        if (d.filtered)
            out.removed.push_back(d);
        else
            out.kept.push_back(item);
        out.decisions.push_back(std::move(d));
    }
    return out;
}

std::vector<QAItem> rebalance_options(std::vector<QAItem> items, std::uint64_t seed) {
    std::map<Dimension, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i].format == QAFormat::multiple_choice) groups[items[i].dimension].push_back(i);

    for (auto& [dim, members] : groups) {
        std::sort(members.begin(), members.end(),
                  [&](std::size_t a, std::size_t b) { return items[a].item_id < items[b].item_id; });
        Rng order_rng(derive_seed(seed, {"audit", "rebalance", to_string(dim)}));
        order_rng.shuffle(members);
        for (std::size_t rank = 0; rank < members.size(); ++rank) {
            auto& item = items[members[rank]];
            const auto n = item.options.size();
            const auto old = index_for(item.answer.empty() ? '?' : item.answer[0]);
            if (n == 0 || !old || *old >= n) throw FormatMismatch("item " + item.item_id + ": answer letter out of range");
            const std::string correct = item.options[*old];

            Rng rng(derive_seed(seed, {"audit", "rebalance-item", item.item_id}));
            rng.shuffle(item.options);
            const auto at = static_cast<std::size_t>(
                std::find(item.options.begin(), item.options.end(), correct) - item.options.begin());
            const auto target = rank % n;
            std::swap(item.options[at], item.options[target]);
            item.answer = std::string(1, letter_for(target));
            item.question = qagen::render_mc_question(item.stem, item.options);
            qagen::check_item(item);
        }
    }
    return items;
}

std::map<Dimension, std::vector<std::size_t>> letter_positions(const std::vector<QAItem>& items) {
    std::map<Dimension, std::vector<std::size_t>> out;
    for (const auto& item : items) {
        if (item.format != QAFormat::multiple_choice || item.answer.empty()) continue;
        auto& counts = out[item.dimension];
        counts.resize(std::max(counts.size(), item.options.size()), 0);
        if (auto i = index_for(item.answer[0]); i && *i < counts.size()) ++counts[*i];
    }
    return out;
}

double analytic_random(const std::vector<QAItem>& items) {
    if (items.empty()) return 0;
    double sum = 0;
    for (const auto& item : items) {
        const auto n = item.options.empty() ? static_cast<std::size_t>(option_count(item.dimension)) : item.options.size();
        sum += 1.0 / static_cast<double>(n);
    }
    return sum / static_cast<double>(items.size());
}

DiagnosticsReport compute_diagnostics(const std::vector<QAItem>& items, const std::map<std::string, JudgeVerdict>& single_frame,
                                      const std::map<std::string, JudgeVerdict>& blind) {
    struct Acc {
        std::size_t n = 0, s = 0, b = 0;
        double r = 0;
    };
    Acc all;
    std::map<Dimension, Acc> dims;
    for (const auto& item : items) {
        auto s = single_frame.find(item.item_id);
        auto b = blind.find(item.item_id);
        if (s == single_frame.end() || b == blind.end())
            throw IncompleteVerdicts("item " + item.item_id + " lacks a " +
                                     (s == single_frame.end() ? "single_frame" : "blind") + " verdict");
        const double r = 1.0 / static_cast<double>(item.options.empty() ? option_count(item.dimension) : item.options.size());
        for (Acc* a : {&all, &dims[item.dimension]}) {
            ++a->n;
            a->s += s->second.correct;
            a->b += b->second.correct;
            a->r += r;
        }
    }
    auto cell = [](const Acc& a) {
        AccuracyCell c;
        c.n = a.n;
        if (a.n == 0) return c;
        const double n = static_cast<double>(a.n);
        c.acc_s = static_cast<double>(a.s) / n;
        c.acc_b = static_cast<double>(a.b) / n;
        c.acc_r = a.r / n;
        return c;
    };
    DiagnosticsReport report;
    report.overall = cell(all);
    for (const auto& [d, a] : dims) report.per_dimension[d] = cell(a);
    return report;
}

namespace {

int in_flight_for(const AuditConfig& cfg, std::size_t judge) {
    return judge < cfg.max_in_flight.size() ? cfg.max_in_flight[judge] : 4;
}

std::vector<JudgeVerdict> probe_all(const std::vector<QAItem>& items, judge::Judge& judge, Condition condition,
                                    const AuditConfig& cfg, std::size_t j, std::uint64_t seed,
                                    judge::ResponseCache* cache) {
    ProbeOptions opts = cfg.probe;
    if (j < cfg.retries.size()) opts.retries = cfg.retries[j];
    std::vector<JudgeVerdict> out(items.size());
    parallel_for(items.size(), in_flight_for(cfg, j),
                 [&](std::size_t i) { out[i] = probe_item(items[i], judge, condition, seed, cache, opts); });
    return out;
}

std::map<std::string, JudgeVerdict> by_item(const std::vector<JudgeVerdict>& vs) {
    std::map<std::string, JudgeVerdict> out;
    for (const auto& v : vs) out.emplace(v.item_id, v);
    return out;
}

void check_judges(const std::vector<judge::Judge*>& judges, const AuditConfig& cfg) {
    if (judges.size() != 3) throw ConfigInvalid("audit needs exactly 3 judges, got " + std::to_string(judges.size()));
    for (auto* j : judges)
        if (!j) throw ConfigInvalid("audit judge is null");
    if (cfg.diagnostic_judge < 0 || cfg.diagnostic_judge > 2)
        throw ConfigInvalid("diagnostic_judge must be 0, 1 or 2");
}

}  // namespace

AuditResult run_audit(const std::vector<QAItem>& items, const std::vector<judge::Judge*>& judges, const AuditConfig& cfg,
                      judge::ResponseCache* cache, std::uint64_t seed) {
    check_judges(judges, cfg);
    AuditResult result;
    std::vector<QAItem> candidates;
    for (const auto& item : items) {
        if (item.format == QAFormat::multiple_choice)
            candidates.push_back(item);
        else
            ++result.open_ended_excluded;
    }

    std::vector<std::vector<JudgeVerdict>> single(judges.size());
    for (std::size_t j = 0; j < judges.size(); ++j) {
        single[j] = probe_all(candidates, *judges[j], Condition::single_frame, cfg, j, seed, cache);
        result.verdicts.insert(result.verdicts.end(), single[j].begin(), single[j].end());
    }
    std::map<std::string, std::vector<JudgeVerdict>> grouped;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        for (std::size_t j = 0; j < judges.size(); ++j) grouped[candidates[i].item_id].push_back(single[j][i]);

    auto filtered = majority_filter(candidates, grouped);
    result.removed = std::move(filtered.removed);
    result.incomplete = std::move(filtered.incomplete);

    const auto d = static_cast<std::size_t>(cfg.diagnostic_judge);
    auto& diag = *judges[d];
    auto blind_before = probe_all(candidates, diag, Condition::blind, cfg, d, seed, cache);
    result.verdicts.insert(result.verdicts.end(), blind_before.begin(), blind_before.end());
    result.before = compute_diagnostics(candidates, by_item(single[d]), by_item(blind_before));

    result.benchmark = rebalance_options(std::move(filtered.kept), seed);
    qagen::sort_by_id(result.benchmark);

    auto single_after = probe_all(result.benchmark, diag, Condition::single_frame, cfg, d, seed, cache);
    auto blind_after = probe_all(result.benchmark, diag, Condition::blind, cfg, d, seed, cache);
    result.verdicts.insert(result.verdicts.end(), single_after.begin(), single_after.end());
    result.verdicts.insert(result.verdicts.end(), blind_after.begin(), blind_after.end());
    result.after = compute_diagnostics(result.benchmark, by_item(single_after), by_item(blind_after));

    result.unavailable_verdicts = static_cast<std::size_t>(
        std::count_if(result.verdicts.begin(), result.verdicts.end(), [](const JudgeVerdict& v) { return v.unavailable; }));
    if (result.unavailable_verdicts > 0)
        spdlog::error("audit: {} verdict(s) counted incorrect because a judge was unavailable", result.unavailable_verdicts);
    return result;
}

std::string frame_plan(const std::vector<QAItem>& items, const std::vector<judge::Judge*>& judges, const AuditConfig& cfg,
                       std::uint64_t seed) {
    std::vector<std::string> ids;
    if (cfg.probe.shared_frame)
        ids.emplace_back();
    else
        for (auto* j : judges) ids.push_back(j->id());

    std::ostringstream out;
    for (const auto& item : items) {
        if (item.format != QAFormat::multiple_choice) continue;
        std::vector<int> seen;
        for (const auto& id : ids) {
            auto pick = pick_frame(item, seed, id);
            if (std::find(seen.begin(), seen.end(), pick.sequence_index) != seen.end()) continue;
            seen.push_back(pick.sequence_index);
            out << item.item_id << ' ' << pick.frame.uri << ' ' << pick.frame.index << ' '
                << frame_path(cfg.probe.frames_dir, item.item_id, pick.sequence_index).string() << '\n';
        }
    }
    return out.str();
}

namespace {

std::string pct(double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%6.1f", 100.0 * v);
    return buf;
}

void diag_table(std::ostringstream& out, const char* title, const DiagnosticsReport& r) {
    out << title << '\n';
    out << "  dim        n   Acc_s  Acc_b  Acc_r\n";
    auto row = [&](std::string_view name, const AccuracyCell& c) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "  %-6s %5zu ", std::string(name).c_str(), c.n);
        out << buf << pct(c.acc_s) << ' ' << pct(c.acc_b) << ' ' << pct(c.acc_r) << '\n';
    };
    for (auto d : kAllDimensions)
        if (auto it = r.per_dimension.find(d); it != r.per_dimension.end()) row(short_code(d), it->second);
    row("ALL", r.overall);
}

}  // namespace

std::string report_text(const AuditResult& r) {
    std::ostringstream out;
    std::map<Dimension, std::size_t> kept;
    for (const auto& item : r.benchmark) ++kept[item.dimension];
    std::size_t candidates = 0;
    for (const auto& [d, c] : r.before.per_dimension) candidates += c.n;

    out << "Shortcut filter (removed when >= 2 of 3 judges answer from one frame)\n";
    out << "  dim    candidates removed   kept\n";
    for (auto d : kAllDimensions) {
        auto it = r.before.per_dimension.find(d);
        if (it == r.before.per_dimension.end()) continue;
        const auto k = kept[d];
        char buf[64];
        std::snprintf(buf, sizeof buf, "  %-6s %10zu %7zu %6zu\n", std::string(short_code(d)).c_str(), it->second.n,
                      it->second.n - k, k);
        out << buf;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %-6s %10zu %7zu %6zu\n", "ALL", candidates, r.removed.size(), r.benchmark.size());
    out << buf;
    if (!r.incomplete.empty()) out << "  incomplete verdicts: " << r.incomplete.size() << '\n';
    if (r.open_ended_excluded) out << "  open-ended items excluded: " << r.open_ended_excluded << '\n';
    if (r.unavailable_verdicts) out << "  WARNING: " << r.unavailable_verdicts << " verdict(s) from unavailable judges counted incorrect\n";
    out << '\n';
    diag_table(out, "Diagnostics before filtering (percent)", r.before);
    out << '\n';
    diag_table(out, "Diagnostics on the final benchmark (percent)", r.after);
    out << '\n' << "Correct-letter positions\n";
    for (const auto& [d, counts] : letter_positions(r.benchmark)) {
        out << "  " << short_code(d) << ':';
        for (std::size_t i = 0; i < counts.size(); ++i) out << ' ' << letter_for(i) << '=' << counts[i];
        out << '\n';
    }
    return out.str();
}

nlohmann::json to_json(const JudgeVerdict& v) {
    return {{"item_id", v.item_id},
            {"judge_id", v.judge_id},
            {"condition", judge::to_string(v.condition)},
            {"raw_response", v.raw_response},
            {"chosen_letter", v.chosen_letter ? nlohmann::json(std::string(1, *v.chosen_letter)) : nlohmann::json(nullptr)},
            {"correct", v.correct},
            {"frame_index", v.frame_index},
            {"unavailable", v.unavailable}};
}

nlohmann::json to_json(const FilterDecision& d) {
    auto vs = nlohmann::json::array();
    for (const auto& v : d.verdicts) vs.push_back(to_json(v));
    return {{"item_id", d.item_id}, {"verdicts", vs}, {"filtered", d.filtered}};
}

nlohmann::json to_json(const DiagnosticsReport& d) {
    auto cell = [](const AccuracyCell& c) {
        return nlohmann::json{{"n", c.n}, {"acc_s", c.acc_s}, {"acc_b", c.acc_b}, {"acc_r", c.acc_r}};
    };
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [dim, c] : d.per_dimension) per[std::string(to_string(dim))] = cell(c);
    return {{"overall", cell(d.overall)}, {"per_dimension", per}};
}

}  // namespace timeqa::audit
