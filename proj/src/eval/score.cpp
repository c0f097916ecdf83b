#include "timeqa/eval/score.hpp"

#include <cstdio>
#include <unordered_map>

#include "timeqa/core/errors.hpp"
#include "timeqa/core/io.hpp"
#include "timeqa/eval/letter.hpp"

namespace timeqa::eval {

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
    std::vector<PredictionRecord> out;
    std::size_t index = 0;
    for (const auto& line : read_lines(path)) {
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("item_id"))
            throw FormatMismatch("prediction record " + std::to_string(index) + " is malformed");
        std::string raw;
        for (const char* key : {"raw_output", "prediction", "output"}) {
            if (auto it = j.find(key); it != j.end() && it->is_string()) {
                raw = it->get<std::string>();
                break;
            }
        }
        out.push_back({j["item_id"].get<std::string>(), std::move(raw)});
        ++index;
    }
    return out;
}

ScoreReport score(const std::vector<qagen::QAItem>& benchmark, const std::vector<PredictionRecord>& preds) {
    std::unordered_map<std::string, const qagen::QAItem*> by_id;
    for (const auto& item : benchmark) by_id.emplace(item.item_id, &item);

    std::unordered_map<std::string, const PredictionRecord*> pred_by_id;
    for (const auto& p : preds) {
        if (!by_id.count(p.item_id)) throw UnknownItemId(p.item_id);
        pred_by_id.emplace(p.item_id, &p);  // first record per item wins
    }

    ScoreReport r;
    std::map<Dimension, double> inverse_option_sum;
    for (const auto& item : benchmark) {
        if (item.format != QAFormat::multiple_choice) {
            ++r.skipped_open_ended;
            continue;
        }
        auto& d = r.per_dimension[item.dimension];
        ++d.total;
        inverse_option_sum[item.dimension] += 1.0 / static_cast<double>(item.options.size());
        auto it = pred_by_id.find(item.item_id);
        if (it == pred_by_id.end()) {
            ++r.missing_count;
            ++d.unparsed;
            continue;
        }
        const int n = static_cast<int>(std::max<std::size_t>(item.options.size(), 2));
        auto letter = extract_letter(it->second->raw_output, std::min(n, 26));
        if (!letter) {
            ++d.unparsed;
            continue;
        }
        if (std::string(1, *letter) == item.answer) ++d.correct;
    }

    std::size_t total = 0, correct = 0;
    for (auto& [dim, d] : r.per_dimension) {
        d.accuracy = static_cast<double>(d.correct) / static_cast<double>(d.total);
        d.random_reference = inverse_option_sum[dim] / static_cast<double>(d.total);
        r.average += d.accuracy;
        r.random_average += d.random_reference;
        r.unparsed_count += d.unparsed;
        total += d.total;
        correct += d.correct;
    }
    if (!r.per_dimension.empty()) {
        r.average /= static_cast<double>(r.per_dimension.size());
        r.random_average /= static_cast<double>(r.per_dimension.size());
    }
    r.overall = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    return r;
}

nlohmann::json to_json(const ScoreReport& r) {
    nlohmann::json dims = nlohmann::json::object();
    for (const auto& [dim, d] : r.per_dimension) {
        dims[std::string(to_string(dim))] = {{"total", d.total},
                                             {"correct", d.correct},
                                             {"unparsed", d.unparsed},
                                             {"accuracy", d.accuracy},
                                             {"random_reference", d.random_reference}};
    }
    return {{"per_dimension", dims},
            {"average", r.average},
            {"overall", r.overall},
            {"random_average", r.random_average},
            {"unparsed_count", r.unparsed_count},
            {"missing_count", r.missing_count},
            {"skipped_open_ended", r.skipped_open_ended}};
}

std::string to_text(const ScoreReport& r) {
    std::string out;
    char buf[64];
    auto row = [&](const char* name, auto value_of, double avg) {
        std::snprintf(buf, sizeof buf, "%-8s", name);
        out += buf;
        for (auto dim : kAllDimensions) {
            auto it = r.per_dimension.find(dim);
            if (it == r.per_dimension.end()) {
                std::snprintf(buf, sizeof buf, "%7s", "-");
            } else {
                std::snprintf(buf, sizeof buf, "%7.1f", 100.0 * value_of(it->second));
            }
            out += buf;
        }
        std::snprintf(buf, sizeof buf, "%7.1f\n", 100.0 * avg);
        out += buf;
    };
    std::snprintf(buf, sizeof buf, "%-8s", "");
    out += buf;
    for (auto dim : kAllDimensions) {
        std::snprintf(buf, sizeof buf, "%7s", std::string(short_code(dim)).c_str());
        out += buf;
    }
    out += "    AVG\n";
    row("Model", [](const DimensionScore& d) { return d.accuracy; }, r.average);
    row("Random", [](const DimensionScore& d) { return d.random_reference; }, r.random_average);
    std::snprintf(buf, sizeof buf, "items-weighted accuracy: %.1f\n", 100.0 * r.overall);
    out += buf;
    std::snprintf(buf, sizeof buf, "unparsed: %zu (missing: %zu)\n", r.unparsed_count, r.missing_count);
    out += buf;
    return out;
}

}  // namespace timeqa::eval
