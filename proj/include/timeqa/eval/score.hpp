#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "timeqa/qagen/item.hpp"

namespace timeqa::eval {

struct PredictionRecord {
    std::string item_id;
    std::string raw_output;
};

/// Reads line-delimited {"item_id", "raw_output"} records.
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

struct DimensionScore {
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t unparsed = 0;
    double accuracy = 0;          // correct / total
    double random_reference = 0;  // mean of 1/option_count
};

struct ScoreReport {
    std::map<Dimension, DimensionScore> per_dimension;
    /// Unweighted mean of the per-dimension accuracies (headline).
    double average = 0;
    /// Item-weighted accuracy over all scored items.
    double overall = 0;
    double random_average = 0;
    std::size_t unparsed_count = 0;
    std::size_t missing_count = 0;
    std::size_t skipped_open_ended = 0;
};

/// Scores multiple-choice predictions. Unparseable or missing replies are
/// incorrect (and counted as unparsed). Throws UnknownItemId.
ScoreReport score(const std::vector<qagen::QAItem>& benchmark, const std::vector<PredictionRecord>& preds);

nlohmann::json to_json(const ScoreReport& r);

/// Fixed-width table in LO DU DY OR RE AVG column order, values in percent.
std::string to_text(const ScoreReport& r);

}  // namespace timeqa::eval
