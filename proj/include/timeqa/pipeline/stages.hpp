#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "timeqa/pipeline/config.hpp"

namespace timeqa::pipeline {

enum class Stage { ingest, generate, debias, mtp, audit, evaluate };

inline constexpr std::array<Stage, 6> kAllStages = {Stage::ingest, Stage::generate, Stage::debias,
                                                    Stage::mtp,    Stage::audit,    Stage::evaluate};

std::string_view to_string(Stage s) noexcept;
std::optional<Stage> parse_stage(std::string_view s) noexcept;

struct StageRecord {
    bool complete = false;
    std::string config_hash;
    /// Input path (stage-dir relative when inside it) -> sha256.
    std::map<std::string, std::string> inputs;
    /// Output path relative to the stage dir -> sha256.
    std::map<std::string, std::string> outputs;
    std::map<std::string, std::size_t> counts;
    std::map<std::string, std::size_t> drops;
};

struct RunManifest {
    std::string config_hash;
    std::map<Stage, StageRecord> stages;

    /// Empty manifest when the file does not exist.
    static RunManifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

nlohmann::json to_json(const RunManifest& m);

struct RunOptions {
    std::filesystem::path stage_dir;
    /// Keep judge response caches from an earlier, interrupted run.
    bool resume = false;
    /// Overrides the configured predictions file for the evaluate stage.
    std::filesystem::path predictions;
};

struct StageOutcome {
    StageRecord record;
    bool skipped = false;
    /// Judge requests actually issued.
    std::size_t judge_calls = 0;
    std::size_t cache_hits = 0;
};

/// Runs one stage and records it in <stage-dir>/run_manifest.json.
///
/// A stage recorded complete whose config section, inputs and outputs still
/// hash the same is skipped. An input produced by an earlier stage that no
/// longer matches its recorded hash (or was never produced) throws
/// MissingDependency. Outputs are written atomically.
StageOutcome run_stage(Stage stage, const PipelineConfig& cfg, const RunOptions& opts);

/// Human summary of the run manifest plus the audit and score reports when present.
std::string run_report(const std::filesystem::path& stage_dir);

/// Stage output files, relative to the stage dir.
std::vector<std::string> stage_outputs(Stage stage);

}  // namespace timeqa::pipeline
