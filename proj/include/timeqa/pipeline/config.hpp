#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "timeqa/audit/audit.hpp"
#include "timeqa/debias/debias.hpp"
#include "timeqa/ingest/parse.hpp"
#include "timeqa/judge/judge.hpp"
#include "timeqa/mtp/mtp.hpp"
#include "timeqa/qagen/item.hpp"
#include "timeqa/taskgen/generators.hpp"

namespace timeqa::pipeline {

struct MtpStageConfig {
    std::filesystem::path input;
    mtp::MtpConfig params;
    std::optional<judge::JudgeSpec> gate_judge;
};

struct AuditStageConfig {
    std::vector<judge::JudgeSpec> judges;
    int diagnostic_judge = 0;
    bool shared_frame = true;
    /// Extracted stills for single-frame probes; empty means <stage-dir>/audit/frames.
    std::filesystem::path frames_dir;
};

/// Every tunable of a run. Relative paths resolve against the config file's directory.
struct PipelineConfig {
    std::uint64_t seed = 42;
    std::filesystem::path assets_dir = "assets";
    std::filesystem::path output_dir = "out";
    std::vector<ingest::CorpusSource> corpora;
    ingest::ParseOptions ingest;
    taskgen::TaskgenConfig taskgen;
    qagen::QagenConfig qagen;
    debias::DebiasConfig debias;
    MtpStageConfig mtp;
    AuditStageConfig audit;
    std::filesystem::path predictions;

    /// Normalized JSON of the effective config (paths as written, seed included).
    nlohmann::json normalized;
};

/// Parses a JSON config (comments allowed). Unknown keys and out-of-range
/// values throw ConfigInvalid.
PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// Overrides the seed and keeps `normalized` in sync.
void set_seed(PipelineConfig& cfg, std::uint64_t seed);

/// Throws ConfigInvalid unless at least three judges are configured.
void require_judges(const PipelineConfig& cfg);

/// SHA-256 of the normalized config, or of the seed plus the named sections.
std::string config_hash(const PipelineConfig& cfg);
std::string section_hash(const PipelineConfig& cfg, const std::vector<std::string>& sections);

}  // namespace timeqa::pipeline
