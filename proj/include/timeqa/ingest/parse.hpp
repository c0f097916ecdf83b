#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <vector>

#include "timeqa/ingest/clip.hpp"

namespace timeqa::ingest {

struct ParseOptions {
    /// Frame rate assumed for records that declare neither frame_count nor fps.
    /// 0 means such records are rejected.
    double default_fps = 0;
};

/// Parses one annotation file of the declared schema.
///
/// Accepted layouts: line-delimited records (one JSON object per line), a
/// single JSON array of records, an object with a "clips" array, or one of
/// the corpus-native layouts handled by the thin adapters (see README).
/// Records are returned in input order. Throws SchemaViolation,
/// TemporalInconsistency or EmptyCorpus.
std::vector<NormalizedClip> parse_corpus(SchemaId schema, const std::filesystem::path& path,
                                         const ParseOptions& options = {});

/// Same as parse_corpus, over an in-memory document.
std::vector<NormalizedClip> parse_corpus_text(SchemaId schema, std::string_view text, const ParseOptions& options = {});

struct CorpusSource {
    SchemaId schema;
    std::filesystem::path path;
};

/// Parses several files concurrently and concatenates the results in input order.
std::vector<NormalizedClip> parse_corpora(const std::vector<CorpusSource>& sources, const ParseOptions& options = {});

/// Normalized record form used for stage files (includes a "schema" field).
nlohmann::json clip_to_json(const NormalizedClip& clip);
NormalizedClip clip_from_json(const nlohmann::json& j, std::size_t record_index = 0);

}  // namespace timeqa::ingest
