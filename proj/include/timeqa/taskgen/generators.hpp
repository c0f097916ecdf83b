#pragma once

#include <cstdint>
#include <vector>

#include "timeqa/ingest/clip.hpp"
#include "timeqa/taskgen/candidate.hpp"
#include "timeqa/taskgen/direction.hpp"

namespace timeqa::taskgen {

/// Where same-category crowding is counted for the Dynamic filter.
enum class CrowdScope { segment, clip };

struct TaskgenConfig {
    DirectionParams direction;
    /// A segment is dropped when any frame holds more than this many objects of the target's category.
    int max_same_category = 2;
    CrowdScope crowd_scope = CrowdScope::segment;

    int min_steps = 3;
    int max_steps = 15;
    double min_essential_fraction = 0.5;
    /// Split points drawn per retained step sequence.
    int reasoning_splits = 1;

    double min_action_s = 1.0;

    /// Crop Duration/Location videos to a random window around the event and
    /// re-timestamp it before bucketing.
    bool random_crop = false;
};

// Each generator accepts any clips and skips payloads of other kinds.
GenerationResult gen_dynamic(const std::vector<ingest::NormalizedClip>& clips, const TaskgenConfig& cfg);
GenerationResult gen_reasoning(const std::vector<ingest::NormalizedClip>& clips, const TaskgenConfig& cfg,
                               std::uint64_t seed);
GenerationResult gen_duration(const std::vector<ingest::NormalizedClip>& clips, const TaskgenConfig& cfg,
                              std::uint64_t seed);
GenerationResult gen_location(const std::vector<ingest::NormalizedClip>& clips, const TaskgenConfig& cfg,
                              std::uint64_t seed);
GenerationResult gen_order(const std::vector<ingest::NormalizedClip>& clips, const TaskgenConfig& cfg);

/// Runs all five generators and merges their output in canonical order.
GenerationResult generate_all(const std::vector<ingest::NormalizedClip>& clips, const TaskgenConfig& cfg,
                              std::uint64_t seed);

/// Relative-duration bucket: short for r < 1/3, medium for 1/3 <= r < 2/3, long otherwise.
DurationBucket duration_bucket(double relative_duration) noexcept;

/// Third of [0, T] containing t: [0,T/3) start, [T/3,2T/3) middle, [2T/3,T] end.
IntervalBucket interval_of(double t, double total_s) noexcept;

}  // namespace timeqa::taskgen
