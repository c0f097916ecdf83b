#pragma once

#include <optional>

#include "timeqa/core/types.hpp"
#include "timeqa/ingest/clip.hpp"

namespace timeqa::taskgen {

struct DirectionParams {
    /// Minimum net displacement (normalized units) along the dominant axis.
    double min_displacement = 0.15;
    /// Largest tolerated fraction of moving steps that go against the net direction.
    double monotonicity_slack = 0.1;
};

/// Movement direction of a track's box centers from first to last box.
///
/// The dominant axis is the one with the larger absolute net displacement
/// (x -> left/right, y -> up/down with y growing downward). Returns nullopt
/// (undecided) when the net displacement is below `min_displacement`, when
/// both axes tie, or when more than `monotonicity_slack` of the non-zero
/// steps along the dominant axis move against the net sign.
/// Throws DegenerateTrack for fewer than two boxes.
std::optional<Direction> classify_direction(const ingest::BBoxTrack& track, const DirectionParams& params = {});

/// The same trajectory played backwards, with frame indices mirrored so they
/// stay strictly increasing.
ingest::BBoxTrack reversed(const ingest::BBoxTrack& track);

}  // namespace timeqa::taskgen
