#include "timeqa/taskgen/direction.hpp"

#include <algorithm>
#include <cmath>

#include "timeqa/core/errors.hpp"

namespace timeqa::taskgen {

std::optional<Direction> classify_direction(const ingest::BBoxTrack& track, const DirectionParams& params) {
    const auto& boxes = track.boxes;
    if (boxes.size() < 2)
        throw DegenerateTrack("track '" + track.object_id + "' has " + std::to_string(boxes.size()) +
                              " box(es); direction needs at least 2");

    const double dx = boxes.back().x_center - boxes.front().x_center;
    const double dy = boxes.back().y_center - boxes.front().y_center;
    const double ax = std::abs(dx), ay = std::abs(dy);
    if (std::max(ax, ay) < params.min_displacement) return std::nullopt;
    if (ax == ay) return std::nullopt;

    const bool horizontal = ax > ay;
    const double net = horizontal ? dx : dy;

    std::size_t moving = 0, against = 0;
    for (std::size_t i = 1; i < boxes.size(); ++i) {
        const double step = horizontal ? boxes[i].x_center - boxes[i - 1].x_center
                                       : boxes[i].y_center - boxes[i - 1].y_center;
        if (step == 0) continue;
        ++moving;
        if ((step > 0) != (net > 0)) ++against;
    }
    if (static_cast<double>(against) > params.monotonicity_slack * static_cast<double>(moving)) return std::nullopt;

    if (horizontal) return net > 0 ? Direction::right : Direction::left;
    return net > 0 ? Direction::down : Direction::up;
}

ingest::BBoxTrack reversed(const ingest::BBoxTrack& track) {
    ingest::BBoxTrack out{track.object_id, track.category, {}};
    if (track.boxes.empty()) return out;
    const int mirror = track.boxes.front().frame_index + track.boxes.back().frame_index;
    out.boxes.assign(track.boxes.rbegin(), track.boxes.rend());
    for (auto& b : out.boxes) b.frame_index = mirror - b.frame_index;
    return out;
}

}  // namespace timeqa::taskgen
