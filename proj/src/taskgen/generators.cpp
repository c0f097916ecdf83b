#include "timeqa/taskgen/generators.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "timeqa/core/rng.hpp"

namespace timeqa::taskgen {

using ingest::ActionInterval;
using ingest::BBoxTrack;
using ingest::NormalizedClip;
using ingest::StepSequence;
using ingest::TemporalEvent;

namespace {

void drop(DropCounts& drops, const std::string& reason, const std::string& clip_id) {
    ++drops[reason];
    spdlog::debug("taskgen: drop clip {}: {}", clip_id, reason);
}

EditManifest base_manifest(const NormalizedClip& clip) {
    EditManifest m;
    m.source_uri = clip.video_uri;
    m.source_duration_s = clip.duration_s;
    m.source_frame_count = clip.frame_count;
    m.frame_width = clip.frame_width;
    m.frame_height = clip.frame_height;
    return m;
}

EditManifest crop_manifest(const NormalizedClip& clip, double start_s, double end_s) {
    auto m = base_manifest(clip);
    m.ops.push_back(Crop{start_s, std::min(end_s, clip.duration_s)});
    return m;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// ---- dynamic ----------------------------------------------------------------

BBoxTrack slice(const BBoxTrack& t, std::size_t first, std::size_t last) {
    BBoxTrack out{t.object_id, t.category, {}};
    out.boxes.assign(t.boxes.begin() + static_cast<std::ptrdiff_t>(first),
                     t.boxes.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    return out;
}

// Direction of a single step, or nullopt for a stationary step.
std::optional<Direction> step_direction(const ingest::Box& a, const ingest::Box& b) {
    const double dx = b.x_center - a.x_center, dy = b.y_center - a.y_center;
    if (dx == 0 && dy == 0) return std::nullopt;
    if (std::abs(dx) >= std::abs(dy)) return dx > 0 ? Direction::right : Direction::left;
    return dy > 0 ? Direction::down : Direction::up;
}

struct Window {
    std::size_t first = 0, last = 0;  // box indices, inclusive
    Direction direction = Direction::left;
};

// The whole track when it moves one way; otherwise the decided run of
// same-direction steps with the largest net displacement.
std::optional<Window> unidirectional_window(const BBoxTrack& track, const DirectionParams& params) {
    if (auto d = classify_direction(track, params)) return Window{0, track.boxes.size() - 1, *d};

    std::optional<Window> best;
    double best_disp = -1;
    std::size_t run_start = 0;
    std::optional<Direction> run_dir;
    auto consider = [&](std::size_t first, std::size_t last) {
        if (last <= first) return;
        auto sub = slice(track, first, last);
        auto d = classify_direction(sub, params);
        if (!d) return;
        const double disp = std::max(std::abs(sub.boxes.back().x_center - sub.boxes.front().x_center),
                                     std::abs(sub.boxes.back().y_center - sub.boxes.front().y_center));
        if (disp > best_disp) {
            best_disp = disp;
            best = Window{first, last, *d};
        }
    };
    for (std::size_t i = 1; i < track.boxes.size(); ++i) {
        auto d = step_direction(track.boxes[i - 1], track.boxes[i]);
        if (!d) continue;
        if (run_dir && *d != *run_dir) {
            consider(run_start, i - 1);
            run_start = i - 1;
        }
        run_dir = d;
    }
    consider(run_start, track.boxes.size() - 1);
    return best;
}

}  // namespace

GenerationResult gen_dynamic(const std::vector<NormalizedClip>& clips, const TaskgenConfig& cfg) {
    GenerationResult out;
    for (const auto& clip : clips) {
        const auto* tracks = std::get_if<std::vector<BBoxTrack>>(&clip.payload);
        if (!tracks) continue;

        std::map<std::pair<int, std::string>, int> crowd;  // (frame, category) -> objects
        for (const auto& t : *tracks)
            for (const auto& b : t.boxes) ++crowd[{b.frame_index, t.category}];
        auto crowded = [&](const std::string& category, int from_frame, int to_frame) {
            for (const auto& [key, count] : crowd) {
                if (key.second != category || count <= cfg.max_same_category) continue;
                if (cfg.crowd_scope == CrowdScope::clip) return true;
                if (key.first >= from_frame && key.first <= to_frame) return true;
            }
            return false;
        };

        for (const auto& track : *tracks) {
            if (track.boxes.size() < 2) {
                drop(out.drops, "dynamic: track has fewer than 2 boxes", clip.clip_id);
                continue;
            }
            auto window = unidirectional_window(track, cfg.direction);
            if (!window) {
                drop(out.drops, "dynamic: no unidirectional movement", clip.clip_id);
                continue;
            }
            const int f0 = track.boxes[window->first].frame_index;
            const int f1 = track.boxes[window->last].frame_index;
            if (crowded(track.category, f0, f1)) {
                drop(out.drops, "dynamic: more than " + std::to_string(cfg.max_same_category) +
                                    " objects of the same category in a frame",
                     clip.clip_id);
                continue;
            }
            const double fps = clip.fps();
            LabeledCandidate c;
            c.dimension = Dimension::dynamic;
            c.clip_id = clip.clip_id;
            c.key = "track=" + track.object_id + "|f=" + std::to_string(f0) + "-" + std::to_string(f1);
            c.window_start_s = f0 / fps;
            c.answer = window->direction;
            c.context["object"] = track.category;
            c.edit = crop_manifest(clip, f0 / fps, (f1 + 1) / fps);
            out.candidates.push_back(std::move(c));
        }
    }
    canonical_sort(out.candidates);
    return out;
}

GenerationResult gen_reasoning(const std::vector<NormalizedClip>& clips, const TaskgenConfig& cfg,
                               std::uint64_t seed) {
    GenerationResult out;
    for (const auto& clip : clips) {
        const auto* seq = std::get_if<StepSequence>(&clip.payload);
        if (!seq) continue;
        if (static_cast<int>(seq->steps.size()) < cfg.min_steps) {
            drop(out.drops, "reasoning: fewer than " + std::to_string(cfg.min_steps) + " steps", clip.clip_id);
            continue;
        }
        std::vector<ingest::Step> steps = seq->steps;
        if (static_cast<int>(steps.size()) > cfg.max_steps) {
            steps.resize(static_cast<std::size_t>(cfg.max_steps));
            ++out.drops["reasoning: truncated to " + std::to_string(cfg.max_steps) + " steps (kept)"];
        }
        const auto essential = std::count_if(steps.begin(), steps.end(), [](const auto& s) { return s.is_essential; });
        if (static_cast<double>(essential) < cfg.min_essential_fraction * static_cast<double>(steps.size())) {
            drop(out.drops, "reasoning: essential fraction below threshold", clip.clip_id);
            continue;
        }

        // Split point k = number of observed steps, drawn from [2, len-1].
        const auto len = steps.size();
        const std::size_t choices = len - 2;
        const auto splits = std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg.reasoning_splits, 0)), choices);
        Rng rng(derive_seed(seed, {"taskgen", "reasoning", clip.clip_id}));
        auto picks = rng.sample_indices(choices, splits);
        for (auto pick : picks) {
            const std::size_t k = pick + 2;
            const auto& answer = steps[k];

            LabeledCandidate c;
            c.dimension = Dimension::reasoning;
            c.clip_id = clip.clip_id;
            c.key = "k=" + std::to_string(k);
            c.window_start_s = steps.front().start_s;
            c.answer = NextStep{answer.description};
            c.observed_steps = static_cast<int>(k);
            c.context["goal"] = seq->goal_description;
            std::set<std::string> seen{answer.description};
            for (const auto& s : seq->steps)
                if (seen.insert(s.description).second) c.distractor_pool.push_back(s.description);
            c.edit = crop_manifest(clip, steps.front().start_s, steps[k - 1].end_s);
            out.candidates.push_back(std::move(c));
        }
    }
    canonical_sort(out.candidates);
    return out;
}

DurationBucket duration_bucket(double r) noexcept {
    if (r < 1.0 / 3.0) return DurationBucket::short_span;
    if (r < 2.0 / 3.0) return DurationBucket::medium_span;
    return DurationBucket::long_span;
}

IntervalBucket interval_of(double t, double total_s) noexcept {
    if (t < total_s / 3.0) return IntervalBucket::start;
    if (t < 2.0 * total_s / 3.0) return IntervalBucket::middle;
    return IntervalBucket::end;
}

namespace {

// Event re-timestamped onto an optional random crop window, plus the manifest.
struct Framed {
    double start_s, end_s, total_s;
    EditManifest edit;
};

Framed frame_event(const NormalizedClip& clip, const TemporalEvent& ev, bool random_crop, Rng& rng) {
    if (!random_crop) return {ev.start_s, ev.end_s, ev.video_duration_s, base_manifest(clip)};
    const double a = ev.start_s * rng.uniform01();
    const double b = ev.end_s + (ev.video_duration_s - ev.end_s) * rng.uniform01();
    return {ev.start_s - a, ev.end_s - a, b - a, crop_manifest(clip, a, b)};
}

template <class Label>
GenerationResult gen_events(const std::vector<NormalizedClip>& clips, const TaskgenConfig& cfg, std::uint64_t seed,
                            Dimension dim, Label label) {
    GenerationResult out;
    for (const auto& clip : clips) {
        const auto* events = std::get_if<std::vector<TemporalEvent>>(&clip.payload);
        if (!events) continue;
        for (std::size_t i = 0; i < events->size(); ++i) {
            const auto& ev = (*events)[i];
            Rng rng(derive_seed(seed, {"taskgen", to_string(dim), clip.clip_id, std::to_string(i)}));
            auto framed = frame_event(clip, ev, cfg.random_crop, rng);
            std::optional<AnswerPayload> answer = label(framed);
            if (!answer) {
                drop(out.drops, std::string(to_string(dim)) + ": event straddles an interval boundary", clip.clip_id);
                continue;
            }
            LabeledCandidate c;
            c.dimension = dim;
            c.clip_id = clip.clip_id;
            c.key = "event=" + std::to_string(i);
            c.window_start_s = ev.start_s;
            c.answer = *answer;
            c.context["activity"] = ev.description;
            c.edit = std::move(framed.edit);
            out.candidates.push_back(std::move(c));
        }
    }
    canonical_sort(out.candidates);
    return out;
}

}  // namespace

GenerationResult gen_duration(const std::vector<NormalizedClip>& clips, const TaskgenConfig& cfg, std::uint64_t seed) {
    return gen_events(clips, cfg, seed, Dimension::duration, [](const Framed& f) -> std::optional<AnswerPayload> {
        return duration_bucket((f.end_s - f.start_s) / f.total_s);
    });
}

GenerationResult gen_location(const std::vector<NormalizedClip>& clips, const TaskgenConfig& cfg, std::uint64_t seed) {
    return gen_events(clips, cfg, seed, Dimension::location, [](const Framed& f) -> std::optional<AnswerPayload> {
        auto a = interval_of(f.start_s, f.total_s);
        if (a != interval_of(f.end_s, f.total_s)) return std::nullopt;
        return a;
    });
}

GenerationResult gen_order(const std::vector<NormalizedClip>& clips, const TaskgenConfig& cfg) {
    GenerationResult out;
    for (const auto& clip : clips) {
        const auto* raw = std::get_if<std::vector<ActionInterval>>(&clip.payload);
        if (!raw) continue;
        auto actions = *raw;
        std::stable_sort(actions.begin(), actions.end(), [](const ActionInterval& a, const ActionInterval& b) {
            return std::tie(a.start_s, a.end_s, a.action_label) < std::tie(b.start_s, b.end_s, b.action_label);
        });
        if (actions.size() < 3) {
            drop(out.drops, "order: fewer than 3 actions", clip.clip_id);
            continue;
        }
        for (std::size_t i = 0; i + 2 < actions.size(); ++i) {
            const auto& a = actions[i];
            const auto& b = actions[i + 1];
            const auto& c3 = actions[i + 2];
            if (a.end_s > b.start_s || b.end_s > c3.start_s) {
                drop(out.drops, "order: overlapping actions", clip.clip_id);
                continue;
            }
            if (a.action_label == b.action_label || b.action_label == c3.action_label ||
                a.action_label == c3.action_label) {
                drop(out.drops, "order: duplicate action labels", clip.clip_id);
                continue;
            }
            const bool too_short = std::any_of(&actions[i], &actions[i] + 3, [&](const ActionInterval& x) {
                return x.end_s - x.start_s < cfg.min_action_s;
            });
            if (too_short) {
                drop(out.drops, "order: action shorter than min_action_s", clip.clip_id);
                continue;
            }
            LabeledCandidate c;
            c.dimension = Dimension::order;
            c.clip_id = clip.clip_id;
            c.key = "w=" + std::to_string(i);
            c.window_start_s = a.start_s;
            c.answer = ActionOrder{{a.action_label, b.action_label, c3.action_label}};
            std::vector<std::string> sorted{a.action_label, b.action_label, c3.action_label};
            std::sort(sorted.begin(), sorted.end());
            c.context["actions"] = join(sorted, ", ");
            c.edit = crop_manifest(clip, a.start_s, c3.end_s);
            out.candidates.push_back(std::move(c));
        }
    }
    canonical_sort(out.candidates);
    return out;
}

GenerationResult generate_all(const std::vector<NormalizedClip>& clips, const TaskgenConfig& cfg, std::uint64_t seed) {
    GenerationResult all;
    auto absorb = [&](GenerationResult part) {
        std::move(part.candidates.begin(), part.candidates.end(), std::back_inserter(all.candidates));
        for (auto& [reason, n] : part.drops) all.drops[reason] += n;
    };
    absorb(gen_dynamic(clips, cfg));
    absorb(gen_reasoning(clips, cfg, seed));
    absorb(gen_duration(clips, cfg, seed));
    absorb(gen_location(clips, cfg, seed));
    absorb(gen_order(clips, cfg));
    std::stable_sort(all.candidates.begin(), all.candidates.end(),
                     [](const LabeledCandidate& a, const LabeledCandidate& b) {
                         return std::tie(a.dimension, a.clip_id, a.window_start_s, a.key) <
                                std::tie(b.dimension, b.clip_id, b.window_start_s, b.key);
                     });
    return all;
}

}  // namespace timeqa::taskgen
