#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "timeqa/core/types.hpp"
#include "timeqa/ingest/clip.hpp"
#include "timeqa/qagen/item.hpp"
#include "timeqa/qagen/templates.hpp"

namespace tsupport {

using Point = std::pair<double, double>;

inline std::filesystem::path source_dir() { return TIMEQA_SOURCE_DIR; }

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("timeqa_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

inline timeqa::ingest::BBoxTrack track_of(const std::vector<Point>& pts, const std::string& category = "dog") {
    timeqa::ingest::BBoxTrack t{"o1", category, {}};
    for (std::size_t i = 0; i < pts.size(); ++i)
        t.boxes.push_back({static_cast<int>(i), pts[i].first, pts[i].second, 0.1, 0.1});
    return t;
}

// Brute force over the four unit directions: the direction with the strictly
// largest projection of the net displacement wins, then every step is
// projected on it and the share of backward steps is checked.
inline std::optional<timeqa::Direction> oracle_direction(const std::vector<Point>& pts, double min_disp, double slack) {
    using timeqa::Direction;
    const std::pair<Direction, Point> units[] = {
        {Direction::left, {-1, 0}}, {Direction::right, {1, 0}}, {Direction::up, {0, -1}}, {Direction::down, {0, 1}}};
    const double nx = pts.back().first - pts.front().first;
    const double ny = pts.back().second - pts.front().second;
    auto proj = [](double x, double y, Point u) { return u.first != 0 ? x * u.first : y * u.second; };

    int best = -1;
    double best_p = -1;
    bool tie = false;
    for (int k = 0; k < 4; ++k) {
        const double p = proj(nx, ny, units[k].second);
        if (p > best_p) {
            best = k;
            best_p = p;
            tie = false;
        } else if (p == best_p) {
            tie = true;
        }
    }
    if (best_p < min_disp || tie) return std::nullopt;

    int forward = 0, backward = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double p = proj(pts[i].first - pts[i - 1].first, pts[i].second - pts[i - 1].second, units[best].second);
        if (p > 0) ++forward;
        if (p < 0) ++backward;
    }
    if (backward > slack * (forward + backward)) return std::nullopt;
    return units[best].first;
}

enum class Shape { monotone, jittered, zigzag, subthreshold };

inline std::vector<Point> trajectory(std::mt19937_64& rng, Shape shape) {
    std::uniform_real_distribution<double> u01(0, 1);
    const int n = 2 + static_cast<int>(u01(rng) * 30);
    const double x0 = 0.1 + 0.8 * u01(rng), y0 = 0.1 + 0.8 * u01(rng);
    const double angle = u01(rng) * 2 * M_PI;
    const double len = shape == Shape::subthreshold ? 0.14 * u01(rng) : 0.1 + 0.6 * u01(rng);
    std::vector<Point> pts;
    for (int i = 0; i < n; ++i) {
        const double t = n == 1 ? 0 : static_cast<double>(i) / (n - 1);
        double x = x0 + len * t * std::cos(angle), y = y0 + len * t * std::sin(angle);
        if (shape == Shape::jittered || shape == Shape::subthreshold) {
            x += (u01(rng) - 0.5) * 0.04;
            y += (u01(rng) - 0.5) * 0.04;
        }
        if (shape == Shape::zigzag && i % 2 == 1) {
            x -= len * 0.8 * std::cos(angle) * u01(rng);
            y -= len * 0.8 * std::sin(angle) * u01(rng);
        }
        pts.emplace_back(x, y);
    }
    return pts;
}

/// Multiple-choice item with `options.size()` options and the answer at `correct`.
inline timeqa::qagen::QAItem mc_item(timeqa::Dimension d, const std::string& id, std::vector<std::string> options,
                                     std::size_t correct) {
    timeqa::qagen::QAItem item;
    item.item_id = id;
    item.dimension = d;
    item.format = timeqa::QAFormat::multiple_choice;
    item.stem = "Choose one.\nWhat happens in " + id + "?";
    item.options = std::move(options);
    item.answer = std::string(1, timeqa::letter_for(correct));
    item.answer_text = item.options[correct];
    item.label = item.answer_text;
    item.clip_id = "clip_" + id;
    item.question = timeqa::qagen::render_mc_question(item.stem, item.options);
    return item;
}

inline std::vector<std::string> default_options(timeqa::Dimension d) {
    switch (timeqa::option_count(d)) {
        case 3: return {"first choice", "second choice", "third choice"};
        default: return {"first choice", "second choice", "third choice", "fourth choice"};
    }
}

/// In-memory templates: one question and one instruction per dimension.
inline timeqa::qagen::TemplateLibrary small_templates() {
    using namespace timeqa;
    qagen::TemplateLibrary lib;
    const std::pair<Dimension, std::string> questions[] = {
        {Dimension::dynamic, "Where does the {object} go?"},
        {Dimension::reasoning, "What is the next step to {goal}?"},
        {Dimension::duration, "How long does {activity} last?"},
        {Dimension::location, "When does {activity} occur?"},
        {Dimension::order, "In what order: {actions}?"}};
    for (const auto& [d, q] : questions) {
        lib.set({d, qagen::TemplateKind::question, {q, q + " (variant)"}});
        lib.set({d, qagen::TemplateKind::instruction, {"Pick one option.", "Select the best answer."}});
    }
    return lib;
}

}  // namespace tsupport
