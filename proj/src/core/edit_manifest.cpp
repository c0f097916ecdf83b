#include "timeqa/core/edit_manifest.hpp"

#include <algorithm>
#include <cmath>

#include "timeqa/core/errors.hpp"

namespace timeqa {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kTimeEps = 1e-9;

// Replays the manifest, collecting violations instead of throwing.
std::vector<FrameRef> simulate(const EditManifest& m, std::vector<std::string>& errors) {
    std::vector<FrameRef> seq;
    if (m.source_uri.empty()) errors.emplace_back("source_uri: must be non-empty");
    if (!(m.source_duration_s > 0)) errors.emplace_back("source_duration_s: must be > 0");
    if (m.source_frame_count <= 0) errors.emplace_back("source_frame_count: must be > 0");
    if (!errors.empty()) return seq;

    seq.reserve(static_cast<std::size_t>(m.source_frame_count));
    for (int i = 0; i < m.source_frame_count; ++i) seq.push_back({m.source_uri, i});

    const double fps = m.fps();
    int reverses_in_segment = 0;
    for (std::size_t k = 0; k < m.ops.size(); ++k) {
        const std::string where = "op " + std::to_string(k) + " (" + std::string(op_name(m.ops[k])) + ")";
        std::visit(overloaded{
                       [&](const Crop& c) {
                           const double length_s = static_cast<double>(seq.size()) / fps;
                           if (!(c.start_s >= 0) || !(c.end_s <= length_s + kTimeEps) || !(c.start_s < c.end_s)) {
                               errors.push_back(where + ": crop range must satisfy 0 <= start < end <= " +
                                                std::to_string(length_s));
                               return;
                           }
                           auto lo = static_cast<std::size_t>(std::max(0.0, std::ceil(c.start_s * fps - kTimeEps)));
                           auto hi = static_cast<std::size_t>(std::max(0.0, std::ceil(c.end_s * fps - kTimeEps)));
                           hi = std::min(hi, seq.size());
                           if (lo >= hi) {
                               errors.push_back(where + ": crop selects no frames");
                               return;
                           }
                           seq = std::vector<FrameRef>(seq.begin() + static_cast<std::ptrdiff_t>(lo),
                                                       seq.begin() + static_cast<std::ptrdiff_t>(hi));
                       },
                       [&](const Reverse&) {
                           if (++reverses_in_segment > 1) {
                               errors.push_back(where + ": at most one reverse per segment");
                               return;
                           }
                           std::reverse(seq.begin(), seq.end());
                       },
                       [&](const Concat& c) {
                           if (c.other_uri.empty() || c.other_frame_count <= 0) {
                               errors.push_back(where + ": concat needs other_uri and other_frame_count > 0");
                               return;
                           }
                           std::vector<FrameRef> other;
                           other.reserve(static_cast<std::size_t>(c.other_frame_count));
                           for (int i = 0; i < c.other_frame_count; ++i) other.push_back({c.other_uri, i});
                           if (c.position == ConcatPosition::before)
                               seq.insert(seq.begin(), other.begin(), other.end());
                           else
                               seq.insert(seq.end(), other.begin(), other.end());
                           reverses_in_segment = 0;
                       },
                       [&](const ExtractFrame& e) {
                           if (e.index < 0 || static_cast<std::size_t>(e.index) >= seq.size()) {
                               errors.push_back(where + ": frame index out of range");
                               return;
                           }
                           seq = {seq[static_cast<std::size_t>(e.index)]};
                       },
                       [&](const PrependFrame& p) {
                           if (p.index < 0 || static_cast<std::size_t>(p.index) >= seq.size()) {
                               errors.push_back(where + ": frame index out of range");
                               return;
                           }
                           FrameRef f = seq[static_cast<std::size_t>(p.index)];
                           seq.insert(seq.begin(), std::move(f));
                       },
                   },
                   m.ops[k]);
    }
    return seq;
}

}  // namespace

std::string_view op_name(const EditOp& op) noexcept {
    return std::visit(overloaded{
                          [](const Crop&) { return std::string_view("crop"); },
                          [](const Reverse&) { return std::string_view("reverse"); },
                          [](const Concat&) { return std::string_view("concat"); },
                          [](const ExtractFrame&) { return std::string_view("extract_frame"); },
                          [](const PrependFrame&) { return std::string_view("prepend_frame"); },
                      },
                      op);
}

std::vector<std::string> manifest_violations(const EditManifest& m) {
    std::vector<std::string> errors;
    simulate(m, errors);
    return errors;
}

void validate_manifest(const EditManifest& m) {
    auto errors = manifest_violations(m);
    if (!errors.empty()) throw InvalidManifest("edit manifest for " + m.source_uri + ": " + errors.front());
}

std::vector<FrameRef> replay(const EditManifest& m) {
    std::vector<std::string> errors;
    auto seq = simulate(m, errors);
    if (!errors.empty()) throw InvalidManifest("edit manifest for " + m.source_uri + ": " + errors.front());
    return seq;
}

void to_json(nlohmann::json& j, const EditOp& op) {
    j = nlohmann::json::object();
    j["op"] = op_name(op);
    std::visit(overloaded{
                   [&](const Crop& c) {
                       j["start_s"] = c.start_s;
                       j["end_s"] = c.end_s;
                   },
                   [&](const Reverse&) {},
                   [&](const Concat& c) {
                       j["other_uri"] = c.other_uri;
                       j["position"] = c.position == ConcatPosition::before ? "before" : "after";
                       j["other_frame_count"] = c.other_frame_count;
                   },
                   [&](const ExtractFrame& e) { j["index"] = e.index; },
                   [&](const PrependFrame& p) { j["index"] = p.index; },
               },
               op);
}

void from_json(const nlohmann::json& j, EditOp& op) {
    const auto kind = j.at("op").get<std::string>();
    if (kind == "crop") {
        op = Crop{j.at("start_s").get<double>(), j.at("end_s").get<double>()};
    } else if (kind == "reverse") {
        op = Reverse{};
    } else if (kind == "concat") {
        const auto pos = j.at("position").get<std::string>();
        if (pos != "before" && pos != "after") throw UnsupportedOperation("concat position '" + pos + "'");
        op = Concat{j.at("other_uri").get<std::string>(),
                    pos == "before" ? ConcatPosition::before : ConcatPosition::after,
                    j.at("other_frame_count").get<int>()};
    } else if (kind == "extract_frame") {
        op = ExtractFrame{j.at("index").get<int>()};
    } else if (kind == "prepend_frame") {
        op = PrependFrame{j.at("index").get<int>()};
    } else {
        throw UnsupportedOperation("edit operation '" + kind + "'");
    }
}

void to_json(nlohmann::json& j, const EditManifest& m) {
    j = nlohmann::json{{"source_uri", m.source_uri},
                       {"source_duration_s", m.source_duration_s},
                       {"source_frame_count", m.source_frame_count},
                       {"frame_width", m.frame_width},
                       {"frame_height", m.frame_height},
                       {"ops", m.ops}};
}

void from_json(const nlohmann::json& j, EditManifest& m) {
    m.source_uri = j.at("source_uri").get<std::string>();
    m.source_duration_s = j.at("source_duration_s").get<double>();
    m.source_frame_count = j.at("source_frame_count").get<int>();
    m.frame_width = j.value("frame_width", 0);
    m.frame_height = j.value("frame_height", 0);
    m.ops = j.value("ops", std::vector<EditOp>{});
}

}  // namespace timeqa
