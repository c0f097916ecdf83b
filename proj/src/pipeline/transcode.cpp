#include "timeqa/pipeline/transcode.hpp"

#include <cstdio>

#include "timeqa/core/errors.hpp"

namespace timeqa::pipeline {

namespace {

std::string seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", s);
    return buf;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string TranscodeStep::to_string() const {
    std::string out = op;
    for (const auto& [k, v] : args) out += " " + k + "=" + v;
    return out;
}

std::vector<TranscodeStep> render_manifest(const EditManifest& m) {
    validate_manifest(m);
    std::vector<TranscodeStep> plan;
    std::string current = m.source_uri;
    bool extracted = false;
    auto next = [&] { return "@" + std::to_string(plan.size() + 1); };

    for (const auto& op : m.ops) {
        if (extracted)
            throw UnsupportedOperation(std::string("'") + std::string(op_name(op)) + "' after extract_frame");
        const auto out = next();
        std::visit(overloaded{
                       [&](const Crop& c) {
                           plan.push_back({"trim", {{"in", current}, {"out", out}, {"start", seconds(c.start_s)},
                                                    {"end", seconds(c.end_s)}}});
                       },
                       [&](const Reverse&) { plan.push_back({"reverse", {{"in", current}, {"out", out}}}); },
                       [&](const Concat& c) {
                           const bool other_first = c.position == ConcatPosition::before;
                           plan.push_back({"concat", {{"first", other_first ? c.other_uri : current},
                                                      {"second", other_first ? current : c.other_uri},
                                                      {"out", out}}});
                       },
                       [&](const ExtractFrame& e) {
                           plan.push_back({"extract", {{"in", current}, {"out", out}, {"index", std::to_string(e.index)}}});
                           extracted = true;
                       },
                       [&](const PrependFrame& p) {
                           plan.push_back({"prepend", {{"in", current}, {"out", out}, {"index", std::to_string(p.index)}}});
                       },
                   },
                   op);
        current = out;
    }
    return plan;
}

std::string plan_text(const std::vector<TranscodeStep>& plan) {
    std::string out;
    for (const auto& s : plan) out += s.to_string() + "\n";
    return out;
}

}  // namespace timeqa::pipeline
