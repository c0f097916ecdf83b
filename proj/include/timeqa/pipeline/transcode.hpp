#pragma once

#include <string>
#include <utility>
#include <vector>

#include "timeqa/core/edit_manifest.hpp"

namespace timeqa::pipeline {

/// One external transcoder invocation. Intermediate results are named @1, @2, ...
///
/// Text form: `<op> key=value ...`, one step per line. Ops:
///   trim in out start end     keep [start, end) seconds of `in`
///   reverse in out            play `in` backwards
///   concat first second out   `first` followed by `second`
///   extract in out index      the frame at `index` as a still image
///   prepend in out index      copy of frame `index` placed before `in`
struct TranscodeStep {
    std::string op;
    std::vector<std::pair<std::string, std::string>> args;

    std::string to_string() const;
    bool operator==(const TranscodeStep&) const = default;
};

/// Ordered plan realizing the manifest; empty when it has no operations.
/// Throws InvalidManifest, or UnsupportedOperation for any edit after a frame extraction.
std::vector<TranscodeStep> render_manifest(const EditManifest& m);

std::string plan_text(const std::vector<TranscodeStep>& plan);

}  // namespace timeqa::pipeline
