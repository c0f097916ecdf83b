#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "timeqa/core/edit_manifest.hpp"

namespace timeqa::judge {

enum class Condition { single_frame, blind, full_video };

std::string_view to_string(Condition c) noexcept;
std::optional<Condition> parse_condition(std::string_view s) noexcept;

/// What a multimodal judge is shown alongside the prompt.
struct VisualInput {
    Condition condition = Condition::single_frame;
    /// Frame of the source video (single_frame only).
    FrameRef frame;
    /// Position of that frame in the edited sequence.
    int sequence_index = 0;
    int width = 0;
    int height = 0;
    /// Extracted still for single_frame probes sent over HTTP.
    std::filesystem::path image_path;
};

struct JudgeRequest {
    std::string prompt;
    std::optional<VisualInput> visual;
};

/// One judge endpoint. `complete` returns the raw reply text and throws
/// JudgeUnavailable on transport or server failure.
class Judge {
public:
    explicit Judge(std::string id) : id_(std::move(id)) {}
    virtual ~Judge() = default;
    Judge(const Judge&) = delete;
    Judge& operator=(const Judge&) = delete;

    const std::string& id() const noexcept { return id_; }

    std::string complete(const JudgeRequest& request) {
        ++calls_;
        return do_complete(request);
    }

    /// Requests issued so far, including failed ones.
    std::size_t calls() const noexcept { return calls_.load(); }

protected:
    virtual std::string do_complete(const JudgeRequest& request) = 0;

private:
    std::string id_;
    std::atomic<std::size_t> calls_{0};
};

struct JudgeSpec {
    std::string id;
    /// "http", "stub" (answers a fixed letter) or "stub_gate" (keyword yes/no).
    std::string kind = "http";
    std::string url;
    std::string model;
    /// Environment variable holding the bearer token; empty for none.
    std::string auth_env;
    int max_in_flight = 4;
    int retries = 3;
    double timeout_s = 60;
    std::string stub_letter = "A";
};

std::unique_ptr<Judge> make_judge(const JudgeSpec& spec);

/// Calls the judge up to 1 + retries times. Throws JudgeUnavailable when all attempts fail.
std::string complete_with_retries(Judge& judge, const JudgeRequest& request, int retries);

/// Deterministic stand-in for a multiple-choice judge: always replies with one letter.
class FixedLetterJudge : public Judge {
public:
    FixedLetterJudge(std::string id, std::string letter) : Judge(std::move(id)), letter_(std::move(letter)) {}

protected:
    std::string do_complete(const JudgeRequest&) override { return letter_; }

private:
    std::string letter_;
};

/// Deterministic stand-in for the temporal-content gate: "yes" when the
/// conversation contains an explicit temporal cue word, otherwise "no".
class KeywordGateJudge : public Judge {
public:
    using Judge::Judge;

protected:
    std::string do_complete(const JudgeRequest& request) override;
};

}  // namespace timeqa::judge
