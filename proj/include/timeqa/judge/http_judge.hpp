#pragma once

#include <nlohmann/json.hpp>

#include "timeqa/judge/judge.hpp"

namespace timeqa::judge {

/// Chat-completion client (OpenAI-style `/v1/chat/completions` body).
///
/// Text prompts go out as a plain string message; visual probes attach one
/// PNG as a base64 data URL: a black image of the source resolution for the
/// blind condition, or the extracted still at `VisualInput::image_path` for
/// the single-frame condition. The reply is `choices[0].message.content`.
class HttpJudge : public Judge {
public:
    explicit HttpJudge(JudgeSpec spec);

    /// Request body for a probe; exposed for tests.
    nlohmann::json build_body(const JudgeRequest& request) const;

protected:
    std::string do_complete(const JudgeRequest& request) override;

private:
    JudgeSpec spec_;
    std::string origin_;  // scheme://host[:port]
    std::string path_;
};

/// Solid black RGB PNG.
std::string black_png(int width, int height);

}  // namespace timeqa::judge
