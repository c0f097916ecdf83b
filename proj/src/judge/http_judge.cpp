#include "timeqa/judge/http_judge.hpp"

#include <httplib.h>
#include <zlib.h>

#include <cstdlib>

#include "timeqa/core/errors.hpp"
#include "timeqa/core/hash.hpp"
#include "timeqa/core/io.hpp"

namespace timeqa::judge {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v >> 24));
    out.push_back(static_cast<char>(v >> 16));
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v));
}

void put_chunk(std::string& out, const char* type, const std::string& data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    std::string body(type, 4);
    body += data;
    out += body;
    put_u32(out, static_cast<std::uint32_t>(crc32(0, reinterpret_cast<const Bytef*>(body.data()),
                                                  static_cast<uInt>(body.size()))));
}

}  // namespace

std::string black_png(int width, int height) {
    if (width <= 0 || height <= 0) throw Error("black_png: bad size");
    std::string png("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(width));
    put_u32(ihdr, static_cast<std::uint32_t>(height));
    ihdr += std::string("\x08\x02\x00\x00\x00", 5);  // 8-bit RGB, no interlace
    put_chunk(png, "IHDR", ihdr);

    // Each scanline: filter byte 0 followed by zeroed RGB samples.
    std::string raw(static_cast<std::size_t>(height) * (1 + 3 * static_cast<std::size_t>(width)), '\0');
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::string packed(bound, '\0');
    if (compress2(reinterpret_cast<Bytef*>(packed.data()), &bound, reinterpret_cast<const Bytef*>(raw.data()),
                  static_cast<uLong>(raw.size()), Z_BEST_COMPRESSION) != Z_OK)
        throw Error("black_png: deflate failed");
    packed.resize(bound);
    put_chunk(png, "IDAT", packed);
    put_chunk(png, "IEND", "");
    return png;
}

HttpJudge::HttpJudge(JudgeSpec spec) : Judge(spec.id), spec_(std::move(spec)) {
    const auto& url = spec_.url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigInvalid("judge '" + spec_.id + "': url needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    origin_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/v1/chat/completions" : url.substr(path_start);
}

nlohmann::json HttpJudge::build_body(const JudgeRequest& request) const {
    nlohmann::json message{{"role", "user"}};
    if (!request.visual) {
        message["content"] = request.prompt;
    } else {
        const auto& v = *request.visual;
        std::string png;
        switch (v.condition) {
            case Condition::blind:
                png = black_png(v.width > 0 ? v.width : 640, v.height > 0 ? v.height : 360);
                break;
            case Condition::single_frame:
                if (v.image_path.empty() || !std::filesystem::exists(v.image_path))
                    throw MissingDependency("extracted frame not found: " + v.image_path.string() +
                                            " (run the audit frame plan first)");
                png = read_text(v.image_path);
                break;
            case Condition::full_video:
                throw UnsupportedOperation("full-video probes are not sent over the image protocol");
        }
        message["content"] = nlohmann::json::array(
            {{{"type", "text"}, {"text", request.prompt}},
             {{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}}});
    }
    return {{"model", spec_.model}, {"temperature", 0}, {"max_tokens", 64}, {"messages", nlohmann::json::array({message})}};
}

std::string HttpJudge::do_complete(const JudgeRequest& request) {
    httplib::Client client(origin_);
    const auto secs = static_cast<time_t>(spec_.timeout_s);
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);
    httplib::Headers headers;
    if (!spec_.auth_env.empty()) {
        if (const char* token = std::getenv(spec_.auth_env.c_str())) headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    auto res = client.Post(path_, headers, build_body(request).dump(), "application/json");
    if (!res) throw JudgeUnavailable("judge " + id() + ": " + httplib::to_string(res.error()));
    if (res->status != 200) throw JudgeUnavailable("judge " + id() + ": HTTP " + std::to_string(res->status));
    auto body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded()) throw JudgeUnavailable("judge " + id() + ": reply is not JSON");
    try {
        const auto& content = body.at("choices").at(0).at("message").at("content");
        return content.is_string() ? content.get<std::string>() : content.dump();
    } catch (const nlohmann::json::exception&) {
        throw JudgeUnavailable("judge " + id() + ": reply lacks choices[0].message.content");
    }
}

}  // namespace timeqa::judge
