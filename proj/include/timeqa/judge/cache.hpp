#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace timeqa::judge {

/// Append-only response cache, one JSON object per line: {"key":..., "response":...}.
/// Each put is flushed so an interrupted run keeps every completed call.
class ResponseCache {
public:
    ResponseCache() = default;
    explicit ResponseCache(std::filesystem::path path);

    std::optional<std::string> get(const std::string& key);
    void put(const std::string& key, const std::string& response);

    std::size_t size() const;
    std::size_t hits() const;
    std::size_t misses() const;

private:
    std::filesystem::path path_;
    std::map<std::string, std::string> entries_;
    mutable std::mutex mu_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

}  // namespace timeqa::judge
