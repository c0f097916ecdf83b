#include "timeqa/judge/cache.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

#include "timeqa/core/errors.hpp"
#include "timeqa/core/io.hpp"

namespace timeqa::judge {

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
    if (!std::filesystem::exists(path_)) return;
    for (const auto& line : read_lines(path_)) {
        auto j = nlohmann::json::parse(line, nullptr, false);
        // A torn final line from an interrupted write is skipped.
        if (j.is_discarded() || !j.contains("key") || !j.contains("response")) continue;
        entries_[j["key"].get<std::string>()] = j["response"].get<std::string>();
    }
}

std::optional<std::string> ResponseCache::get(const std::string& key) {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    return it->second;
}

void ResponseCache::put(const std::string& key, const std::string& response) {
    std::lock_guard lock(mu_);
    entries_[key] = response;
    if (path_.empty()) return;
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw Error("cannot append to cache " + path_.string());
    out << nlohmann::json{{"key", key}, {"response", response}}.dump() << '\n';
    out.flush();
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

std::size_t ResponseCache::hits() const {
    std::lock_guard lock(mu_);
    return hits_;
}

std::size_t ResponseCache::misses() const {
    std::lock_guard lock(mu_);
    return misses_;
}

}  // namespace timeqa::judge
