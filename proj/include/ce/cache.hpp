#pragma once
// On-disk byte cache keyed by content digest.
//
// Entries are immutable: a hit returns bytes identical to those stored.
// Writes go through a temp file + rename so readers never observe a torn
// entry; per-key mutex shards serialize concurrent writers.

#include <array>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "ce/digest.hpp"
#include "ce/errors.hpp"

namespace ce {

class CacheStore {
public:
    explicit CacheStore(std::filesystem::path root) : root_(std::move(root)) {
        std::filesystem::create_directories(root_);
    }

    const std::filesystem::path& root() const { return root_; }

    bool contains(const std::string& key) const {
        return std::filesystem::exists(path_for(key));
    }

    std::optional<std::string> get(const std::string& key) const {
        auto path = path_for(key);
        std::ifstream in(path, std::ios::binary);
        if (!in) return std::nullopt;
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (!in.good() && !in.eof()) throw Error("cache read failed: " + path.string());
        return bytes;
    }

    void put(const std::string& key, std::string_view bytes) {
        auto path = path_for(key);
        std::lock_guard<std::mutex> lock(shard_for(key));
        std::filesystem::create_directories(path.parent_path());
        auto tmp = path;
        tmp += ".tmp" + std::to_string(counter_.fetch_add(1));
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cache write failed: " + tmp.string());
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!out) throw Error("cache write failed: " + tmp.string());
        }
        std::filesystem::rename(tmp, path);
    }

private:
    std::filesystem::path path_for(const std::string& key) const {
        std::string digest = sha256_hex(key);
        return root_ / digest.substr(0, 2) / (digest + ".bin");
    }

    std::mutex& shard_for(const std::string& key) const {
        return shards_[std::hash<std::string>()(key) % shards_.size()];
    }

    std::filesystem::path root_;
    mutable std::array<std::mutex, 64> shards_;
    std::atomic<std::uint64_t> counter_{0};
};

}  // namespace ce
