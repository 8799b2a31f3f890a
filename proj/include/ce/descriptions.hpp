#pragma once
// Entity descriptions: summary-API fetch, on-disk caching, and snapshots.
//
// Descriptions are frozen into a snapshot file (JSON array of EntityRecord)
// at sample time; evaluation reads the snapshot, never the live API. Fetches
// are cached byte-identically, so a warm cache makes every lookup a pure
// function of its inputs.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ce/cache.hpp"
#include "ce/errors.hpp"
#include "ce/net.hpp"
#include "ce/retry.hpp"
#include "ce/util.hpp"

namespace ce {

enum class DescriptionSource { wikipedia_summary, local_file, inline_text };

inline std::string to_string(DescriptionSource s) {
    switch (s) {
        case DescriptionSource::wikipedia_summary: return "wikipedia_summary";
        case DescriptionSource::local_file: return "local_file";
        case DescriptionSource::inline_text: return "inline";
    }
    return "inline";
}

inline DescriptionSource description_source_from_string(const std::string& s) {
    if (s == "wikipedia_summary") return DescriptionSource::wikipedia_summary;
    if (s == "local_file") return DescriptionSource::local_file;
    if (s == "inline") return DescriptionSource::inline_text;
    throw SchemaError("unknown description source \"" + s + "\"", "description_source");
}

struct EntityRecord {
    std::string id;     // entity IRI
    std::string label;  // display name used in prompts
    std::string description;
    DescriptionSource description_source = DescriptionSource::inline_text;
    std::string retrieved_at;

    friend bool operator==(const EntityRecord& a, const EntityRecord& b) {
        return a.id == b.id && a.label == b.label && a.description == b.description &&
               a.description_source == b.description_source && a.retrieved_at == b.retrieved_at;
    }
};

inline void to_json(nlohmann::json& j, const EntityRecord& r) {
    j = nlohmann::json{{"id", r.id},
                       {"label", r.label},
                       {"description", r.description},
                       {"description_source", to_string(r.description_source)},
                       {"retrieved_at", r.retrieved_at}};
}

inline void from_json(const nlohmann::json& j, EntityRecord& r) {
    j.at("id").get_to(r.id);
    j.at("label").get_to(r.label);
    j.at("description").get_to(r.description);
    r.description_source = description_source_from_string(
        j.value("description_source", std::string("inline")));
    r.retrieved_at = j.value("retrieved_at", "");
}

inline std::vector<EntityRecord> read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open snapshot file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SchemaError(std::string("snapshot is not valid JSON: ") + e.what(), path.string());
    }
    if (!j.is_array()) throw SchemaError("snapshot must be a JSON array", path.string());
    std::vector<EntityRecord> out;
    for (const auto& item : j) out.push_back(item.get<EntityRecord>());
    return out;
}

inline void write_snapshot(const std::filesystem::path& path, const std::vector<EntityRecord>& records) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json item;
        to_json(item, r);
        j.push_back(std::move(item));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write snapshot file: " + path.string());
    out << j.dump(2) << "\n";
}

inline std::map<std::string, EntityRecord> snapshot_index(const std::vector<EntityRecord>& records) {
    std::map<std::string, EntityRecord> out;
    for (const auto& r : records) out[r.id] = r;
    return out;
}

struct SummaryApiConfig {
    std::string base_url;  // e.g. https://en.wikipedia.org/api/rest_v1/page/summary
    std::string extract_pointer = "/extract";
    std::string user_agent = "ce/0.1";
    int timeout_sec = 30;
    RetryPolicy retry;
    // entity IRI -> page title, for entities whose title differs from the label
    std::map<std::string, std::string> title_overrides;
};

class DescriptionFetcher {
public:
    explicit DescriptionFetcher(SummaryApiConfig config, CacheStore* cache = nullptr,
                                SleepFn sleep = default_sleep)
        : config_(std::move(config)), cache_(cache), sleep_(std::move(sleep)) {
        if (config_.base_url.empty()) throw ConfigError("summary API base URL is required");
    }

    // Fetches the plain-text summary for an entity. `title_hint` (usually the
    // KG label) is used when no override is configured. Results are cached
    // keyed by entity IRI + source URL; a hit returns the original bytes,
    // including the original retrieved_at.
    EntityRecord fetch(const std::string& entity_iri, const std::string& title_hint) {
        std::string cache_key = "desc:" + config_.base_url + ":" + entity_iri;
        if (cache_) {
            if (auto hit = cache_->get(cache_key)) {
                return nlohmann::json::parse(*hit).get<EntityRecord>();
            }
        }

        std::string title = resolve_title(entity_iri, title_hint);
        std::string body = with_retries(
            config_.retry, [&] { return request_summary(title); }, sleep_);

        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(body);
        } catch (const std::exception& e) {
            throw Error(std::string("malformed summary response: ") + e.what());
        }
        auto pointer = nlohmann::json::json_pointer(config_.extract_pointer);
        if (!parsed.contains(pointer) || !parsed.at(pointer).is_string())
            throw MissingPageError("summary response for " + title + " has no text at " +
                                   config_.extract_pointer);

        EntityRecord record;
        record.id = entity_iri;
        record.label = title_hint.empty() ? title : title_hint;
        record.description = parsed.at(pointer).get<std::string>();
        record.description_source = DescriptionSource::wikipedia_summary;
        record.retrieved_at = iso8601_now();

        if (cache_) {
            nlohmann::json j;
            to_json(j, record);
            cache_->put(cache_key, j.dump());
        }
        return record;
    }

private:
    std::string resolve_title(const std::string& entity_iri, const std::string& title_hint) const {
        if (auto it = config_.title_overrides.find(entity_iri); it != config_.title_overrides.end())
            return it->second;
        if (!title_hint.empty()) return title_hint;
        throw MissingPageError("no page title mapping for " + entity_iri);
    }

    std::string request_summary(const std::string& title) {
        auto url = parse_url(config_.base_url);
        httplib::Client client(url.origin);
        client.set_connection_timeout(config_.timeout_sec, 0);
        client.set_read_timeout(config_.timeout_sec, 0);

        std::string path = url.path;
        if (path.empty() || path.back() != '/') path += '/';
        path += percent_encode(page_title(title));

        httplib::Headers headers{{"User-Agent", config_.user_agent},
                                 {"Accept", "application/json"}};
        auto res = client.Get(path, headers);
        if (!res) throw_for_transport(res.error(), "summary request for " + title);
        if (res->status == 404)
            throw MissingPageError("no page for title \"" + title + "\"");
        if (res->status < 200 || res->status >= 300)
            throw_for_status(res->status, "summary request for " + title, *res);
        return res->body;
    }

    static std::string page_title(const std::string& title) {
        std::string out = title;
        for (char& c : out)
            if (c == ' ') c = '_';
        return out;
    }

    static std::string percent_encode(const std::string& s) {
        static const char* hex = "0123456789ABCDEF";
        std::string out;
        for (unsigned char c : s) {
            bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                              (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' || c == '~';
            if (unreserved) {
                out.push_back(static_cast<char>(c));
            } else {
                out.push_back('%');
                out.push_back(hex[c >> 4]);
                out.push_back(hex[c & 0xf]);
            }
        }
        return out;
    }

    SummaryApiConfig config_;
    CacheStore* cache_;
    SleepFn sleep_;
};

}  // namespace ce
