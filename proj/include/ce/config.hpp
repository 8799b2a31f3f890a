#pragma once
// CLI-facing configuration: prefix expansion and the run config file.
//
// Entities are full IRIs internally; Q-id/P-id shorthand and prefixed names
// are resolved through a configurable prefix map (Wikidata defaults). The
// run config is a flat JSON object whose keys mirror the CLI flag names;
// flags override file values, and the effective config is embedded in every
// run record.

#include <nlohmann/json.hpp>

#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "ce/errors.hpp"

namespace ce {

struct PrefixMap {
    std::map<std::string, std::string> prefixes = {
        {"wd", "http://www.wikidata.org/entity/"},
        {"wdt", "http://www.wikidata.org/prop/direct/"},
        {"rdfs", "http://www.w3.org/2000/01/rdf-schema#"},
        {"rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"},
    };
    std::string bare_entity_prefix = "wd";    // bare Q42
    std::string bare_property_prefix = "wdt"; // bare P31

    std::string expand_entity(const std::string& token) const {
        return expand(token, bare_entity_prefix);
    }
    std::string expand_property(const std::string& token) const {
        return expand(token, bare_property_prefix);
    }

private:
    static bool bare_id(const std::string& s) {
        if (s.size() < 2) return false;
        if (s[0] != 'Q' && s[0] != 'P') return false;
        for (std::size_t i = 1; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    }

    std::string expand(const std::string& token, const std::string& bare_prefix) const {
        std::string t = token;
        if (t.size() >= 2 && t.front() == '<' && t.back() == '>') t = t.substr(1, t.size() - 2);
        if (t.find("://") != std::string::npos) return t;
        if (auto colon = t.find(':'); colon != std::string::npos) {
            auto it = prefixes.find(t.substr(0, colon));
            if (it == prefixes.end())
                throw ConfigError("unknown IRI prefix in \"" + token + "\"");
            return it->second + t.substr(colon + 1);
        }
        if (bare_id(t)) {
            auto it = prefixes.find(t[0] == 'Q' ? bare_entity_prefix : bare_property_prefix);
            if (it != prefixes.end()) return it->second + t;
        }
        auto it = prefixes.find(bare_prefix);
        if (it != prefixes.end()) return it->second + t;
        throw ConfigError("cannot resolve \"" + token + "\" to an IRI");
    }
};

// Reads a flat JSON config file and overlays values onto variables that CLI
// flags may then override. Keys use the long flag names without dashes
// converted to underscores (e.g. --parse-retries -> parse_retries).
class ConfigFile {
public:
    ConfigFile() = default;

    explicit ConfigFile(const nlohmann::json& j) {
        if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
        values_ = j;
    }

    bool empty() const { return values_.is_null() || values_.empty(); }
    const nlohmann::json& json() const { return values_; }

    template <typename T>
    void overlay(const std::string& key, T& target) const {
        if (values_.is_object() && values_.contains(key)) {
            try {
                target = values_.at(key).get<T>();
            } catch (const std::exception&) {
                throw ConfigError("config key \"" + key + "\" has the wrong type");
            }
        }
    }

private:
    nlohmann::json values_;
};

}  // namespace ce
