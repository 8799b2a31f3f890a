#pragma once
// SPARQL endpoint client for remote extension computation.
//
// Builds the graph-pattern query equivalent to the in-memory extension
// operations (class-based: instanceOf followed by a subClassOf* path;
// property-value: a VALUES block), pages through results with a hard cap,
// and caches the accumulated IRI set per (endpoint, selector, limit).

#include <nlohmann/json.hpp>

#include <set>
#include <string>

#include "ce/cache.hpp"
#include "ce/errors.hpp"
#include "ce/knowledge_graph.hpp"
#include "ce/net.hpp"
#include "ce/retry.hpp"
#include "ce/sampler.hpp"

namespace ce {

struct SparqlConfig {
    std::string endpoint;  // e.g. https://query.wikidata.org/sparql
    std::string user_agent = "ce/0.1";
    int timeout_sec = 60;
    RetryPolicy retry;
    std::size_t page_size = 1000;
    std::size_t max_results = 10000;  // hard cap across pages
};

class SparqlClient {
public:
    explicit SparqlClient(SparqlConfig config, CacheStore* cache = nullptr,
                          SleepFn sleep = default_sleep)
        : config_(std::move(config)), cache_(cache), sleep_(std::move(sleep)) {
        if (config_.endpoint.empty()) throw ConfigError("SPARQL endpoint URL is required");
        if (config_.page_size < 1) throw ConfigError("SPARQL page size must be >= 1");
    }

    static std::string build_query(const Selector& selector, const GraphConfig& graph,
                                   std::size_t limit, std::size_t offset) {
        std::string where;
        if (selector.kind == Selector::Kind::class_based) {
            where = "?e <" + graph.instance_of_iri + "> ?c . ?c <" + graph.subclass_of_iri +
                    ">* <" + selector.class_iri + "> .";
        } else {
            std::string values;
            for (const auto& v : selector.value_iris) values += " <" + v + ">";
            where = "VALUES ?v {" + values + " } ?e <" + selector.property_iri + "> ?v .";
        }
        return "SELECT DISTINCT ?e WHERE { " + where + " } ORDER BY ?e LIMIT " +
               std::to_string(limit) + " OFFSET " + std::to_string(offset);
    }

    // Entity IRIs satisfying the selector, up to min(limit, max_results).
    std::set<std::string> fetch_extension(const Selector& selector, std::size_t limit = 0) {
        std::size_t cap = limit == 0 ? config_.max_results : std::min(limit, config_.max_results);
        std::string cache_key =
            "sparql:" + config_.endpoint + ":" + selector.canonical() + ":" + std::to_string(cap);
        if (cache_) {
            if (auto hit = cache_->get(cache_key)) {
                auto j = nlohmann::json::parse(*hit);
                return std::set<std::string>(j.begin(), j.end());
            }
        }

        std::set<std::string> out;
        std::size_t offset = 0;
        while (out.size() < cap) {
            std::size_t page = std::min(config_.page_size, cap - out.size());
            std::string query = build_query(selector, graph_config_, page, offset);
            auto rows = with_retries(
                config_.retry, [&] { return run_query(query); }, sleep_);
            out.insert(rows.begin(), rows.end());
            if (rows.size() < page) break;  // exhausted
            offset += rows.size();
        }

        if (cache_) {
            nlohmann::json j(out);
            cache_->put(cache_key, j.dump());
        }
        return out;
    }

    void set_graph_config(GraphConfig g) { graph_config_ = std::move(g); }

private:
    std::vector<std::string> run_query(const std::string& query) {
        auto url = parse_url(config_.endpoint);
        httplib::Client client(url.origin);
        client.set_connection_timeout(config_.timeout_sec, 0);
        client.set_read_timeout(config_.timeout_sec, 0);

        httplib::Headers headers{{"User-Agent", config_.user_agent},
                                 {"Accept", "application/sparql-results+json"}};
        httplib::Params params{{"query", query}};
        auto res = client.Get(url.path, params, headers);
        if (!res) throw_for_transport(res.error(), "SPARQL query");
        if (res->status < 200 || res->status >= 300)
            throw_for_status(res->status, "SPARQL query", *res);

        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(res->body);
        } catch (const std::exception& e) {
            throw Error(std::string("malformed SPARQL results: ") + e.what());
        }
        if (!parsed.contains("results") || !parsed["results"].contains("bindings"))
            throw Error("SPARQL results missing results.bindings");

        std::vector<std::string> out;
        for (const auto& binding : parsed["results"]["bindings"]) {
            if (!binding.contains("e")) continue;
            const auto& e = binding["e"];
            if (e.value("type", "") == "uri") out.push_back(e.value("value", ""));
        }
        return out;
    }

    SparqlConfig config_;
    CacheStore* cache_;
    SleepFn sleep_;
    GraphConfig graph_config_;
};

}  // namespace ce
