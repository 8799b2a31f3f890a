#pragma once
// Text-generation backends.
//
// The language model is a black box behind Backend::generate. Three
// implementations:
//   - HttpBackend: chat-style JSON POST against a hosted inference API, with
//     bounded retries, rate-limit handling, and an in-flight semaphore.
//   - ReplayBackend: answers from a recorded cassette, keyed by a digest of
//     (prompt text, model id, generation params). No network ever.
//   - MockBackend: scripted responses for tests.
// RecordingBackend wraps any of them and appends one GenerationRecord per
// call to a JSON Lines cassette.

#include <nlohmann/json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "ce/digest.hpp"
#include "ce/errors.hpp"
#include "ce/net.hpp"
#include "ce/retry.hpp"
#include "ce/util.hpp"

namespace ce {

struct GenerationParams {
    std::string model_id;
    double temperature = 0.1;
    int max_output_tokens = 1024;
    std::map<std::string, nlohmann::json> extra;  // provider passthrough

    void validate() const {
        std::vector<std::string> bad;
        if (model_id.empty()) bad.push_back("model_id must be non-empty");
        if (temperature < 0.0) bad.push_back("temperature must be >= 0");
        if (max_output_tokens < 1) bad.push_back("max_output_tokens must be >= 1");
        if (!bad.empty()) throw ConfigError(bad);
    }

    friend bool operator==(const GenerationParams& a, const GenerationParams& b) {
        return a.model_id == b.model_id && a.temperature == b.temperature &&
               a.max_output_tokens == b.max_output_tokens && a.extra == b.extra;
    }
};

// Cassette key: a pure function of prompt text, model id, and params.
inline std::string generation_digest(const std::string& prompt, const GenerationParams& params) {
    nlohmann::json payload{{"prompt", prompt},
                           {"model_id", params.model_id},
                           {"temperature", params.temperature},
                           {"max_output_tokens", params.max_output_tokens},
                           {"extra", params.extra}};
    return sha256_hex(payload.dump());
}

struct GenerationRecord {
    std::string prompt_digest;
    std::string prompt_text;
    std::string output_text;
    double latency_ms = 0.0;
    std::string timestamp;
};

inline void to_json(nlohmann::json& j, const GenerationRecord& r) {
    j = nlohmann::json{{"prompt_digest", r.prompt_digest},
                       {"prompt_text", r.prompt_text},
                       {"output_text", r.output_text},
                       {"latency_ms", r.latency_ms},
                       {"timestamp", r.timestamp}};
}

inline void from_json(const nlohmann::json& j, GenerationRecord& r) {
    j.at("prompt_digest").get_to(r.prompt_digest);
    j.at("prompt_text").get_to(r.prompt_text);
    j.at("output_text").get_to(r.output_text);
    r.latency_ms = j.value("latency_ms", 0.0);
    r.timestamp = j.value("timestamp", "");
}

class Backend {
public:
    virtual ~Backend() = default;

    // Returns the continuation for a non-empty prompt.
    virtual std::string generate(const std::string& prompt, const GenerationParams& params) = 0;
    virtual std::string name() const = 0;
};

class MockBackend : public Backend {
public:
    using Script = std::function<std::string(const std::string& prompt, const GenerationParams&)>;

    explicit MockBackend(Script script) : script_(std::move(script)) {}
    explicit MockBackend(std::string fixed_output)
        : script_([text = std::move(fixed_output)](const std::string&, const GenerationParams&) {
              return text;
          }) {}

    std::string generate(const std::string& prompt, const GenerationParams& params) override {
        if (prompt.empty()) throw Error("prompt must be non-empty");
        return script_(prompt, params);
    }
    std::string name() const override { return "mock"; }

private:
    Script script_;
};

class ReplayBackend : public Backend {
public:
    static ReplayBackend load_cassette(std::istream& in) {
        ReplayBackend backend;
        std::string line;
        std::size_t index = 0;
        while (std::getline(in, line)) {
            ++index;
            if (line.empty()) continue;
            GenerationRecord rec;
            try {
                from_json(nlohmann::json::parse(line), rec);
            } catch (const std::exception& e) {
                throw CassetteError(std::string("malformed cassette entry: ") + e.what(), index);
            }
            if (backend.outputs_.count(rec.prompt_digest))
                backend.warnings_.push_back("duplicate digest " + rec.prompt_digest +
                                            " at entry " + std::to_string(index) +
                                            "; last entry wins");
            backend.outputs_[rec.prompt_digest] = rec.output_text;  // last wins
        }
        return backend;
    }

    static ReplayBackend load_cassette(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open cassette: " + path.string());
        return load_cassette(in);
    }

    std::string generate(const std::string& prompt, const GenerationParams& params) override {
        if (prompt.empty()) throw Error("prompt must be non-empty");
        auto digest = generation_digest(prompt, params);
        auto it = outputs_.find(digest);
        if (it == outputs_.end()) throw ReplayMissError(digest);
        return it->second;
    }

    std::string name() const override { return "replay"; }
    std::size_t size() const { return outputs_.size(); }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    std::unordered_map<std::string, std::string> outputs_;
    std::vector<std::string> warnings_;
};

// Appends one record per generate() call; appends are serialized.
class RecordingBackend : public Backend {
public:
    RecordingBackend(std::shared_ptr<Backend> inner, std::filesystem::path sink)
        : inner_(std::move(inner)), sink_(std::move(sink)) {}

    std::string generate(const std::string& prompt, const GenerationParams& params) override {
        auto start = std::chrono::steady_clock::now();
        std::string output = inner_->generate(prompt, params);
        auto elapsed = std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start);

        GenerationRecord rec;
        rec.prompt_digest = generation_digest(prompt, params);
        rec.prompt_text = prompt;
        rec.output_text = output;
        rec.latency_ms = elapsed.count();
        rec.timestamp = iso8601_now();

        nlohmann::json j;
        to_json(j, rec);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            std::ofstream out(sink_, std::ios::app);
            if (!out) throw Error("cannot append to cassette: " + sink_.string());
            out << j.dump() << "\n";
        }
        return output;
    }

    std::string name() const override { return inner_->name() + "+record"; }

private:
    std::shared_ptr<Backend> inner_;
    std::filesystem::path sink_;
    std::mutex mutex_;
};

struct HttpBackendConfig {
    std::string endpoint;  // full URL of the completion/chat route
    std::string api_key;
    int timeout_sec = 60;
    RetryPolicy retry;
    int max_in_flight = 4;
    // Request envelope: {model, messages:[{role:"user", content}], temperature, <max_tokens_field>}
    std::string max_tokens_field = "max_tokens";
    // JSON pointer into the response body for the generated text.
    std::string response_text_pointer = "/choices/0/message/content";
    std::string user_agent = "ce/0.1";
};

inline std::string api_key_from_env(const char* var = "CE_LLM_API_KEY") {
    const char* v = std::getenv(var);
    return v ? v : "";
}

class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config, SleepFn sleep = default_sleep)
        : config_(std::move(config)), sleep_(std::move(sleep)) {
        if (config_.endpoint.empty()) throw ConfigError("http backend requires an endpoint URL");
        if (config_.api_key.empty())
            throw ConfigError(
                "http backend requires an API key (set CE_LLM_API_KEY or pass one explicitly)");
        if (config_.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
        url_ = parse_url(config_.endpoint);
    }

    std::string generate(const std::string& prompt, const GenerationParams& params) override {
        if (prompt.empty()) throw Error("prompt must be non-empty");
        params.validate();
        return with_retries(
            config_.retry, [&] { return attempt(prompt, params); }, sleep_);
    }

    std::string name() const override { return "http"; }

private:
    // RAII slot in the in-flight window.
    struct SlotGuard {
        explicit SlotGuard(HttpBackend& b) : backend(b) { backend.acquire_slot(); }
        ~SlotGuard() { backend.release_slot(); }
        HttpBackend& backend;
    };

    std::string attempt(const std::string& prompt, const GenerationParams& params) {
        SlotGuard slot(*this);

        nlohmann::json body{{"model", params.model_id},
                            {"messages", nlohmann::json::array({nlohmann::json{
                                             {"role", "user"}, {"content", prompt}}})},
                            {"temperature", params.temperature}};
        body[config_.max_tokens_field] = params.max_output_tokens;
        for (const auto& [k, v] : params.extra) body[k] = v;

        httplib::Client client(url_.origin);
        client.set_connection_timeout(config_.timeout_sec, 0);
        client.set_read_timeout(config_.timeout_sec, 0);
        httplib::Headers headers{{"Authorization", "Bearer " + config_.api_key},
                                 {"User-Agent", config_.user_agent}};

        auto res = client.Post(url_.path, headers, body.dump(), "application/json");

        if (!res) throw_for_transport(res.error(), "inference request");
        if (res->status < 200 || res->status >= 300)
            throw_for_status(res->status, "inference request", *res);

        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(res->body);
        } catch (const std::exception& e) {
            throw Error(std::string("malformed inference response: ") + e.what());
        }
        auto pointer = nlohmann::json::json_pointer(config_.response_text_pointer);
        if (!parsed.contains(pointer) || !parsed.at(pointer).is_string())
            throw Error("inference response has no text at " + config_.response_text_pointer);
        return parsed.at(pointer).get<std::string>();
    }

    void acquire_slot() {
        std::unique_lock<std::mutex> lock(slots_mutex_);
        slots_cv_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
        ++in_flight_;
    }

    void release_slot() {
        {
            std::lock_guard<std::mutex> lock(slots_mutex_);
            --in_flight_;
        }
        slots_cv_.notify_one();
    }

    HttpBackendConfig config_;
    SleepFn sleep_;
    ParsedUrl url_;
    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    int in_flight_ = 0;
};

}  // namespace ce
