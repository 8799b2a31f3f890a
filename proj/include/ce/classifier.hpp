#pragma once
// Two-stage classification procedure.
//
// Stage 1 instantiates the rationale template with the concept's name and
// definition and the entity's name and description, and generates a
// rationale. Stage 2 appends the rationale to the same fields, asks for a
// one-word verdict, and parses it. Unparseable answers re-ask stage 2 (never
// stage 1) a bounded number of times before the entity is reported as a
// classification error.
//
// classify_in_world is the possible-world-conditioned variant: both prompts
// gain a leading World field, and the outcome records the world digest.

#include <nlohmann/json.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "ce/descriptions.hpp"
#include "ce/digest.hpp"
#include "ce/errors.hpp"
#include "ce/llm.hpp"
#include "ce/prompt.hpp"

namespace ce {

struct ConceptSpec {
    std::string id;     // IRI or slug
    std::string label;  // concept name as it appears in prompts
    std::string definition;
    std::string definition_source;  // e.g. "OED", "IAU 2006-08-24"

    void validate() const {
        std::vector<std::string> bad;
        if (label.empty()) bad.push_back("concept label must be non-empty");
        if (definition.empty()) bad.push_back("concept definition must be non-empty");
        if (!bad.empty()) throw ConfigError(bad);
    }

    friend bool operator==(const ConceptSpec& a, const ConceptSpec& b) {
        return a.id == b.id && a.label == b.label && a.definition == b.definition &&
               a.definition_source == b.definition_source;
    }
};

inline void to_json(nlohmann::json& j, const ConceptSpec& c) {
    j = nlohmann::json{{"id", c.id},
                       {"label", c.label},
                       {"definition", c.definition},
                       {"definition_source", c.definition_source}};
}

inline void from_json(const nlohmann::json& j, ConceptSpec& c) {
    j.at("id").get_to(c.id);
    j.at("label").get_to(c.label);
    j.at("definition").get_to(c.definition);
    c.definition_source = j.value("definition_source", "");
}

inline ConceptSpec read_concept_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open concept file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SchemaError(std::string("concept file is not valid JSON: ") + e.what(),
                          path.string());
    }
    auto spec = j.get<ConceptSpec>();
    spec.validate();
    return spec;
}

enum class Decision { positive, negative };

inline std::string to_string(Decision d) {
    return d == Decision::positive ? "positive" : "negative";
}

inline Decision decision_from_string(const std::string& s) {
    if (s == "positive") return Decision::positive;
    if (s == "negative") return Decision::negative;
    throw SchemaError("unknown decision \"" + s + "\"", "decision");
}

// Repeated trim / quote-strip / terminal-punctuation-strip to a fixpoint,
// after ASCII case folding. Idempotent by construction.
inline std::string normalize_answer(const std::string& raw) {
    std::string s = raw;
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    auto is_quote = [](char c) { return c == '"' || c == '\'' || c == '`'; };
    auto is_terminal = [](char c) {
        return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
    };

    bool changed = true;
    while (changed) {
        changed = false;
        std::size_t begin = 0, end = s.size();
        while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
        while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
        if (begin > 0 || end < s.size()) {
            s = s.substr(begin, end - begin);
            changed = true;
        }
        if (s.size() >= 2 && is_quote(s.front()) && is_quote(s.back())) {
            s = s.substr(1, s.size() - 2);
            changed = true;
        }
        if (!s.empty() && is_terminal(s.back())) {
            s.pop_back();
            changed = true;
        }
    }
    return s;
}

// Total: every input maps to positive, negative, or unparseable (nullopt).
// Accepts the exact word or a prefix followed by a word boundary.
inline std::optional<Decision> parse_answer(const std::string& raw) {
    std::string s = normalize_answer(raw);
    auto matches = [&s](const std::string& word) {
        if (s == word) return true;
        if (s.size() > word.size() && s.compare(0, word.size(), word) == 0) {
            char next = s[word.size()];
            return !std::isalnum(static_cast<unsigned char>(next));
        }
        return false;
    };
    if (matches("positive")) return Decision::positive;
    if (matches("negative")) return Decision::negative;
    return std::nullopt;
}

struct ClassificationOutcome {
    std::string concept_id;
    std::string entity_id;
    std::string rationale;
    Decision decision = Decision::negative;
    std::string raw_answer;
    int parse_attempts = 1;
    GenerationParams params;  // base params; per-stage token caps applied on top
    std::string rationale_prompt_digest;
    std::string answer_prompt_digest;
    std::string world_digest;  // empty unless world-conditioned

    friend bool operator==(const ClassificationOutcome& a, const ClassificationOutcome& b) {
        return a.concept_id == b.concept_id && a.entity_id == b.entity_id &&
               a.rationale == b.rationale && a.decision == b.decision &&
               a.raw_answer == b.raw_answer && a.parse_attempts == b.parse_attempts &&
               a.params == b.params && a.rationale_prompt_digest == b.rationale_prompt_digest &&
               a.answer_prompt_digest == b.answer_prompt_digest && a.world_digest == b.world_digest;
    }
};

struct ClassifyOptions {
    int max_answer_reasks = 2;       // R: extra stage-2 asks after the first
    int rationale_max_tokens = 1024;
    int answer_max_tokens = 8;
};

namespace detail {

inline ClassificationOutcome classify_impl(const ConceptSpec& concept_spec, const EntityRecord& entity,
                                           const std::string* world, Backend& backend,
                                           const GenerationParams& params,
                                           const ClassifyOptions& options) {
    concept_spec.validate();
    if (entity.label.empty()) throw Error("entity label must be non-empty");
    if (entity.description.empty())
        throw Error("entity " + entity.id + " has no description; cannot classify");
    if (world && world->empty()) throw Error("world description must be non-empty");

    const auto& builtins = builtin_templates();
    PromptTemplate rationale_template = builtins.rationale_generation;
    PromptTemplate answer_template = builtins.answer_generation;
    if (world) {
        rationale_template =
            PromptTemplate::parse(std::string("World: {world}\n") + kRationaleTemplateBody);
        answer_template =
            PromptTemplate::parse(std::string("World: {world}\n") + kAnswerTemplateBody);
    }

    Substitution stage0{{"concept", concept_spec.label},
                        {"definition", concept_spec.definition},
                        {"entity", entity.label},
                        {"description", entity.description}};
    if (world) stage0["world"] = *world;

    GenerationParams rationale_params = params;
    rationale_params.max_output_tokens = options.rationale_max_tokens;
    GenerationParams answer_params = params;
    answer_params.max_output_tokens = options.answer_max_tokens;

    ClassificationOutcome outcome;
    outcome.concept_id = concept_spec.id;
    outcome.entity_id = entity.id;
    outcome.params = params;
    if (world) outcome.world_digest = sha256_hex(*world);

    std::string rationale_prompt = instantiate(rationale_template, stage0);
    outcome.rationale_prompt_digest = generation_digest(rationale_prompt, rationale_params);
    outcome.rationale = backend.generate(rationale_prompt, rationale_params);

    Substitution stage1 = stage0;
    stage1["rationale"] = outcome.rationale;
    std::string answer_prompt = instantiate(answer_template, stage1);
    outcome.answer_prompt_digest = generation_digest(answer_prompt, answer_params);

    int attempts = 0;
    std::string raw;
    for (;;) {
        ++attempts;
        raw = backend.generate(answer_prompt, answer_params);
        if (auto decision = parse_answer(raw)) {
            outcome.decision = *decision;
            break;
        }
        if (attempts > options.max_answer_reasks)
            throw AnswerUnparseableError(entity.id, attempts, raw);
    }
    outcome.raw_answer = raw;
    outcome.parse_attempts = attempts;
    return outcome;
}

}  // namespace detail

inline ClassificationOutcome classify(const ConceptSpec& concept_spec, const EntityRecord& entity,
                                      Backend& backend, const GenerationParams& params,
                                      const ClassifyOptions& options = {}) {
    return detail::classify_impl(concept_spec, entity, nullptr, backend, params, options);
}

inline ClassificationOutcome classify_in_world(const ConceptSpec& concept_spec,
                                               const EntityRecord& entity,
                                               const std::string& world, Backend& backend,
                                               const GenerationParams& params,
                                               const ClassifyOptions& options = {}) {
    return detail::classify_impl(concept_spec, entity, &world, backend, params, options);
}

}  // namespace ce
