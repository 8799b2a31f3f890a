#pragma once
// Prompt templates and substitution.
//
// A template body contains placeholders of the form {name}; doubled braces
// ({{ and }}) encode literal braces so bound text cannot inject spurious
// tokens. Instantiation is a single pass: text introduced by bindings is
// never rescanned, and a binding value may not itself contain a placeholder
// for one of the template's free tokens.
//
// The two built-in templates implement the rationale-then-answer
// classification stages; their bodies are canonical (LF line endings, no
// trailing whitespace) and are pinned byte-for-byte by golden tests.

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ce/errors.hpp"

namespace ce {

using Substitution = std::map<std::string, std::string>;

class PromptTemplate {
public:
    static PromptTemplate parse(std::string body) {
        PromptTemplate t;
        t.body_ = std::move(body);
        std::string text;
        const std::string& b = t.body_;
        for (std::size_t i = 0; i < b.size();) {
            char c = b[i];
            if (c == '{') {
                if (i + 1 < b.size() && b[i + 1] == '{') {
                    text.push_back('{');
                    i += 2;
                    continue;
                }
                std::size_t end = b.find('}', i + 1);
                if (end == std::string::npos)
                    throw ParseError("unterminated placeholder", 1, i + 1);
                std::string name = b.substr(i + 1, end - i - 1);
                if (!valid_token_name(name))
                    throw ParseError("invalid placeholder name: \"" + name + "\"", 1, i + 2);
                if (!text.empty()) {
                    t.segments_.emplace_back(Text{std::move(text)});
                    text.clear();
                }
                t.segments_.emplace_back(Token{name});
                t.free_tokens_.insert(std::move(name));
                i = end + 1;
            } else if (c == '}') {
                if (i + 1 < b.size() && b[i + 1] == '}') {
                    text.push_back('}');
                    i += 2;
                    continue;
                }
                throw ParseError("unescaped '}' outside placeholder", 1, i + 1);
            } else {
                text.push_back(c);
                ++i;
            }
        }
        if (!text.empty()) t.segments_.emplace_back(Text{std::move(text)});
        return t;
    }

    const std::string& body() const { return body_; }
    const std::set<std::string>& free_tokens() const { return free_tokens_; }

    friend std::string instantiate(const PromptTemplate&, const Substitution&,
                                   std::vector<std::string>*);

private:
    struct Text {
        std::string value;
    };
    struct Token {
        std::string name;
    };

    static bool valid_token_name(const std::string& name) {
        if (name.empty()) return false;
        for (std::size_t i = 0; i < name.size(); ++i) {
            char c = name[i];
            bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
            bool digit = (c >= '0' && c <= '9');
            if (!(alpha || (i > 0 && digit))) return false;
        }
        return true;
    }

    std::string body_;
    std::set<std::string> free_tokens_;
    std::vector<std::variant<Text, Token>> segments_;
};

// Replaces every occurrence of each bound placeholder in one pass. Bindings
// must cover all free tokens; bindings for names outside the template are
// reported through `warnings` when provided.
inline std::string instantiate(const PromptTemplate& tmpl, const Substitution& subst,
                               std::vector<std::string>* warnings = nullptr) {
    std::vector<std::string> missing;
    for (const auto& name : tmpl.free_tokens()) {
        if (subst.find(name) == subst.end()) missing.push_back(name);
    }
    if (!missing.empty()) throw UnboundTokenError(std::move(missing));

    for (const auto& [name, value] : subst) {
        if (tmpl.free_tokens().count(name) == 0) {
            if (warnings)
                warnings->push_back("binding {" + name + "} does not match any template token");
            continue;
        }
        for (const auto& other : tmpl.free_tokens()) {
            if (value.find("{" + other + "}") != std::string::npos)
                throw SubstitutionError("binding {" + name + "} contains unexpanded placeholder {" +
                                        other + "}");
        }
    }

    std::string out;
    for (const auto& seg : tmpl.segments_) {
        if (std::holds_alternative<PromptTemplate::Text>(seg))
            out += std::get<PromptTemplate::Text>(seg).value;
        else
            out += subst.at(std::get<PromptTemplate::Token>(seg).name);
    }
    return out;
}

inline constexpr const char* kRationaleTemplateBody =
    "Concept: {concept}\n"
    "Definition: {definition}\n"
    "Entity: {entity}\n"
    "Description: {description}\n"
    "\n"
    "Using the above definition, and only the information in the above definition, provide an "
    "argument for the assertion that {entity} is a(n) {concept}.\n"
    "\n"
    "Rationale:";

inline constexpr const char* kAnswerTemplateBody =
    "Concept: {concept}\n"
    "Definition: {definition}\n"
    "Entity: {entity}\n"
    "Description: {description}\n"
    "Rationale: {rationale}\n"
    "\n"
    "Now using the argument provided in the above rationale, answer the question: is {entity} "
    "a(n) {concept}?\n"
    "Answer 'positive' or 'negative', and only 'positive' or 'negative'. Use lower case. If "
    "there is not enough information to be sure of an answer, answer 'negative'.\n"
    "\n"
    "Answer:";

struct BuiltinTemplates {
    PromptTemplate rationale_generation;
    PromptTemplate answer_generation;
};

inline const BuiltinTemplates& builtin_templates() {
    static const BuiltinTemplates t{PromptTemplate::parse(kRationaleTemplateBody),
                                    PromptTemplate::parse(kAnswerTemplateBody)};
    return t;
}

// Template file format: a "tokens:" front-matter line naming the free tokens
// (comma-separated), followed by the body on the remaining lines.
inline PromptTemplate load_template_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open template file: " + path.string());
    std::string first;
    if (!std::getline(in, first)) throw Error("empty template file: " + path.string());
    if (first.rfind("tokens:", 0) != 0)
        throw ParseError("template file must start with a \"tokens:\" line", 1, 1);

    std::set<std::string> declared;
    std::stringstream names(first.substr(7));
    std::string name;
    while (std::getline(names, name, ',')) {
        auto begin = name.find_first_not_of(" \t");
        auto end = name.find_last_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        declared.insert(name.substr(begin, end - begin + 1));
    }

    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto tmpl = PromptTemplate::parse(body);
    if (tmpl.free_tokens() != declared)
        throw Error("template file " + path.string() +
                    ": declared tokens do not match placeholders in body");
    return tmpl;
}

}  // namespace ce
