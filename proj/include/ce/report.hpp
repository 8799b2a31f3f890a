#pragma once
// Report rendering and human error-annotation merging.
//
// Markdown output carries a summary row (concept, definition source, kappa,
// macro F1, FN/FP counts) and an errors table (entity, description,
// rationale). CSV carries the same fields flat, one row per misclassified
// entity, with a fixed column order. JSON is the run record itself, so a
// JSON render round-trips. Rendering never includes timestamps and is
// byte-stable for a given run.
//
// Annotations (cause, unfaithfulness, hallucination) are human judgments:
// merge_annotations attaches them, it never fills them in.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ce/errors.hpp"
#include "ce/eval.hpp"
#include "ce/util.hpp"

namespace ce {

enum class ErrorType { fn, fp };
enum class ErrorCause { kg, llm, unknown };

inline std::string to_string(ErrorType t) { return t == ErrorType::fn ? "FN" : "FP"; }
inline std::string to_string(ErrorCause c) {
    switch (c) {
        case ErrorCause::kg: return "KG";
        case ErrorCause::llm: return "LLM";
        case ErrorCause::unknown: return "unknown";
    }
    return "unknown";
}

inline ErrorType error_type_from_string(const std::string& s) {
    if (s == "FN") return ErrorType::fn;
    if (s == "FP") return ErrorType::fp;
    throw SchemaError("error type must be FN or FP, got \"" + s + "\"", "error_type");
}

inline ErrorCause error_cause_from_string(const std::string& s) {
    if (s == "KG") return ErrorCause::kg;
    if (s == "LLM") return ErrorCause::llm;
    if (s == "unknown") return ErrorCause::unknown;
    throw SchemaError("cause must be KG, LLM, or unknown, got \"" + s + "\"", "cause");
}

struct ErrorAnnotation {
    std::string entity_id;
    ErrorType error_type = ErrorType::fn;
    ErrorCause cause = ErrorCause::unknown;
    bool unfaithful = false;
    bool hallucination = false;
    std::string notes;

    friend bool operator==(const ErrorAnnotation& a, const ErrorAnnotation& b) {
        return a.entity_id == b.entity_id && a.error_type == b.error_type && a.cause == b.cause &&
               a.unfaithful == b.unfaithful && a.hallucination == b.hallucination &&
               a.notes == b.notes;
    }
};

inline void to_json(nlohmann::json& j, const ErrorAnnotation& a) {
    j = nlohmann::json{{"entity_id", a.entity_id}, {"error_type", to_string(a.error_type)},
                       {"cause", to_string(a.cause)}, {"unfaithful", a.unfaithful},
                       {"hallucination", a.hallucination}, {"notes", a.notes}};
}

inline void from_json(const nlohmann::json& j, ErrorAnnotation& a) {
    j.at("entity_id").get_to(a.entity_id);
    a.error_type = error_type_from_string(j.at("error_type").get<std::string>());
    a.cause = error_cause_from_string(j.at("cause").get<std::string>());
    a.unfaithful = j.value("unfaithful", false);
    a.hallucination = j.value("hallucination", false);
    a.notes = j.value("notes", "");
}

inline std::vector<ErrorAnnotation> read_annotations_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open annotations file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SchemaError(std::string("annotations file is not valid JSON: ") + e.what(),
                          path.string());
    }
    if (!j.is_array()) throw SchemaError("annotations file must be a JSON array", path.string());
    std::vector<ErrorAnnotation> out;
    for (const auto& item : j) out.push_back(item.get<ErrorAnnotation>());
    return out;
}

struct AnnotatedRun {
    RunRecord run;
    std::vector<ErrorAnnotation> annotations;
};

// The error type a misclassified outcome actually exhibits, or nothing when
// the outcome agrees with its gold label.
inline std::optional<ErrorType> misclassification_type(const EvaluatedEntity& e) {
    if (e.gold_positive && e.outcome.decision == Decision::negative) return ErrorType::fn;
    if (!e.gold_positive && e.outcome.decision == Decision::positive) return ErrorType::fp;
    return std::nullopt;
}

// Attaches annotations after checking that every annotation points at an
// entity the run actually misclassified, with the matching error type.
// All problems are reported at once.
inline AnnotatedRun merge_annotations(RunRecord run, std::vector<ErrorAnnotation> annotations) {
    std::map<std::string, ErrorType> misclassified;
    for (const auto& e : run.outcomes) {
        if (auto t = misclassification_type(e)) misclassified[e.entity.id] = *t;
    }

    std::vector<std::string> problems;
    for (const auto& a : annotations) {
        auto it = misclassified.find(a.entity_id);
        if (it == misclassified.end()) {
            problems.push_back("annotation references " + a.entity_id +
                               ", which is not a misclassified entity in this run");
        } else if (it->second != a.error_type) {
            problems.push_back("annotation for " + a.entity_id + " says " +
                               to_string(a.error_type) + " but the run tallied it as " +
                               to_string(it->second));
        }
    }
    if (!problems.empty()) throw AnnotationError(std::move(problems));
    return AnnotatedRun{std::move(run), std::move(annotations)};
}

enum class ReportFormat { markdown, csv, json };

inline ReportFormat report_format_from_string(const std::string& s) {
    if (s == "markdown" || s == "md") return ReportFormat::markdown;
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    throw ConfigError("unknown report format \"" + s + "\" (expected markdown, csv, or json)");
}

namespace detail {

inline std::string md_cell(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '|')
            out += "\\|";
        else if (c == '\n' || c == '\r')
            out += ' ';
        else
            out.push_back(c);
    }
    return out;
}

inline std::string csv_field(const std::string& text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

inline std::string kappa_text(const MetricsReport& m) {
    return m.cohen_kappa ? format_fixed(*m.cohen_kappa, 2) : std::string("n/a");
}

inline std::string render_markdown(const RunRecord& run,
                                   const std::vector<ErrorAnnotation>* annotations) {
    const auto& m = run.metrics;
    std::string out;
    out += "# Evaluation report: " + run.concept_spec.label + " (" +
           run.concept_spec.definition_source + ")\n\n";
    out += "| concept | definition | Cohen's kappa | F1 macro | FN | FP |\n";
    out += "| --- | --- | --- | --- | --- | --- |\n";
    out += "| " + md_cell(run.concept_spec.label) + " | " +
           md_cell(run.concept_spec.definition_source) + " | " + kappa_text(m) + " | " +
           format_fixed(m.f1_macro, 2) + " | " + std::to_string(run.matrix.fn) + " | " +
           std::to_string(run.matrix.fp) + " |\n\n";
    out += "N=" + std::to_string(run.matrix.total()) +
           " (positives=" + std::to_string(run.matrix.tp + run.matrix.fn) +
           ", negatives=" + std::to_string(run.matrix.tn + run.matrix.fp) +
           "); classification errors: " + std::to_string(run.classification_errors.size()) +
           ".\n\n";

    out += "## Errors\n\n";
    bool any = false;
    for (const auto& e : run.outcomes) {
        auto t = misclassification_type(e);
        if (!t) continue;
        if (!any) {
            out += "| entity | description | rationale |\n";
            out += "| --- | --- | --- |\n";
            any = true;
        }
        out += "| " + md_cell(e.entity.label) + " | " + md_cell(e.entity.description) + " | " +
               md_cell(e.outcome.rationale) + " |\n";
    }
    if (!any) out += "no errors\n";

    if (annotations && !annotations->empty()) {
        out += "\n## Error analysis\n\n";
        out += "| entity | error | cause | unfaithful | hallucination | notes |\n";
        out += "| --- | --- | --- | --- | --- | --- |\n";
        std::map<std::string, std::string> labels;
        for (const auto& e : run.outcomes) labels[e.entity.id] = e.entity.label;
        for (const auto& a : *annotations) {
            auto label_it = labels.find(a.entity_id);
            std::string label = label_it != labels.end() ? label_it->second : a.entity_id;
            out += "| " + md_cell(label) + " | " + to_string(a.error_type) + " | " +
                   to_string(a.cause) + " | " + (a.unfaithful ? "yes" : "no") + " | " +
                   (a.hallucination ? "yes" : "no") + " | " + md_cell(a.notes) + " |\n";
        }
    }
    return out;
}

inline constexpr const char* kCsvHeader =
    "concept,definition_source,cohen_kappa,f1_macro,fn,fp,n,classification_errors,"
    "entity_id,entity_label,gold,decision,error,cause,unfaithful,hallucination,notes,"
    "description,rationale";

inline std::string render_csv(const RunRecord& run,
                              const std::vector<ErrorAnnotation>* annotations) {
    std::map<std::string, const ErrorAnnotation*> by_entity;
    if (annotations)
        for (const auto& a : *annotations) by_entity[a.entity_id] = &a;

    const auto& m = run.metrics;
    std::string summary = csv_field(run.concept_spec.label) + "," +
                          csv_field(run.concept_spec.definition_source) + "," +
                          csv_field(kappa_text(m)) + "," + csv_field(format_fixed(m.f1_macro, 2)) +
                          "," + csv_field(std::to_string(run.matrix.fn)) + "," +
                          csv_field(std::to_string(run.matrix.fp)) + "," +
                          csv_field(std::to_string(run.matrix.total())) + "," +
                          csv_field(std::to_string(run.classification_errors.size()));

    std::string out = std::string(kCsvHeader) + "\n";
    bool any = false;
    for (const auto& e : run.outcomes) {
        auto t = misclassification_type(e);
        if (!t) continue;
        any = true;
        const ErrorAnnotation* a = nullptr;
        if (auto it = by_entity.find(e.entity.id); it != by_entity.end()) a = it->second;
        out += summary + "," + csv_field(e.entity.id) + "," + csv_field(e.entity.label) + "," +
               csv_field(e.gold_positive ? "positive" : "negative") + "," +
               csv_field(to_string(e.outcome.decision)) + "," + csv_field(to_string(*t)) + "," +
               csv_field(a ? to_string(a->cause) : "") + "," +
               csv_field(a ? (a->unfaithful ? "yes" : "no") : "") + "," +
               csv_field(a ? (a->hallucination ? "yes" : "no") : "") + "," +
               csv_field(a ? a->notes : "") + "," + csv_field(e.entity.description) + "," +
               csv_field(e.outcome.rationale) + "\n";
    }
    if (!any) {
        out += summary + ",\"\",\"\",\"\",\"\",\"\",\"\",\"\",\"\",\"\",\"\",\"\"\n";
    }
    return out;
}

}  // namespace detail

inline std::string render_report(const AnnotatedRun& annotated, ReportFormat format) {
    switch (format) {
        case ReportFormat::markdown:
            return detail::render_markdown(annotated.run, &annotated.annotations);
        case ReportFormat::csv:
            return detail::render_csv(annotated.run, &annotated.annotations);
        case ReportFormat::json: {
            nlohmann::json j;
            to_json(j, annotated.run);
            if (!annotated.annotations.empty()) {
                nlohmann::json arr = nlohmann::json::array();
                for (const auto& a : annotated.annotations) {
                    nlohmann::json item;
                    to_json(item, a);
                    arr.push_back(std::move(item));
                }
                j["annotations"] = std::move(arr);
            }
            return j.dump(2) + "\n";
        }
    }
    throw Error("unknown report format");
}

inline std::string render_report(const RunRecord& run, ReportFormat format) {
    return render_report(AnnotatedRun{run, {}}, format);
}

}  // namespace ce
