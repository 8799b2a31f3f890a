#pragma once
// Evaluation loop, confusion matrix, and agreement metrics.
//
// Tallying uses standard semantics: a positive example classified positive
// is a TP, classified negative an FN; a negative example classified negative
// is a TN, classified positive an FP.
//
// Metrics: accuracy p_o = (tp+tn)/N; expected agreement
// p_e = [(tp+fp)(tp+fn) + (fn+tn)(fp+tn)] / N^2; kappa = (p_o-p_e)/(1-p_e);
// per-class F1 = 2pr/(p+r); macro F1 = unweighted mean. Degenerate cases are
// flagged, never silently coerced: kappa is reported as no-value when
// p_e = 1, and a class with no true and no predicted members scores F1 = 0
// with a class_absent flag.
//
// Entities whose classification fails persistently are excluded from the
// matrix and recorded as first-class classification errors; a run aborts
// once these exceed a configurable fraction of the sample.

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ce/classifier.hpp"
#include "ce/descriptions.hpp"
#include "ce/errors.hpp"
#include "ce/llm.hpp"
#include "ce/sampler.hpp"
#include "ce/util.hpp"

namespace ce {

struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }

    friend bool operator==(const ConfusionMatrix& a, const ConfusionMatrix& b) {
        return a.tp == b.tp && a.fp == b.fp && a.fn == b.fn && a.tn == b.tn;
    }
};

inline void to_json(nlohmann::json& j, const ConfusionMatrix& m) {
    j = nlohmann::json{{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}};
}

inline void from_json(const nlohmann::json& j, ConfusionMatrix& m) {
    j.at("tp").get_to(m.tp);
    j.at("fp").get_to(m.fp);
    j.at("fn").get_to(m.fn);
    j.at("tn").get_to(m.tn);
}

struct MetricsReport {
    double accuracy = 0.0;
    double precision_positive = 0.0;
    double recall_positive = 0.0;
    double f1_positive = 0.0;
    double f1_negative = 0.0;
    double f1_macro = 0.0;
    std::optional<double> cohen_kappa;        // empty iff kappa_undefined
    std::set<std::string> degenerate_flags;   // "kappa_undefined", "class_absent"

    friend bool operator==(const MetricsReport& a, const MetricsReport& b) {
        return a.accuracy == b.accuracy && a.precision_positive == b.precision_positive &&
               a.recall_positive == b.recall_positive && a.f1_positive == b.f1_positive &&
               a.f1_negative == b.f1_negative && a.f1_macro == b.f1_macro &&
               a.cohen_kappa == b.cohen_kappa && a.degenerate_flags == b.degenerate_flags;
    }
};

inline void to_json(nlohmann::json& j, const MetricsReport& m) {
    j = nlohmann::json{{"accuracy", m.accuracy},
                       {"precision_positive", m.precision_positive},
                       {"recall_positive", m.recall_positive},
                       {"f1_positive", m.f1_positive},
                       {"f1_negative", m.f1_negative},
                       {"f1_macro", m.f1_macro},
                       {"cohen_kappa", m.cohen_kappa ? nlohmann::json(*m.cohen_kappa)
                                                     : nlohmann::json(nullptr)},
                       {"degenerate_flags", m.degenerate_flags}};
}

inline void from_json(const nlohmann::json& j, MetricsReport& m) {
    j.at("accuracy").get_to(m.accuracy);
    j.at("precision_positive").get_to(m.precision_positive);
    j.at("recall_positive").get_to(m.recall_positive);
    j.at("f1_positive").get_to(m.f1_positive);
    j.at("f1_negative").get_to(m.f1_negative);
    j.at("f1_macro").get_to(m.f1_macro);
    if (j.at("cohen_kappa").is_null())
        m.cohen_kappa.reset();
    else
        m.cohen_kappa = j.at("cohen_kappa").get<double>();
    m.degenerate_flags = j.value("degenerate_flags", std::set<std::string>{});
}

inline MetricsReport compute_metrics(const ConfusionMatrix& m) {
    double n = static_cast<double>(m.total());
    if (m.total() < 1) throw Error("confusion matrix is empty (N = 0)");

    auto tp = static_cast<double>(m.tp), fp = static_cast<double>(m.fp);
    auto fn = static_cast<double>(m.fn), tn = static_cast<double>(m.tn);

    MetricsReport report;
    report.accuracy = (tp + tn) / n;

    auto safe_div = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
    report.precision_positive = safe_div(tp, tp + fp);
    report.recall_positive = safe_div(tp, tp + fn);

    auto f1 = [&safe_div](double precision, double recall) {
        return safe_div(2.0 * precision * recall, precision + recall);
    };
    report.f1_positive = f1(report.precision_positive, report.recall_positive);
    double precision_negative = safe_div(tn, tn + fn);
    double recall_negative = safe_div(tn, tn + fp);
    report.f1_negative = f1(precision_negative, recall_negative);
    report.f1_macro = (report.f1_positive + report.f1_negative) / 2.0;

    // class absent: no true members and no predicted members
    if ((tp + fn == 0.0 && tp + fp == 0.0) || (tn + fp == 0.0 && tn + fn == 0.0))
        report.degenerate_flags.insert("class_absent");

    double expected = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (n * n);
    if (expected >= 1.0) {
        report.degenerate_flags.insert("kappa_undefined");
    } else {
        report.cohen_kappa = (report.accuracy - expected) / (1.0 - expected);
    }
    return report;
}

struct ClassificationFailure {
    std::string entity_id;
    bool gold_positive = false;
    std::string reason;

    friend bool operator==(const ClassificationFailure& a, const ClassificationFailure& b) {
        return a.entity_id == b.entity_id && a.gold_positive == b.gold_positive &&
               a.reason == b.reason;
    }
};

inline void to_json(nlohmann::json& j, const ClassificationFailure& f) {
    j = nlohmann::json{
        {"entity_id", f.entity_id}, {"gold_positive", f.gold_positive}, {"reason", f.reason}};
}

inline void from_json(const nlohmann::json& j, ClassificationFailure& f) {
    j.at("entity_id").get_to(f.entity_id);
    j.at("gold_positive").get_to(f.gold_positive);
    j.at("reason").get_to(f.reason);
}

inline void to_json(nlohmann::json& j, const ClassificationOutcome& o) {
    j = nlohmann::json{{"concept_id", o.concept_id},
                       {"entity_id", o.entity_id},
                       {"rationale", o.rationale},
                       {"decision", to_string(o.decision)},
                       {"raw_answer", o.raw_answer},
                       {"parse_attempts", o.parse_attempts},
                       {"model_id", o.params.model_id},
                       {"params",
                        {{"model_id", o.params.model_id},
                         {"temperature", o.params.temperature},
                         {"max_output_tokens", o.params.max_output_tokens},
                         {"extra", o.params.extra}}},
                       {"rationale_prompt_digest", o.rationale_prompt_digest},
                       {"answer_prompt_digest", o.answer_prompt_digest}};
    if (!o.world_digest.empty()) j["world_digest"] = o.world_digest;
}

inline void from_json(const nlohmann::json& j, ClassificationOutcome& o) {
    j.at("concept_id").get_to(o.concept_id);
    j.at("entity_id").get_to(o.entity_id);
    j.at("rationale").get_to(o.rationale);
    o.decision = decision_from_string(j.at("decision").get<std::string>());
    j.at("raw_answer").get_to(o.raw_answer);
    j.at("parse_attempts").get_to(o.parse_attempts);
    const auto& p = j.at("params");
    p.at("model_id").get_to(o.params.model_id);
    p.at("temperature").get_to(o.params.temperature);
    p.at("max_output_tokens").get_to(o.params.max_output_tokens);
    o.params.extra = p.value("extra", std::map<std::string, nlohmann::json>{});
    j.at("rationale_prompt_digest").get_to(o.rationale_prompt_digest);
    j.at("answer_prompt_digest").get_to(o.answer_prompt_digest);
    o.world_digest = j.value("world_digest", "");
}

inline void to_json(nlohmann::json& j, const Selector& s) {
    if (s.kind == Selector::Kind::class_based) {
        j = nlohmann::json{{"kind", "class_based"}, {"class_iri", s.class_iri}};
    } else {
        j = nlohmann::json{{"kind", "property_value"},
                           {"property_iri", s.property_iri},
                           {"value_iris", s.value_iris}};
    }
}

inline void from_json(const nlohmann::json& j, Selector& s) {
    auto kind = j.at("kind").get<std::string>();
    if (kind == "class_based") {
        s = Selector::for_class(j.at("class_iri").get<std::string>());
    } else if (kind == "property_value") {
        s = Selector::for_property(j.at("property_iri").get<std::string>(),
                                   j.at("value_iris").get<std::set<std::string>>());
    } else {
        throw SchemaError("unknown selector kind \"" + kind + "\"", "selector.kind");
    }
}

inline void to_json(nlohmann::json& j, const SampleSet& s) {
    j = nlohmann::json{{"concept_id", s.concept_id},
                       {"positives", s.positives},
                       {"negatives", s.negatives},
                       {"positive_selector", s.positive_selector},
                       {"negative_selector", s.negative_selector},
                       {"requested_n", s.requested_n},
                       {"seed", s.seed},
                       {"generator", s.generator},
                       {"created_at", s.created_at},
                       {"warnings", s.warnings}};
}

inline void from_json(const nlohmann::json& j, SampleSet& s) {
    j.at("concept_id").get_to(s.concept_id);
    j.at("positives").get_to(s.positives);
    j.at("negatives").get_to(s.negatives);
    j.at("positive_selector").get_to(s.positive_selector);
    j.at("negative_selector").get_to(s.negative_selector);
    j.at("requested_n").get_to(s.requested_n);
    j.at("seed").get_to(s.seed);
    s.generator = j.value("generator", "");
    s.created_at = j.value("created_at", "");
    s.warnings = j.value("warnings", std::vector<std::string>{});
}

inline SampleSet read_sample_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open sample file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SchemaError(std::string("sample file is not valid JSON: ") + e.what(), path.string());
    }
    return j.get<SampleSet>();
}

// One classified entity: its record, its gold label, and the outcome.
struct EvaluatedEntity {
    EntityRecord entity;
    bool gold_positive = false;
    ClassificationOutcome outcome;

    friend bool operator==(const EvaluatedEntity& a, const EvaluatedEntity& b) {
        return a.entity == b.entity && a.gold_positive == b.gold_positive &&
               a.outcome == b.outcome;
    }
};

inline void to_json(nlohmann::json& j, const EvaluatedEntity& e) {
    j = nlohmann::json{
        {"entity", e.entity}, {"gold_positive", e.gold_positive}, {"outcome", e.outcome}};
}

inline void from_json(const nlohmann::json& j, EvaluatedEntity& e) {
    j.at("entity").get_to(e.entity);
    j.at("gold_positive").get_to(e.gold_positive);
    j.at("outcome").get_to(e.outcome);
}

inline constexpr int kRunRecordSchemaVersion = 1;

struct RunRecord {
    int schema_version = kRunRecordSchemaVersion;
    ConceptSpec concept_spec;
    SampleSet sample;
    std::vector<EvaluatedEntity> outcomes;           // sample order: positives, then negatives
    std::vector<ClassificationFailure> classification_errors;
    ConfusionMatrix matrix;
    MetricsReport metrics;
    std::uint64_t seed = 0;
    nlohmann::json config_snapshot;
    std::string started_at;
    std::string finished_at;

    friend bool operator==(const RunRecord& a, const RunRecord& b) {
        return a.schema_version == b.schema_version && a.concept_spec == b.concept_spec &&
               a.sample == b.sample && a.outcomes == b.outcomes &&
               a.classification_errors == b.classification_errors && a.matrix == b.matrix &&
               a.metrics == b.metrics && a.seed == b.seed &&
               a.config_snapshot == b.config_snapshot && a.started_at == b.started_at &&
               a.finished_at == b.finished_at;
    }
};

inline void to_json(nlohmann::json& j, const RunRecord& r) {
    j = nlohmann::json{{"schema_version", r.schema_version},
                       {"concept", r.concept_spec},
                       {"sample", r.sample},
                       {"outcomes", r.outcomes},
                       {"classification_errors", r.classification_errors},
                       {"matrix", r.matrix},
                       {"metrics", r.metrics},
                       {"seed", r.seed},
                       {"config_snapshot", r.config_snapshot},
                       {"started_at", r.started_at},
                       {"finished_at", r.finished_at}};
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
    if (!j.contains("schema_version"))
        throw SchemaError("run record missing schema_version", "schema_version");
    j.at("schema_version").get_to(r.schema_version);
    if (r.schema_version != kRunRecordSchemaVersion)
        throw SchemaError("unsupported run record schema version " +
                              std::to_string(r.schema_version),
                          "schema_version");
    j.at("concept").get_to(r.concept_spec);
    j.at("sample").get_to(r.sample);
    j.at("outcomes").get_to(r.outcomes);
    j.at("classification_errors").get_to(r.classification_errors);
    j.at("matrix").get_to(r.matrix);
    j.at("metrics").get_to(r.metrics);
    j.at("seed").get_to(r.seed);
    r.config_snapshot = j.value("config_snapshot", nlohmann::json::object());
    r.started_at = j.value("started_at", "");
    r.finished_at = j.value("finished_at", "");
}

inline RunRecord read_run_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open run file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SchemaError(std::string("run file is not valid JSON: ") + e.what(), path.string());
    }
    return j.get<RunRecord>();
}

inline void write_run_file(const std::filesystem::path& path, const RunRecord& run) {
    nlohmann::json j;
    to_json(j, run);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write run file: " + path.string());
    out << j.dump(2) << "\n";
}

struct EvalOptions {
    double abort_error_fraction = 0.20;  // abort when failures exceed this share of the sample
    int parallelism = 1;
    ClassifyOptions classify;
    nlohmann::json config_snapshot;  // caller-provided provenance, embedded verbatim
};

// Classifies every sampled entity and tallies the confusion matrix. Fatal
// errors (auth, configuration) propagate; other per-entity failures are
// recorded and excluded from the matrix.
inline RunRecord run_evaluation(const SampleSet& sample, const ConceptSpec& concept_spec,
                                const std::map<std::string, EntityRecord>& entities,
                                Backend& backend, const GenerationParams& params,
                                const EvalOptions& options = {}) {
    concept_spec.validate();
    params.validate();

    struct WorkItem {
        std::string entity_id;
        bool gold_positive;
    };
    std::vector<WorkItem> work;
    for (const auto& id : sample.positives) work.push_back({id, true});
    for (const auto& id : sample.negatives) work.push_back({id, false});

    std::vector<std::string> missing;
    for (const auto& item : work) {
        auto it = entities.find(item.entity_id);
        if (it == entities.end() || it->second.description.empty())
            missing.push_back(item.entity_id);
    }
    if (!missing.empty()) {
        std::string msg = "sampled entities lack description records:";
        for (const auto& id : missing) msg += " " + id;
        throw Error(msg);
    }

    RunRecord run;
    run.concept_spec = concept_spec;
    run.sample = sample;
    run.seed = sample.seed;
    run.started_at = iso8601_now();
    run.config_snapshot = nlohmann::json{
        {"backend", backend.name()},
        {"params",
         {{"model_id", params.model_id},
          {"temperature", params.temperature},
          {"max_output_tokens", params.max_output_tokens},
          {"extra", params.extra}}},
        {"abort_error_fraction", options.abort_error_fraction},
        {"parallelism", options.parallelism},
        {"max_answer_reasks", options.classify.max_answer_reasks},
        {"rationale_max_tokens", options.classify.rationale_max_tokens},
        {"answer_max_tokens", options.classify.answer_max_tokens}};
    if (!options.config_snapshot.is_null()) run.config_snapshot["caller"] = options.config_snapshot;

    const std::size_t total = work.size();
    const auto max_failures =
        static_cast<std::size_t>(options.abort_error_fraction * static_cast<double>(total));

    struct Slot {
        std::optional<ClassificationOutcome> outcome;
        std::string failure_reason;
    };
    std::vector<Slot> slots(total);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failures{0};
    std::atomic<bool> aborted{false};
    std::mutex fatal_mutex;
    std::exception_ptr fatal;

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= total || aborted.load()) return;
            const auto& item = work[i];
            const EntityRecord& record = entities.at(item.entity_id);
            try {
                slots[i].outcome =
                    classify(concept_spec, record, backend, params, options.classify);
            } catch (const AuthError&) {
                std::lock_guard<std::mutex> lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                aborted.store(true);
                return;
            } catch (const ConfigError&) {
                std::lock_guard<std::mutex> lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                aborted.store(true);
                return;
            } catch (const std::exception& e) {
                slots[i].failure_reason = e.what();
                if (failures.fetch_add(1) + 1 > max_failures) aborted.store(true);
            }
        }
    };

    int threads = std::max(1, options.parallelism);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    if (fatal) std::rethrow_exception(fatal);
    if (failures.load() > max_failures)
        throw EvalAbortedError("evaluation aborted: " + std::to_string(failures.load()) +
                               " of " + std::to_string(total) +
                               " entities failed classification (threshold " +
                               std::to_string(max_failures) + ")");

    for (std::size_t i = 0; i < total; ++i) {
        const auto& item = work[i];
        if (slots[i].outcome) {
            const auto& outcome = *slots[i].outcome;
            if (item.gold_positive)
                (outcome.decision == Decision::positive) ? ++run.matrix.tp : ++run.matrix.fn;
            else
                (outcome.decision == Decision::negative) ? ++run.matrix.tn : ++run.matrix.fp;
            run.outcomes.push_back({entities.at(item.entity_id), item.gold_positive, outcome});
        } else {
            run.classification_errors.push_back(
                {item.entity_id, item.gold_positive, slots[i].failure_reason});
        }
    }

    run.metrics = compute_metrics(run.matrix);
    run.finished_at = iso8601_now();
    return run;
}

}  // namespace ce
