// ce: evaluate natural-language concept definitions against knowledge-graph
// ground truth using two-stage LLM classification procedures.
//
// Subcommands mirror the workflow stages: extension (compute a concept's
// members), sample (draw positive/negative examples), classify (one entity),
// evaluate (classify a sample and tally the confusion matrix), report
// (render a run), metrics (matrix in, metrics out). Samples and descriptions
// are frozen to files so a definition can be evaluated repeatedly, offline,
// against the same entities.
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime error,
// 3 evaluation aborted by the classification-error threshold.

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ce/cache.hpp"
#include "ce/classifier.hpp"
#include "ce/config.hpp"
#include "ce/descriptions.hpp"
#include "ce/errors.hpp"
#include "ce/eval.hpp"
#include "ce/knowledge_graph.hpp"
#include "ce/llm.hpp"
#include "ce/ntriples.hpp"
#include "ce/report.hpp"
#include "ce/sampler.hpp"
#include "ce/sparql.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitAborted = 3;

struct GraphFlags {
    std::string kg_file;
    std::string instance_of = ce::GraphConfig{}.instance_of_iri;
    std::string subclass_of = ce::GraphConfig{}.subclass_of_iri;
    std::string label_prop = ce::GraphConfig{}.label_iri;
    bool lenient = false;

    void add_to(CLI::App* cmd, bool kg_required) {
        auto* kg = cmd->add_option("--kg", kg_file, "N-Triples file holding the knowledge graph");
        if (kg_required) kg->required();
        cmd->add_option("--instance-of", instance_of, "instance-of property IRI");
        cmd->add_option("--subclass-of", subclass_of, "subclass-of property IRI");
        cmd->add_option("--label-prop", label_prop, "label property IRI");
        cmd->add_flag("--lenient", lenient, "skip malformed N-Triples lines instead of aborting");
    }

    ce::GraphConfig graph_config() const { return {instance_of, subclass_of, label_prop}; }

    ce::KnowledgeGraph load() const {
        ce::KnowledgeGraph g(graph_config());
        auto parsed = ce::parse_ntriples_file(
            kg_file, lenient ? ce::ParseMode::lenient : ce::ParseMode::strict);
        for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
        if (parsed.skipped_lines > 0)
            std::cerr << "warning: skipped " << parsed.skipped_lines << " malformed line(s)\n";
        g.add_all(parsed.triples);
        return g;
    }
};

struct BackendFlags {
    std::string backend = "replay";
    std::string cassette;
    std::string record;
    std::string mock_response = "negative";
    std::string llm_endpoint;
    std::string model = "gpt-4";
    double temperature = 0.1;
    int rationale_max_tokens = 1024;
    int answer_max_tokens = 8;
    int parse_retries = 2;
    int max_retries = 4;
    int timeout_sec = 60;
    int max_in_flight = 4;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--backend", backend, "generation backend: http, replay, or mock")
            ->check(CLI::IsMember({"http", "replay", "mock"}));
        cmd->add_option("--cassette", cassette, "cassette file for the replay backend (JSON Lines)");
        cmd->add_option("--record", record, "append every generation to this cassette file");
        cmd->add_option("--mock-response", mock_response, "fixed answer of the mock backend");
        cmd->add_option("--llm-endpoint", llm_endpoint, "inference API URL for the http backend");
        cmd->add_option("--model", model, "model identifier");
        cmd->add_option("--temperature", temperature, "sampling temperature");
        cmd->add_option("--rationale-max-tokens", rationale_max_tokens,
                        "token cap for the rationale stage");
        cmd->add_option("--answer-max-tokens", answer_max_tokens, "token cap for the answer stage");
        cmd->add_option("--parse-retries", parse_retries,
                        "stage-2 re-asks allowed for unparseable answers");
        cmd->add_option("--max-retries", max_retries, "HTTP retry attempts");
        cmd->add_option("--timeout", timeout_sec, "HTTP timeout in seconds");
        cmd->add_option("--max-in-flight", max_in_flight, "concurrent request bound");
    }

    ce::GenerationParams params() const {
        ce::GenerationParams p;
        p.model_id = model;
        p.temperature = temperature;
        return p;
    }

    ce::ClassifyOptions classify_options() const {
        ce::ClassifyOptions o;
        o.max_answer_reasks = parse_retries;
        o.rationale_max_tokens = rationale_max_tokens;
        o.answer_max_tokens = answer_max_tokens;
        return o;
    }

    std::shared_ptr<ce::Backend> make_backend() const {
        std::shared_ptr<ce::Backend> inner;
        if (backend == "replay") {
            if (cassette.empty())
                throw ce::ConfigError("--cassette is required with the replay backend");
            auto replay =
                std::make_shared<ce::ReplayBackend>(ce::ReplayBackend::load_cassette(cassette));
            for (const auto& w : replay->warnings()) std::cerr << "warning: " << w << "\n";
            inner = replay;
        } else if (backend == "mock") {
            std::string response = mock_response;
            inner = std::make_shared<ce::MockBackend>(
                [response](const std::string& prompt, const ce::GenerationParams&) {
                    if (prompt.ends_with("Answer:")) return response;
                    return std::string("Mock rationale: no live model was queried.");
                });
        } else {
            ce::HttpBackendConfig cfg;
            cfg.endpoint = llm_endpoint;
            cfg.api_key = ce::api_key_from_env();
            cfg.timeout_sec = timeout_sec;
            cfg.retry.max_attempts = max_retries;
            cfg.max_in_flight = max_in_flight;
            if (cfg.endpoint.empty())
                throw ce::ConfigError("--llm-endpoint is required with the http backend");
            if (cfg.api_key.empty())
                throw ce::ConfigError(
                    "the http backend needs an API key: set the CE_LLM_API_KEY environment "
                    "variable");
            inner = std::make_shared<ce::HttpBackend>(std::move(cfg));
        }
        if (!record.empty()) return std::make_shared<ce::RecordingBackend>(inner, record);
        return inner;
    }

    nlohmann::json snapshot() const {
        return {{"backend", backend},
                {"cassette", cassette},
                {"record", record},
                {"llm_endpoint", llm_endpoint},
                {"model", model},
                {"temperature", temperature},
                {"rationale_max_tokens", rationale_max_tokens},
                {"answer_max_tokens", answer_max_tokens},
                {"parse_retries", parse_retries},
                {"max_retries", max_retries},
                {"timeout", timeout_sec},
                {"max_in_flight", max_in_flight}};
    }
};

struct SelectorFlags {
    std::string class_iri;
    std::string property_iri;
    std::vector<std::string> values;

    void add_to(CLI::App* cmd, const std::string& side) {
        cmd->add_option("--" + side + "-class", class_iri,
                        side + " pool: class whose extension is sampled");
        cmd->add_option("--" + side + "-property", property_iri,
                        side + " pool: property for a property-value selector");
        cmd->add_option("--" + side + "-values", values,
                        side + " pool: comma-separated property values")
            ->delimiter(',');
    }

    ce::Selector build(const ce::PrefixMap& prefixes, const std::string& side,
                       std::vector<std::string>& violations) const {
        bool has_class = !class_iri.empty();
        bool has_property = !property_iri.empty() || !values.empty();
        if (has_class == has_property) {
            violations.push_back("specify exactly one of --" + side + "-class or --" + side +
                                 "-property/--" + side + "-values");
            return ce::Selector::for_class("http://invalid/");
        }
        if (has_class) return ce::Selector::for_class(prefixes.expand_entity(class_iri));
        if (property_iri.empty() || values.empty()) {
            violations.push_back("--" + side + "-property and --" + side +
                                 "-values must be given together");
            return ce::Selector::for_class("http://invalid/");
        }
        std::set<std::string> expanded;
        for (const auto& v : values) expanded.insert(prefixes.expand_entity(v));
        return ce::Selector::for_property(prefixes.expand_property(property_iri), expanded);
    }
};

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw ce::Error("cannot write " + path);
    out << text;
}

std::map<std::string, ce::EntityRecord> load_descriptions(const std::string& path) {
    return ce::snapshot_index(ce::read_snapshot(path));
}

// ---------------------------------------------------------------------------
// extension

struct ExtensionArgs {
    GraphFlags graph;
    std::string concept_token;
    std::string format = "text";
    ce::PrefixMap prefixes;
};

int run_extension(const ExtensionArgs& args) {
    auto g = args.graph.load();
    auto concept_iri = args.prefixes.expand_entity(args.concept_token);
    auto result = g.extension(concept_iri);
    if (result.cycle_detected)
        std::cerr << "warning: subclass cycle detected below " << concept_iri << "\n";
    if (args.format == "json") {
        nlohmann::json j(result.members);
        std::cout << j.dump(2) << "\n";
    } else {
        for (const auto& iri : result.members) std::cout << iri << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sample

struct SampleArgs {
    GraphFlags graph;
    SelectorFlags positive;
    SelectorFlags negative;
    std::string endpoint;
    std::size_t n = 50;
    std::uint64_t seed = 0;
    std::string descriptions_file;
    bool fetch_descriptions = false;
    std::string wiki_base;
    std::string title_map_file;
    std::string snapshot_out;
    std::string cache_dir = ".ce-cache";
    std::size_t pool_cap = 10000;
    std::string out;
    ce::PrefixMap prefixes;
};

std::set<std::string> local_pool(const ce::KnowledgeGraph& g, const ce::Selector& s) {
    if (s.kind == ce::Selector::Kind::class_based) return g.extension(s.class_iri).members;
    return g.property_value_extension(s.property_iri, s.value_iris);
}

int run_sample(const SampleArgs& args) {
    std::vector<std::string> violations;
    bool local = !args.graph.kg_file.empty();
    bool remote = !args.endpoint.empty();
    if (local == remote) violations.push_back("specify exactly one of --kg or --endpoint");
    if (args.n < 1) violations.push_back("-n must be at least 1");
    if (args.out.empty()) violations.push_back("--out is required");
    if (args.fetch_descriptions && args.wiki_base.empty())
        violations.push_back("--fetch-descriptions requires --wiki-base");
    auto positive = args.positive.build(args.prefixes, "positive", violations);
    auto negative = args.negative.build(args.prefixes, "negative", violations);
    if (!violations.empty()) throw ce::ConfigError(violations);

    std::set<std::string> positive_pool;
    std::set<std::string> negative_pool;
    std::optional<ce::KnowledgeGraph> graph;
    if (local) {
        graph = args.graph.load();
        positive_pool = local_pool(*graph, positive);
        negative_pool = local_pool(*graph, negative);
    } else {
        ce::CacheStore cache(args.cache_dir);
        ce::SparqlConfig cfg;
        cfg.endpoint = args.endpoint;
        cfg.max_results = args.pool_cap;
        ce::SparqlClient client(cfg, &cache);
        client.set_graph_config(args.graph.graph_config());
        positive_pool = client.fetch_extension(positive, args.pool_cap);
        negative_pool = client.fetch_extension(negative, args.pool_cap);
    }

    // Freeze descriptions and exclude entities lacking one *before* sampling,
    // so sample counts refer to classifiable entities.
    std::map<std::string, ce::EntityRecord> records;
    bool filter = false;
    if (!args.descriptions_file.empty()) {
        records = load_descriptions(args.descriptions_file);
        filter = true;
    } else if (args.fetch_descriptions) {
        ce::SummaryApiConfig cfg;
        cfg.base_url = args.wiki_base;
        if (!args.title_map_file.empty()) {
            std::ifstream in(args.title_map_file);
            if (!in) throw ce::Error("cannot open title map: " + args.title_map_file);
            nlohmann::json j;
            in >> j;
            for (auto& [iri, title] : j.items())
                cfg.title_overrides[iri] = title.get<std::string>();
        }
        ce::CacheStore cache(args.cache_dir);
        ce::DescriptionFetcher fetcher(cfg, &cache);
        auto fetch_pool = [&](const std::set<std::string>& pool) {
            for (const auto& iri : pool) {
                if (records.count(iri)) continue;
                std::string hint;
                if (graph) {
                    auto label = graph->label_of(iri, "en");
                    if (!label.fallback) hint = label.text;
                }
                try {
                    records[iri] = fetcher.fetch(iri, hint);
                } catch (const ce::MissingPageError& e) {
                    std::cerr << "excluded " << iri << ": " << e.what() << "\n";
                }
            }
        };
        fetch_pool(positive_pool);
        fetch_pool(negative_pool);
        filter = true;
    }

    if (filter) {
        auto keep_described = [&](std::set<std::string>& pool) {
            for (auto it = pool.begin(); it != pool.end();) {
                auto rec = records.find(*it);
                if (rec == records.end() || rec->second.description.empty()) {
                    std::cerr << "excluded " << *it << ": no description\n";
                    it = pool.erase(it);
                } else {
                    ++it;
                }
            }
        };
        keep_described(positive_pool);
        keep_described(negative_pool);
    }

    auto sample = ce::draw_samples(positive_pool, negative_pool, args.n, args.seed);
    sample.concept_id = positive.kind == ce::Selector::Kind::class_based ? positive.class_iri
                                                                         : positive.canonical();
    sample.positive_selector = positive;
    sample.negative_selector = negative;
    for (const auto& w : sample.warnings) std::cerr << "warning: " << w << "\n";

    nlohmann::json j;
    ce::to_json(j, sample);
    write_text_file(args.out, j.dump(2) + "\n");

    if (!args.snapshot_out.empty()) {
        std::vector<ce::EntityRecord> drawn;
        for (const auto& id : sample.positives) drawn.push_back(records.at(id));
        for (const auto& id : sample.negatives) drawn.push_back(records.at(id));
        ce::write_snapshot(args.snapshot_out, drawn);
    }
    std::cerr << "sampled " << sample.positives.size() << " positives, "
              << sample.negatives.size() << " negatives -> " << args.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyArgs {
    std::string definition_file;
    std::string entity_token;
    std::string entity_label;
    std::string description_text;
    std::string descriptions_file;
    std::string world_text;
    std::string world_file;
    BackendFlags backend;
    ce::PrefixMap prefixes;
};

int run_classify(const ClassifyArgs& args) {
    std::vector<std::string> violations;
    if (args.definition_file.empty()) violations.push_back("--definition is required");
    if (args.entity_token.empty()) violations.push_back("--entity is required");
    if (args.descriptions_file.empty() && args.description_text.empty())
        violations.push_back("provide --descriptions or an inline --description");
    if (!violations.empty()) throw ce::ConfigError(violations);

    auto concept_spec = ce::read_concept_file(args.definition_file);
    auto entity_iri = args.prefixes.expand_entity(args.entity_token);

    ce::EntityRecord record;
    if (!args.descriptions_file.empty()) {
        auto records = load_descriptions(args.descriptions_file);
        auto it = records.find(entity_iri);
        if (it == records.end())
            throw ce::Error("entity " + entity_iri + " not found in " + args.descriptions_file);
        record = it->second;
    } else {
        record.id = entity_iri;
        record.label = args.entity_label.empty() ? ce::iri_local_name(entity_iri)
                                                 : args.entity_label;
        record.description = args.description_text;
        record.description_source = ce::DescriptionSource::inline_text;
    }

    std::string world = args.world_text;
    if (!args.world_file.empty()) {
        std::ifstream in(args.world_file);
        if (!in) throw ce::Error("cannot open world file: " + args.world_file);
        world.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }

    auto backend = args.backend.make_backend();
    auto outcome = world.empty()
                       ? ce::classify(concept_spec, record, *backend, args.backend.params(),
                                      args.backend.classify_options())
                       : ce::classify_in_world(concept_spec, record, world, *backend,
                                               args.backend.params(),
                                               args.backend.classify_options());

    std::cout << "Rationale:\n" << outcome.rationale << "\n\n";
    std::cout << "Decision: " << ce::to_string(outcome.decision) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string sample_file;
    std::string definition_file;
    std::string descriptions_file;
    std::string out;
    double abort_threshold = 0.20;
    int parallelism = 1;
    BackendFlags backend;
};

int run_evaluate(const EvaluateArgs& args) {
    std::vector<std::string> violations;
    if (args.sample_file.empty()) violations.push_back("--sample is required");
    if (args.definition_file.empty()) violations.push_back("--definition is required");
    if (args.descriptions_file.empty()) violations.push_back("--descriptions is required");
    if (args.out.empty()) violations.push_back("--out is required");
    if (args.parallelism < 1) violations.push_back("--parallelism must be at least 1");
    if (args.abort_threshold < 0.0 || args.abort_threshold > 1.0)
        violations.push_back("--abort-threshold must be in [0, 1]");
    if (!violations.empty()) throw ce::ConfigError(violations);

    auto sample = ce::read_sample_file(args.sample_file);
    auto concept_spec = ce::read_concept_file(args.definition_file);
    auto records = load_descriptions(args.descriptions_file);
    auto backend = args.backend.make_backend();

    ce::EvalOptions options;
    options.abort_error_fraction = args.abort_threshold;
    options.parallelism = args.parallelism;
    options.classify = args.backend.classify_options();
    options.config_snapshot = {{"sample", args.sample_file},
                               {"definition", args.definition_file},
                               {"descriptions", args.descriptions_file},
                               {"out", args.out},
                               {"abort_threshold", args.abort_threshold},
                               {"parallelism", args.parallelism}};
    for (auto& [k, v] : args.backend.snapshot().items()) options.config_snapshot[k] = v;

    auto run = ce::run_evaluation(sample, concept_spec, records, *backend,
                                  args.backend.params(), options);
    ce::write_run_file(args.out, run);

    std::cerr << "matrix: tp=" << run.matrix.tp << " fn=" << run.matrix.fn
              << " tn=" << run.matrix.tn << " fp=" << run.matrix.fp;
    if (run.metrics.cohen_kappa)
        std::cerr << ", kappa=" << ce::format_fixed(*run.metrics.cohen_kappa, 2);
    std::cerr << " -> " << args.out << "\n";
    if (!run.classification_errors.empty())
        std::cerr << run.classification_errors.size()
                  << " entity(ies) failed classification; see the run record\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
    std::string run_file;
    std::string format = "markdown";
    std::string annotations_file;
    std::string out;
};

int run_report(const ReportArgs& args) {
    std::vector<std::string> violations;
    if (args.run_file.empty()) violations.push_back("--run is required");
    if (!violations.empty()) throw ce::ConfigError(violations);

    auto run = ce::read_run_file(args.run_file);
    auto format = ce::report_format_from_string(args.format);

    std::string rendered;
    if (!args.annotations_file.empty()) {
        auto annotations = ce::read_annotations_file(args.annotations_file);
        rendered = ce::render_report(ce::merge_annotations(std::move(run), std::move(annotations)),
                                     format);
    } else {
        rendered = ce::render_report(run, format);
    }

    if (args.out.empty())
        std::cout << rendered;
    else
        write_text_file(args.out, rendered);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::string format = "json";
};

int run_metrics(const MetricsArgs& args) {
    ce::ConfusionMatrix m{args.tp, args.fp, args.fn, args.tn};
    auto report = ce::compute_metrics(m);
    if (args.format == "text") {
        std::cout << "accuracy           " << ce::format_fixed(report.accuracy, 4) << "\n"
                  << "precision_positive " << ce::format_fixed(report.precision_positive, 4) << "\n"
                  << "recall_positive    " << ce::format_fixed(report.recall_positive, 4) << "\n"
                  << "f1_positive        " << ce::format_fixed(report.f1_positive, 4) << "\n"
                  << "f1_negative        " << ce::format_fixed(report.f1_negative, 4) << "\n"
                  << "f1_macro           " << ce::format_fixed(report.f1_macro, 4) << "\n"
                  << "cohen_kappa        "
                  << (report.cohen_kappa ? ce::format_fixed(*report.cohen_kappa, 4) : "n/a")
                  << "\n";
        for (const auto& flag : report.degenerate_flags)
            std::cout << "flag               " << flag << "\n";
    } else {
        nlohmann::json j;
        ce::to_json(j, report);
        std::cout << j.dump(2) << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

// Overlays config-file values onto options the user did not pass on the
// command line (flags win).
class ConfigOverlay {
public:
    void note(CLI::Option* opt, const std::function<void(const ce::ConfigFile&)>& apply) {
        entries_.push_back({opt, apply});
    }

    void apply(const ce::ConfigFile& cfg) const {
        if (cfg.empty()) return;
        for (const auto& [opt, apply] : entries_) {
            if (opt->count() == 0) apply(cfg);
        }
    }

private:
    std::vector<std::pair<CLI::Option*, std::function<void(const ce::ConfigFile&)>>> entries_;
};

ce::ConfigFile load_config_file(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw ce::ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ce::ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    return ce::ConfigFile(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Classify entities against natural-language concept definitions with a two-stage LLM "
        "pipeline and score the results against knowledge-graph ground truth."};
    app.require_subcommand(1);

    ExtensionArgs extension_args;
    auto* extension_cmd =
        app.add_subcommand("extension", "Compute the members of a concept's extension");
    extension_args.graph.add_to(extension_cmd, /*kg_required=*/true);
    extension_cmd->add_option("--concept", extension_args.concept_token, "concept IRI or Q-id")
        ->required();
    extension_cmd->add_option("--format", extension_args.format, "output format")
        ->check(CLI::IsMember({"text", "json"}));

    SampleArgs sample_args;
    auto* sample_cmd =
        app.add_subcommand("sample", "Draw seeded positive/negative example sets");
    sample_args.graph.add_to(sample_cmd, /*kg_required=*/false);
    sample_args.positive.add_to(sample_cmd, "positive");
    sample_args.negative.add_to(sample_cmd, "negative");
    sample_cmd->add_option("--endpoint", sample_args.endpoint, "SPARQL endpoint URL");
    auto* sample_n = sample_cmd->add_option("-n,--n", sample_args.n, "examples per side");
    auto* sample_seed = sample_cmd->add_option("--seed", sample_args.seed, "RNG seed");
    sample_cmd->add_option("--descriptions", sample_args.descriptions_file,
                           "snapshot file; entities without a description are excluded");
    sample_cmd->add_flag("--fetch-descriptions", sample_args.fetch_descriptions,
                         "fetch summaries for pool entities before sampling");
    sample_cmd->add_option("--wiki-base", sample_args.wiki_base, "summary API base URL");
    sample_cmd->add_option("--title-map", sample_args.title_map_file,
                           "JSON object mapping entity IRIs to page titles");
    sample_cmd->add_option("--snapshot-out", sample_args.snapshot_out,
                           "write the drawn entities' records to this snapshot file");
    sample_cmd->add_option("--cache-dir", sample_args.cache_dir, "on-disk cache directory");
    sample_cmd->add_option("--pool-cap", sample_args.pool_cap, "remote pool size cap");
    auto* sample_out = sample_cmd->add_option("--out", sample_args.out, "sample output file");
    std::string sample_config;
    sample_cmd->add_option("--config", sample_config, "JSON config file (flags override)");

    ClassifyArgs classify_args;
    auto* classify_cmd =
        app.add_subcommand("classify", "Classify one entity and print rationale + decision");
    classify_cmd->add_option("--definition", classify_args.definition_file,
                             "concept definition JSON file");
    classify_cmd->add_option("--entity", classify_args.entity_token, "entity IRI or Q-id");
    classify_cmd->add_option("--entity-label", classify_args.entity_label,
                             "entity name (with inline --description)");
    classify_cmd->add_option("--description", classify_args.description_text,
                             "inline entity description");
    classify_cmd->add_option("--descriptions", classify_args.descriptions_file,
                             "snapshot file with entity records");
    classify_cmd->add_option("--world", classify_args.world_text,
                             "possible-world description to condition on");
    classify_cmd->add_option("--world-file", classify_args.world_file,
                             "file holding a possible-world description");
    classify_args.backend.add_to(classify_cmd);

    EvaluateArgs evaluate_args;
    auto* evaluate_cmd = app.add_subcommand(
        "evaluate", "Classify every sampled entity and write the run record");
    auto* eval_sample =
        evaluate_cmd->add_option("--sample", evaluate_args.sample_file, "sample JSON file");
    auto* eval_def = evaluate_cmd->add_option("--definition", evaluate_args.definition_file,
                                              "concept definition JSON file");
    auto* eval_desc = evaluate_cmd->add_option("--descriptions", evaluate_args.descriptions_file,
                                               "snapshot file with entity records");
    auto* eval_out = evaluate_cmd->add_option("--out", evaluate_args.out, "run record output file");
    auto* eval_abort = evaluate_cmd->add_option("--abort-threshold", evaluate_args.abort_threshold,
                                                "abort when this fraction of entities fails");
    auto* eval_par = evaluate_cmd->add_option("--parallelism", evaluate_args.parallelism,
                                              "concurrent classification workers");
    evaluate_args.backend.add_to(evaluate_cmd);
    std::string evaluate_config;
    evaluate_cmd->add_option("--config", evaluate_config, "JSON config file (flags override)");

    ReportArgs report_args;
    auto* report_cmd = app.add_subcommand("report", "Render an evaluation run");
    report_cmd->add_option("--run", report_args.run_file, "run record JSON file");
    report_cmd->add_option("--format", report_args.format, "markdown, csv, or json");
    report_cmd->add_option("--annotations", report_args.annotations_file,
                           "error-annotation JSON file to merge");
    report_cmd->add_option("--out", report_args.out, "output file (stdout when omitted)");

    MetricsArgs metrics_args;
    auto* metrics_cmd =
        app.add_subcommand("metrics", "Compute agreement metrics from a confusion matrix");
    metrics_cmd->add_option("--tp", metrics_args.tp, "true positives")->required();
    metrics_cmd->add_option("--fp", metrics_args.fp, "false positives")->required();
    metrics_cmd->add_option("--fn", metrics_args.fn, "false negatives")->required();
    metrics_cmd->add_option("--tn", metrics_args.tn, "true negatives")->required();
    metrics_cmd->add_option("--format", metrics_args.format, "json or text")
        ->check(CLI::IsMember({"json", "text"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*extension_cmd) return run_extension(extension_args);
        if (*sample_cmd) {
            auto cfg = load_config_file(sample_config);
            if (!cfg.empty()) {
                if (sample_n->count() == 0) cfg.overlay("n", sample_args.n);
                if (sample_seed->count() == 0) cfg.overlay("seed", sample_args.seed);
                if (sample_out->count() == 0) cfg.overlay("out", sample_args.out);
            }
            return run_sample(sample_args);
        }
        if (*classify_cmd) return run_classify(classify_args);
        if (*evaluate_cmd) {
            auto cfg = load_config_file(evaluate_config);
            if (!cfg.empty()) {
                if (eval_sample->count() == 0) cfg.overlay("sample", evaluate_args.sample_file);
                if (eval_def->count() == 0) cfg.overlay("definition", evaluate_args.definition_file);
                if (eval_desc->count() == 0)
                    cfg.overlay("descriptions", evaluate_args.descriptions_file);
                if (eval_out->count() == 0) cfg.overlay("out", evaluate_args.out);
                if (eval_abort->count() == 0)
                    cfg.overlay("abort_threshold", evaluate_args.abort_threshold);
                if (eval_par->count() == 0) cfg.overlay("parallelism", evaluate_args.parallelism);
                cfg.overlay("backend", evaluate_args.backend.backend);
                cfg.overlay("cassette", evaluate_args.backend.cassette);
                cfg.overlay("model", evaluate_args.backend.model);
                cfg.overlay("temperature", evaluate_args.backend.temperature);
                cfg.overlay("llm_endpoint", evaluate_args.backend.llm_endpoint);
                cfg.overlay("parse_retries", evaluate_args.backend.parse_retries);
            }
            return run_evaluate(evaluate_args);
        }
        if (*report_cmd) return run_report(report_args);
        if (*metrics_cmd) return run_metrics(metrics_args);
    } catch (const ce::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ce::EvalAbortedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAborted;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
