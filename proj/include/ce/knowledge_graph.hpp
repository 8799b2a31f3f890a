#pragma once
// In-memory knowledge graph with recursive concept-extension computation.
//
// The graph is a duplicate-free set of triples plus three relation IRIs
// (instance-of, subclass-of, label) supplied as configuration. Extensions are
// computed by unioning direct instances over the transitive subclass closure;
// subclass cycles are tolerated and reported.
//
// Construction is single-threaded; a fully loaded graph is immutable in
// practice and safe for concurrent reads.

#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ce/errors.hpp"
#include "ce/term.hpp"

namespace ce {

struct GraphConfig {
    std::string instance_of_iri = "http://www.wikidata.org/prop/direct/P31";
    std::string subclass_of_iri = "http://www.wikidata.org/prop/direct/P279";
    std::string label_iri = "http://www.w3.org/2000/01/rdf-schema#label";
};

struct ExtensionResult {
    std::set<std::string> members;          // entity IRIs
    std::set<std::string> visited_classes;  // includes the root concept
    bool cycle_detected = false;
};

struct LabelResult {
    std::string text;
    bool fallback = false;  // true when no label triple existed and the local name was used
};

// "Q999" for ".../entity/Q999"; the segment after the last '#' or '/',
// falling back to the part after the last ':'.
inline std::string iri_local_name(const std::string& iri) {
    auto pos = iri.find_last_of("#/");
    if (pos != std::string::npos && pos + 1 < iri.size()) return iri.substr(pos + 1);
    auto colon = iri.find_last_of(':');
    if (colon != std::string::npos && colon + 1 < iri.size()) return iri.substr(colon + 1);
    return iri;
}

class KnowledgeGraph {
public:
    explicit KnowledgeGraph(GraphConfig config = {}) : config_(std::move(config)) {}

    // Inserts a triple; duplicates are ignored. Returns true when inserted.
    bool add(const Triple& t) {
        if (!seen_.insert(t).second) return false;
        triples_.push_back(t);
        if (!t.object.is_literal()) {
            by_property_object_[t.property.value()][t.object.value()].push_back(t.subject.value());
        } else {
            literals_by_property_subject_[t.property.value()][t.subject.value()].push_back(t.object);
        }
        return true;
    }

    void add_all(const std::vector<Triple>& ts) {
        for (const auto& t : ts) add(t);
    }

    std::size_t size() const { return triples_.size(); }
    const std::vector<Triple>& triples() const { return triples_; }
    const GraphConfig& config() const { return config_; }

    std::vector<Triple> with_property(const std::string& property_iri) const {
        std::vector<Triple> out;
        for (const auto& t : triples_)
            if (t.property.value() == property_iri) out.push_back(t);
        return out;
    }

    // { e | (e, instanceOf, c) ∈ G }. Unknown concepts yield the empty set.
    std::set<std::string> direct_instances(const std::string& concept_iri) const {
        return subjects_of(config_.instance_of_iri, concept_iri);
    }

    // Least set X with c ∈ X, closed under (c', subClassOf, x ∈ X). Terminates
    // on cyclic graphs via the visited set.
    std::set<std::string> subclasses_transitive(const std::string& concept_iri) const {
        std::set<std::string> visited;
        std::vector<std::string> stack{concept_iri};
        visited.insert(concept_iri);
        while (!stack.empty()) {
            std::string current = std::move(stack.back());
            stack.pop_back();
            for (const auto& child : subjects_of(config_.subclass_of_iri, current)) {
                if (visited.insert(child).second) stack.push_back(child);
            }
        }
        return visited;
    }

    // Union of direct instances over the transitive subclass closure of the
    // concept. cycle_detected is true iff the subclass relation reachable from
    // the concept contains a cycle (a back edge during traversal), not merely
    // a diamond.
    ExtensionResult extension(const std::string& concept_iri) const {
        ExtensionResult result;

        // Iterative DFS with colors: 0 unvisited, 1 on stack, 2 done.
        std::unordered_map<std::string, int> color;
        struct Frame {
            std::string node;
            std::vector<std::string> children;
            std::size_t next = 0;
        };
        std::vector<Frame> stack;
        stack.push_back({concept_iri, sorted_subjects_of(config_.subclass_of_iri, concept_iri)});
        color[concept_iri] = 1;

        while (!stack.empty()) {
            Frame& frame = stack.back();
            if (frame.next < frame.children.size()) {
                const std::string& child = frame.children[frame.next++];
                int c = 0;
                if (auto it = color.find(child); it != color.end()) c = it->second;
                if (c == 1) {
                    result.cycle_detected = true;
                } else if (c == 0) {
                    color[child] = 1;
                    stack.push_back({child, sorted_subjects_of(config_.subclass_of_iri, child)});
                }
            } else {
                color[frame.node] = 2;
                result.visited_classes.insert(frame.node);
                stack.pop_back();
            }
        }

        for (const auto& cls : result.visited_classes) {
            auto direct = direct_instances(cls);
            result.members.insert(direct.begin(), direct.end());
        }
        return result;
    }

    // { e | ∃ v ∈ values, (e, p, v) ∈ G }.
    std::set<std::string> property_value_extension(const std::string& property_iri,
                                                   const std::set<std::string>& values) const {
        if (values.empty()) throw Error("property_value_extension requires a non-empty value set");
        std::set<std::string> out;
        for (const auto& v : values) {
            auto subjects = subjects_of(property_iri, v);
            out.insert(subjects.begin(), subjects.end());
        }
        return out;
    }

    // Label lookup: exact language match first, then an untagged literal, then
    // the lexicographically smallest (lang, text) pair. Only when no label
    // triple exists at all does it fall back to the IRI's local name.
    LabelResult label_of(const std::string& iri, const std::string& lang = "") const {
        const std::vector<Term>* labels = nullptr;
        if (auto pit = literals_by_property_subject_.find(config_.label_iri);
            pit != literals_by_property_subject_.end()) {
            if (auto sit = pit->second.find(iri); sit != pit->second.end()) labels = &sit->second;
        }
        if (!labels || labels->empty()) return {iri_local_name(iri), true};

        const Term* best = nullptr;
        int best_rank = 3;
        auto lower = [](std::string s) {
            for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            return s;
        };
        std::string want = lower(lang);
        for (const auto& lit : *labels) {
            int rank;
            if (!want.empty() && lower(lit.lang()) == want)
                rank = 0;
            else if (lit.lang().empty())
                rank = 1;
            else
                rank = 2;
            if (rank < best_rank ||
                (rank == best_rank && best &&
                 std::tie(lit.lang(), lit.value()) < std::tie(best->lang(), best->value()))) {
                best = &lit;
                best_rank = rank;
            }
        }
        return {best->value(), false};
    }

private:
    std::vector<std::string> sorted_subjects_of(const std::string& property,
                                                const std::string& object) const {
        auto s = subjects_of(property, object);
        return {s.begin(), s.end()};
    }

    std::set<std::string> subjects_of(const std::string& property, const std::string& object) const {
        std::set<std::string> out;
        if (auto pit = by_property_object_.find(property); pit != by_property_object_.end()) {
            if (auto oit = pit->second.find(object); oit != pit->second.end())
                out.insert(oit->second.begin(), oit->second.end());
        }
        return out;
    }

    GraphConfig config_;
    std::vector<Triple> triples_;
    std::unordered_set<Triple, TripleHash> seen_;
    // property IRI -> object value -> subject values (IRI/blank objects only)
    std::unordered_map<std::string, std::unordered_map<std::string, std::vector<std::string>>>
        by_property_object_;
    // property IRI -> subject value -> literal objects
    std::unordered_map<std::string, std::unordered_map<std::string, std::vector<Term>>>
        literals_by_property_subject_;
};

}  // namespace ce
