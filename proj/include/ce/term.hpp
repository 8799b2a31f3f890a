#pragma once
// RDF terms and triples.
//
// A Term is one of: IRI, blank node, literal (lexical form plus optional
// datatype IRI or language tag). Triples restrict subjects to IRI/blank and
// properties to IRI; those invariants are enforced at construction.

#include <cstddef>
#include <functional>
#include <string>
#include <tuple>
#include <utility>

#include "ce/errors.hpp"

namespace ce {

enum class TermKind { iri, blank, literal };

class Term {
public:
    static Term iri(std::string value) {
        if (value.empty()) throw Error("IRI must be non-empty");
        for (char c : value) {
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
                throw Error("IRI must not contain whitespace: \"" + value + "\"");
        }
        return Term(TermKind::iri, std::move(value), "", "");
    }

    static Term blank(std::string id) {
        if (id.empty()) throw Error("blank node id must be non-empty");
        return Term(TermKind::blank, std::move(id), "", "");
    }

    static Term literal(std::string lexical, std::string datatype = "", std::string lang = "") {
        if (!datatype.empty() && !lang.empty())
            throw Error("literal cannot carry both a datatype and a language tag");
        return Term(TermKind::literal, std::move(lexical), std::move(datatype), std::move(lang));
    }

    TermKind kind() const { return kind_; }
    bool is_iri() const { return kind_ == TermKind::iri; }
    bool is_blank() const { return kind_ == TermKind::blank; }
    bool is_literal() const { return kind_ == TermKind::literal; }

    // IRI string, blank node id, or literal lexical form.
    const std::string& value() const { return value_; }
    const std::string& datatype() const { return datatype_; }
    const std::string& lang() const { return lang_; }

    friend bool operator==(const Term& a, const Term& b) {
        return a.kind_ == b.kind_ && a.value_ == b.value_ && a.datatype_ == b.datatype_ &&
               a.lang_ == b.lang_;
    }
    friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
    friend bool operator<(const Term& a, const Term& b) {
        return std::tie(a.kind_, a.value_, a.datatype_, a.lang_) <
               std::tie(b.kind_, b.value_, b.datatype_, b.lang_);
    }

private:
    Term(TermKind kind, std::string value, std::string datatype, std::string lang)
        : kind_(kind), value_(std::move(value)), datatype_(std::move(datatype)), lang_(std::move(lang)) {}

    TermKind kind_;
    std::string value_;
    std::string datatype_;
    std::string lang_;
};

struct Triple {
    Triple(Term subject, Term property, Term object)
        : subject(std::move(subject)), property(std::move(property)), object(std::move(object)) {
        if (this->subject.is_literal())
            throw Error("literal cannot appear in subject position");
        if (!this->property.is_iri())
            throw Error("triple property must be an IRI");
    }

    Term subject;
    Term property;
    Term object;

    friend bool operator==(const Triple& a, const Triple& b) {
        return a.subject == b.subject && a.property == b.property && a.object == b.object;
    }
    friend bool operator!=(const Triple& a, const Triple& b) { return !(a == b); }
    friend bool operator<(const Triple& a, const Triple& b) {
        return std::tie(a.subject, a.property, a.object) < std::tie(b.subject, b.property, b.object);
    }
};

struct TermHash {
    std::size_t operator()(const Term& t) const {
        std::size_t h = std::hash<int>()(static_cast<int>(t.kind()));
        auto mix = [&h](const std::string& s) {
            h ^= std::hash<std::string>()(s) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        };
        mix(t.value());
        mix(t.datatype());
        mix(t.lang());
        return h;
    }
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const {
        TermHash th;
        std::size_t h = th(t.subject);
        h ^= th(t.property) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= th(t.object) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

}  // namespace ce
