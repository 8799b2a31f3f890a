#pragma once
// Line-oriented N-Triples reader/writer (UTF-8).
//
// Supported subset: IRIs in angle brackets, blank nodes (_:name), literals
// with optional @lang or ^^<datatype>, terminating '.', '#' comments.
// Escape sequences: \t \b \n \r \f \" \' \\ \uXXXX \UXXXXXXXX.
//
// Strict mode aborts on the first malformed line with a 1-based line/column
// position; lenient mode skips malformed lines and counts them.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ce/errors.hpp"
#include "ce/term.hpp"

namespace ce {

enum class ParseMode { strict, lenient };

struct NtParseResult {
    std::vector<Triple> triples;
    std::size_t skipped_lines = 0;  // lenient mode only
    std::vector<std::string> warnings;
};

namespace detail {

inline void append_utf8(std::string& out, std::uint32_t cp, std::size_t line, std::size_t col) {
    if (cp > 0x10FFFF) throw ParseError("code point out of range", line, col);
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

class LineScanner {
public:
    LineScanner(const std::string& line, std::size_t line_no) : line_(line), line_no_(line_no) {}

    bool at_end() const { return pos_ >= line_.size(); }
    char peek() const { return pos_ < line_.size() ? line_[pos_] : '\0'; }
    char take() {
        if (at_end()) fail("unexpected end of line");
        return line_[pos_++];
    }
    std::size_t column() const { return pos_ + 1; }

    void skip_ws() {
        while (!at_end() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
    }

    void expect(char c, const char* what) {
        if (at_end() || line_[pos_] != c) fail(std::string("expected ") + what);
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line_no_, column());
    }

    std::uint32_t hex_escape(int digits) {
        std::uint32_t cp = 0;
        for (int i = 0; i < digits; ++i) {
            char c = take();
            cp <<= 4;
            if (c >= '0' && c <= '9')
                cp |= static_cast<std::uint32_t>(c - '0');
            else if (c >= 'a' && c <= 'f')
                cp |= static_cast<std::uint32_t>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F')
                cp |= static_cast<std::uint32_t>(c - 'A' + 10);
            else
                fail("invalid hex digit in escape");
        }
        return cp;
    }

    // One escape sequence, backslash already consumed. allow_string_escapes
    // distinguishes literal bodies from IRIs (which only allow \u / \U).
    void unescape_into(std::string& out, bool allow_string_escapes) {
        std::size_t col = column() - 1;
        char c = take();
        switch (c) {
            case 'u': append_utf8(out, hex_escape(4), line_no_, col); return;
            case 'U': append_utf8(out, hex_escape(8), line_no_, col); return;
            default: break;
        }
        if (!allow_string_escapes) throw ParseError("invalid escape in IRI", line_no_, col);
        switch (c) {
            case 't': out.push_back('\t'); break;
            case 'b': out.push_back('\b'); break;
            case 'n': out.push_back('\n'); break;
            case 'r': out.push_back('\r'); break;
            case 'f': out.push_back('\f'); break;
            case '"': out.push_back('"'); break;
            case '\'': out.push_back('\''); break;
            case '\\': out.push_back('\\'); break;
            default: throw ParseError("unknown escape sequence", line_no_, col);
        }
    }

    std::string iri_ref() {
        expect('<', "'<'");
        std::string out;
        for (;;) {
            if (at_end()) fail("unterminated IRI");
            char c = line_[pos_];
            if (c == '>') {
                ++pos_;
                break;
            }
            ++pos_;
            if (c == '\\')
                unescape_into(out, /*allow_string_escapes=*/false);
            else
                out.push_back(c);
        }
        if (out.empty()) fail("empty IRI");
        return out;
    }

    std::string blank_label() {
        expect('_', "blank node");
        expect(':', "':' after '_' in blank node");
        std::string out;
        while (!at_end()) {
            char c = line_[pos_];
            bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                      c == '_' || c == '-' || c == '.';
            if (!ok) break;
            out.push_back(c);
            ++pos_;
        }
        // a label cannot end with '.' — that dot terminates the triple
        while (!out.empty() && out.back() == '.') {
            out.pop_back();
            --pos_;
        }
        if (out.empty()) fail("empty blank node label");
        return out;
    }

    Term literal() {
        expect('"', "'\"'");
        std::string lex;
        for (;;) {
            if (at_end()) fail("unterminated string literal");
            char c = line_[pos_++];
            if (c == '"') break;
            if (c == '\\')
                unescape_into(lex, /*allow_string_escapes=*/true);
            else
                lex.push_back(c);
        }
        if (!at_end() && peek() == '@') {
            ++pos_;
            std::string lang;
            while (!at_end()) {
                char c = line_[pos_];
                bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                          (!lang.empty() && ((c >= '0' && c <= '9') || c == '-'));
                if (!ok) break;
                lang.push_back(c);
                ++pos_;
            }
            if (lang.empty()) fail("empty language tag");
            return Term::literal(lex, "", lang);
        }
        if (!at_end() && peek() == '^') {
            ++pos_;
            expect('^', "'^^' before datatype IRI");
            return Term::literal(lex, iri_ref());
        }
        return Term::literal(lex);
    }

    Term subject() {
        if (peek() == '<') return Term::iri(iri_ref());
        if (peek() == '_') return Term::blank(blank_label());
        fail("expected IRI or blank node as subject");
    }

    Term object() {
        if (peek() == '<') return Term::iri(iri_ref());
        if (peek() == '_') return Term::blank(blank_label());
        if (peek() == '"') return literal();
        fail("expected IRI, blank node, or literal as object");
    }
};

// Parses one line known to be non-blank and non-comment.
inline Triple parse_triple_line(const std::string& line, std::size_t line_no) {
    LineScanner s(line, line_no);
    s.skip_ws();
    Term subject = s.subject();
    s.skip_ws();
    if (s.peek() != '<') s.fail("expected IRI as property");
    Term property = Term::iri(s.iri_ref());
    s.skip_ws();
    Term object = s.object();
    s.skip_ws();
    s.expect('.', "terminating '.'");
    s.skip_ws();
    if (!s.at_end() && s.peek() != '#') s.fail("unexpected content after terminating '.'");
    return Triple(std::move(subject), std::move(property), std::move(object));
}

inline bool blank_or_comment(const std::string& line) {
    for (char c : line) {
        if (c == ' ' || c == '\t' || c == '\r') continue;
        return c == '#';
    }
    return true;
}

}  // namespace detail

inline NtParseResult parse_ntriples(std::istream& in, ParseMode mode = ParseMode::strict) {
    NtParseResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::blank_or_comment(line)) continue;
        try {
            result.triples.push_back(detail::parse_triple_line(line, line_no));
        } catch (const ParseError& e) {
            if (mode == ParseMode::strict) throw;
            ++result.skipped_lines;
            result.warnings.push_back(e.what());
        }
    }
    return result;
}

inline NtParseResult parse_ntriples_text(const std::string& text, ParseMode mode = ParseMode::strict) {
    std::istringstream in(text);
    return parse_ntriples(in, mode);
}

inline NtParseResult parse_ntriples_file(const std::filesystem::path& path,
                                         ParseMode mode = ParseMode::strict) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open N-Triples file: " + path.string());
    return parse_ntriples(in, mode);
}

namespace detail {

inline void escape_literal_into(std::string& out, const std::string& lex) {
    for (unsigned char c : lex) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04X", c);
                    out += buf;
                } else {
                    out.push_back(static_cast<char>(c));
                }
        }
    }
}

inline void escape_iri_into(std::string& out, const std::string& iri) {
    for (unsigned char c : iri) {
        if (c == '>' || c == '<' || c == '"' || c == '\\' || c < 0x21) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04X", c);
            out += buf;
        } else {
            out.push_back(static_cast<char>(c));
        }
    }
}

}  // namespace detail

inline std::string to_ntriples(const Term& t) {
    std::string out;
    switch (t.kind()) {
        case TermKind::iri:
            out.push_back('<');
            detail::escape_iri_into(out, t.value());
            out.push_back('>');
            break;
        case TermKind::blank:
            out += "_:" + t.value();
            break;
        case TermKind::literal:
            out.push_back('"');
            detail::escape_literal_into(out, t.value());
            out.push_back('"');
            if (!t.lang().empty()) {
                out.push_back('@');
                out += t.lang();
            } else if (!t.datatype().empty()) {
                out += "^^<";
                detail::escape_iri_into(out, t.datatype());
                out.push_back('>');
            }
            break;
    }
    return out;
}

inline std::string to_ntriples(const Triple& t) {
    return to_ntriples(t.subject) + " " + to_ntriples(t.property) + " " + to_ntriples(t.object) + " .";
}

inline void write_ntriples(std::ostream& out, const std::vector<Triple>& triples) {
    for (const auto& t : triples) out << to_ntriples(t) << "\n";
}

}  // namespace ce
