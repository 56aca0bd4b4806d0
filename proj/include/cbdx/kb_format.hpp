#pragma once
// .pkb knowledge-base files.
//
//   document  = { "name" STRING | "version" STRING | symptom | disease | utilities }
//   symptom   = "symptom" ID [STRING] "{" { "base" SEX curve } "}"
//   disease   = "disease" ID [STRING] "{" [ "female_only" ] { "prior" SEX curve }
//               [ "cycle" curve ] { node } { "direct" ID curve } "}"
//   node      = ( "pathstate" ID | "symptom" ID ) "{" "link" curve { node } "}"
//   utilities = "utilities" "{" { ID "{" "symptomatic" NUM "operation" NUM "}" } "}"
//   curve     = "{" point { point } "}"      point = "(" NUM "," NUM ")"
//
// '#' starts a comment running to end of line. Numbers are plain decimals.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cbdx/curve.hpp"
#include "cbdx/json_io.hpp"
#include "cbdx/kb_model.hpp"
#include "cbdx/number.hpp"

namespace cbdx {

struct SourceSpan {
    std::size_t start_line = 1, start_column = 1;
    std::size_t end_line = 1, end_column = 1;
    std::size_t start_offset = 0, end_offset = 0; // byte offsets, end exclusive
};

enum class Severity { error, warning };

struct ParseDiagnostic {
    Severity severity = Severity::error;
    std::string message;
    SourceSpan span;

    std::string to_string(std::string_view file = "") const {
        std::string s;
        if (!file.empty()) s += std::string(file) + ":";
        s += std::to_string(span.start_line) + ":" + std::to_string(span.start_column) + ": ";
        s += severity == Severity::error ? "error: " : "warning: ";
        return s + message;
    }
};

struct ParseResult {
    std::optional<KnowledgeBase> kb; // set iff there are no error diagnostics
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const { return kb.has_value(); }

    std::size_t error_count() const {
        std::size_t n = 0;
        for (const auto& d : diagnostics) n += d.severity == Severity::error;
        return n;
    }
};

namespace format_detail {

enum class Tok { ident, number, string, lbrace, rbrace, lparen, rparen, comma, end };

inline std::string_view describe(Tok t) {
    switch (t) {
    case Tok::ident: return "identifier";
    case Tok::number: return "number";
    case Tok::string: return "string";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::comma: return "','";
    case Tok::end: return "end of input";
    }
    return "token";
}

struct Token {
    Tok kind = Tok::end;
    std::string text; // identifier name, number lexeme, or unescaped string
    SourceSpan span;
};

class Lexer {
public:
    Lexer(std::string_view src, std::vector<ParseDiagnostic>& diags) : src_(src), diags_(diags) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            if (pos_ >= src_.size()) break;
            const std::size_t start = pos_, line = line_, col = col_;
            const char c = src_[pos_];
            auto single = [&](Tok k) {
                bump();
                out.push_back({k, std::string(1, c), span(start, line, col)});
            };
            if (c == '{') single(Tok::lbrace);
            else if (c == '}') single(Tok::rbrace);
            else if (c == '(') single(Tok::lparen);
            else if (c == ')') single(Tok::rparen);
            else if (c == ',') single(Tok::comma);
            else if (is_ident_start(c)) {
                while (pos_ < src_.size() && is_ident_char(src_[pos_])) bump();
                out.push_back({Tok::ident, std::string(src_.substr(start, pos_ - start)), span(start, line, col)});
            } else if (is_digit(c) || c == '-') {
                lex_number(out, start, line, col);
            } else if (c == '"') {
                lex_string(out, start, line, col);
            } else {
                bump();
                error(span(start, line, col), "unexpected character " + printable(c));
            }
        }
        out.push_back({Tok::end, "", span(pos_, line_, col_)});
        return out;
    }

private:
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
    static bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

    static std::string printable(char c) {
        const auto u = static_cast<unsigned char>(c);
        if (u >= 0x20 && u < 0x7f) return std::string("'") + c + "'";
        static const char* hex = "0123456789abcdef";
        return std::string("0x") + hex[u >> 4] + hex[u & 15];
    }

    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                bump();
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') bump();
            } else {
                break;
            }
        }
    }

    SourceSpan span(std::size_t start, std::size_t line, std::size_t col) const {
        return {line, col, line_, col_, start, pos_};
    }

    void error(const SourceSpan& s, std::string msg) { diags_.push_back({Severity::error, std::move(msg), s}); }

    void lex_number(std::vector<Token>& out, std::size_t start, std::size_t line, std::size_t col) {
        if (src_[pos_] == '-') bump();
        bool digits = false;
        while (pos_ < src_.size() && is_digit(src_[pos_])) {
            bump();
            digits = true;
        }
        if (pos_ < src_.size() && src_[pos_] == '.') {
            bump();
            bool frac = false;
            while (pos_ < src_.size() && is_digit(src_[pos_])) {
                bump();
                frac = true;
            }
            digits = digits && frac;
        }
        const SourceSpan s = span(start, line, col);
        if (!digits) {
            error(s, "malformed number '" + std::string(src_.substr(start, pos_ - start)) + "'");
            return;
        }
        out.push_back({Tok::number, std::string(src_.substr(start, pos_ - start)), s});
    }

    void lex_string(std::vector<Token>& out, std::size_t start, std::size_t line, std::size_t col) {
        bump(); // opening quote
        std::string value;
        while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
            char c = src_[pos_];
            if (c == '\\' && pos_ + 1 < src_.size()) {
                bump();
                const char e = src_[pos_];
                if (e == 'n') c = '\n';
                else if (e == 't') c = '\t';
                else if (e == '"' || e == '\\') c = e;
                else {
                    error(span(pos_ - 1, line_, col_ - 1), "unknown escape sequence");
                    c = e;
                }
            }
            value += c;
            bump();
        }
        if (pos_ >= src_.size() || src_[pos_] != '"') {
            error(span(start, line, col), "unterminated string");
            return;
        }
        bump();
        out.push_back({Tok::string, std::move(value), span(start, line, col)});
    }

    std::string_view src_;
    std::vector<ParseDiagnostic>& diags_;
    std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

struct Abort {};

struct SymptomRef {
    std::string disease;
    std::string symptom;
    SourceSpan span;
    bool direct = false;
};

class Parser {
public:
    Parser(std::vector<Token> toks, std::vector<ParseDiagnostic>& diags) : toks_(std::move(toks)), diags_(diags) {}

    KnowledgeBase run() {
        while (peek().kind != Tok::end) {
            const std::size_t before = pos_;
            try {
                top_level();
            } catch (const Abort&) {
                synchronize();
            }
            if (pos_ == before) advance(); // guarantees progress
        }
        resolve();
        return std::move(kb_);
    }

    // Span of the id token that declared a disease or symptom, if any.
    std::map<std::string, SourceSpan> disease_spans, symptom_spans;

private:
    static constexpr int kMaxNesting = 64;

    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }

    const Token& advance() {
        const Token& t = toks_[pos_];
        if (t.kind == Tok::lbrace) ++depth_;
        if (t.kind == Tok::rbrace && depth_ > 0) --depth_;
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }

    bool at_keyword(std::string_view kw) const { return peek().kind == Tok::ident && peek().text == kw; }

    void error(const SourceSpan& s, std::string msg) { diags_.push_back({Severity::error, std::move(msg), s}); }

    [[noreturn]] void fail(std::string msg) {
        error(peek().span, std::move(msg) + ", found " + found());
        throw Abort{};
    }

    std::string found() const {
        const Token& t = peek();
        if (t.kind == Tok::ident || t.kind == Tok::number) return std::string(describe(t.kind)) + " '" + t.text + "'";
        return std::string(describe(t.kind));
    }

    const Token& expect(Tok k, std::string_view what) {
        if (peek().kind != k) fail("expected " + std::string(what));
        return advance();
    }

    void expect_keyword(std::string_view kw) {
        if (!at_keyword(kw)) fail("expected '" + std::string(kw) + "'");
        advance();
    }

    static bool is_top_keyword(const Token& t) {
        return t.kind == Tok::ident &&
               (t.text == "symptom" || t.text == "disease" || t.text == "utilities" || t.text == "name" ||
                t.text == "version");
    }

    void synchronize() {
        while (peek().kind != Tok::end) {
            if (depth_ == 0 && is_top_keyword(peek())) return;
            advance();
        }
    }

    void top_level() {
        depth_ = 0;
        const Token& t = peek();
        if (t.kind != Tok::ident || !is_top_keyword(t))
            fail("expected 'symptom', 'disease', 'utilities', 'name' or 'version'");
        if (t.text == "name" || t.text == "version") {
            const std::string key = t.text;
            advance();
            const std::string value = expect(Tok::string, "a quoted string").text;
            (key == "name" ? kb_.name : kb_.version) = value;
        } else if (t.text == "symptom") {
            symptom_decl();
        } else if (t.text == "disease") {
            disease_decl();
        } else {
            utilities_decl();
        }
    }

    double number(double lo, double hi, std::string_view what) {
        const Token& t = expect(Tok::number, "a number");
        const auto v = parse_decimal(t.text);
        if (!v) {
            error(t.span, "malformed number '" + t.text + "'");
            return 0.0;
        }
        if (*v < lo || *v > hi)
            error(t.span, std::string(what) + " " + t.text + " out of range [" + format_decimal(lo) + ", " +
                              format_decimal(hi) + "]");
        return *v;
    }

    template <class Axis>
    Curve<Axis> curve() {
        expect(Tok::lbrace, "'{' to open a curve");
        Curve<Axis> c;
        std::vector<SourceSpan> x_spans;
        do {
            expect(Tok::lparen, "'(' to open a curve point");
            x_spans.push_back(peek().span);
            const double x = number(Axis::lo, Axis::hi, Axis::name);
            expect(Tok::comma, "',' between curve coordinates");
            const double p = number(0.0, 1.0, "probability");
            expect(Tok::rparen, "')' to close a curve point");
            if (!c.points.empty() && !(x > c.points.back().x))
                error(x_spans.back(), std::string(Axis::name) + " values must be strictly increasing");
            c.points.push_back({x, p});
        } while (peek().kind == Tok::lparen);
        expect(Tok::rbrace, "'}' to close a curve");
        return c;
    }

    std::optional<Sex> sex() {
        const Token& t = expect(Tok::ident, "'male' or 'female'");
        auto s = parse_sex(t.text);
        if (!s) error(t.span, "expected 'male' or 'female', found '" + t.text + "'");
        return s;
    }

    std::string optional_label() {
        if (peek().kind == Tok::string) return advance().text;
        return {};
    }

    void symptom_decl() {
        advance(); // symptom
        const Token& id = expect(Tok::ident, "a symptom id");
        SymptomDef s;
        s.id = id.text;
        if (symptom_spans.count(s.id))
            error(id.span, "duplicate symptom '" + s.id + "'");
        else
            symptom_spans[s.id] = id.span;
        s.label = optional_label();
        expect(Tok::lbrace, "'{' to open the symptom body");
        while (!at_rbrace()) {
            const SourceSpan at = peek().span;
            expect_keyword("base");
            const auto sx = sex();
            auto c = curve<AgeAxis>();
            if (!sx) continue;
            if (s.base_rate.get(*sx)) error(at, "duplicate base rate for " + std::string(to_string(*sx)));
            s.base_rate.get(*sx) = std::move(c);
        }
        expect(Tok::rbrace, "'}'");
        kb_.symptoms.push_back(std::move(s));
    }

    bool at_rbrace() const {
        if (peek().kind == Tok::end) return false;
        return peek().kind == Tok::rbrace;
    }

    void disease_decl() {
        advance(); // disease
        const Token& id = expect(Tok::ident, "a disease id");
        DiseaseDef d;
        d.id = id.text;
        if (disease_spans.count(d.id))
            error(id.span, "duplicate disease '" + d.id + "'");
        else
            disease_spans[d.id] = id.span;
        d.label = optional_label();
        d.tree.id = d.id;
        d.tree.kind = NodeKind::disease_root;
        expect(Tok::lbrace, "'{' to open the disease body");
        std::set<std::string> node_ids;
        std::set<std::string> tree_symptoms;
        while (!at_rbrace()) {
            const SourceSpan at = peek().span;
            if (at_keyword("female_only")) {
                advance();
                d.female_only = true;
            } else if (at_keyword("prior")) {
                advance();
                const auto sx = sex();
                auto c = curve<AgeAxis>();
                if (!sx) continue;
                if (d.prior.get(*sx)) error(at, "duplicate prior for " + std::string(to_string(*sx)));
                d.prior.get(*sx) = std::move(c);
            } else if (at_keyword("cycle")) {
                advance();
                if (d.cycle_weight) error(at, "duplicate cycle curve");
                d.cycle_weight = curve<CycleAxis>();
            } else if (at_keyword("pathstate") || at_keyword("symptom")) {
                d.tree.children.push_back(node(d.id, 1, node_ids, tree_symptoms));
            } else if (at_keyword("direct")) {
                advance();
                const Token& sid = expect(Tok::ident, "a symptom id");
                refs_.push_back({d.id, sid.text, sid.span, true});
                for (const auto& existing : d.direct)
                    if (existing.symptom_id == sid.text) error(sid.span, "duplicate direct curve for '" + sid.text + "'");
                d.direct.push_back({sid.text, curve<TimeAxis>()});
            } else {
                fail("expected 'female_only', 'prior', 'cycle', 'pathstate', 'symptom', 'direct' or '}'");
            }
        }
        expect(Tok::rbrace, "'}'");
        if (d.female_only && d.prior.male) error(id.span, "female-only disease '" + d.id + "' cannot have a male prior");
        if (d.cycle_weight && !d.female_only)
            error(id.span, "cycle curve is only allowed on female-only diseases");
        kb_.diseases.push_back(std::move(d));
    }

    CausalEdge node(const std::string& disease, int nesting, std::set<std::string>& node_ids,
                    std::set<std::string>& tree_symptoms) {
        if (nesting > kMaxNesting) fail("causal tree nested too deeply");
        const bool is_symptom = at_keyword("symptom");
        advance();
        const Token& id = expect(Tok::ident, is_symptom ? "a symptom id" : "a pathstate id");
        CausalEdge edge;
        if (is_symptom) {
            edge.child = make_symptom_node(id.text);
            refs_.push_back({disease, id.text, id.span, false});
            if (!tree_symptoms.insert(id.text).second)
                error(id.span, "symptom '" + id.text + "' appears more than once in disease '" + disease + "'");
        } else {
            edge.child = make_pathstate(id.text);
            if (!node_ids.insert(id.text).second || id.text == disease)
                error(id.span, "duplicate node id '" + id.text + "' in disease '" + disease + "'");
        }
        expect(Tok::lbrace, "'{' to open the node body");
        expect_keyword("link");
        edge.link = curve<TimeAxis>();
        while (!at_rbrace()) {
            if (!(at_keyword("pathstate") || at_keyword("symptom"))) fail("expected 'pathstate', 'symptom' or '}'");
            if (is_symptom) error(peek().span, "symptom nodes must be leaves");
            edge.child.children.push_back(node(disease, nesting + 1, node_ids, tree_symptoms));
        }
        expect(Tok::rbrace, "'}'");
        if (is_symptom) edge.child.children.clear();
        return edge;
    }

    void utilities_decl() {
        const SourceSpan at = peek().span;
        advance(); // utilities
        expect(Tok::lbrace, "'{' to open the utilities block");
        while (!at_rbrace()) {
            const Token& id = expect(Tok::ident, "a disease id");
            const std::string disease = id.text;
            const SourceSpan id_span = id.span;
            expect(Tok::lbrace, "'{'");
            std::optional<double> symp, op;
            while (!at_rbrace()) {
                const Token& kw = expect(Tok::ident, "'symptomatic' or 'operation'");
                const std::string key = kw.text;
                const SourceSpan kspan = kw.span;
                if (key != "symptomatic" && key != "operation") {
                    error(kspan, "expected 'symptomatic' or 'operation', found '" + key + "'");
                    throw Abort{};
                }
                const double v = number(0.0, 1e300, "hospital days");
                auto& slot = key == "symptomatic" ? symp : op;
                if (slot) error(kspan, "duplicate '" + key + "' entry");
                slot = v;
            }
            expect(Tok::rbrace, "'}'");
            if (!symp || !op) error(id_span, "utility entry for '" + disease + "' needs both symptomatic and operation");
            if (kb_.utilities.morbidity.count(disease)) error(id_span, "duplicate utility entry for '" + disease + "'");
            utility_spans_[disease] = id_span;
            kb_.utilities.morbidity[disease] = {symp.value_or(0.0), op.value_or(0.0)};
        }
        expect(Tok::rbrace, "'}'");
        utilities_span_ = at;
    }

    void resolve() {
        for (const auto& r : refs_) {
            if (!symptom_spans.count(r.symptom))
                error(r.span, "unresolved reference to undeclared symptom '" + r.symptom + "'");
        }
        for (const auto& d : kb_.diseases) {
            const auto tree = descendant_symptoms(d.tree);
            for (const auto& r : refs_) {
                if (r.direct && r.disease == d.id && symptom_spans.count(r.symptom) &&
                    std::find(tree.begin(), tree.end(), r.symptom) == tree.end())
                    error(r.span, "direct curve for '" + r.symptom + "', which disease '" + d.id + "' does not cause");
            }
            if (!kb_.utilities.morbidity.count(d.id)) {
                const SourceSpan s = utilities_span_ ? *utilities_span_ : disease_spans[d.id];
                error(s, "missing utility entry for disease '" + d.id + "'");
            }
        }
        for (const auto& [id, s] : utility_spans_) {
            if (!disease_spans.count(id)) error(s, "utility entry for undeclared disease '" + id + "'");
        }
    }

    std::vector<Token> toks_;
    std::vector<ParseDiagnostic>& diags_;
    std::size_t pos_ = 0;
    int depth_ = 0;
    KnowledgeBase kb_;
    std::vector<SymptomRef> refs_;
    std::map<std::string, SourceSpan> utility_spans_;
    std::optional<SourceSpan> utilities_span_;
};

} // namespace format_detail

inline ParseResult parse_kb(std::string_view text) {
    ParseResult result;
    std::vector<format_detail::Token> toks = format_detail::Lexer(text, result.diagnostics).run();
    format_detail::Parser parser(std::move(toks), result.diagnostics);
    KnowledgeBase kb = parser.run();
    auto by_position = [](const ParseDiagnostic& a, const ParseDiagnostic& b) {
        return a.span.start_offset < b.span.start_offset;
    };
    std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(), by_position);
    if (result.error_count() > 0) return result;

    // Structural checks the grammar cannot express, located at the owning
    // declaration when there is one.
    const ValidationReport report = validate_kb(kb);
    auto locate = [&](const ValidationIssue& issue) {
        if (!issue.disease_id.empty() && parser.disease_spans.count(issue.disease_id))
            return parser.disease_spans.at(issue.disease_id);
        for (const auto& [id, span] : parser.symptom_spans)
            if (issue.node_path == "symptom " + id) return span;
        return SourceSpan{};
    };
    for (const auto& e : report.errors) result.diagnostics.push_back({Severity::error, e.to_string(), locate(e)});
    for (const auto& w : report.warnings) result.diagnostics.push_back({Severity::warning, w.to_string(), locate(w)});
    if (report.ok()) result.kb = std::move(kb);
    return result;
}

// ---------------------------------------------------------------------------
// Canonical serialization

namespace format_detail {

inline std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else if (c == '\t') {
            out += "\\t";
        } else {
            out += c;
        }
    }
    return out + "\"";
}

template <class Axis>
std::string curve_text(const Curve<Axis>& c) {
    std::string out = "{";
    for (const auto& pt : c.points) out += " (" + format_decimal(pt.x) + ", " + format_decimal(pt.p) + ")";
    return out + " }";
}

inline void write_node(std::string& out, const CausalEdge& edge, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    out += pad + std::string(to_string(edge.child.kind)) + " " + edge.child.id + " {\n";
    out += pad + "  link " + curve_text(edge.link) + "\n";
    for (const auto& e : edge.child.children) write_node(out, e, indent + 1);
    out += pad + "}\n";
}

} // namespace format_detail

inline std::string serialize_kb(const KnowledgeBase& kb) {
    using namespace format_detail;
    std::string out;
    if (!kb.name.empty()) out += "name " + quote(kb.name) + "\n";
    if (!kb.version.empty()) out += "version " + quote(kb.version) + "\n";
    auto separate = [&out] {
        if (!out.empty()) out += "\n";
    };
    for (const auto& s : kb.symptoms) {
        separate();
        out += "symptom " + s.id;
        if (!s.label.empty()) out += " " + quote(s.label);
        out += " {\n";
        for (Sex sex : {Sex::male, Sex::female})
            if (const auto& c = s.base_rate.get(sex))
                out += "  base " + std::string(to_string(sex)) + " " + curve_text(*c) + "\n";
        out += "}\n";
    }
    for (const auto& d : kb.diseases) {
        separate();
        out += "disease " + d.id;
        if (!d.label.empty()) out += " " + quote(d.label);
        out += " {\n";
        if (d.female_only) out += "  female_only\n";
        for (Sex sex : {Sex::male, Sex::female})
            if (const auto& c = d.prior.get(sex))
                out += "  prior " + std::string(to_string(sex)) + " " + curve_text(*c) + "\n";
        if (d.cycle_weight) out += "  cycle " + curve_text(*d.cycle_weight) + "\n";
        for (const auto& e : d.tree.children) write_node(out, e, 1);
        for (const auto& dc : d.direct) out += "  direct " + dc.symptom_id + " " + curve_text(dc.curve) + "\n";
        out += "}\n";
    }
    if (!kb.utilities.morbidity.empty()) {
        separate();
        out += "utilities {\n";
        for (const auto& [id, m] : kb.utilities.morbidity) {
            out += "  " + id + " { symptomatic " + format_decimal(m.symptomatic) + " operation " +
                   format_decimal(m.operation) + " }\n";
        }
        out += "}\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON export

namespace format_detail {

template <class Axis>
Json curve_json(const Curve<Axis>& c) {
    Json arr = Json::array();
    for (const auto& pt : c.points) arr.push_back(Json::array({pt.x, pt.p}));
    return arr;
}

inline Json per_sex_json(const PerSex<AgeCurve>& ps) {
    Json j = Json::object();
    for (Sex sex : {Sex::male, Sex::female})
        if (const auto& c = ps.get(sex)) j[std::string(to_string(sex))] = curve_json(*c);
    return j;
}

inline Json node_json(const CausalNode& node, const TimeCurve* link) {
    Json j;
    j["id"] = node.id;
    j["kind"] = std::string(to_string(node.kind));
    j["link"] = link ? curve_json(*link) : Json(nullptr);
    Json children = Json::array();
    for (const auto& e : node.children) children.push_back(node_json(e.child, &e.link));
    j["children"] = children;
    return j;
}

} // namespace format_detail

inline Json export_json(const KnowledgeBase& kb) {
    using namespace format_detail;
    Json j;
    j["name"] = kb.name;
    j["version"] = kb.version;
    Json symptoms = Json::array();
    for (const auto& s : kb.symptoms)
        symptoms.push_back({{"id", s.id}, {"label", s.label}, {"base", per_sex_json(s.base_rate)}});
    j["symptoms"] = symptoms;
    Json diseases = Json::array();
    for (const auto& d : kb.diseases) {
        Json dj;
        dj["id"] = d.id;
        dj["label"] = d.label;
        dj["female_only"] = d.female_only;
        dj["prior"] = per_sex_json(d.prior);
        dj["cycle"] = d.cycle_weight ? curve_json(*d.cycle_weight) : Json(nullptr);
        dj["tree"] = node_json(d.tree, nullptr);
        Json direct = Json::object();
        for (const auto& dc : d.direct) direct[dc.symptom_id] = curve_json(dc.curve);
        dj["direct"] = direct;
        diseases.push_back(dj);
    }
    j["diseases"] = diseases;
    Json utilities = Json::object();
    for (const auto& [id, m] : kb.utilities.morbidity)
        utilities[id] = {{"symptomatic", m.symptomatic}, {"operation", m.operation}};
    j["utilities"] = utilities;
    return j;
}

} // namespace cbdx
