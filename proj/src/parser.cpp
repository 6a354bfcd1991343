#include "trapeval/syntax.hpp"

#include <algorithm>
#include <cassert>

namespace trapeval::syntax {

namespace {

constexpr uint32_t kInvalid = UINT32_MAX;

const std::set<std::string_view>& decl_keywords() {
    static const std::set<std::string_view> s = {
        "typedef", "extern", "static", "auto", "register", "inline", "const", "volatile",
        "restrict", "signed", "unsigned", "short", "long", "int", "char", "float", "double",
        "void", "_Bool", "_Complex", "_Atomic", "_Noreturn", "_Thread_local", "_Alignas",
        "struct", "union", "enum", "bool", "wchar_t", "char8_t", "char16_t", "char32_t",
        "class", "constexpr", "explicit", "friend", "mutable", "typename", "virtual",
        "__attribute__", "__declspec", "__extension__", "__inline", "__inline__",
        "__forceinline", "__restrict", "__restrict__", "__const", "__volatile__",
        "__signed__", "typeof", "__typeof__", "__thread",
    };
    return s;
}

const std::set<std::string_view>& tag_keywords() {
    static const std::set<std::string_view> s = {"struct", "union", "enum", "class"};
    return s;
}

const std::set<std::string_view>& qualifier_keywords() {
    static const std::set<std::string_view> s = {
        "const", "volatile", "restrict", "_Atomic",
        "__restrict", "__restrict__", "__const", "__volatile__",
    };
    return s;
}

const std::set<std::string_view>& basic_type_keywords() {
    static const std::set<std::string_view> s = {
        "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned",
        "_Bool", "bool", "_Complex", "wchar_t", "char8_t", "char16_t", "char32_t",
    };
    return s;
}

const std::set<std::string_view>& statement_keywords() {
    static const std::set<std::string_view> s = {
        "if", "else", "while", "do", "for", "switch", "case", "default",
        "return", "break", "continue", "goto",
    };
    return s;
}

const std::set<std::string_view>& all_keywords() {
    static const std::set<std::string_view> s = [] {
        std::set<std::string_view> k = decl_keywords();
        for (auto w : statement_keywords()) k.insert(w);
        k.insert("sizeof");
        k.insert("alignof");
        k.insert("_Alignof");
        k.insert("__alignof__");
        k.insert("true");
        k.insert("false");
        k.insert("nullptr");
        k.insert("new");
        k.insert("delete");
        k.insert("this");
        k.insert("operator");
        k.insert("namespace");
        k.insert("using");
        k.insert("template");
        k.insert("static_assert");
        k.insert("_Static_assert");
        k.insert("_Generic");
        k.insert("asm");
        k.insert("__asm__");
        return k;
    }();
    return s;
}

const std::set<std::string_view>& assignment_ops() {
    static const std::set<std::string_view> s = {
        "=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "^=", "|=",
    };
    return s;
}

int binary_prec(std::string_view op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
    if (op == "<<" || op == ">>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return 0;
}

struct DeclInfo {
    uint32_t node = kInvalid;
    uint32_t name_raw = kInvalid;
    bool has_params = false;
};

struct Parser {
    SyntaxTree t;
    std::vector<uint32_t> sig;       // raw indices of significant tokens
    std::vector<std::string_view> txt;
    std::vector<Lex> lk;
    size_t pos = 0;
    int depth = 0;

    explicit Parser(std::string_view code, Language lang) {
        t.language = lang;
        t.source.assign(code);
        t.raw = lex(t.source);
        for (uint32_t i = 0; i < t.raw.size(); ++i) {
            if (is_trivia(t.raw[i].kind)) continue;
            sig.push_back(i);
            txt.push_back(t.raw_text(i));
            lk.push_back(t.raw[i].kind);
        }
    }

    // --- cursor ---
    bool eof() const { return pos >= sig.size(); }
    std::string_view at(size_t k = 0) const {
        return pos + k < sig.size() ? txt[pos + k] : std::string_view{};
    }
    Lex kat(size_t k = 0) const { return pos + k < sig.size() ? lk[pos + k] : Lex::Other; }
    bool is(std::string_view s) const { return at() == s; }
    bool is_ident(size_t k = 0) const {
        return kat(k) == Lex::Identifier && !all_keywords().count(at(k));
    }

    // --- node building ---
    bool node_is_empty(uint32_t id) const {
        const Node& n = t.nodes[id];
        return n.kind != NodeKind::Leaf && n.children.empty();
    }

    uint32_t leaf() {
        uint32_t raw = sig[pos++];
        t.nodes.push_back({NodeKind::Leaf, raw, raw, {}});
        return static_cast<uint32_t>(t.nodes.size() - 1);
    }

    uint32_t make(NodeKind k, std::vector<uint32_t> kids) {
        uint32_t f = kInvalid, l = 0;
        for (uint32_t c : kids) {
            if (node_is_empty(c)) continue;
            if (f == kInvalid) f = t.nodes[c].first_raw;
            l = t.nodes[c].last_raw;
        }
        assert(f != kInvalid && "internal node needs at least one token");
        t.nodes.push_back({k, f, l, std::move(kids)});
        return static_cast<uint32_t>(t.nodes.size() - 1);
    }

    // Zero-width error marker for a missing expected token.
    uint32_t err_empty() {
        t.has_error = true;
        t.nodes.push_back({NodeKind::Error, 0, 0, {}});
        return static_cast<uint32_t>(t.nodes.size() - 1);
    }

    void expect(std::string_view s, std::vector<uint32_t>& kids) {
        if (is(s))
            kids.push_back(leaf());
        else
            kids.push_back(err_empty());
    }

    // Error node that consumes exactly one token. Never called at eof.
    uint32_t err_consume() {
        t.has_error = true;
        std::vector<uint32_t> k{leaf()};
        return make(NodeKind::Error, std::move(k));
    }

    struct DepthGuard {
        Parser& p;
        bool ok;
        explicit DepthGuard(Parser& pp) : p(pp), ok(++p.depth < 1500) {}
        ~DepthGuard() { --p.depth; }
    };

    // --- trivia weave (phase 2) ---
    uint32_t trivia_ptr = 0;

    uint32_t trivia_leaf(uint32_t raw) {
        t.nodes.push_back({NodeKind::Leaf, raw, raw, {}});
        return static_cast<uint32_t>(t.nodes.size() - 1);
    }

    void weave(uint32_t id) {
        std::vector<uint32_t> kids = t.nodes[id].children;
        std::vector<uint32_t> out;
        out.reserve(kids.size());
        for (uint32_t c : kids) {
            if (node_is_empty(c)) {
                out.push_back(c);
                continue;
            }
            uint32_t cf = t.nodes[c].first_raw;
            while (trivia_ptr < cf) out.push_back(trivia_leaf(trivia_ptr++));
            out.push_back(c);
            if (!t.nodes[c].children.empty()) weave(c);
            trivia_ptr = std::max(trivia_ptr, t.nodes[c].last_raw + 1);
        }
        t.nodes[id].children = std::move(out);
        const std::vector<uint32_t>& fin = t.nodes[id].children;
        uint32_t f = kInvalid, l = 0;
        for (uint32_t c : fin) {
            if (node_is_empty(c)) continue;
            if (f == kInvalid) f = t.nodes[c].first_raw;
            l = t.nodes[c].last_raw;
        }
        if (f != kInvalid) {
            t.nodes[id].first_raw = f;
            t.nodes[id].last_raw = l;
        }
    }

    // --- grammar ---

    bool newline_between(uint32_t raw_a, uint32_t raw_b) const {
        uint32_t from = t.raw[raw_a].end, to = t.raw[raw_b].begin;
        for (uint32_t i = from; i < to; ++i)
            if (t.source[i] == '\n') return true;
        return false;
    }

    uint32_t parse_preproc() {
        std::vector<uint32_t> kids{leaf()}; // '#'
        while (!eof()) {
            uint32_t prev_raw = sig[pos - 1];
            uint32_t cur_raw = sig[pos];
            if (newline_between(prev_raw, cur_raw) && txt[pos - 1] != "\\") break;
            kids.push_back(leaf());
        }
        return make(NodeKind::Preproc, std::move(kids));
    }

    void consume_balanced(std::vector<uint32_t>& kids, std::string_view open,
                          std::string_view close) {
        if (!is(open)) return;
        kids.push_back(leaf());
        int d = 1;
        while (!eof() && d > 0) {
            if (is(open)) ++d;
            else if (is(close)) --d;
            kids.push_back(leaf());
        }
        if (d > 0) kids.push_back(err_empty());
    }

    uint32_t parse_tag_specifier() {
        bool is_enum = is("enum");
        std::vector<uint32_t> kids{leaf()};
        while (is("__attribute__") || is("__declspec")) {
            kids.push_back(leaf());
            consume_balanced(kids, "(", ")");
        }
        if (is_ident()) kids.push_back(leaf());
        if (is("{")) consume_balanced(kids, "{", "}");
        return make(is_enum ? NodeKind::EnumSpecifier : NodeKind::StructSpecifier,
                    std::move(kids));
    }

    // Returns kInvalid when no specifier token is present.
    uint32_t parse_decl_specifiers() {
        std::vector<uint32_t> kids;
        while (!eof()) {
            std::string_view cur = at();
            if (kat() != Lex::Identifier) break;
            if (tag_keywords().count(cur)) {
                kids.push_back(parse_tag_specifier());
                continue;
            }
            if (cur == "__attribute__" || cur == "__declspec" || cur == "_Alignas") {
                kids.push_back(leaf());
                consume_balanced(kids, "(", ")");
                continue;
            }
            if (decl_keywords().count(cur)) {
                kids.push_back(leaf());
                continue;
            }
            if (all_keywords().count(cur)) break;
            // plain identifier: keep as a type name when what follows still
            // looks like a declarator
            if (at(1) == "::" && is_ident(2)) {
                kids.push_back(leaf());
                kids.push_back(leaf());
                continue;
            }
            if (is_ident(1)) {
                kids.push_back(leaf());
                continue;
            }
            if (at(1) == "*") {
                kids.push_back(leaf());
                continue;
            }
            break;
        }
        if (kids.empty()) return kInvalid;
        return make(NodeKind::DeclSpecifiers, std::move(kids));
    }

    DeclInfo parse_declarator(bool allow_abstract) {
        DeclInfo info;
        std::vector<uint32_t> kids;
        while (is("*") || qualifier_keywords().count(at())) kids.push_back(leaf());
        if (is_ident()) {
            info.name_raw = sig[pos];
            kids.push_back(leaf());
        } else if (is("(") && (at(1) == "*" || is_ident(1) || at(1) == "(")) {
            kids.push_back(leaf());
            DeclInfo inner = parse_declarator(allow_abstract);
            if (inner.node != kInvalid) kids.push_back(inner.node);
            info.name_raw = inner.name_raw;
            expect(")", kids);
        } else if (!allow_abstract && kids.empty()) {
            return info;
        }
        while (!eof()) {
            if (is("(")) {
                kids.push_back(parse_parameter_list());
                info.has_params = true;
            } else if (is("[")) {
                kids.push_back(leaf());
                if (!is("]") && !eof()) {
                    uint32_t e = parse_assignment();
                    if (e != kInvalid) kids.push_back(e);
                }
                expect("]", kids);
            } else {
                break;
            }
        }
        if (kids.empty()) return info;
        info.node = make(NodeKind::Declarator, std::move(kids));
        return info;
    }

    uint32_t parse_parameter_list() {
        std::vector<uint32_t> kids{leaf()}; // '('
        if (is(")")) {
            kids.push_back(leaf());
            return make(NodeKind::ParameterList, std::move(kids));
        }
        while (!eof()) {
            if (is("...")) {
                std::vector<uint32_t> pd{leaf()};
                kids.push_back(make(NodeKind::ParameterDeclaration, std::move(pd)));
            } else {
                std::vector<uint32_t> pd;
                uint32_t sp = parse_decl_specifiers();
                if (sp != kInvalid) pd.push_back(sp);
                DeclInfo d = parse_declarator(true);
                if (d.node != kInvalid) pd.push_back(d.node);
                if (pd.empty()) {
                    kids.push_back(err_empty());
                    break;
                }
                kids.push_back(make(NodeKind::ParameterDeclaration, std::move(pd)));
            }
            if (is(",")) {
                kids.push_back(leaf());
                continue;
            }
            break;
        }
        expect(")", kids);
        return make(NodeKind::ParameterList, std::move(kids));
    }

    void parse_type_name(std::vector<uint32_t>& kids) {
        uint32_t sp = parse_decl_specifiers();
        if (sp != kInvalid) kids.push_back(sp);
        while (is("*") || qualifier_keywords().count(at())) kids.push_back(leaf());
        while (is("(") || is("[")) {
            if (is("("))
                consume_balanced(kids, "(", ")");
            else
                consume_balanced(kids, "[", "]");
        }
    }

    // --- statements ---

    bool is_declaration_start() const {
        std::string_view cur = at();
        if (kat() != Lex::Identifier) return false;
        if (decl_keywords().count(cur)) return true;
        if (all_keywords().count(cur)) return false;
        size_t j = 1;
        // std::foo style qualified type heads
        while (at(j) == "::" && kat(j + 1) == Lex::Identifier) j += 2;
        size_t stars = 0;
        while (at(j) == "*") {
            ++j;
            ++stars;
        }
        if (kat(j) != Lex::Identifier || all_keywords().count(at(j))) return false;
        std::string_view after = at(j + 1);
        if (stars == 0 && j == 1)
            return after == ";" || after == "=" || after == "[" || after == "," ||
                   after == "(";
        return after == ";" || after == "=" || after == "," || after == "[" ||
               after == ")";
    }

    uint32_t parse_initializer() {
        DepthGuard g(*this);
        if (!g.ok || eof()) return err_empty();
        if (!is("{")) return parse_assignment_or_err();
        std::vector<uint32_t> kids{leaf()};
        while (!eof() && !is("}")) {
            size_t before = pos;
            bool designated = false;
            while (is(".") || is("[")) {
                designated = true;
                if (is(".")) {
                    kids.push_back(leaf());
                    if (kat() == Lex::Identifier) kids.push_back(leaf());
                } else {
                    kids.push_back(leaf());
                    uint32_t e = parse_conditional();
                    if (e != kInvalid) kids.push_back(e);
                    expect("]", kids);
                }
            }
            if (designated && is("=")) kids.push_back(leaf());
            if (!is("}")) kids.push_back(parse_initializer());
            if (is(",")) {
                kids.push_back(leaf());
                continue;
            }
            if (pos == before && !is("}")) kids.push_back(err_consume());
        }
        expect("}", kids);
        return make(NodeKind::InitializerList, std::move(kids));
    }

    void parse_declaration_stmt(std::vector<uint32_t>& out) {
        std::vector<uint32_t> parts;
        uint32_t sp = parse_decl_specifiers();
        if (sp != kInvalid) parts.push_back(sp);
        if (is(";")) {
            parts.push_back(leaf());
            out.push_back(make(NodeKind::Declaration, std::move(parts)));
            return;
        }
        while (!eof()) {
            DeclInfo d = parse_declarator(false);
            std::vector<uint32_t> id;
            if (d.node != kInvalid)
                id.push_back(d.node);
            else
                id.push_back(err_empty());
            if (is("=")) {
                id.push_back(leaf());
                id.push_back(parse_initializer());
            }
            parts.push_back(make(NodeKind::InitDeclarator, std::move(id)));
            if (is(",")) {
                parts.push_back(leaf());
                continue;
            }
            break;
        }
        expect(";", parts);
        out.push_back(make(NodeKind::Declaration, std::move(parts)));
    }

    void parse_statement(std::vector<uint32_t>& out) {
        DepthGuard g(*this);
        if (eof()) return;
        if (!g.ok) {
            out.push_back(err_consume());
            return;
        }
        std::string_view cur = at();
        if (cur == "{") {
            out.push_back(parse_compound());
            return;
        }
        if (cur == "#") {
            out.push_back(parse_preproc());
            return;
        }
        if (cur == ";") {
            std::vector<uint32_t> k{leaf()};
            out.push_back(make(NodeKind::EmptyStatement, std::move(k)));
            return;
        }
        if (cur == "if") {
            std::vector<uint32_t> k{leaf()};
            expect("(", k);
            if (!is(")")) {
                uint32_t e = parse_expression();
                if (e != kInvalid) k.push_back(e);
            }
            expect(")", k);
            parse_statement(k);
            if (is("else")) {
                k.push_back(leaf());
                parse_statement(k);
            }
            out.push_back(make(NodeKind::IfStatement, std::move(k)));
            return;
        }
        if (cur == "while") {
            std::vector<uint32_t> k{leaf()};
            expect("(", k);
            if (!is(")")) {
                uint32_t e = parse_expression();
                if (e != kInvalid) k.push_back(e);
            }
            expect(")", k);
            parse_statement(k);
            out.push_back(make(NodeKind::WhileStatement, std::move(k)));
            return;
        }
        if (cur == "do") {
            std::vector<uint32_t> k{leaf()};
            parse_statement(k);
            expect("while", k);
            expect("(", k);
            if (!is(")")) {
                uint32_t e = parse_expression();
                if (e != kInvalid) k.push_back(e);
            }
            expect(")", k);
            expect(";", k);
            out.push_back(make(NodeKind::DoStatement, std::move(k)));
            return;
        }
        if (cur == "for") {
            std::vector<uint32_t> k{leaf()};
            expect("(", k);
            if (is(";")) {
                k.push_back(leaf());
            } else if (is_declaration_start()) {
                parse_declaration_stmt(k);
            } else {
                uint32_t e = parse_expression();
                if (e != kInvalid) k.push_back(e);
                expect(";", k);
            }
            if (!is(";")) {
                uint32_t e = parse_expression();
                if (e != kInvalid) k.push_back(e);
            }
            expect(";", k);
            if (!is(")")) {
                uint32_t e = parse_expression();
                if (e != kInvalid) k.push_back(e);
            }
            expect(")", k);
            parse_statement(k);
            out.push_back(make(NodeKind::ForStatement, std::move(k)));
            return;
        }
        if (cur == "switch") {
            std::vector<uint32_t> k{leaf()};
            expect("(", k);
            if (!is(")")) {
                uint32_t e = parse_expression();
                if (e != kInvalid) k.push_back(e);
            }
            expect(")", k);
            parse_statement(k);
            out.push_back(make(NodeKind::SwitchStatement, std::move(k)));
            return;
        }
        if (cur == "case") {
            std::vector<uint32_t> k{leaf()};
            uint32_t e = parse_conditional();
            if (e != kInvalid) k.push_back(e);
            if (is("...")) {
                k.push_back(leaf());
                uint32_t hi = parse_conditional();
                if (hi != kInvalid) k.push_back(hi);
            }
            expect(":", k);
            parse_statement(k);
            out.push_back(make(NodeKind::CaseLabel, std::move(k)));
            return;
        }
        if (cur == "default") {
            std::vector<uint32_t> k{leaf()};
            expect(":", k);
            parse_statement(k);
            out.push_back(make(NodeKind::CaseLabel, std::move(k)));
            return;
        }
        if (cur == "return") {
            std::vector<uint32_t> k{leaf()};
            if (!is(";") && !eof()) {
                uint32_t e = parse_expression();
                if (e != kInvalid) k.push_back(e);
            }
            expect(";", k);
            out.push_back(make(NodeKind::ReturnStatement, std::move(k)));
            return;
        }
        if (cur == "break" || cur == "continue") {
            std::vector<uint32_t> k{leaf()};
            expect(";", k);
            out.push_back(make(cur == "break" ? NodeKind::BreakStatement
                                              : NodeKind::ContinueStatement,
                               std::move(k)));
            return;
        }
        if (cur == "goto") {
            std::vector<uint32_t> k{leaf()};
            if (kat() == Lex::Identifier) k.push_back(leaf());
            expect(";", k);
            out.push_back(make(NodeKind::GotoStatement, std::move(k)));
            return;
        }
        if (is_ident() && at(1) == ":") {
            std::vector<uint32_t> k{leaf(), leaf()};
            if (!eof() && !is("}")) parse_statement(k);
            out.push_back(make(NodeKind::LabeledStatement, std::move(k)));
            return;
        }
        if (is_declaration_start()) {
            parse_declaration_stmt(out);
            return;
        }
        uint32_t e = parse_expression();
        if (e == kInvalid) {
            out.push_back(err_consume());
            return;
        }
        std::vector<uint32_t> k{e};
        expect(";", k);
        out.push_back(make(NodeKind::ExpressionStatement, std::move(k)));
    }

    uint32_t parse_compound() {
        std::vector<uint32_t> kids{leaf()}; // '{'
        while (!eof() && !is("}")) {
            size_t before = pos;
            parse_statement(kids);
            if (pos == before) kids.push_back(err_consume());
        }
        expect("}", kids);
        return make(NodeKind::CompoundStatement, std::move(kids));
    }

    // --- expressions ---

    uint32_t parse_assignment_or_err() {
        uint32_t e = parse_assignment();
        if (e != kInvalid) return e;
        if (eof()) return err_empty();
        return err_consume();
    }

    uint32_t parse_expression() {
        uint32_t e = parse_assignment();
        if (e == kInvalid) return kInvalid;
        while (is(",")) {
            std::vector<uint32_t> k{e, leaf()};
            uint32_t r = parse_assignment();
            k.push_back(r != kInvalid ? r : err_empty());
            e = make(NodeKind::CommaExpression, std::move(k));
        }
        return e;
    }

    uint32_t parse_assignment() {
        uint32_t l = parse_conditional();
        if (l == kInvalid) return kInvalid;
        if (assignment_ops().count(at())) {
            std::vector<uint32_t> k{l, leaf()};
            uint32_t r = parse_assignment();
            k.push_back(r != kInvalid ? r : err_empty());
            return make(NodeKind::AssignmentExpression, std::move(k));
        }
        return l;
    }

    uint32_t parse_conditional() {
        uint32_t c = parse_binary(1);
        if (c == kInvalid) return kInvalid;
        if (is("?")) {
            std::vector<uint32_t> k{c, leaf()};
            uint32_t m = parse_expression();
            k.push_back(m != kInvalid ? m : err_empty());
            expect(":", k);
            uint32_t r = parse_conditional();
            k.push_back(r != kInvalid ? r : err_empty());
            return make(NodeKind::ConditionalExpression, std::move(k));
        }
        return c;
    }

    uint32_t parse_binary(int min_prec) {
        uint32_t l = parse_unary();
        if (l == kInvalid) return kInvalid;
        while (true) {
            int p = binary_prec(at());
            if (p == 0 || p < min_prec) break;
            std::vector<uint32_t> k{l, leaf()};
            uint32_t r = parse_binary(p + 1);
            k.push_back(r != kInvalid ? r : err_empty());
            l = make(NodeKind::BinaryExpression, std::move(k));
        }
        return l;
    }

    uint32_t parse_unary() {
        DepthGuard g(*this);
        if (eof()) return kInvalid;
        if (!g.ok) return err_consume();
        std::string_view cur = at();
        if (cur == "++" || cur == "--" || cur == "+" || cur == "-" || cur == "!" ||
            cur == "~" || cur == "*" || cur == "&") {
            std::vector<uint32_t> k{leaf()};
            uint32_t r = parse_unary();
            k.push_back(r != kInvalid ? r : err_empty());
            return make(NodeKind::UnaryExpression, std::move(k));
        }
        if (cur == "sizeof" || cur == "alignof" || cur == "_Alignof" ||
            cur == "__alignof__") {
            std::vector<uint32_t> k{leaf()};
            if (is("(") && type_in_parens_at(pos)) {
                k.push_back(leaf());
                parse_type_name(k);
                expect(")", k);
            } else {
                uint32_t r = parse_unary();
                k.push_back(r != kInvalid ? r : err_empty());
            }
            return make(NodeKind::SizeofExpression, std::move(k));
        }
        return parse_postfix_chain();
    }

    // pos points at '('. Decides cast-vs-paren by looking at the parenthesized
    // tokens and the token after the closing paren.
    bool type_in_parens_at(size_t open) const {
        size_t j = open + 1;
        int d = 1;
        size_t close = sig.size();
        for (; j < sig.size(); ++j) {
            if (txt[j] == "(") ++d;
            else if (txt[j] == ")") {
                if (--d == 0) {
                    close = j;
                    break;
                }
            }
        }
        if (close == sig.size() || close == open + 1) return false;
        std::string_view first = txt[open + 1];
        if (basic_type_keywords().count(first) || qualifier_keywords().count(first) ||
            tag_keywords().count(first))
            return true;
        if (lk[open + 1] != Lex::Identifier || all_keywords().count(first)) return false;
        size_t k = open + 2;
        while (k < close && txt[k] == "::" && k + 1 < close &&
               lk[k + 1] == Lex::Identifier)
            k += 2;
        size_t stars = 0;
        while (k < close && (txt[k] == "*" || qualifier_keywords().count(txt[k]))) {
            if (txt[k] == "*") ++stars;
            ++k;
        }
        if (k != close) return false;
        if (stars > 0) return true;
        // single identifier: only a cast when the next token must begin a new
        // operand (binary continuations stay paren expressions)
        if (close + 1 >= sig.size()) return false;
        std::string_view after = txt[close + 1];
        Lex ak = lk[close + 1];
        if (ak == Lex::Number || ak == Lex::String || ak == Lex::CharLit) return true;
        if (ak == Lex::Identifier && !all_keywords().count(after)) return true;
        if (after == "!" || after == "~" || after == "++" || after == "--" ||
            after == "sizeof")
            return true;
        return false;
    }

    uint32_t parse_postfix_chain() {
        uint32_t e = parse_primary();
        if (e == kInvalid) return kInvalid;
        while (!eof()) {
            if (is("(")) {
                std::vector<uint32_t> args{leaf()};
                while (!eof() && !is(")")) {
                    size_t before = pos;
                    uint32_t a = parse_assignment();
                    if (a != kInvalid) args.push_back(a);
                    if (is(",")) {
                        args.push_back(leaf());
                        continue;
                    }
                    if (pos == before) {
                        args.push_back(err_consume());
                    }
                    if (!is(",") && !is(")")) break;
                }
                expect(")", args);
                uint32_t al = make(NodeKind::ArgumentList, std::move(args));
                e = make(NodeKind::CallExpression, {e, al});
            } else if (is("[")) {
                std::vector<uint32_t> k{e, leaf()};
                uint32_t i = parse_expression();
                if (i != kInvalid) k.push_back(i);
                expect("]", k);
                e = make(NodeKind::SubscriptExpression, std::move(k));
            } else if (is(".") || is("->") || is("::")) {
                std::vector<uint32_t> k{e, leaf()};
                if (kat() == Lex::Identifier) k.push_back(leaf());
                e = make(NodeKind::MemberExpression, std::move(k));
            } else if (is("++") || is("--")) {
                e = make(NodeKind::UnaryExpression, {e, leaf()});
            } else {
                break;
            }
        }
        return e;
    }

    uint32_t parse_primary() {
        DepthGuard g(*this);
        if (eof()) return kInvalid;
        if (!g.ok) return err_consume();
        Lex k = kat();
        if (is("(")) {
            if (type_in_parens_at(pos)) {
                std::vector<uint32_t> kk{leaf()};
                parse_type_name(kk);
                expect(")", kk);
                uint32_t operand;
                if (is("{"))
                    operand = parse_initializer(); // compound literal
                else {
                    operand = parse_unary();
                    if (operand == kInvalid) operand = err_empty();
                }
                kk.push_back(operand);
                return make(NodeKind::CastExpression, std::move(kk));
            }
            std::vector<uint32_t> kk{leaf()};
            if (is("{")) {
                kk.push_back(parse_compound());
                expect(")", kk);
                return make(NodeKind::StatementExpression, std::move(kk));
            }
            uint32_t e = parse_expression();
            kk.push_back(e != kInvalid ? e : err_empty());
            expect(")", kk);
            return make(NodeKind::ParenExpression, std::move(kk));
        }
        if (k == Lex::String) {
            uint32_t first = leaf();
            if (kat() != Lex::String) return first;
            std::vector<uint32_t> kk{first};
            while (kat() == Lex::String) kk.push_back(leaf());
            return make(NodeKind::StringConcat, std::move(kk));
        }
        if (k == Lex::Number || k == Lex::CharLit) return leaf();
        if (k == Lex::Identifier) {
            std::string_view cur = at();
            if (statement_keywords().count(cur)) return kInvalid;
            if (decl_keywords().count(cur) && cur != "true" && cur != "false" &&
                cur != "nullptr" && cur != "this")
                return kInvalid;
            return leaf();
        }
        if (is("{")) return parse_initializer();
        return kInvalid;
    }

    // --- top level ---

    void parse_decl_or_fn(std::vector<uint32_t>& out) {
        std::vector<uint32_t> parts;
        uint32_t sp = parse_decl_specifiers();
        if (sp != kInvalid) parts.push_back(sp);
        if (is(";") && sp != kInvalid) {
            parts.push_back(leaf());
            out.push_back(make(NodeKind::Declaration, std::move(parts)));
            return;
        }
        DeclInfo d = parse_declarator(false);
        if (d.node == kInvalid) {
            if (sp == kInvalid) return; // caller makes progress
            parts.push_back(err_empty());
            if (!eof() && !is(";")) parts.push_back(err_consume());
            if (is(";")) parts.push_back(leaf());
            out.push_back(make(NodeKind::Declaration, std::move(parts)));
            return;
        }
        if (is("{") && d.has_params) {
            parts.push_back(d.node);
            parts.push_back(parse_compound());
            out.push_back(make(NodeKind::FunctionDefinition, std::move(parts)));
            return;
        }
        if (d.has_params && !eof() && !is(";") && !is(",") && !is("=") &&
            (is_declaration_start() || decl_keywords().count(at()))) {
            // K&R parameter declarations before the body
            parts.push_back(d.node);
            std::vector<uint32_t> kn;
            while (!eof() && !is("{")) {
                size_t before = pos;
                parse_declaration_stmt(kn);
                if (pos == before) break;
            }
            if (!kn.empty()) parts.push_back(make(NodeKind::KnrDeclarations, std::move(kn)));
            if (is("{")) {
                parts.push_back(parse_compound());
                out.push_back(make(NodeKind::FunctionDefinition, std::move(parts)));
            } else {
                parts.push_back(err_empty());
                out.push_back(make(NodeKind::Declaration, std::move(parts)));
            }
            return;
        }
        // plain declaration with init-declarators
        std::vector<uint32_t> id{d.node};
        if (is("=")) {
            id.push_back(leaf());
            id.push_back(parse_initializer());
        }
        parts.push_back(make(NodeKind::InitDeclarator, std::move(id)));
        while (is(",")) {
            parts.push_back(leaf());
            DeclInfo n = parse_declarator(false);
            std::vector<uint32_t> nid;
            nid.push_back(n.node != kInvalid ? n.node : err_empty());
            if (is("=")) {
                nid.push_back(leaf());
                nid.push_back(parse_initializer());
            }
            parts.push_back(make(NodeKind::InitDeclarator, std::move(nid)));
        }
        expect(";", parts);
        out.push_back(make(NodeKind::Declaration, std::move(parts)));
    }

    SyntaxTree run() {
        std::vector<uint32_t> kids;
        while (!eof()) {
            size_t before = pos;
            if (is("#")) {
                kids.push_back(parse_preproc());
            } else if (is(";")) {
                std::vector<uint32_t> k{leaf()};
                kids.push_back(make(NodeKind::EmptyStatement, std::move(k)));
            } else if (kat() == Lex::Identifier || is("*") || is("(")) {
                parse_decl_or_fn(kids);
            }
            if (pos == before) kids.push_back(err_consume());
        }
        uint32_t f = kInvalid, l = 0;
        for (uint32_t c : kids) {
            if (node_is_empty(c)) continue;
            if (f == kInvalid) f = t.nodes[c].first_raw;
            l = t.nodes[c].last_raw;
        }
        if (f == kInvalid) {
            f = 0;
            l = 0;
        }
        t.nodes.push_back({NodeKind::TranslationUnit, f, l, std::move(kids)});
        t.root = static_cast<uint32_t>(t.nodes.size() - 1);
        weave(t.root);
        while (trivia_ptr < t.raw.size()) {
            uint32_t lf = trivia_leaf(trivia_ptr++);
            t.nodes[t.root].children.push_back(lf);
        }
        if (!t.nodes[t.root].children.empty()) {
            uint32_t first = t.nodes[t.root].children.front();
            uint32_t last = t.nodes[t.root].children.back();
            if (!node_is_empty(first)) t.nodes[t.root].first_raw = t.nodes[first].first_raw;
            t.nodes[t.root].last_raw = t.nodes[last].last_raw;
        }
        return std::move(t);
    }
};

} // namespace

const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Leaf: return "leaf";
        case NodeKind::TranslationUnit: return "translation_unit";
        case NodeKind::FunctionDefinition: return "function_definition";
        case NodeKind::DeclSpecifiers: return "decl_specifiers";
        case NodeKind::Declarator: return "declarator";
        case NodeKind::ParameterList: return "parameter_list";
        case NodeKind::ParameterDeclaration: return "parameter_declaration";
        case NodeKind::KnrDeclarations: return "knr_declarations";
        case NodeKind::CompoundStatement: return "compound_statement";
        case NodeKind::Declaration: return "declaration";
        case NodeKind::InitDeclarator: return "init_declarator";
        case NodeKind::InitializerList: return "initializer_list";
        case NodeKind::IfStatement: return "if_statement";
        case NodeKind::WhileStatement: return "while_statement";
        case NodeKind::DoStatement: return "do_statement";
        case NodeKind::ForStatement: return "for_statement";
        case NodeKind::SwitchStatement: return "switch_statement";
        case NodeKind::CaseLabel: return "case_label";
        case NodeKind::LabeledStatement: return "labeled_statement";
        case NodeKind::ReturnStatement: return "return_statement";
        case NodeKind::BreakStatement: return "break_statement";
        case NodeKind::ContinueStatement: return "continue_statement";
        case NodeKind::GotoStatement: return "goto_statement";
        case NodeKind::ExpressionStatement: return "expression_statement";
        case NodeKind::EmptyStatement: return "empty_statement";
        case NodeKind::CommaExpression: return "comma_expression";
        case NodeKind::AssignmentExpression: return "assignment_expression";
        case NodeKind::ConditionalExpression: return "conditional_expression";
        case NodeKind::BinaryExpression: return "binary_expression";
        case NodeKind::UnaryExpression: return "unary_expression";
        case NodeKind::CallExpression: return "call_expression";
        case NodeKind::ArgumentList: return "argument_list";
        case NodeKind::SubscriptExpression: return "subscript_expression";
        case NodeKind::MemberExpression: return "member_expression";
        case NodeKind::CastExpression: return "cast_expression";
        case NodeKind::ParenExpression: return "paren_expression";
        case NodeKind::SizeofExpression: return "sizeof_expression";
        case NodeKind::StatementExpression: return "statement_expression";
        case NodeKind::StringConcat: return "string_concat";
        case NodeKind::StructSpecifier: return "struct_specifier";
        case NodeKind::EnumSpecifier: return "enum_specifier";
        case NodeKind::Preproc: return "preproc";
        case NodeKind::Error: return "error";
    }
    return "unknown";
}

bool is_keyword(std::string_view word, Language) {
    return all_keywords().count(word) > 0;
}

SyntaxTree parse(std::string_view code, Language lang) {
    Parser p(code, lang);
    return p.run();
}

} // namespace trapeval::syntax
