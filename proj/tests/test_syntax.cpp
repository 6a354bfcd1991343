#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "trapeval/syntax.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

using namespace trapeval;
using namespace trapeval::syntax;

namespace {

const char* kReadMax =
    "pullf_read_max(PullFilter *pf, int len, uint8 **data_p, uint8 *tmpbuf)\n"
    "{\n"
    "\tint\t\t\tres;\n"
    "\tuint8\t   *tmp = tmpbuf;\n"
    "\n"
    "\twhile (len > 0)\n"
    "\t{\n"
    "\t\tres = pullf_read(pf, len, data_p);\n"
    "\t\tif (res < 0)\n"
    "\t\t\treturn res;\n"
    "\t\tif (res == 0)\n"
    "\t\t\tbreak;\n"
    "\t\tmemcpy(tmp, *data_p, res);\n"
    "\t\ttmp += res;\n"
    "\t\tlen -= res;\n"
    "\t}\n"
    "\treturn tmpbuf - tmp;\n"
    "}\n";

std::vector<uint32_t> leaves_in_order(const SyntaxTree& t) {
    std::vector<uint32_t> out;
    std::vector<uint32_t> stack{t.root};
    // explicit recursion to keep order
    std::function<void(uint32_t)> visit = [&](uint32_t id) {
        const Node& n = t.nodes[id];
        if (n.kind == NodeKind::Leaf) {
            out.push_back(n.first_raw);
            return;
        }
        for (uint32_t c : n.children) visit(c);
    };
    visit(t.root);
    return out;
}

std::string reassemble(const SyntaxTree& t) {
    std::string s;
    for (uint32_t raw : leaves_in_order(t)) s += std::string(t.raw_text(raw));
    return s;
}

void check_lossless(const std::string& code) {
    CAPTURE(code);
    SyntaxTree t = parse(code, Language::C);
    auto leaves = leaves_in_order(t);
    REQUIRE(leaves.size() == t.raw.size());
    for (uint32_t i = 0; i < leaves.size(); ++i) CHECK(leaves[i] == i);
    CHECK(reassemble(t) == code);
}

// significant-token ordinal of the n-th occurrence of `text` (1-based)
uint32_t nth_sig(const std::string& code, const std::string& text, int n) {
    auto toks = tokenize(code);
    int seen = 0;
    for (uint32_t i = 0; i < toks.size(); ++i) {
        if (toks[i].text == text && ++seen == n) return i;
    }
    REQUIRE(false);
    return UINT32_MAX;
}

std::multiset<std::string> edge_set(const std::vector<DataflowEdge>& edges) {
    std::multiset<std::string> out;
    for (const auto& e : edges)
        out.insert(e.name + ":" + std::to_string(e.def_tok) + ":" +
                   std::to_string(e.use_tok));
    return out;
}

} // namespace

TEST_CASE("lexer covers every byte with nonempty tokens") {
    std::string samples[] = {
        kReadMax,
        "int a = 0x1p-3 + 1'000;\n",
        "const wchar_t *w = L\"wide\\\"q\";",
        "char c = u8'x'; // trailing\n/* block\ncomment */",
        "a+++b; a---b;",
        "R\"(raw \" string)\" ;",
        "@ $ ` weird bytes",
        "",
        "   \t\n  ",
        "\"unterminated",
    };
    for (const auto& s : samples) {
        CAPTURE(s);
        auto raw = lex(s);
        size_t offset = 0;
        for (const auto& t : raw) {
            CHECK(t.begin == offset);
            CHECK(t.end > t.begin);
            offset = t.end;
        }
        CHECK(offset == s.size());
    }
}

TEST_CASE("lexer token boundaries") {
    auto toks = tokenize("a+++b");
    REQUIRE(toks.size() == 4);
    CHECK(toks[0].text == "a");
    CHECK(toks[1].text == "++");
    CHECK(toks[2].text == "+");
    CHECK(toks[3].text == "b");

    toks = tokenize("x <<= y >>= z");
    CHECK(toks[1].text == "<<=");
    CHECK(toks[3].text == ">>=");

    toks = tokenize("s->next");
    REQUIRE(toks.size() == 3);
    CHECK(toks[1].text == "->");

    toks = tokenize("L\"wide\" 'c' 12.5e-3 id_0");
    REQUIRE(toks.size() == 4);
    CHECK(toks[0].kind == Lex::String);
    CHECK(toks[1].kind == Lex::CharLit);
    CHECK(toks[2].kind == Lex::Number);
    CHECK(toks[2].text == "12.5e-3");
    CHECK(toks[3].kind == Lex::Identifier);
}

TEST_CASE("tokenize drops trivia and keeps everything else") {
    auto toks = tokenize("int x; // c1\n/* c2 */ x = 1;");
    std::vector<std::string> expect = {"int", "x", ";", "x", "=", "1", ";"};
    REQUIRE(toks.size() == expect.size());
    for (size_t i = 0; i < expect.size(); ++i) {
        CHECK(toks[i].text == expect[i]);
        CHECK(!toks[i].text.empty());
    }
}

TEST_CASE("parse round-trips byte-exactly") {
    check_lossless(kReadMax);
    check_lossless("");
    check_lossless("   \n\t");
    check_lossless("int x;");
    check_lossless("static inline unsigned g (int a) { return a; }");
    check_lossless("int f(void) { for (int i = 0; i < 3; i++) { s += i; } return s; }");
    check_lossless("void h() { do { x--; } while (x > 0); }");
    check_lossless("int k(int n) { switch (n) { case 1: return 2; default: break; } return 0; }");
    check_lossless("int q(int a) { return a > 0 ? a : -a; }");
    check_lossless("void p(char *d, const char *s, size_t n) { memcpy(d, s, n); }");
    check_lossless("struct pt { int x, y; };\ntypedef unsigned char uint8;\n");
    check_lossless("int f(S *s) { return s->a.b[2]; }");
    check_lossless("int f(void) { int a[3] = {1, 2, 3}; struct P p = {.x = 1}; return a[0] + p.x; }");
    check_lossless("#define MAX 10\nint f(void) { return MAX; }\n");
    check_lossless("int foo(a, b) int a; int b; { return a + b; }");
    check_lossless("size_t f(void) { return sizeof(struct obj *); }");
    check_lossless("int f(void) { return (int)(a + b) * (len) - res; }");
    check_lossless("int broken(int a { return a; }");
    check_lossless("int f() { if (a ");
    check_lossless("}}} ;;; int 42 @");
    check_lossless("void f() { goto out; out: return; }");
    check_lossless("int f() { return ({ int t = 1; t; }); }");
    check_lossless("char *s = \"a\" \"b\";");
}

TEST_CASE("error flag tracks error nodes exactly") {
    std::string cases_ok[] = {
        kReadMax,
        "int f(void) { return 0; }",
        "static inline unsigned g (int a) { return a; }",
        "int foo(a, b) int a; int b; { return a + b; }",
        "#define X 1\nint f(void) { return X; }\n",
    };
    std::string cases_bad[] = {
        "int broken(int a { return a; }",
        "int f() { if (a ",
        "int f() { @ }",
        "int f() { x = ; }",
    };
    auto count_error_nodes = [](const SyntaxTree& t) {
        size_t n = 0;
        for (const auto& node : t.nodes)
            if (node.kind == NodeKind::Error) ++n;
        return n;
    };
    for (const auto& s : cases_ok) {
        CAPTURE(s);
        SyntaxTree t = parse(s, Language::C);
        CHECK(!t.has_error);
        CHECK(count_error_nodes(t) == 0);
    }
    for (const auto& s : cases_bad) {
        CAPTURE(s);
        SyntaxTree t = parse(s, Language::C);
        CHECK(t.has_error);
        CHECK(count_error_nodes(t) > 0);
    }
}

TEST_CASE("node spans are contiguous and nested") {
    SyntaxTree t = parse(kReadMax, Language::C);
    for (uint32_t id = 0; id < t.nodes.size(); ++id) {
        const Node& n = t.nodes[id];
        if (n.kind != NodeKind::Leaf && n.children.empty()) continue; // zero-width marker
        auto [b, e] = t.node_span(id);
        CHECK(b <= e);
        uint32_t prev_end = b;
        for (uint32_t c : n.children) {
            if (t.nodes[c].kind != NodeKind::Leaf && t.nodes[c].children.empty()) continue;
            auto [cb, ce] = t.node_span(c);
            CHECK(cb == prev_end); // children tile the parent without gaps
            prev_end = ce;
        }
        if (!n.children.empty()) CHECK(prev_end == e);
    }
}

TEST_CASE("function name extraction") {
    CHECK(function_name(parse("static inline unsigned g (int a) { return a; }",
                              Language::C)) == "g");
    CHECK(function_name(parse(kReadMax, Language::C)) == "pullf_read_max");
    CHECK(function_name(parse("int foo(a, b) int a; int b; { return a + b; }",
                              Language::C)) == "foo");
    CHECK(function_name(parse("int *alloc_buf(size_t n) { return malloc(n); }",
                              Language::C)) == "alloc_buf");
    CHECK_THROWS_AS(function_name(parse("int x;", Language::C)), NoFunctionFound);
    CHECK_THROWS_AS(function_name(parse("", Language::C)), NoFunctionFound);
    CHECK_THROWS_AS(
        function_name(parse("int f(void) { return 0; }\nint g(void) { return 1; }",
                            Language::C)),
        AmbiguousFunction);
}

TEST_CASE("parameter names") {
    SyntaxTree t = parse(kReadMax, Language::C);
    auto fns = function_definitions(t);
    REQUIRE(fns.size() == 1);
    auto params = parameter_name_tokens(t, fns[0]);
    std::vector<std::string> names;
    for (uint32_t raw : params) names.push_back(std::string(t.raw_text(raw)));
    CHECK(names == std::vector<std::string>{"pf", "len", "data_p", "tmpbuf"});

    SyntaxTree t2 = parse("int f(void) { return 0; }", Language::C);
    CHECK(parameter_name_tokens(t2, function_definitions(t2)[0]).empty());

    SyntaxTree t3 = parse("int max3(int a, int b, int c) { return a; }", Language::C);
    CHECK(parameter_name_tokens(t3, function_definitions(t3)[0]).size() == 3);
}

TEST_CASE("statement insertion offsets stay inside braces and reparse clean") {
    std::string code =
        "int f(int a) { int b = a; if (a) { b = 2; } return b; }";
    SyntaxTree t = parse(code, Language::C);
    auto fns = function_definitions(t);
    REQUIRE(fns.size() == 1);
    auto offsets = statement_insertion_offsets(t, fns[0]);
    CHECK(offsets.size() >= 7);
    auto [bb, be] = t.node_span(function_body(t, fns[0]));
    for (uint32_t off : offsets) {
        CHECK(off > bb);
        CHECK(off < be + 1);
        std::string edited = code.substr(0, off) + " if (0) { ; } " + code.substr(off);
        SyntaxTree t2 = parse(edited, Language::C);
        CAPTURE(edited);
        CHECK(!t2.has_error);
    }
}

TEST_CASE("subtree multiset is stable under alpha renaming") {
    auto a = subtrees(parse("int f(int a) { int b = a + 1; return b; }", Language::C));
    auto b = subtrees(parse("int f(int x) { int y = x + 1; return y; }", Language::C));
    auto c = subtrees(parse("int zz(int x) { int y = x + 1; return y; }", Language::C));
    CHECK(a == b);
    CHECK(a == c);
    auto d = subtrees(parse("int f(int a) { int b = a - 1; return b; }", Language::C));
    CHECK(a != d);
}

TEST_CASE("subtree multiset ignores trivia") {
    auto a = subtrees(parse("int f(int a) { return a; }", Language::C));
    auto b = subtrees(
        parse("int f(/* arg */ int a) {\n  // body\n  return a;\n}", Language::C));
    CHECK(a == b);
}

TEST_CASE("subtree encodings look like s-expressions over normalized leaves") {
    auto m = subtrees(parse("int f(int a) { return a; }", Language::C));
    bool found_return = false;
    for (const auto& [enc, count] : m) {
        if (enc.find("(return_statement") == 0) {
            found_return = true;
            CHECK(enc == "(return_statement return var1 ;)");
            CHECK(count == 1);
        }
    }
    CHECK(found_return);
}

TEST_CASE("dataflow edges connect reads to most recent defs") {
    std::string code = "int f(int a) { int b = a + 1; b = b + a; return b; }";
    auto edges = dataflow_edges(parse(code, Language::C));
    uint32_t a_def = nth_sig(code, "a", 1);
    uint32_t b_def1 = nth_sig(code, "b", 1);
    uint32_t a_use1 = nth_sig(code, "a", 2);
    uint32_t b_def2 = nth_sig(code, "b", 2);
    uint32_t b_use1 = nth_sig(code, "b", 3);
    uint32_t a_use2 = nth_sig(code, "a", 3);
    uint32_t b_use2 = nth_sig(code, "b", 4);
    std::multiset<std::string> expect = {
        "var1:" + std::to_string(a_def) + ":" + std::to_string(a_use1),
        "var2:" + std::to_string(b_def1) + ":" + std::to_string(b_use1),
        "var1:" + std::to_string(a_def) + ":" + std::to_string(a_use2),
        "var2:" + std::to_string(b_def2) + ":" + std::to_string(b_use2),
    };
    CHECK(edge_set(edges) == expect);
}

TEST_CASE("dataflow is stable under alpha renaming") {
    auto e1 = dataflow_edges(
        parse("int f(int a) { int b = a + 1; b = b + a; return b; }", Language::C));
    auto e2 = dataflow_edges(
        parse("int f(int q) { int w = q + 1; w = w + q; return w; }", Language::C));
    auto s1 = e1;
    auto s2 = e2;
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    CHECK(s1 == s2);
}

TEST_CASE("dataflow skips struct fields") {
    // identifiers in first-occurrence order: f=var0, S=var1, p=var2, len=var3
    std::string code = "int f(S *p) { p->len = 3; return p->len; }";
    auto edges = dataflow_edges(parse(code, Language::C));
    for (const auto& e : edges) CHECK(e.name != "var3"); // len is a field, never read
    // both p occurrences read the parameter
    uint32_t p_def = nth_sig(code, "p", 1);
    std::multiset<std::string> expect = {
        "var2:" + std::to_string(p_def) + ":" + std::to_string(nth_sig(code, "p", 2)),
        "var2:" + std::to_string(p_def) + ":" + std::to_string(nth_sig(code, "p", 3)),
    };
    CHECK(edge_set(edges) == expect);
}

TEST_CASE("dataflow respects block scoping") {
    std::string code = "int f(int a) { { int a = 2; a = a + 1; } return a; }";
    auto edges = dataflow_edges(parse(code, Language::C));
    uint32_t param_def = nth_sig(code, "a", 1);
    uint32_t inner_def = nth_sig(code, "a", 2);
    uint32_t inner_use = nth_sig(code, "a", 4);
    uint32_t inner_redef = nth_sig(code, "a", 3);
    uint32_t outer_use = nth_sig(code, "a", 5);
    (void)inner_redef;
    std::multiset<std::string> expect = {
        // a = a + 1 reads the inner declaration
        "var1:" + std::to_string(inner_def) + ":" + std::to_string(inner_use),
        // return a sees the parameter again
        "var1:" + std::to_string(param_def) + ":" + std::to_string(outer_use),
    };
    CHECK(edge_set(edges) == expect);
}

TEST_CASE("dataflow on the buffer loop") {
    auto edges = dataflow_edges(parse(kReadMax, Language::C));
    CHECK(!edges.empty());
    // len -= res both reads and redefines len; res feeds several reads
    std::string code = kReadMax;
    uint32_t len_param = nth_sig(code, "len", 1);
    bool found_len_read = false;
    for (const auto& e : edges)
        if (e.def_tok == len_param) found_len_read = true;
    CHECK(found_len_read);
}

TEST_CASE("parse is deterministic") {
    for (const char* code : {kReadMax, "int f(int a) { return a; }"}) {
        SyntaxTree t1 = parse(code, Language::C);
        SyntaxTree t2 = parse(code, Language::C);
        REQUIRE(t1.nodes.size() == t2.nodes.size());
        for (uint32_t i = 0; i < t1.nodes.size(); ++i) {
            CHECK(t1.nodes[i].kind == t2.nodes[i].kind);
            CHECK(t1.nodes[i].children == t2.nodes[i].children);
        }
    }
}

TEST_CASE("declaration names inside a scope") {
    std::string code = "int f(int a) { int b = 1; for (int i = 0; i < a; i++) { int c = i; } return b; }";
    SyntaxTree t = parse(code, Language::C);
    auto fns = function_definitions(t);
    auto decls = declaration_name_tokens(t, function_body(t, fns[0]));
    std::vector<std::string> names;
    for (uint32_t raw : decls) names.push_back(std::string(t.raw_text(raw)));
    std::sort(names.begin(), names.end());
    CHECK(names == std::vector<std::string>{"b", "c", "i"});
}
