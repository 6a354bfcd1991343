#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace trapeval {

enum class Language : uint8_t { C, Cpp };

namespace syntax {

enum class Lex : uint8_t {
    Whitespace,
    Comment,
    Identifier,
    Number,
    String,
    CharLit,
    Punct,
    Other,
};

// Raw tokens cover every byte of the input, trivia included.
struct RawToken {
    Lex kind;
    uint32_t begin;
    uint32_t end; // exclusive
};

std::vector<RawToken> lex(std::string_view src);

bool is_trivia(Lex k);

// Significant (non-trivia) tokens with materialized text.
struct Token {
    Lex kind;
    std::string text;
};

std::vector<Token> tokenize(std::string_view code);

enum class NodeKind : uint8_t {
    Leaf,
    TranslationUnit,
    FunctionDefinition,
    DeclSpecifiers,
    Declarator,
    ParameterList,
    ParameterDeclaration,
    KnrDeclarations,
    CompoundStatement,
    Declaration,
    InitDeclarator,
    InitializerList,
    IfStatement,
    WhileStatement,
    DoStatement,
    ForStatement,
    SwitchStatement,
    CaseLabel,
    LabeledStatement,
    ReturnStatement,
    BreakStatement,
    ContinueStatement,
    GotoStatement,
    ExpressionStatement,
    EmptyStatement,
    CommaExpression,
    AssignmentExpression,
    ConditionalExpression,
    BinaryExpression,
    UnaryExpression,
    CallExpression,
    ArgumentList,
    SubscriptExpression,
    MemberExpression,
    CastExpression,
    ParenExpression,
    SizeofExpression,
    StatementExpression,
    StringConcat,
    StructSpecifier,
    EnumSpecifier,
    Preproc,
    Error,
};

const char* node_kind_name(NodeKind k);

struct Node {
    NodeKind kind;
    uint32_t first_raw; // inclusive raw-token range; leaves have first_raw == last_raw
    uint32_t last_raw;
    std::vector<uint32_t> children; // node ids, in source order; empty for leaves
};

struct SyntaxTree {
    Language language = Language::C;
    std::string source;
    std::vector<RawToken> raw;
    std::vector<Node> nodes;
    uint32_t root = 0;
    bool has_error = false;

    std::string_view raw_text(uint32_t tok) const {
        const RawToken& t = raw[tok];
        return std::string_view(source).substr(t.begin, t.end - t.begin);
    }
    // Byte span [begin, end) of a node. Zero-width error markers and an empty
    // root span nothing.
    std::pair<uint32_t, uint32_t> node_span(uint32_t node) const {
        const Node& n = nodes[node];
        if (n.kind != NodeKind::Leaf && n.children.empty()) return {0, 0};
        return {raw[n.first_raw].begin, raw[n.last_raw].end};
    }
    std::string_view node_text(uint32_t node) const {
        auto [b, e] = node_span(node);
        return std::string_view(source).substr(b, e - b);
    }
};

SyntaxTree parse(std::string_view code, Language lang);

struct NoFunctionFound : std::runtime_error {
    NoFunctionFound() : std::runtime_error("no function definition found") {}
};
struct AmbiguousFunction : std::runtime_error {
    AmbiguousFunction() : std::runtime_error("multiple function definitions found") {}
};

// Name of the single top-level function definition.
std::string function_name(const SyntaxTree& t);

// Encoded subtree multiset: one entry per internal node, identifiers
// normalized to varK in first-occurrence order, literals verbatim, trivia
// dropped.
std::map<std::string, uint32_t> subtrees(const SyntaxTree& t);

// Lexical def-use edge. Token positions are ordinals into the significant
// token stream, names normalized the same way subtrees() normalizes them.
struct DataflowEdge {
    std::string name;
    uint32_t def_tok;
    uint32_t use_tok;

    bool operator<(const DataflowEdge& o) const {
        if (name != o.name) return name < o.name;
        if (def_tok != o.def_tok) return def_tok < o.def_tok;
        return use_tok < o.use_tok;
    }
    bool operator==(const DataflowEdge& o) const {
        return name == o.name && def_tok == o.def_tok && use_tok == o.use_tok;
    }
};

std::vector<DataflowEdge> dataflow_edges(const SyntaxTree& t);

bool is_keyword(std::string_view word, Language lang);

enum class RenameTarget : uint8_t { Parameter, Function };

// Byte spans [begin, end) of every identifier occurrence to rewrite when
// renaming a parameter or the function itself: the declaration plus each
// in-scope use. Occurrences after '.', '->' or '::' and uses shadowed by an
// inner redeclaration stay untouched.
std::vector<std::pair<uint32_t, uint32_t>> rename_spans(const SyntaxTree& t,
                                                        std::string_view name,
                                                        RenameTarget target);

// --- queries used by the perturbation layer ---

// Top-level function definition node ids, in source order.
std::vector<uint32_t> function_definitions(const SyntaxTree& t);
// Raw index of the declarator core identifier. UINT32_MAX if none.
uint32_t function_name_token(const SyntaxTree& t, uint32_t fn);
// Raw indices of parameter declaration names, in order.
std::vector<uint32_t> parameter_name_tokens(const SyntaxTree& t, uint32_t fn);
// Body compound statement node id. UINT32_MAX if none.
uint32_t function_body(const SyntaxTree& t, uint32_t fn);
// Byte offsets where a whole statement or comment can be inserted inside the
// body (after '{', after each statement, before '}'), ascending.
std::vector<uint32_t> statement_insertion_offsets(const SyntaxTree& t, uint32_t fn);
// Every identifier token text in the tree.
std::set<std::string> identifier_texts(const SyntaxTree& t);
// Raw indices of names declared by Declaration nodes inside the subtree.
std::vector<uint32_t> declaration_name_tokens(const SyntaxTree& t, uint32_t scope);
// Raw index of the previous significant token before raw index i, or
// UINT32_MAX.
uint32_t previous_significant(const SyntaxTree& t, uint32_t i);

} // namespace syntax
} // namespace trapeval
