#include "trapeval/syntax.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

namespace trapeval::syntax {

namespace {

bool is_empty_node(const SyntaxTree& t, uint32_t id) {
    const Node& n = t.nodes[id];
    return n.kind != NodeKind::Leaf && n.children.empty();
}

bool is_leaf(const SyntaxTree& t, uint32_t id) { return t.nodes[id].kind == NodeKind::Leaf; }

bool is_trivia_leaf(const SyntaxTree& t, uint32_t id) {
    return is_leaf(t, id) && is_trivia(t.raw[t.nodes[id].first_raw].kind);
}

// Children with whitespace/comment leaves dropped; zero-width errors kept.
std::vector<uint32_t> sig_children(const SyntaxTree& t, uint32_t id) {
    std::vector<uint32_t> out;
    for (uint32_t c : t.nodes[id].children)
        if (!is_trivia_leaf(t, c)) out.push_back(c);
    return out;
}

// First-occurrence identifier index over significant tokens; keywords keep
// their spelling.
std::unordered_map<std::string_view, uint32_t> var_map(const SyntaxTree& t) {
    std::unordered_map<std::string_view, uint32_t> m;
    for (uint32_t i = 0; i < t.raw.size(); ++i) {
        if (t.raw[i].kind != Lex::Identifier) continue;
        std::string_view s = t.raw_text(i);
        if (is_keyword(s, t.language)) continue;
        m.emplace(s, static_cast<uint32_t>(m.size()));
    }
    return m;
}

// Core identifier of a declarator: skips pointers and qualifiers, descends
// into parenthesized declarators.
uint32_t declarator_name(const SyntaxTree& t, uint32_t decl_node) {
    const Node& n = t.nodes[decl_node];
    for (size_t i = 0; i < n.children.size(); ++i) {
        uint32_t c = n.children[i];
        if (is_leaf(t, c)) {
            uint32_t raw = t.nodes[c].first_raw;
            if (t.raw[raw].kind == Lex::Identifier &&
                !is_keyword(t.raw_text(raw), t.language))
                return raw;
            continue;
        }
        if (t.nodes[c].kind == NodeKind::Declarator) {
            uint32_t inner = declarator_name(t, c);
            if (inner != UINT32_MAX) return inner;
        }
        if (t.nodes[c].kind == NodeKind::ParameterList) break;
    }
    return UINT32_MAX;
}

uint32_t find_child(const SyntaxTree& t, uint32_t id, NodeKind k) {
    for (uint32_t c : t.nodes[id].children)
        if (t.nodes[c].kind == k) return c;
    return UINT32_MAX;
}

uint32_t find_in_subtree(const SyntaxTree& t, uint32_t id, NodeKind k) {
    if (t.nodes[id].kind == k) return id;
    for (uint32_t c : t.nodes[id].children) {
        if (is_leaf(t, c)) continue;
        uint32_t r = find_in_subtree(t, c, k);
        if (r != UINT32_MAX) return r;
    }
    return UINT32_MAX;
}

} // namespace

std::vector<uint32_t> function_definitions(const SyntaxTree& t) {
    std::vector<uint32_t> out;
    for (uint32_t c : t.nodes[t.root].children)
        if (t.nodes[c].kind == NodeKind::FunctionDefinition) out.push_back(c);
    return out;
}

uint32_t function_name_token(const SyntaxTree& t, uint32_t fn) {
    uint32_t d = find_child(t, fn, NodeKind::Declarator);
    if (d == UINT32_MAX) return UINT32_MAX;
    return declarator_name(t, d);
}

uint32_t function_body(const SyntaxTree& t, uint32_t fn) {
    return find_child(t, fn, NodeKind::CompoundStatement);
}

std::vector<uint32_t> parameter_name_tokens(const SyntaxTree& t, uint32_t fn) {
    std::vector<uint32_t> out;
    uint32_t d = find_child(t, fn, NodeKind::Declarator);
    if (d == UINT32_MAX) return out;
    uint32_t pl = find_in_subtree(t, d, NodeKind::ParameterList);
    if (pl == UINT32_MAX) return out;
    for (uint32_t c : t.nodes[pl].children) {
        if (t.nodes[c].kind != NodeKind::ParameterDeclaration) continue;
        uint32_t pd = find_child(t, c, NodeKind::Declarator);
        if (pd == UINT32_MAX) continue;
        uint32_t name = declarator_name(t, pd);
        if (name != UINT32_MAX) out.push_back(name);
    }
    return out;
}

std::string function_name(const SyntaxTree& t) {
    std::vector<uint32_t> fns = function_definitions(t);
    if (fns.empty()) throw NoFunctionFound();
    if (fns.size() > 1) throw AmbiguousFunction();
    uint32_t tok = function_name_token(t, fns[0]);
    if (tok == UINT32_MAX) throw NoFunctionFound();
    return std::string(t.raw_text(tok));
}

std::vector<uint32_t> statement_insertion_offsets(const SyntaxTree& t, uint32_t fn) {
    std::vector<uint32_t> offsets;
    uint32_t body = function_body(t, fn);
    if (body == UINT32_MAX) return offsets;
    // Compounds under a GNU statement expression are skipped: the expression
    // takes the value of its last statement, so appending there would change
    // behavior.
    std::function<void(uint32_t, bool)> visit = [&](uint32_t id, bool in_stmt_expr) {
        const Node& n = t.nodes[id];
        if (n.kind == NodeKind::StatementExpression) in_stmt_expr = true;
        if (n.kind == NodeKind::CompoundStatement && !in_stmt_expr) {
            for (uint32_t c : n.children) {
                if (is_empty_node(t, c)) continue;
                const Node& cn = t.nodes[c];
                if (cn.kind == NodeKind::Leaf) {
                    if (is_trivia_leaf(t, c)) continue;
                    std::string_view s = t.raw_text(cn.first_raw);
                    if (s == "{") offsets.push_back(t.raw[cn.first_raw].end);
                    if (s == "}") offsets.push_back(t.raw[cn.first_raw].begin);
                    continue;
                }
                if (cn.kind != NodeKind::Error)
                    offsets.push_back(t.raw[cn.last_raw].end);
            }
        }
        for (uint32_t c : n.children)
            if (!is_leaf(t, c)) visit(c, in_stmt_expr);
    };
    visit(body, false);
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
    return offsets;
}

std::set<std::string> identifier_texts(const SyntaxTree& t) {
    std::set<std::string> out;
    for (uint32_t i = 0; i < t.raw.size(); ++i)
        if (t.raw[i].kind == Lex::Identifier) out.insert(std::string(t.raw_text(i)));
    return out;
}

std::vector<uint32_t> declaration_name_tokens(const SyntaxTree& t, uint32_t scope) {
    std::vector<uint32_t> out;
    std::function<void(uint32_t)> visit = [&](uint32_t id) {
        const Node& n = t.nodes[id];
        if (n.kind == NodeKind::Declaration) {
            for (uint32_t c : n.children) {
                if (t.nodes[c].kind != NodeKind::InitDeclarator) continue;
                uint32_t d = find_child(t, c, NodeKind::Declarator);
                if (d == UINT32_MAX) continue;
                uint32_t name = declarator_name(t, d);
                if (name != UINT32_MAX) out.push_back(name);
            }
        }
        for (uint32_t c : n.children)
            if (!is_leaf(t, c)) visit(c);
    };
    visit(scope);
    return out;
}

uint32_t previous_significant(const SyntaxTree& t, uint32_t i) {
    while (i > 0) {
        --i;
        if (!is_trivia(t.raw[i].kind)) return i;
    }
    return UINT32_MAX;
}

std::map<std::string, uint32_t> subtrees(const SyntaxTree& t) {
    auto vars = var_map(t);
    std::map<std::string, uint32_t> out;
    std::function<std::string(uint32_t)> encode = [&](uint32_t id) -> std::string {
        const Node& n = t.nodes[id];
        if (n.kind == NodeKind::Leaf) {
            const RawToken& rt = t.raw[n.first_raw];
            if (is_trivia(rt.kind)) return {};
            std::string_view s = t.raw_text(n.first_raw);
            if (rt.kind == Lex::Identifier) {
                auto it = vars.find(s);
                if (it != vars.end()) return "var" + std::to_string(it->second);
            }
            return std::string(s);
        }
        std::string enc = "(";
        enc += node_kind_name(n.kind);
        for (uint32_t c : n.children) {
            std::string ce = encode(c);
            if (ce.empty()) continue;
            enc += ' ';
            enc += ce;
        }
        enc += ')';
        if (!n.children.empty()) {
            auto it = out.find(enc);
            if (it == out.end())
                out.emplace(enc, 1);
            else
                ++it->second;
        }
        return enc;
    };
    encode(t.root);
    return out;
}

namespace {

struct DataflowWalker {
    const SyntaxTree& t;
    std::unordered_map<std::string_view, uint32_t> vars;
    std::unordered_map<uint32_t, uint32_t> sig_ord; // raw index -> ordinal
    std::vector<std::unordered_map<std::string, uint32_t>> scopes;
    std::vector<DataflowEdge> edges;

    explicit DataflowWalker(const SyntaxTree& tree) : t(tree) {
        vars = var_map(t);
        uint32_t ord = 0;
        for (uint32_t i = 0; i < t.raw.size(); ++i)
            if (!is_trivia(t.raw[i].kind)) sig_ord[i] = ord++;
        scopes.emplace_back();
    }

    std::string norm(std::string_view s) const {
        auto it = vars.find(s);
        if (it == vars.end()) return std::string(s);
        return "var" + std::to_string(it->second);
    }

    void push_scope() { scopes.emplace_back(); }
    void pop_scope() { scopes.pop_back(); }

    void define(uint32_t raw_tok) {
        std::string name(t.raw_text(raw_tok));
        scopes.back()[name] = sig_ord.at(raw_tok);
    }

    void read(uint32_t raw_tok) {
        std::string_view s = t.raw_text(raw_tok);
        if (is_keyword(s, t.language)) return;
        std::string name(s);
        for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
            auto f = it->find(name);
            if (f != it->end()) {
                edges.push_back({norm(s), f->second, sig_ord.at(raw_tok)});
                return;
            }
        }
    }

    bool leaf_is(uint32_t id, std::string_view s) const {
        return is_leaf(t, id) && t.raw_text(t.nodes[id].first_raw) == s;
    }

    // Walks an expression subtree emitting reads. Identifier leaves directly
    // after '.', '->' or '::' are member or qualified names and stay out.
    void walk_expr(uint32_t id) {
        const Node& n = t.nodes[id];
        if (n.kind == NodeKind::Leaf) {
            if (t.raw[n.first_raw].kind == Lex::Identifier) read(n.first_raw);
            return;
        }
        switch (n.kind) {
            case NodeKind::DeclSpecifiers:
            case NodeKind::StructSpecifier:
            case NodeKind::EnumSpecifier:
            case NodeKind::Preproc:
            case NodeKind::Error:
                return;
            case NodeKind::CastExpression: {
                // type tokens carry no reads; operand is the last child
                if (!n.children.empty()) walk_expr(n.children.back());
                return;
            }
            case NodeKind::AssignmentExpression: {
                walk_assignment(id);
                return;
            }
            case NodeKind::UnaryExpression: {
                walk_update_or_reads(id);
                return;
            }
            default: break;
        }
        bool prev_member_op = false;
        for (uint32_t c : n.children) {
            if (is_leaf(t, c)) {
                std::string_view s = t.raw_text(t.nodes[c].first_raw);
                if (t.raw[t.nodes[c].first_raw].kind == Lex::Identifier) {
                    if (!prev_member_op) read(t.nodes[c].first_raw);
                    prev_member_op = false;
                } else if (!is_trivia(t.raw[t.nodes[c].first_raw].kind)) {
                    prev_member_op = (s == "." || s == "->" || s == "::");
                }
                continue;
            }
            prev_member_op = false;
            walk_expr(c);
        }
    }

    // lhs of an assignment: a plain identifier is a def (and a read first for
    // compound operators); anything else only reads.
    void walk_assignment(uint32_t id) {
        // significant children are [lhs, op, rhs]; rhs may be a zero-width
        // error marker
        std::vector<uint32_t> kids = sig_children(t, id);
        if (kids.size() < 2) return;
        uint32_t lhs = kids[0];
        std::string_view op;
        if (is_leaf(t, kids[1])) op = t.raw_text(t.nodes[kids[1]].first_raw);
        if (kids.size() >= 3 && !is_empty_node(t, kids[2])) walk_expr(kids[2]);
        if (is_leaf(t, lhs) &&
            t.raw[t.nodes[lhs].first_raw].kind == Lex::Identifier) {
            uint32_t raw = t.nodes[lhs].first_raw;
            if (op != "=") read(raw);
            if (!is_keyword(t.raw_text(raw), t.language)) define(raw);
        } else {
            walk_expr(lhs);
        }
    }

    // ++/-- on a plain identifier reads then redefines it.
    void walk_update_or_reads(uint32_t id) {
        const Node& n = t.nodes[id];
        std::vector<uint32_t> kids = sig_children(t, id);
        uint32_t ident = UINT32_MAX;
        bool update = false;
        for (uint32_t c : kids) {
            if (is_leaf(t, c)) {
                std::string_view s = t.raw_text(t.nodes[c].first_raw);
                if (s == "++" || s == "--") update = true;
                if (t.raw[t.nodes[c].first_raw].kind == Lex::Identifier) ident = c;
            }
        }
        if (update && ident != UINT32_MAX && kids.size() == 2) {
            uint32_t raw = t.nodes[ident].first_raw;
            read(raw);
            if (!is_keyword(t.raw_text(raw), t.language)) define(raw);
            return;
        }
        bool prev_member_op = false;
        for (uint32_t c : n.children) {
            if (is_leaf(t, c)) {
                const RawToken& rt = t.raw[t.nodes[c].first_raw];
                std::string_view s = t.raw_text(t.nodes[c].first_raw);
                if (rt.kind == Lex::Identifier) {
                    if (!prev_member_op) read(t.nodes[c].first_raw);
                    prev_member_op = false;
                } else if (!is_trivia(rt.kind)) {
                    prev_member_op = (s == "." || s == "->" || s == "::");
                }
            } else {
                prev_member_op = false;
                walk_expr(c);
            }
        }
    }

    void walk_declarator_reads(uint32_t id) {
        // array sizes and the like inside a declarator
        const Node& n = t.nodes[id];
        for (uint32_t c : n.children) {
            if (is_leaf(t, c)) continue;
            NodeKind k = t.nodes[c].kind;
            if (k == NodeKind::Declarator)
                walk_declarator_reads(c);
            else if (k != NodeKind::ParameterList && k != NodeKind::DeclSpecifiers)
                walk_expr(c);
        }
    }

    void walk_declaration(uint32_t id) {
        const Node& n = t.nodes[id];
        for (uint32_t c : n.children) {
            if (t.nodes[c].kind != NodeKind::InitDeclarator) continue;
            const Node& idn = t.nodes[c];
            uint32_t decl = UINT32_MAX;
            for (uint32_t cc : idn.children)
                if (t.nodes[cc].kind == NodeKind::Declarator) {
                    decl = cc;
                    break;
                }
            uint32_t name = UINT32_MAX;
            if (decl != UINT32_MAX) {
                walk_declarator_reads(decl);
                name = declarator_name(t, decl);
            }
            bool past_eq = false;
            for (uint32_t cc : idn.children) {
                if (leaf_is(cc, "=")) {
                    past_eq = true;
                    continue;
                }
                if (past_eq && !is_leaf(t, cc)) walk_expr(cc);
            }
            if (name != UINT32_MAX) define(name);
        }
    }

    void walk_stmt(uint32_t id) {
        const Node& n = t.nodes[id];
        switch (n.kind) {
            case NodeKind::Leaf:
            case NodeKind::Error:
            case NodeKind::Preproc:
            case NodeKind::DeclSpecifiers:
            case NodeKind::StructSpecifier:
            case NodeKind::EnumSpecifier:
                return;
            case NodeKind::FunctionDefinition: {
                push_scope();
                uint32_t d = find_child(t, id, NodeKind::Declarator);
                if (d != UINT32_MAX) {
                    uint32_t pl = find_in_subtree(t, d, NodeKind::ParameterList);
                    if (pl != UINT32_MAX) {
                        for (uint32_t c : t.nodes[pl].children) {
                            if (t.nodes[c].kind != NodeKind::ParameterDeclaration)
                                continue;
                            uint32_t pd = find_child(t, c, NodeKind::Declarator);
                            if (pd == UINT32_MAX) continue;
                            walk_declarator_reads(pd);
                            uint32_t name = declarator_name(t, pd);
                            if (name != UINT32_MAX) define(name);
                        }
                    }
                }
                uint32_t kn = find_child(t, id, NodeKind::KnrDeclarations);
                if (kn != UINT32_MAX)
                    for (uint32_t c : t.nodes[kn].children)
                        if (t.nodes[c].kind == NodeKind::Declaration) walk_declaration(c);
                uint32_t body = function_body(t, id);
                if (body != UINT32_MAX) walk_stmt(body);
                pop_scope();
                return;
            }
            case NodeKind::CompoundStatement:
            case NodeKind::ForStatement: {
                push_scope();
                for (uint32_t c : n.children) walk_stmt_child(c);
                pop_scope();
                return;
            }
            case NodeKind::Declaration: {
                walk_declaration(id);
                return;
            }
            case NodeKind::GotoStatement:
                return; // label identifier is not a variable
            case NodeKind::LabeledStatement: {
                // skip the label, walk the statement
                for (uint32_t c : n.children)
                    if (!is_leaf(t, c)) walk_stmt_child(c);
                return;
            }
            case NodeKind::ExpressionStatement:
            case NodeKind::ReturnStatement:
            case NodeKind::IfStatement:
            case NodeKind::WhileStatement:
            case NodeKind::DoStatement:
            case NodeKind::SwitchStatement:
            case NodeKind::CaseLabel: {
                for (uint32_t c : n.children) walk_stmt_child(c);
                return;
            }
            default: {
                walk_expr(id);
                return;
            }
        }
    }

    // statement-context child: statements recurse, expressions read. A bare
    // identifier expression is a single leaf (keyword leaves are filtered by
    // read()).
    void walk_stmt_child(uint32_t c) {
        if (is_leaf(t, c)) {
            uint32_t raw = t.nodes[c].first_raw;
            if (t.raw[raw].kind == Lex::Identifier) read(raw);
            return;
        }
        switch (t.nodes[c].kind) {
            case NodeKind::CompoundStatement:
            case NodeKind::Declaration:
            case NodeKind::IfStatement:
            case NodeKind::WhileStatement:
            case NodeKind::DoStatement:
            case NodeKind::ForStatement:
            case NodeKind::SwitchStatement:
            case NodeKind::CaseLabel:
            case NodeKind::LabeledStatement:
            case NodeKind::ReturnStatement:
            case NodeKind::BreakStatement:
            case NodeKind::ContinueStatement:
            case NodeKind::GotoStatement:
            case NodeKind::ExpressionStatement:
            case NodeKind::EmptyStatement:
            case NodeKind::FunctionDefinition:
                walk_stmt(c);
                return;
            case NodeKind::Error:
            case NodeKind::Preproc:
            case NodeKind::DeclSpecifiers:
            case NodeKind::StructSpecifier:
            case NodeKind::EnumSpecifier:
            case NodeKind::KnrDeclarations:
                return;
            default:
                walk_expr(c);
                return;
        }
    }

    std::vector<DataflowEdge> run() {
        for (uint32_t c : t.nodes[t.root].children) walk_stmt_child(c);
        return std::move(edges);
    }
};

} // namespace

std::vector<DataflowEdge> dataflow_edges(const SyntaxTree& t) {
    DataflowWalker w(t);
    return w.run();
}

namespace {

// Collects the byte spans a parameter or function rename must rewrite.
// Scopes are a stack of "target redeclared here" flags; once any enclosing
// scope redeclares the name, occurrences belong to the inner entity.
struct RenameWalker {
    const SyntaxTree& t;
    std::string_view name;
    std::vector<bool> shadow;
    std::vector<std::pair<uint32_t, uint32_t>> spans;

    RenameWalker(const SyntaxTree& tree, std::string_view target)
        : t(tree), name(target) {}

    bool shadowed() const {
        return std::any_of(shadow.begin(), shadow.end(), [](bool b) { return b; });
    }

    bool member_position(uint32_t raw_idx) const {
        uint32_t prev = previous_significant(t, raw_idx);
        if (prev == UINT32_MAX) return false;
        std::string_view s = t.raw_text(prev);
        return s == "." || s == "->" || s == "::";
    }

    void maybe_record(uint32_t leaf_id) {
        uint32_t raw = t.nodes[leaf_id].first_raw;
        if (t.raw[raw].kind != Lex::Identifier) return;
        if (t.raw_text(raw) != name) return;
        if (member_position(raw) || shadowed()) return;
        spans.emplace_back(t.raw[raw].begin, t.raw[raw].end);
    }

    void record_token(uint32_t raw) {
        spans.emplace_back(t.raw[raw].begin, t.raw[raw].end);
    }

    // A local declarator: its core name shadows the target from here on,
    // while array-size or initializer expressions inside still use it.
    void walk_declarator(uint32_t d) {
        uint32_t core = declarator_name(t, d);
        const Node& n = t.nodes[d];
        for (uint32_t c : n.children) {
            if (is_leaf(t, c)) {
                uint32_t raw = t.nodes[c].first_raw;
                if (raw == core) {
                    if (t.raw_text(raw) == name) shadow.back() = true;
                } else {
                    maybe_record(c);
                }
                continue;
            }
            if (t.nodes[c].kind == NodeKind::Declarator) walk_declarator(c);
            else if (t.nodes[c].kind == NodeKind::ParameterList) walk(c);
            else if (t.nodes[c].kind != NodeKind::DeclSpecifiers) walk(c);
        }
    }

    void walk_declaration(uint32_t id) {
        for (uint32_t c : t.nodes[id].children) {
            if (is_leaf(t, c)) continue;
            const Node& cn = t.nodes[c];
            if (cn.kind == NodeKind::InitDeclarator) {
                for (uint32_t cc : cn.children) {
                    // a single-token initializer sits here as a bare leaf
                    if (is_leaf(t, cc)) maybe_record(cc);
                    else if (t.nodes[cc].kind == NodeKind::Declarator) walk_declarator(cc);
                    else walk(cc);
                }
            } else if (cn.kind != NodeKind::DeclSpecifiers) {
                walk(c);
            }
        }
    }

    void walk(uint32_t id) {
        const Node& n = t.nodes[id];
        switch (n.kind) {
            case NodeKind::Leaf:
                maybe_record(id);
                return;
            case NodeKind::Error:
            case NodeKind::Preproc:
            case NodeKind::DeclSpecifiers:
            case NodeKind::StructSpecifier:
            case NodeKind::EnumSpecifier:
            case NodeKind::GotoStatement:
                return;
            case NodeKind::CompoundStatement:
            case NodeKind::ForStatement: {
                shadow.push_back(false);
                for (uint32_t c : n.children) walk(c);
                shadow.pop_back();
                return;
            }
            case NodeKind::ParameterList: {
                // a nested prototype opens its own scope; its parameter
                // names belong to that prototype, not to the target
                shadow.push_back(false);
                for (uint32_t c : n.children) {
                    if (t.nodes[c].kind != NodeKind::ParameterDeclaration) continue;
                    uint32_t pd = find_child(t, c, NodeKind::Declarator);
                    if (pd != UINT32_MAX) walk_declarator(pd);
                }
                shadow.pop_back();
                return;
            }
            case NodeKind::Declaration: {
                walk_declaration(id);
                return;
            }
            case NodeKind::LabeledStatement: {
                // skip the label identifier, walk the statement
                bool past_colon = false;
                for (uint32_t c : n.children) {
                    if (!past_colon && is_leaf(t, c)) {
                        if (t.raw_text(t.nodes[c].first_raw) == ":") past_colon = true;
                        continue;
                    }
                    walk(c);
                }
                return;
            }
            case NodeKind::CastExpression: {
                // identifiers before the closing paren are type names
                bool past_close = false;
                for (uint32_t c : n.children) {
                    if (is_leaf(t, c)) {
                        if (past_close) maybe_record(c);
                        else if (t.raw_text(t.nodes[c].first_raw) == ")") past_close = true;
                        continue;
                    }
                    if (past_close || (t.nodes[c].kind != NodeKind::DeclSpecifiers &&
                                       t.nodes[c].kind != NodeKind::StructSpecifier &&
                                       t.nodes[c].kind != NodeKind::EnumSpecifier)) {
                        walk(c);
                    }
                }
                return;
            }
            default: {
                for (uint32_t c : n.children) walk(c);
                return;
            }
        }
    }

    void walk_function(uint32_t fn, RenameTarget target) {
        shadow.push_back(false);
        uint32_t name_tok = function_name_token(t, fn);
        if (target == RenameTarget::Function && name_tok != UINT32_MAX &&
            t.raw_text(name_tok) == name) {
            record_token(name_tok);
        }
        if (target == RenameTarget::Parameter) {
            for (uint32_t p : parameter_name_tokens(t, fn)) {
                if (t.raw_text(p) == name) record_token(p);
            }
            uint32_t kn = find_child(t, fn, NodeKind::KnrDeclarations);
            if (kn != UINT32_MAX) {
                // K&R parameter declarations re-mention the parameter
                for (uint32_t d : declaration_name_tokens(t, kn)) {
                    if (t.raw_text(d) == name) record_token(d);
                }
            }
        }
        uint32_t body = function_body(t, fn);
        if (body != UINT32_MAX) walk(body);
        shadow.pop_back();
    }
};

} // namespace

std::vector<std::pair<uint32_t, uint32_t>> rename_spans(const SyntaxTree& t,
                                                        std::string_view name,
                                                        RenameTarget target) {
    RenameWalker w(t, name);
    for (uint32_t c : t.nodes[t.root].children) {
        if (t.nodes[c].kind == NodeKind::FunctionDefinition) {
            w.walk_function(c, target);
        }
    }
    std::sort(w.spans.begin(), w.spans.end());
    w.spans.erase(std::unique(w.spans.begin(), w.spans.end()), w.spans.end());
    return w.spans;
}

} // namespace trapeval::syntax
