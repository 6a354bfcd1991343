#include "trapeval/syntax.hpp"

namespace trapeval::syntax {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_cont(char c) { return is_ident_start(c) || is_digit(c); }

// Longest-match punctuator table. Three-char first.
const char* const kPunct3[] = {"<<=", ">>=", "...", "->*"};
const char* const kPunct2[] = {"->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
                               "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "^=",
                               "|=", "##", "::", ".*"};
const char kPunct1[] = "[](){}<>.,;:?~!%^&*-+=|/#";

size_t punct_len(std::string_view s) {
    for (const char* p : kPunct3)
        if (s.substr(0, 3) == p) return 3;
    for (const char* p : kPunct2)
        if (s.substr(0, 2) == p) return 2;
    for (char c : kPunct1)
        if (!s.empty() && s[0] == c) return 1;
    return 0;
}

// Scans a quoted literal starting at the opening quote; returns index one
// past the closing quote (or end on unterminated input).
size_t scan_quoted(std::string_view src, size_t i, char quote) {
    ++i; // opening quote
    while (i < src.size()) {
        char c = src[i];
        if (c == '\\' && i + 1 < src.size()) {
            i += 2;
            continue;
        }
        ++i;
        if (c == quote) break;
    }
    return i;
}

// R"delim( ... )delim"  — i points at the opening '"'.
size_t scan_raw_string(std::string_view src, size_t i) {
    size_t d0 = i + 1;
    size_t d1 = d0;
    while (d1 < src.size() && src[d1] != '(' && src[d1] != '"' && !is_space(src[d1]) &&
           d1 - d0 < 16)
        ++d1;
    if (d1 >= src.size() || src[d1] != '(') return scan_quoted(src, i, '"');
    std::string closer = ")" + std::string(src.substr(d0, d1 - d0)) + "\"";
    size_t pos = src.find(closer, d1 + 1);
    if (pos == std::string_view::npos) return src.size();
    return pos + closer.size();
}

bool is_literal_prefix(std::string_view id) {
    return id == "L" || id == "u" || id == "U" || id == "u8";
}

} // namespace

bool is_trivia(Lex k) { return k == Lex::Whitespace || k == Lex::Comment; }

std::vector<RawToken> lex(std::string_view src) {
    std::vector<RawToken> out;
    size_t i = 0;
    auto push = [&](Lex kind, size_t begin, size_t end) {
        out.push_back({kind, static_cast<uint32_t>(begin), static_cast<uint32_t>(end)});
    };
    while (i < src.size()) {
        size_t start = i;
        char c = src[i];
        if (is_space(c)) {
            while (i < src.size() && is_space(src[i])) ++i;
            push(Lex::Whitespace, start, i);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            i += 2;
            while (i < src.size() && src[i] != '\n') ++i;
            push(Lex::Comment, start, i);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
            size_t pos = src.find("*/", i + 2);
            i = pos == std::string_view::npos ? src.size() : pos + 2;
            push(Lex::Comment, start, i);
            continue;
        }
        if (is_ident_start(c)) {
            while (i < src.size() && is_ident_cont(src[i])) ++i;
            std::string_view id = src.substr(start, i - start);
            if (i < src.size()) {
                if (src[i] == '"' && is_literal_prefix(id)) {
                    i = scan_quoted(src, i, '"');
                    push(Lex::String, start, i);
                    continue;
                }
                if (src[i] == '"' && (id == "R" || id == "LR" || id == "uR" || id == "UR" ||
                                      id == "u8R")) {
                    i = scan_raw_string(src, i);
                    push(Lex::String, start, i);
                    continue;
                }
                if (src[i] == '\'' && is_literal_prefix(id)) {
                    i = scan_quoted(src, i, '\'');
                    push(Lex::CharLit, start, i);
                    continue;
                }
            }
            push(Lex::Identifier, start, i);
            continue;
        }
        if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
            ++i;
            while (i < src.size()) {
                char d = src[i];
                if (is_ident_cont(d) || d == '.') {
                    ++i;
                    continue;
                }
                if ((d == '+' || d == '-') && i > start) {
                    char prev = src[i - 1];
                    if (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P') {
                        ++i;
                        continue;
                    }
                }
                if (d == '\'' && i + 1 < src.size() && is_ident_cont(src[i + 1]) &&
                    is_ident_cont(src[i - 1])) {
                    ++i;
                    continue;
                }
                break;
            }
            push(Lex::Number, start, i);
            continue;
        }
        if (c == '"') {
            i = scan_quoted(src, i, '"');
            push(Lex::String, start, i);
            continue;
        }
        if (c == '\'') {
            i = scan_quoted(src, i, '\'');
            push(Lex::CharLit, start, i);
            continue;
        }
        size_t pl = punct_len(src.substr(i));
        if (pl > 0) {
            i += pl;
            push(Lex::Punct, start, i);
            continue;
        }
        ++i;
        push(Lex::Other, start, i);
    }
    return out;
}

std::vector<Token> tokenize(std::string_view code) {
    std::vector<Token> out;
    for (const RawToken& t : lex(code)) {
        if (is_trivia(t.kind)) continue;
        out.push_back({t.kind, std::string(code.substr(t.begin, t.end - t.begin))});
    }
    return out;
}

} // namespace trapeval::syntax
