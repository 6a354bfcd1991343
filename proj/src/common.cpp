#include "trapeval/common.hpp"
#include "trapeval/rng.hpp"

#include <fstream>
#include <sstream>

namespace trapeval {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write: " + path);
}

std::string normalize_code(std::string_view code) {
    std::string out;
    out.reserve(code.size() + 1);
    std::string line;
    auto flush_line = [&] {
        size_t end = line.size();
        while (end > 0 && (line[end - 1] == ' ' || line[end - 1] == '\t' || line[end - 1] == '\r'))
            --end;
        out.append(line, 0, end);
        out.push_back('\n');
        line.clear();
    };
    for (char c : code) {
        if (c == '\n')
            flush_line();
        else
            line.push_back(c);
    }
    if (!line.empty()) flush_line();
    // Collapse any run of blank lines at the very end to the single trailing \n.
    while (out.size() >= 2 && out[out.size() - 1] == '\n' && out[out.size() - 2] == '\n')
        out.pop_back();
    if (out.empty()) out = "\n";
    return out;
}

uint64_t mix_seed(uint64_t base, std::string_view tag, uint64_t ordinal) {
    uint64_t h = 0xcbf29ce484222325ull;
    auto eat = [&](uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (i * 8)) & 0xff;
            h *= 0x100000001b3ull;
        }
    };
    eat(base);
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    eat(ordinal);
    // splitmix finalizer
    h ^= h >> 30;
    h *= 0xBF58476D1CE4E5B9ull;
    h ^= h >> 27;
    h *= 0x94D049BB133111EBull;
    h ^= h >> 31;
    return h;
}

} // namespace trapeval
