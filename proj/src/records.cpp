#include "spectralkit/records.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "spectralkit/errors.hpp"

namespace spectralkit {

namespace {

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    std::string out = buf;
    // Keep the double type on read-back: "4" or "-0" would re-lex as an
    // integer, so integral renderings get a ".0" suffix.
    const char* begin = out.c_str();
    char* end = nullptr;
    (void)std::strtoll(begin, &end, 10);
    if (end == begin + out.size()) out += ".0";
    return out;
}

// True when strtod consumes the whole token (covers inf/nan spellings).
bool lexes_as_number(const std::string& s) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    std::strtod(begin, &end);
    return end == begin + s.size();
}

bool needs_quoting(const std::string& s) {
    if (s.empty() || lexes_as_number(s)) return true;
    if (s.front() == '[' || s.front() == '"') return true;
    for (char c : s)
        if (c == ' ' || c == '=' || c == '"' || c == '\\' || c == '\n' || c == '\t' ||
            static_cast<unsigned char>(c) < 0x20)
            return true;
    return false;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

std::string format_value(const NdValue& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&v)) return format_g17(*d);
    if (const auto* s = std::get_if<std::string>(&v))
        return needs_quoting(*s) ? quote(*s) : *s;
    const auto& list = std::get<std::vector<double>>(v);
    std::string out = "[";
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (i) out += ',';
        out += format_g17(list[i]);
    }
    out += ']';
    return out;
}

// Cursor over one line during parsing.
struct Cursor {
    const std::string& line;
    std::size_t pos = 0;

    bool done() const { return pos >= line.size(); }
    char peek() const { return line[pos]; }

    void skip_spaces() {
        while (!done() && line[pos] == ' ') ++pos;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(what, 1, pos + 1);
    }

    std::string read_key() {
        std::size_t start = pos;
        while (!done() && line[pos] != '=' && line[pos] != ' ') ++pos;
        if (done() || line[pos] != '=') fail("expected '=' after record key");
        std::string key = line.substr(start, pos - start);
        if (key.empty()) fail("empty record key");
        ++pos;
        return key;
    }

    std::string read_quoted() {
        ++pos;  // opening quote
        std::string out;
        while (true) {
            if (done()) fail("unterminated quoted string");
            char c = line[pos++];
            if (c == '"') return out;
            if (c == '\\') {
                if (done()) fail("dangling escape");
                char e = line[pos++];
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    default: fail("unknown escape in quoted string");
                }
            } else {
                out += c;
            }
        }
    }

    std::string read_bare() {
        std::size_t start = pos;
        while (!done() && line[pos] != ' ') ++pos;
        return line.substr(start, pos - start);
    }

    double read_list_number() {
        const char* begin = line.c_str() + pos;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("expected number in list");
        pos += static_cast<std::size_t>(end - begin);
        return v;
    }

    NdValue read_value() {
        if (done() || peek() == ' ') fail("missing record value");
        if (peek() == '"') return read_quoted();
        if (peek() == '[') {
            ++pos;
            std::vector<double> list;
            if (!done() && peek() == ']') {
                ++pos;
                return list;
            }
            while (true) {
                list.push_back(read_list_number());
                if (done()) fail("unterminated list");
                char c = line[pos++];
                if (c == ']') return list;
                if (c != ',') fail("expected ',' or ']' in list");
            }
        }
        std::string token = read_bare();
        {
            const char* begin = token.c_str();
            char* end = nullptr;
            long long i = std::strtoll(begin, &end, 10);
            if (end == begin + token.size()) return static_cast<std::int64_t>(i);
        }
        if (lexes_as_number(token)) return std::strtod(token.c_str(), nullptr);
        return token;
    }
};

}  // namespace

std::string format_ndrec_line(const NdRecord& record) {
    std::string out;
    for (std::size_t i = 0; i < record.size(); ++i) {
        if (i) out += ' ';
        out += record[i].first;
        out += '=';
        out += format_value(record[i].second);
    }
    return out;
}

NdRecord parse_ndrec_line(const std::string& line) {
    NdRecord record;
    Cursor cur{line};
    cur.skip_spaces();
    while (!cur.done()) {
        std::string key = cur.read_key();
        record.emplace_back(std::move(key), cur.read_value());
        cur.skip_spaces();
    }
    return record;
}

NdrecWriter::NdrecWriter(const std::string& path) : path_(path) {
    out_.open(path, std::ios::app);
    if (!out_) throw IoError("cannot open '" + path + "' for append");
}

void NdrecWriter::write(const NdRecord& record) {
    out_ << format_ndrec_line(record) << '\n';
    out_.flush();
    if (!out_) throw IoError("write failed on '" + path_ + "'");
}

std::vector<NdRecord> read_ndrec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<NdRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(' ') == std::string::npos) continue;
        records.push_back(parse_ndrec_line(line));
    }
    return records;
}

const NdValue* find_field(const NdRecord& record, const std::string& key) {
    for (const auto& [k, v] : record)
        if (k == key) return &v;
    return nullptr;
}

double get_double_field(const NdRecord& record, const std::string& key) {
    const NdValue* v = find_field(record, key);
    if (!v) throw IoError("record has no field '" + key + "'");
    if (const auto* d = std::get_if<double>(v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
    throw IoError("record field '" + key + "' is not numeric");
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a64_hex(const void* data, std::size_t n) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data, n)));
    return buf;
}

}  // namespace spectralkit
