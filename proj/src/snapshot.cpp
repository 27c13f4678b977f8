#include "spectralkit/snapshot.hpp"

#include <bit>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "spectralkit/errors.hpp"

namespace spectralkit {

namespace {

constexpr const char* k_magic = "spectralkit-fld 1";

static_assert(sizeof(double) == 8, "payload format requires 64-bit doubles");

// Payload is little-endian on disk regardless of host order.
void to_disk_order(std::vector<double>& values) {
    if constexpr (std::endian::native == std::endian::little) {
        (void)values;
    } else {
        for (double& v : values) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            bits = __builtin_bswap64(bits);
            std::memcpy(&v, &bits, 8);
        }
    }
}

std::string expect_line(std::ifstream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("'" + path + "': truncated header");
    return line;
}

std::string expect_field(std::ifstream& in, const std::string& path,
                         const std::string& key) {
    std::string line = expect_line(in, path);
    std::string prefix = key + "=";
    if (line.rfind(prefix, 0) != 0)
        throw IoError("'" + path + "': expected header field '" + key + "', got '" +
                      line + "'");
    return line.substr(prefix.size());
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

void save_field_file(const std::string& path, const FieldFile& file) {
    std::size_t n = 1;
    for (int e : file.shape) n *= static_cast<std::size_t>(e);
    if (file.vars.size() != file.fields.size())
        throw ShapeError("snapshot: vars/fields count mismatch");
    for (const auto& f : file.fields)
        if (f.size() != n) throw ShapeError("snapshot: field size does not match shape");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    char buf[64];
    out << k_magic << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", file.time);
    out << "time=" << buf << '\n';
    out << "shape=";
    for (std::size_t i = 0; i < file.shape.size(); ++i)
        out << (i ? "x" : "") << file.shape[i];
    out << '\n';
    out << "vars=";
    for (std::size_t i = 0; i < file.vars.size(); ++i)
        out << (i ? "," : "") << file.vars[i];
    out << '\n';
    out << "digest=" << file.digest << '\n';
    out << '\n';

    for (const auto& f : file.fields) {
        std::vector<double> disk = f;
        to_disk_order(disk);
        out.write(reinterpret_cast<const char*>(disk.data()),
                  static_cast<std::streamsize>(disk.size() * 8));
    }
    out.flush();
    if (!out) throw IoError("write failed on '" + path + "'");
}

namespace {

FieldFile load_field_file_impl(const std::string& path, bool header_only);

}  // namespace

FieldFile load_field_file(const std::string& path) {
    return load_field_file_impl(path, false);
}

FieldFile read_field_header(const std::string& path) {
    return load_field_file_impl(path, true);
}

namespace {

FieldFile load_field_file_impl(const std::string& path, bool header_only) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");

    if (expect_line(in, path) != k_magic)
        throw IoError("'" + path + "': not a spectralkit-fld file");

    FieldFile file;
    {
        std::string t = expect_field(in, path, "time");
        char* end = nullptr;
        file.time = std::strtod(t.c_str(), &end);
        if (end != t.c_str() + t.size())
            throw IoError("'" + path + "': bad time field '" + t + "'");
    }
    for (const std::string& tok : split(expect_field(in, path, "shape"), 'x')) {
        char* end = nullptr;
        long v = std::strtol(tok.c_str(), &end, 10);
        if (end != tok.c_str() + tok.size() || v <= 0)
            throw IoError("'" + path + "': bad shape token '" + tok + "'");
        file.shape.push_back(static_cast<int>(v));
    }
    if (file.shape.empty()) throw IoError("'" + path + "': empty shape");
    file.vars = split(expect_field(in, path, "vars"), ',');
    if (file.vars.empty()) throw IoError("'" + path + "': empty vars");
    file.digest = expect_field(in, path, "digest");
    if (!expect_line(in, path).empty())
        throw IoError("'" + path + "': header must end with a blank line");

    if (header_only) return file;

    std::size_t n = 1;
    for (int e : file.shape) n *= static_cast<std::size_t>(e);
    for (std::size_t i = 0; i < file.vars.size(); ++i) {
        real_field f(n);
        in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(n * 8));
        if (static_cast<std::size_t>(in.gcount()) != n * 8)
            throw IoError("'" + path + "': truncated payload for variable '" +
                          file.vars[i] + "'");
        to_disk_order(f);
        file.fields.push_back(std::move(f));
    }
    return file;
}

}  // namespace

std::string snapshot_filename(double time) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "state_phys_t%.6f.fld", time);
    return buf;
}

}  // namespace spectralkit
