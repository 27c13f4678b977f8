#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace spectralkit {

// One field of a record.  Doubles are written with 17 significant
// digits so every value round-trips bit-exactly through text.
using NdValue = std::variant<std::int64_t, double, std::string, std::vector<double>>;

// Ordered key=value pairs; one record per line in a .ndrec stream.
using NdRecord = std::vector<std::pair<std::string, NdValue>>;

std::string format_ndrec_line(const NdRecord& record);
NdRecord parse_ndrec_line(const std::string& line);

// Append-only writer; flushes after every record.
class NdrecWriter {
public:
    explicit NdrecWriter(const std::string& path);
    void write(const NdRecord& record);
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
};

// All records of a stream, in file order.  Blank lines are skipped.
std::vector<NdRecord> read_ndrec(const std::string& path);

const NdValue* find_field(const NdRecord& record, const std::string& key);
double get_double_field(const NdRecord& record, const std::string& key);

// FNV-1a, 64-bit.  Used for state checksums and header digests.
std::uint64_t fnv1a64(const void* data, std::size_t n,
                      std::uint64_t seed = 14695981039346656037ull);
std::string fnv1a64_hex(const void* data, std::size_t n);

}  // namespace spectralkit
