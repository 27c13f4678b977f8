#pragma once

#include <string>
#include <vector>

#include "spectralkit/grid.hpp"

namespace spectralkit {

// In-memory image of one .fld snapshot: a structured-text header plus
// raw little-endian float64 payload, one block per variable, row-major.
struct FieldFile {
    double time = 0.0;
    std::vector<int> shape;
    std::vector<std::string> vars;
    std::string digest;  // 16 hex digits tying the file to its run setup
    std::vector<real_field> fields;
};

void save_field_file(const std::string& path, const FieldFile& file);
FieldFile load_field_file(const std::string& path);
// Header only (fields left empty); cheap for scanning snapshot times.
FieldFile read_field_header(const std::string& path);

// "state_phys_t{time}.fld" with six decimals, e.g. state_phys_t1.500000.fld
std::string snapshot_filename(double time);

}  // namespace spectralkit
