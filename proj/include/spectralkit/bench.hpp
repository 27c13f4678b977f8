#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spectralkit/records.hpp"

namespace spectralkit {

// One timed benchmark execution, serializable as a single record line.
struct BenchReport {
    std::string solver;
    std::string label;  // speedup grouping key, defaults to the solver id
    std::vector<int> n;
    int workers = 1;
    long iterations = 0;
    double elapsed_total = 0.0;
    double elapsed_per_iter = 0.0;
    std::map<std::string, double> kernel_timers;
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::string state_checksum;
    std::string host;
};

// Runs the timing protocol: random initial field, RK4 with a constant dt
// frozen from the initial CFL estimate, forcing and file output off, one
// untimed warmup iteration, then `iters` timed iterations.
BenchReport run_bench(const std::string& solver, const std::vector<int>& n, long iters,
                      int workers, std::uint64_t seed);

NdRecord bench_to_record(const BenchReport& report);
BenchReport bench_from_record(const NdRecord& record);

struct SpeedupEntry {
    std::string label;
    int n_p = 0;
    double per_iter = 0.0;  // fastest per-iteration time for (label, n_p)
    double s = 0.0;
};

struct SpeedupTable {
    int np_min = 0;
    std::string baseline;  // label whose time anchors the scale
    std::vector<SpeedupEntry> entries;
};

// S(label, n_p) = T_baseline(np_min) * np_min / T_label(n_p).  Baseline
// "auto" picks the fastest label at the smallest worker count.
SpeedupTable compute_speedup(const std::vector<BenchReport>& reports,
                             const std::string& baseline = "auto");

struct ProfileRow {
    std::string name;
    double seconds = 0.0;
    double percent = 0.0;
};

// Rows >= 2% of the elapsed time, descending, then one `other` row
// absorbing small kernels and untimed time; percentages sum to 100.
std::vector<ProfileRow> make_profile_table(const std::map<std::string, double>& kernels,
                                           double elapsed_total);

}  // namespace spectralkit
