#include <cmath>

#include "doctest.h"
#include "spectralkit/bench.hpp"
#include "spectralkit/errors.hpp"

using namespace spectralkit;

namespace {

BenchReport synthetic(const std::string& label, int workers, double elapsed_total) {
    BenchReport r;
    r.solver = "ns2d";
    r.label = label;
    r.n = {128, 128};
    r.workers = workers;
    r.iterations = 20;
    r.elapsed_total = elapsed_total;
    r.elapsed_per_iter = elapsed_total / 20.0;
    r.seed = 1;
    r.dt = 0.1;
    r.state_checksum = "0123456789abcdef";
    r.host = "synthetic";
    return r;
}

}  // namespace

TEST_CASE("bench: report invariants and record round trip") {
    BenchReport r = run_bench("ns2d", {64, 64}, 5, 1, 42);
    CHECK(r.solver == "ns2d");
    CHECK(r.label == "ns2d");
    CHECK(r.n == std::vector<int>{64, 64});
    CHECK(r.workers == 1);
    CHECK(r.iterations == 5);
    CHECK(r.elapsed_total > 0.0);
    CHECK(r.elapsed_per_iter == r.elapsed_total / 5.0);
    CHECK(r.dt > 0.0);
    REQUIRE(r.state_checksum.size() == 16);
    CHECK(r.state_checksum.find_first_not_of("0123456789abcdef") == std::string::npos);

    double kernel_sum = 0.0;
    for (const auto& [name, seconds] : r.kernel_timers) {
        CAPTURE(name);
        CHECK(seconds >= 0.0);
        kernel_sum += seconds;
    }
    CHECK(kernel_sum > 0.0);
    CHECK(kernel_sum <= r.elapsed_total);

    std::string line = format_ndrec_line(bench_to_record(r));
    BenchReport q = bench_from_record(parse_ndrec_line(line));
    CHECK(q.solver == r.solver);
    CHECK(q.label == r.label);
    CHECK(q.n == r.n);
    CHECK(q.workers == r.workers);
    CHECK(q.iterations == r.iterations);
    CHECK(q.elapsed_total == r.elapsed_total);
    CHECK(q.elapsed_per_iter == r.elapsed_per_iter);
    CHECK(q.kernel_timers == r.kernel_timers);
    CHECK(q.seed == r.seed);
    CHECK(q.dt == r.dt);
    CHECK(q.state_checksum == r.state_checksum);
    CHECK(q.host == r.host);
}

TEST_CASE("bench: checksums depend on the seed, not on timing") {
    BenchReport a = run_bench("ns2d", {32, 32}, 3, 1, 7);
    BenchReport b = run_bench("ns2d", {32, 32}, 3, 1, 7);
    BenchReport c = run_bench("ns2d", {32, 32}, 3, 1, 8);
    CHECK(a.state_checksum == b.state_checksum);
    CHECK(a.state_checksum != c.state_checksum);
    CHECK(a.dt == b.dt);
}

TEST_CASE("bench: ns3d exposes the full kernel taxonomy") {
    BenchReport r = run_bench("ns3d", {16, 16, 16}, 2, 1, 3);
    for (const char* key : {"fft", "rk", "curl", "vector_product", "projection"}) {
        CAPTURE(key);
        CHECK(r.kernel_timers.count(key) == 1);
    }
}

TEST_CASE("speedup: textbook substitution and the baseline convention") {
    std::vector<BenchReport> reports = {synthetic("base", 2, 10.0),
                                        synthetic("cand", 8, 3.0)};
    SpeedupTable table = compute_speedup(reports);
    CHECK(table.np_min == 2);
    CHECK(table.baseline == "base");
    REQUIRE(table.entries.size() == 2);
    for (const auto& e : table.entries) {
        if (e.label == "base") {
            CHECK(e.n_p == 2);
            CHECK(e.s == 2.0);  // fastest config at np_min gets S = np_min
        } else {
            CHECK(e.n_p == 8);
            CHECK(e.s == doctest::Approx(20.0 / 3.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("speedup: scale consistency and duplicate handling") {
    std::vector<BenchReport> reports = {
        synthetic("base", 2, 10.0), synthetic("base", 2, 11.0),  // keep the faster
        synthetic("base", 4, 6.0), synthetic("cand", 2, 12.0),
        synthetic("cand", 4, 4.0)};
    SpeedupTable t1 = compute_speedup(reports);
    for (auto& r : reports) {
        r.elapsed_total *= 7.3;
        r.elapsed_per_iter *= 7.3;
    }
    SpeedupTable t2 = compute_speedup(reports);
    REQUIRE(t1.entries.size() == 4);
    REQUIRE(t2.entries.size() == 4);
    for (std::size_t i = 0; i < t1.entries.size(); ++i) {
        CHECK(t1.entries[i].label == t2.entries[i].label);
        CHECK(t1.entries[i].s == doctest::Approx(t2.entries[i].s).epsilon(1e-12));
    }
    // Duplicate (base, 2) kept the 10.0 run.
    for (const auto& e : t1.entries)
        if (e.label == "base" && e.n_p == 2)
            CHECK(e.per_iter == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("speedup: degenerate inputs are refused") {
    CHECK_THROWS_AS(compute_speedup({}), ConfigError);

    std::vector<BenchReport> mixed_n = {synthetic("a", 2, 1.0), synthetic("b", 4, 1.0)};
    mixed_n[1].n = {64, 64};
    CHECK_THROWS_AS(compute_speedup(mixed_n), ConfigError);

    std::vector<BenchReport> mixed_solver = {synthetic("a", 2, 1.0),
                                             synthetic("b", 4, 1.0)};
    mixed_solver[1].solver = "ns3d";
    CHECK_THROWS_AS(compute_speedup(mixed_solver), ConfigError);

    std::vector<BenchReport> ok = {synthetic("a", 2, 1.0), synthetic("b", 4, 1.0)};
    CHECK_THROWS_AS(compute_speedup(ok, "b"), ConfigError);  // no report at np_min

    SpeedupTable single = compute_speedup({synthetic("only", 4, 2.0)});
    CHECK(single.np_min == 4);
    REQUIRE(single.entries.size() == 1);
    CHECK(single.entries[0].s == 4.0);
}

TEST_CASE("profile: the 2 percent rule groups small kernels into other") {
    std::map<std::string, double> kernels = {{"a", 50.0}, {"b", 30.0}, {"c", 15.0},
                                             {"d", 3.0},  {"e", 1.5},  {"f", 0.5}};
    auto rows = make_profile_table(kernels, 100.0);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].name == "a");
    CHECK(rows[1].name == "b");
    CHECK(rows[2].name == "c");
    CHECK(rows[3].name == "d");
    CHECK(rows[4].name == "other");
    CHECK(rows[4].seconds == 2.0);
    CHECK(rows[4].percent == 2.0);
    double total_pct = 0.0;
    for (const auto& r : rows) {
        if (r.name != "other") CHECK(r.percent >= 2.0);
        total_pct += r.percent;
    }
    CHECK(total_pct == 100.0);
}

TEST_CASE("profile: other absorbs untimed time and degenerate tables") {
    auto rows = make_profile_table({{"a", 50.0}}, 100.0);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].name == "a");
    CHECK(rows[0].percent == 50.0);
    CHECK(rows[1].name == "other");
    CHECK(rows[1].seconds == 50.0);
    CHECK(rows[1].percent == 50.0);

    auto all_small = make_profile_table({{"a", 0.5}, {"b", 0.3}}, 100.0);
    REQUIRE(all_small.size() == 1);
    CHECK(all_small[0].name == "other");
    CHECK(all_small[0].percent == 100.0);

    CHECK_THROWS_AS(make_profile_table({}, 0.0), ConfigError);
}
