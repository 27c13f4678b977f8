#include "spectralkit/bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "spectralkit/errors.hpp"
#include "spectralkit/fft.hpp"
#include "spectralkit/simulation.hpp"

namespace spectralkit {

namespace {

std::string host_fingerprint() {
    char name[256] = "unknown";
    gethostname(name, sizeof name - 1);
    std::string model = "unknown";
    std::ifstream cpuinfo("/proc/cpuinfo");
    std::string line;
    while (std::getline(cpuinfo, line)) {
        auto pos = line.find("model name");
        if (pos == std::string::npos) continue;
        pos = line.find(':');
        if (pos != std::string::npos) {
            model = line.substr(pos + 1);
            while (!model.empty() && model.front() == ' ') model.erase(model.begin());
            break;
        }
    }
    return std::string(name) + "|" + model + "|" +
           std::to_string(std::thread::hardware_concurrency());
}

std::string checksum_state(const StateVec& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (const auto& var : s)
        h = fnv1a64(var.data(), var.size() * sizeof(var[0]), h);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

BenchReport run_bench(const std::string& solver, const std::vector<int>& n, long iters,
                      int workers, std::uint64_t seed) {
    if (iters < 1) throw ConfigError("bench: iterations must be >= 1");
    if (workers < 1) throw ConfigError("bench: workers must be >= 1");
    ensure_builtin_solvers();
    set_fft_workers(workers);

    ParamTree params = create_default_params(solver);
    const SolverInfo& info = resolve_solver(solver).info;
    if (n.size() != static_cast<std::size_t>(info.dims))
        throw ConfigError("bench: solver " + solver + " needs " +
                          std::to_string(info.dims) + " extents");
    static const char* axis_n[] = {"nx", "ny", "nz"};
    for (std::size_t d = 0; d < n.size(); ++d)
        params.set(std::string("oper.") + axis_n[d], static_cast<std::int64_t>(n[d]));
    params.set("output.enable_files", false);
    params.set("forcing.enable", false);
    params.set("time_stepping.scheme", std::string("RK4"));
    params.set("time_stepping.t_end", -1.0);
    params.set("time_stepping.n_iters", iters);
    params.set("init_fields.type", std::string("noise"));
    params.set("init_fields.noise.seed", static_cast<std::int64_t>(seed));

    Simulation sim(params);
    sim.set_quiet(true);

    // Freeze the step size, then run one untimed iteration so plan setup
    // and first-touch costs stay out of the measurement.
    double dt = sim.compute_dt();
    sim.set_fixed_dt(dt);
    sim.step_once();
    sim.timers().reset();

    sim.set_n_iters(iters);
    RunSummary summary = sim.run();

    BenchReport report;
    report.solver = solver;
    report.label = solver;
    report.n = n;
    report.workers = fft_workers();
    report.iterations = summary.iterations;
    report.elapsed_total = summary.walltime;
    report.elapsed_per_iter = summary.walltime / static_cast<double>(summary.iterations);
    report.kernel_timers = summary.kernel_seconds;
    report.seed = seed;
    report.dt = dt;
    report.state_checksum = checksum_state(sim.state().spect());
    report.host = host_fingerprint();
    return report;
}

NdRecord bench_to_record(const BenchReport& r) {
    NdRecord rec;
    rec.emplace_back("solver", r.solver);
    rec.emplace_back("label", r.label);
    std::vector<double> n(r.n.begin(), r.n.end());
    rec.emplace_back("n", n);
    rec.emplace_back("workers", static_cast<std::int64_t>(r.workers));
    rec.emplace_back("iterations", static_cast<std::int64_t>(r.iterations));
    rec.emplace_back("elapsed_total", r.elapsed_total);
    rec.emplace_back("elapsed_per_iter", r.elapsed_per_iter);
    for (const auto& [name, seconds] : r.kernel_timers)
        rec.emplace_back("t_" + name, seconds);
    rec.emplace_back("seed", static_cast<std::int64_t>(r.seed));
    rec.emplace_back("dt", r.dt);
    rec.emplace_back("state_checksum", r.state_checksum);
    rec.emplace_back("host", r.host);
    return rec;
}

BenchReport bench_from_record(const NdRecord& rec) {
    BenchReport r;
    auto need = [&](const std::string& key) -> const NdValue& {
        const NdValue* v = find_field(rec, key);
        if (!v) throw ParseError("bench record is missing field '" + key + "'", 1, 1);
        return *v;
    };
    r.solver = std::get<std::string>(need("solver"));
    r.label = find_field(rec, "label") ? std::get<std::string>(need("label")) : r.solver;
    for (double v : std::get<std::vector<double>>(need("n")))
        r.n.push_back(static_cast<int>(v));
    r.workers = static_cast<int>(std::get<std::int64_t>(need("workers")));
    r.iterations = std::get<std::int64_t>(need("iterations"));
    r.elapsed_total = get_double_field(rec, "elapsed_total");
    r.elapsed_per_iter = get_double_field(rec, "elapsed_per_iter");
    for (const auto& [key, value] : rec)
        if (key.rfind("t_", 0) == 0)
            r.kernel_timers[key.substr(2)] = std::get<double>(value);
    r.seed = static_cast<std::uint64_t>(std::get<std::int64_t>(need("seed")));
    r.dt = get_double_field(rec, "dt");
    r.state_checksum = std::get<std::string>(need("state_checksum"));
    r.host = std::get<std::string>(need("host"));
    return r;
}

SpeedupTable compute_speedup(const std::vector<BenchReport>& reports,
                             const std::string& baseline) {
    if (reports.empty()) throw ConfigError("speedup: no reports");
    for (const auto& r : reports) {
        if (r.n != reports[0].n)
            throw ConfigError("speedup: mixed grid sizes across reports");
        if (r.solver != reports[0].solver)
            throw ConfigError("speedup: mixed solvers across reports");
        if (r.iterations < 1 || !(r.elapsed_per_iter > 0.0))
            throw ConfigError("speedup: report with no timed iterations");
    }

    // Fastest per-iteration time per (label, n_p).
    std::map<std::pair<std::string, int>, double> best;
    for (const auto& r : reports) {
        auto key = std::make_pair(r.label, r.workers);
        auto it = best.find(key);
        if (it == best.end() || r.elapsed_per_iter < it->second)
            best[key] = r.elapsed_per_iter;
    }

    int np_min = best.begin()->first.second;
    for (const auto& [key, t] : best) np_min = std::min(np_min, key.second);

    std::string base_label;
    double base_t = 0.0;
    if (baseline == "auto") {
        for (const auto& [key, t] : best) {
            if (key.second != np_min) continue;
            if (base_label.empty() || t < base_t) {
                base_label = key.first;
                base_t = t;
            }
        }
    } else {
        auto it = best.find(std::make_pair(baseline, np_min));
        if (it == best.end())
            throw ConfigError("speedup: baseline '" + baseline + "' has no report at " +
                              std::to_string(np_min) + " workers");
        base_label = baseline;
        base_t = it->second;
    }

    SpeedupTable table;
    table.np_min = np_min;
    table.baseline = base_label;
    for (const auto& [key, t] : best) {
        SpeedupEntry e;
        e.label = key.first;
        e.n_p = key.second;
        e.per_iter = t;
        e.s = base_t * static_cast<double>(np_min) / t;
        table.entries.push_back(e);
    }
    return table;
}

std::vector<ProfileRow> make_profile_table(const std::map<std::string, double>& kernels,
                                           double elapsed_total) {
    if (!(elapsed_total > 0.0)) throw ConfigError("profile: elapsed time must be > 0");
    std::vector<ProfileRow> rows;
    double kept = 0.0, kept_pct = 0.0;
    for (const auto& [name, seconds] : kernels) {
        if (seconds >= 0.02 * elapsed_total) {
            rows.push_back({name, seconds, 100.0 * seconds / elapsed_total});
            kept += seconds;
            kept_pct += rows.back().percent;
        }
    }
    std::sort(rows.begin(), rows.end(), [](const ProfileRow& a, const ProfileRow& b) {
        return a.seconds > b.seconds;
    });
    // `other` absorbs sub-threshold kernels and untimed time; computing its
    // share as the complement makes the column sum exactly 100.
    rows.push_back({"other", elapsed_total - kept, 100.0 - kept_pct});
    return rows;
}

}  // namespace spectralkit
