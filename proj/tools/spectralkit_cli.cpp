// Command-line front end: run, bench, speedup, profile, export.
// Exit codes: 0 ok, 2 usage/config, 3 numerical divergence, 4 I/O.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "spectralkit/bench.hpp"
#include "spectralkit/errors.hpp"
#include "spectralkit/output.hpp"
#include "spectralkit/records.hpp"
#include "spectralkit/simulation.hpp"

namespace fs = std::filesystem;
using namespace spectralkit;

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
    ensure_builtin_solvers();
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw IoError("cannot read config file: " + config_path);
    std::string text{std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>()};
    ParamTree given = ParamTree::deserialize(text);
    ParamTree params = create_default_params(given.get<std::string>("solver"));
    params.overlay(given);
    for (const auto& ov : overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("override must be key=value, got '" + ov + "'");
        params.set_from_string(ov.substr(0, eq), ov.substr(eq + 1));
    }
    Simulation sim(params);
    if (sim.output().files_enabled())
        std::printf("directory: %s\n", sim.output().dir().c_str());
    sim.run();
    return 0;
}

int cmd_bench(const std::string& solver, const std::vector<int>& n, long iters,
              int workers, std::uint64_t seed, const std::string& label,
              const std::string& out) {
    BenchReport r = run_bench(solver, n, iters, workers, seed);
    if (!label.empty()) r.label = label;
    std::string line = format_ndrec_line(bench_to_record(r));
    if (!out.empty()) {
        std::ofstream f(out, std::ios::app | std::ios::binary);
        if (!f) throw IoError("cannot open report file: " + out);
        f << line << "\n";
        if (!f) throw IoError("write failed: " + out);
    }
    std::printf("%s\n", line.c_str());
    return 0;
}

int cmd_speedup(const std::vector<std::string>& paths, const std::string& baseline,
                const std::string& out_csv) {
    std::vector<BenchReport> reports;
    for (const auto& p : paths)
        for (const auto& rec : read_ndrec(p)) reports.push_back(bench_from_record(rec));
    SpeedupTable table = compute_speedup(reports, baseline);

    std::printf("baseline: %s (np_min=%d)\n", table.baseline.c_str(), table.np_min);
    std::printf("%-20s %6s %16s %10s\n", "label", "n_p", "per_iter_s", "S");
    for (const auto& e : table.entries)
        std::printf("%-20s %6d %16.9f %10.4f\n", e.label.c_str(), e.n_p, e.per_iter,
                    e.s);

    if (!out_csv.empty()) {
        std::ofstream f(out_csv, std::ios::binary);
        if (!f) throw IoError("cannot open CSV file: " + out_csv);
        f << "label,n_p,elapsed_per_iter,speedup\n";
        for (const auto& e : table.entries)
            f << e.label << ',' << e.n_p << ',' << fmt17(e.per_iter) << ','
              << fmt17(e.s) << "\n";
        if (!f) throw IoError("write failed: " + out_csv);
        std::printf("wrote %s\n", out_csv.c_str());
    }
    return 0;
}

int cmd_profile(const std::string& solver, const std::vector<int>& n, long iters,
                int workers, std::uint64_t seed) {
    BenchReport r = run_bench(solver, n, iters, workers, seed);
    auto rows = make_profile_table(r.kernel_timers, r.elapsed_total);
    std::string shape;
    for (std::size_t i = 0; i < r.n.size(); ++i)
        shape += (i ? "x" : "") + std::to_string(r.n[i]);
    std::printf("%s %s: %ld iterations, %.6f s total\n", r.solver.c_str(),
                shape.c_str(), r.iterations, r.elapsed_total);
    std::printf("%-16s %14s %8s\n", "kernel", "seconds", "percent");
    for (const auto& row : rows)
        std::printf("%-16s %14.6f %7.2f%%\n", row.name.c_str(), row.seconds,
                    row.percent);
    return 0;
}

// Flat CSV: scalar fields repeat per row, vector fields are expanded in
// parallel (one row per element); a record with no vectors is one row.
int cmd_export(const std::string& simdir, const std::string& stream,
               const std::string& format, std::string out) {
    if (format != "csv")
        throw ConfigError("unsupported export format '" + format + "' (use csv)");
    static const std::map<std::string, std::string> files = {
        {"means", "spatial_means.ndrec"},
        {"spectra", "spectra.ndrec"},
        {"budget", "spect_energy_budg.ndrec"},
        {"increments", "increments.ndrec"},
    };
    auto it = files.find(stream);
    if (it == files.end())
        throw ConfigError("unknown stream '" + stream +
                          "' (means|spectra|budget|increments)");
    fs::path src = fs::path(simdir) / it->second;
    if (!fs::exists(src)) throw IoError("stream file not found: " + src.string());
    std::vector<NdRecord> records = read_ndrec(src.string());
    if (records.empty()) throw IoError("stream is empty: " + src.string());

    if (out.empty()) out = stream + ".csv";
    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot open CSV file: " + out);

    std::vector<std::string> header;
    for (const auto& [key, value] : records.front()) header.push_back(key);
    for (std::size_t i = 0; i < header.size(); ++i)
        f << (i ? "," : "") << header[i];
    f << "\n";

    for (const auto& rec : records) {
        if (rec.size() != header.size())
            throw IoError("inconsistent record shape in " + src.string());
        std::size_t rows = 1;
        for (std::size_t i = 0; i < rec.size(); ++i) {
            if (rec[i].first != header[i])
                throw IoError("inconsistent record keys in " + src.string());
            if (auto* vec = std::get_if<std::vector<double>>(&rec[i].second)) {
                if (rows != 1 && vec->size() != rows)
                    throw IoError("ragged vector fields in " + src.string());
                rows = vec->size();
            }
        }
        for (std::size_t row = 0; row < rows; ++row) {
            for (std::size_t i = 0; i < rec.size(); ++i) {
                if (i) f << ',';
                const NdValue& v = rec[i].second;
                if (auto* iv = std::get_if<std::int64_t>(&v))
                    f << *iv;
                else if (auto* dv = std::get_if<double>(&v))
                    f << fmt17(*dv);
                else if (auto* sv = std::get_if<std::string>(&v))
                    f << *sv;
                else
                    f << fmt17(std::get<std::vector<double>>(v)[row]);
            }
            f << "\n";
        }
    }
    if (!f) throw IoError("write failed: " + out);
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral solver toolbox"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a simulation from a config file");
    std::string run_config;
    std::vector<std::string> run_overrides;
    run->add_option("config", run_config, "params file naming a solver")->required();
    run->add_option("-o,--override", run_overrides,
                    "parameter override, key=value (repeatable)");

    auto* bench = app.add_subcommand("bench", "timed iterations of one solver");
    std::string bench_solver, bench_label, bench_out;
    std::vector<int> bench_n;
    long bench_iters = 20;
    int bench_workers = 1;
    std::uint64_t bench_seed = 1;
    bench->add_option("solver", bench_solver, "registered solver id")->required();
    bench->add_option("-n,--extents", bench_n, "grid extents, one per dimension")
        ->required()
        ->expected(1, 3);
    bench->add_option("-i,--iters", bench_iters, "timed iterations (default 20)");
    bench->add_option("-w,--workers", bench_workers, "transform worker threads");
    bench->add_option("--seed", bench_seed, "initial-field seed");
    bench->add_option("--label", bench_label, "report label (default: solver id)");
    bench->add_option("--out", bench_out, "append the report to this file");

    auto* speedup = app.add_subcommand("speedup", "speedup table from bench reports");
    std::vector<std::string> speedup_paths;
    std::string speedup_baseline = "auto";
    std::string speedup_csv = "speedup.csv";
    speedup->add_option("reports", speedup_paths, "bench report files")->required();
    speedup->add_option("--baseline", speedup_baseline,
                        "baseline label, or 'auto' for the fastest at np_min");
    speedup->add_option("--csv", speedup_csv, "CSV output path ('' to skip)");

    auto* profile = app.add_subcommand("profile", "kernel time breakdown");
    std::string profile_solver;
    std::vector<int> profile_n;
    long profile_iters = 20;
    int profile_workers = 1;
    std::uint64_t profile_seed = 1;
    profile->add_option("solver", profile_solver, "registered solver id")->required();
    profile->add_option("-n,--extents", profile_n, "grid extents, one per dimension")
        ->required()
        ->expected(1, 3);
    profile->add_option("-i,--iters", profile_iters, "timed iterations (default 20)");
    profile->add_option("-w,--workers", profile_workers, "transform worker threads");
    profile->add_option("--seed", profile_seed, "initial-field seed");

    auto* exp = app.add_subcommand("export", "flatten one output stream to CSV");
    std::string exp_dir, exp_stream, exp_format = "csv", exp_out;
    exp->add_option("simdir", exp_dir, "simulation directory")->required();
    exp->add_option("stream", exp_stream, "means|spectra|budget|increments")
        ->required();
    exp->add_option("--format", exp_format, "output format (csv)");
    exp->add_option("--out", exp_out, "output path (default: <stream>.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_config, run_overrides);
        if (bench->parsed())
            return cmd_bench(bench_solver, bench_n, bench_iters, bench_workers,
                             bench_seed, bench_label, bench_out);
        if (speedup->parsed())
            return cmd_speedup(speedup_paths, speedup_baseline, speedup_csv);
        if (profile->parsed())
            return cmd_profile(profile_solver, profile_n, profile_iters,
                               profile_workers, profile_seed);
        if (exp->parsed()) return cmd_export(exp_dir, exp_stream, exp_format, exp_out);
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ShapeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const RegistryError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::bad_alloc&) {
        std::fprintf(stderr, "error: out of memory\n");
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
