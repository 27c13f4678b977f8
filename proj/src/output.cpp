#include "spectralkit/output.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <iostream>

#include "spectralkit/errors.hpp"
#include "spectralkit/simulation.hpp"
#include "spectralkit/snapshot.hpp"

namespace fs = std::filesystem;

namespace spectralkit {

ShellSpectrum bin_shells(const SpectralGrid& grid, const std::vector<double>& per_mode,
                         bool density) {
    if (per_mode.size() != grid.spect_size)
        throw ShapeError("bin_shells: per-mode array has " +
                         std::to_string(per_mode.size()) + " entries, grid has " +
                         std::to_string(grid.spect_size));
    ShellSpectrum out;
    out.k.resize(static_cast<std::size_t>(grid.n_shells));
    out.v.assign(static_cast<std::size_t>(grid.n_shells), 0.0);
    for (int s = 0; s < grid.n_shells; ++s)
        out.k[static_cast<std::size_t>(s)] = s * grid.delta_k;
    for (std::size_t i = 0; i < grid.spect_size; ++i) {
        int s = grid.shell[i];
        if (s >= 0 && s < grid.n_shells) out.v[static_cast<std::size_t>(s)] += per_mode[i];
    }
    if (density)
        for (double& v : out.v) v /= grid.delta_k;
    return out;
}

StructureFunctions structure_functions(const SpectralGrid& grid, const real_field& u,
                                       int axis, const std::vector<int>& orders) {
    if (axis < 0 || axis >= grid.dims) throw ConfigError("structure_functions: bad axis");
    if (u.size() != grid.phys_size)
        throw ShapeError("structure_functions: field size mismatch");
    for (int p : orders)
        if (p < 1) throw ConfigError("structure_functions: order must be >= 1");

    const long nd = grid.n[static_cast<std::size_t>(axis)];
    long stride = 1;
    for (int d = grid.dims - 1; d > axis; --d) stride *= grid.n[static_cast<std::size_t>(d)];
    const long block = nd * stride;
    const long nsep = nd / 2;

    StructureFunctions out;
    out.r.resize(static_cast<std::size_t>(nsep));
    out.s.assign(orders.size(), std::vector<double>(static_cast<std::size_t>(nsep), 0.0));

    const long total = static_cast<long>(grid.phys_size);
    for (long j = 1; j <= nsep; ++j) {
        out.r[static_cast<std::size_t>(j - 1)] = j * grid.dx[static_cast<std::size_t>(axis)];
        std::vector<double> acc(orders.size(), 0.0);
        for (long i = 0; i < total; ++i) {
            long c = (i % block) / stride;
            long shifted = i + (((c + j) % nd) - c) * stride;
            double diff = u[static_cast<std::size_t>(shifted)] - u[static_cast<std::size_t>(i)];
            for (std::size_t q = 0; q < orders.size(); ++q)
                acc[q] += std::pow(diff, orders[q]);
        }
        for (std::size_t q = 0; q < orders.size(); ++q)
            out.s[q][static_cast<std::size_t>(j - 1)] = acc[q] / static_cast<double>(total);
    }
    return out;
}

namespace {

std::string shape_tag(const ParamTree& params, int dims) {
    char buf[64];
    long nx = params.get<std::int64_t>("oper.nx");
    if (dims == 1) {
        std::snprintf(buf, sizeof buf, "%ld", nx);
    } else if (dims == 2) {
        std::snprintf(buf, sizeof buf, "%ldx%ld", nx, params.get<std::int64_t>("oper.ny"));
    } else {
        std::snprintf(buf, sizeof buf, "%ldx%ldx%ld", nx,
                      params.get<std::int64_t>("oper.ny"),
                      params.get<std::int64_t>("oper.nz"));
    }
    return buf;
}

std::string timestamp_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm;
#if defined(_WIN32)
    localtime_s(&tm, &now);
#else
    localtime_r(&now, &tm);
#endif
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%d-%H.%M.%S", &tm);
    return buf;
}

}  // namespace

OutputManager::OutputManager(const ParamTree& params, const SolverInfo& info) {
    enable_files_ = params.get<bool>("output.enable_files");
    period_save_ = params.get<double>("output.period_save");
    period_print_ = static_cast<long>(params.get<std::int64_t>("output.period_print"));
    wall_start_ = std::chrono::steady_clock::now();
    if (!enable_files_) return;

    std::string base = info.short_name + "_" + shape_tag(params, info.dims) + "_" +
                       timestamp_now();
    fs::path root(params.get<std::string>("output.root_dir"));
    fs::path dir = root / base;
    for (int suffix = 1; fs::exists(dir); ++suffix)
        dir = root / (base + "_" + std::to_string(suffix));
    std::error_code ec;
    fs::create_directories(dir / "snapshots", ec);
    if (ec) throw IoError("cannot create simulation directory " + dir.string() + ": " +
                          ec.message());
    dir_ = dir.string();

    auto write_text = [&](const char* name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        f << text;
        if (!f) throw IoError(std::string("cannot write ") + name + " in " + dir_);
    };
    write_text("params.txt", params.serialize());
    write_text("info_solver.txt", info.print());

    means_ = std::make_unique<NdrecWriter>((dir / "spatial_means.ndrec").string());
    spectra_ = std::make_unique<NdrecWriter>((dir / "spectra.ndrec").string());
    budget_ = std::make_unique<NdrecWriter>((dir / "spect_energy_budg.ndrec").string());
    increments_ = std::make_unique<NdrecWriter>((dir / "increments.ndrec").string());
    runlog_.open(dir / "run.log", std::ios::binary);
    if (!runlog_) throw IoError("cannot open run.log in " + dir_);
}

OutputManager::~OutputManager() = default;

void OutputManager::log(const std::string& line) {
    if (runlog_.is_open()) {
        runlog_ << line << '\n';
        runlog_.flush();
    } else {
        pending_log_.push_back(line);
    }
}

double OutputManager::walltime() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start_)
        .count();
}

std::string OutputManager::stdout_line() {
    char buf[256];
    int n = std::snprintf(buf, sizeof buf, "it=%ld t=%.16e dt=%.16e E=%.16e",
                          sim_->iteration(), sim_->t(), sim_->last_dt(), sim_->energy());
    if (sim_->solver().has_enstrophy())
        n += std::snprintf(buf + n, sizeof buf - static_cast<std::size_t>(n), " Z=%.16e",
                           sim_->enstrophy());
    std::snprintf(buf + n, sizeof buf - static_cast<std::size_t>(n), " wall=%.3f",
                  walltime());
    return buf;
}

bool OutputManager::parse_stdout_line(const std::string& line, long& it, double& t,
                                      double& dt, double& e, double& z, bool& has_z,
                                      double& wall) {
    const char* p = line.c_str();
    auto eat = [&](const char* prefix) {
        std::size_t n = std::strlen(prefix);
        if (std::strncmp(p, prefix, n) != 0) return false;
        p += n;
        return true;
    };
    auto num = [&](double& out) {
        char* end = nullptr;
        out = std::strtod(p, &end);
        if (end == p) return false;
        p = end;
        return true;
    };
    if (!eat("it=")) return false;
    {
        char* end = nullptr;
        it = std::strtol(p, &end, 10);
        if (end == p) return false;
        p = end;
    }
    if (!eat(" t=") || !num(t)) return false;
    if (!eat(" dt=") || !num(dt)) return false;
    if (!eat(" E=") || !num(e)) return false;
    has_z = eat(" Z=");
    if (has_z && !num(z)) return false;
    if (!eat(" wall=") || !num(wall)) return false;
    return *p == '\0';
}

void OutputManager::write_means() {
    NdRecord rec;
    rec.emplace_back("t", sim_->t());
    rec.emplace_back("it", static_cast<std::int64_t>(sim_->iteration()));
    rec.emplace_back("E", sim_->energy());
    if (sim_->solver().has_enstrophy()) rec.emplace_back("Z", sim_->enstrophy());
    rec.emplace_back("eps_visc", sim_->dissipation_rate());
    rec.emplace_back("P_forcing", sim_->forcing_enabled() ? sim_->last_injection() : 0.0);
    rec.emplace_back("dt", sim_->last_dt());
    if (means_) means_->write(rec);
}

void OutputManager::print_progress() {
    if (!quiet_) {
        std::cout << stdout_line() << '\n';
        std::cout.flush();
    }
}

void OutputManager::save_records_and_snapshot() {
    if (!enable_files_) return;
    const double t = sim_->t();
    if (last_saved_t_ >= 0.0 && std::abs(t - last_saved_t_) < 1e-12) return;
    last_saved_t_ = t;
    const SpectralGrid& g = sim_->oper();
    Solver& solver = sim_->solver();

    std::vector<double> per_mode;
    solver.mode_energy(per_mode);
    ShellSpectrum spec = bin_shells(g, per_mode, true);
    {
        NdRecord rec;
        rec.emplace_back("t", t);
        rec.emplace_back("k", spec.k);
        rec.emplace_back("E", spec.v);
        spectra_->write(rec);
    }

    StateVec nonlin;
    sim_->compute_tendency(sim_->state().spect(), nonlin);
    std::vector<double> per_mode_t, per_mode_d;
    solver.mode_transfer(nonlin, per_mode_t);
    solver.mode_dissipation(per_mode_d);
    ShellSpectrum tr = bin_shells(g, per_mode_t, false);
    ShellSpectrum di = bin_shells(g, per_mode_d, false);
    {
        NdRecord rec;
        rec.emplace_back("t", t);
        rec.emplace_back("k", tr.k);
        rec.emplace_back("T", tr.v);
        rec.emplace_back("D", di.v);
        budget_->write(rec);
    }

    const auto& keys = sim_->info().keys_state_phys;
    static const char* axis_names[] = {"x", "y", "z"};
    const std::vector<int> orders = {2, 3, 4};
    for (int d = 0; d < g.dims; ++d) {
        // Longitudinal when the state is a velocity; the first variable
        // otherwise (scalar transport, vorticity form).
        const std::string& key =
            keys.size() == static_cast<std::size_t>(g.dims) ? keys[static_cast<std::size_t>(d)]
                                                            : keys[0];
        StructureFunctions sf =
            structure_functions(g, sim_->state().var_phys(key), d, orders);
        for (std::size_t q = 0; q < orders.size(); ++q) {
            NdRecord rec;
            rec.emplace_back("t", t);
            rec.emplace_back("dir", std::string(axis_names[d]));
            rec.emplace_back("p", static_cast<std::int64_t>(orders[q]));
            rec.emplace_back("r", sf.r);
            rec.emplace_back("S", sf.s[q]);
            increments_->write(rec);
        }
    }

    FieldFile file;
    file.time = t;
    file.shape = g.n;
    file.vars = keys;
    file.digest = params_digest(sim_->params());
    for (const auto& key : keys) file.fields.push_back(sim_->state().var_phys(key));
    fs::path path = fs::path(dir_) / "snapshots" / snapshot_filename(t);
    save_field_file(path.string(), file);
}

void OutputManager::on_run_start() {
    if (!started_) {
        started_ = true;
        write_means();
        save_records_and_snapshot();
        print_progress();
    }
    next_save_t_ = sim_->t() + period_save_;
}

void OutputManager::after_step() {
    write_means();
    if (period_print_ > 0 && sim_->iteration() % period_print_ == 0) print_progress();
    while (sim_->t() + 1e-12 >= next_save_t_) {
        save_records_and_snapshot();
        next_save_t_ += period_save_;
    }
}

void OutputManager::on_run_end() {
    save_records_and_snapshot();
    if (period_print_ <= 0 || sim_->iteration() % period_print_ != 0) print_progress();
}

}  // namespace spectralkit
