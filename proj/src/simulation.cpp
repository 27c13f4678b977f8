#include "spectralkit/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>

#include "spectralkit/errors.hpp"
#include "spectralkit/output.hpp"
#include "spectralkit/snapshot.hpp"

namespace fs = std::filesystem;

namespace spectralkit {

// ---------------------------------------------------------------- registry

namespace {

std::mutex g_registry_mutex;

std::map<std::string, SolverEntry>& registry() {
    static std::map<std::string, SolverEntry> table;
    return table;
}

}  // namespace

void register_solver(SolverEntry entry) {
    validate_solver_info(entry.info);
    if (!entry.factory) throw RegistryError("solver entry needs a factory");
    std::lock_guard<std::mutex> lock(g_registry_mutex);
    auto [it, inserted] = registry().emplace(entry.info.short_name, std::move(entry));
    if (!inserted)
        throw RegistryError("solver '" + it->first + "' is already registered");
}

const SolverEntry& resolve_solver(const std::string& short_name) {
    ensure_builtin_solvers();
    std::lock_guard<std::mutex> lock(g_registry_mutex);
    auto it = registry().find(short_name);
    if (it == registry().end()) {
        std::string names;
        for (const auto& [name, entry] : registry()) {
            if (!names.empty()) names += ", ";
            names += name;
        }
        throw RegistryError("unknown solver '" + short_name + "' (registered: " + names +
                            ")");
    }
    return it->second;
}

std::vector<std::string> registered_solvers() {
    ensure_builtin_solvers();
    std::lock_guard<std::mutex> lock(g_registry_mutex);
    std::vector<std::string> names;
    for (const auto& [name, entry] : registry()) names.push_back(name);
    return names;
}

bool solver_registered(const std::string& short_name) {
    ensure_builtin_solvers();
    std::lock_guard<std::mutex> lock(g_registry_mutex);
    return registry().count(short_name) != 0;
}

// ---------------------------------------------------------- default params

ParamTree create_default_params(const std::string& solver) {
    const SolverEntry& entry = resolve_solver(solver);
    const int dims = entry.info.dims;

    ParamTree p("params");
    p.add_leaf("solver", solver);
    p.add_leaf("nu_2", 0.0);

    auto& oper = p.add_child("oper");
    static const char* ns[] = {"nx", "ny", "nz"};
    static const char* ls[] = {"Lx", "Ly", "Lz"};
    for (int d = 0; d < dims; ++d) {
        oper.add_leaf(ns[d], std::int64_t(16));
        oper.add_leaf(ls[d], 2.0 * M_PI);
    }
    oper.add_leaf("dealias_coef", 2.0 / 3.0);

    auto& ts = p.add_child("time_stepping");
    ts.add_leaf("scheme", std::string("RK4"));
    ts.add_leaf("cfl_coef", 0.5);
    ts.add_leaf("dt_max", 0.1);
    ts.add_leaf("fixed_dt", 0.0);
    ts.add_leaf("t_end", 1.0);
    ts.add_leaf("n_iters", std::int64_t(-1));

    auto& init = p.add_child("init_fields");
    init.add_leaf("type", std::string("noise"));
    init.add_child("constant").add_leaf("value", 1.0);
    auto& noise = init.add_child("noise");
    noise.add_leaf("amplitude", 1.0);
    noise.add_leaf("seed", std::int64_t(42));
    noise.add_leaf("k_lo", 2.0);
    noise.add_leaf("k_hi", 4.0);
    auto& dipole = init.add_child("dipole");
    dipole.add_leaf("gamma", 1.0);
    dipole.add_leaf("radius", 0.5);
    init.add_child("from_file").add_leaf("path", std::string(""));

    auto& forcing = p.add_child("forcing");
    forcing.add_leaf("enable", false);
    forcing.add_leaf("k_lo", 2.0);
    forcing.add_leaf("k_hi", 4.0);
    forcing.add_leaf("rate", 1.0);
    forcing.add_leaf("seed", std::int64_t(1234));

    auto& output = p.add_child("output");
    output.add_leaf("enable_files", true);
    output.add_leaf("root_dir", std::string("."));
    output.add_leaf("period_save", 0.5);
    output.add_leaf("period_print", std::int64_t(10));

    auto& pre = p.add_child("preprocess");
    pre.add_leaf("rescale_enable", false);
    pre.add_leaf("rescale_energy", 1.0);
    pre.add_leaf("viscosity_enable", false);
    pre.add_leaf("viscosity_coef", 1.0);

    if (entry.extend_defaults) entry.extend_defaults(p);
    p.freeze();
    return p;
}

std::string params_digest(const ParamTree& params) {
    // Scope: solver identity and grid geometry.  Output cadence and other
    // run settings may differ between a run and its restart.
    std::string blob = params.get<std::string>("solver");
    blob += '\n';
    blob += params.child("oper").serialize();
    return fnv1a64_hex(blob.data(), blob.size());
}

// ------------------------------------------------------------- solver base

std::vector<std::vector<double>> Solver::linear_coef() const {
    // Default: -nu |k|^2 on every variable; nu == 0 collapses to none.
    std::vector<std::vector<double>> sigma(info().keys_state_spect.size());
    if (nu_ == 0.0) return sigma;
    const auto& grid = sim_.oper();
    for (auto& s : sigma) {
        s.resize(grid.spect_size);
        for (std::size_t i = 0; i < grid.spect_size; ++i) s[i] = -nu_ * grid.k_sq[i];
    }
    return sigma;
}

void Solver::compute_field(const std::string& key, real_field&) {
    throw ConfigError("solver '" + info().short_name + "' cannot compute '" + key + "'");
}

void Solver::mode_energy(std::vector<double>& e) const {
    const auto& grid = sim_.oper();
    const StateVec& s = sim_.state().spect();
    e.assign(grid.spect_size, 0.0);
    for (const auto& var : s)
        for (std::size_t i = 0; i < grid.spect_size; ++i)
            e[i] += 0.5 * grid.parseval_w[i] * std::norm(var[i]);
}

void Solver::mode_enstrophy(std::vector<double>&) const {
    throw ConfigError("solver '" + info().short_name + "' has no enstrophy");
}

void Solver::mode_transfer(const StateVec& nonlin, std::vector<double>& t) const {
    const auto& grid = sim_.oper();
    const StateVec& s = sim_.state().spect();
    t.assign(grid.spect_size, 0.0);
    for (std::size_t v = 0; v < s.size(); ++v)
        for (std::size_t i = 0; i < grid.spect_size; ++i)
            t[i] += grid.parseval_w[i] *
                    (s[v][i].real() * nonlin[v][i].real() +
                     s[v][i].imag() * nonlin[v][i].imag());
}

void Solver::mode_dissipation(std::vector<double>& d) const {
    const auto& grid = sim_.oper();
    // A solver without a linear part dissipates nothing, whatever nu says.
    auto lc = linear_coef();
    bool all_empty = true;
    for (const auto& var : lc)
        if (!var.empty()) all_empty = false;
    if (all_empty) {
        d.assign(grid.spect_size, 0.0);
        return;
    }
    mode_energy(d);
    for (std::size_t i = 0; i < grid.spect_size; ++i) d[i] *= -2.0 * nu_ * grid.k_sq[i];
}

double Solver::injection_inner(const StateVec& f) const {
    const auto& grid = sim_.oper();
    const StateVec& s = sim_.state().spect();
    double acc = 0.0;
    for (std::size_t v = 0; v < s.size(); ++v)
        for (std::size_t i = 0; i < grid.spect_size; ++i)
            acc += grid.parseval_w[i] * (s[v][i].real() * f[v][i].real() +
                                         s[v][i].imag() * f[v][i].imag());
    return acc;
}

double Solver::addend_energy(const StateVec& f) const {
    const auto& grid = sim_.oper();
    double acc = 0.0;
    for (const auto& var : f)
        for (std::size_t i = 0; i < grid.spect_size; ++i)
            acc += 0.5 * grid.parseval_w[i] * std::norm(var[i]);
    return acc;
}

void Solver::set_nu(double nu) {
    if (!(nu >= 0.0)) throw ConfigError("viscosity must be >= 0");
    nu_ = nu;
}

void Solver::prepare_forcing(StateVec&) const {}

// -------------------------------------------------------------- simulation

namespace {

void validate_params(const ParamTree& p, const SolverInfo& info) {
    double dealias = p.get<double>("oper.dealias_coef");
    if (!(dealias > 0.0) || dealias > 1.0)
        throw ConfigError("oper.dealias_coef must be in (0, 1]");

    static const char* axis_n[] = {"nx", "ny", "nz"};
    for (int d = 0; d < info.dims; ++d) {
        long n = p.get<std::int64_t>(std::string("oper.") + axis_n[d]);
        if (n < 4 || n % 2 != 0)
            throw ConfigError(std::string("oper.") + axis_n[d] + " must be even and >= 4, got " +
                              std::to_string(n));
    }

    double t_end = p.get<double>("time_stepping.t_end");
    long n_iters = p.get<std::int64_t>("time_stepping.n_iters");
    if ((t_end >= 0.0) == (n_iters >= 0))
        throw ConfigError(
            "exactly one stopping rule: set time_stepping.t_end >= 0 "
            "or time_stepping.n_iters >= 0, not both");

    if (!(p.get<double>("time_stepping.cfl_coef") > 0.0))
        throw ConfigError("time_stepping.cfl_coef must be > 0");
    if (!(p.get<double>("time_stepping.dt_max") > 0.0))
        throw ConfigError("time_stepping.dt_max must be > 0");
    if (p.get<double>("time_stepping.fixed_dt") < 0.0)
        throw ConfigError("time_stepping.fixed_dt must be >= 0");
    if (p.get<double>("nu_2") < 0.0) throw ConfigError("nu_2 must be >= 0");
    scheme_from_string(p.get<std::string>("time_stepping.scheme"));

    std::string init = p.get<std::string>("init_fields.type");
    if (init != "constant" && init != "noise" && init != "dipole" && init != "from_file")
        throw ConfigError("init_fields.type '" + init +
                          "' is not one of constant|noise|dipole|from_file");
    if (init == "dipole" && info.dims != 2)
        throw ConfigError("init_fields.type dipole needs a 2D solver");

    if (p.get<bool>("forcing.enable")) {
        if (p.get<double>("forcing.k_lo") > p.get<double>("forcing.k_hi"))
            throw ConfigError("forcing band: k_lo must be <= k_hi");
        if (!std::isfinite(p.get<double>("forcing.rate")))
            throw ConfigError("forcing.rate must be finite");
    }
    if (p.get<double>("output.period_save") <= 0.0)
        throw ConfigError("output.period_save must be > 0");
}

std::vector<int> grid_extents(const ParamTree& p, int dims) {
    static const char* ns[] = {"nx", "ny", "nz"};
    std::vector<int> n;
    for (int d = 0; d < dims; ++d)
        n.push_back(static_cast<int>(p.get<std::int64_t>(std::string("oper.") + ns[d])));
    return n;
}

std::vector<double> grid_lengths(const ParamTree& p, int dims) {
    static const char* ls[] = {"Lx", "Ly", "Lz"};
    std::vector<double> L;
    for (int d = 0; d < dims; ++d)
        L.push_back(p.get<double>(std::string("oper.") + ls[d]));
    return L;
}

}  // namespace

Simulation::Simulation(const ParamTree& params)
    : params_(params),
      info_([&] {
          ensure_builtin_solvers();
          return resolve_solver(params.get<std::string>("solver")).info;
      }()),
      oper_([&] {
          validate_params(params_, info_);
          return make_grid(grid_extents(params_, info_.dims),
                           grid_lengths(params_, info_.dims),
                           params_.get<double>("oper.dealias_coef"));
      }()) {
    params_.freeze();

    output_ = std::make_unique<OutputManager>(params_, info_);

    state_ = std::make_unique<StateSet>(oper_, info_.keys_state_phys,
                                        info_.keys_state_spect);
    state_->set_timers(&timers_);

    solver_ = resolve_solver(info_.short_name).factory(*this);
    solver_->set_nu(params_.get<double>("nu_2"));
    state_->set_provider(solver_.get());

    stepcfg_.scheme = scheme_from_string(params_.get<std::string>("time_stepping.scheme"));
    stepcfg_.cfl_coef = params_.get<double>("time_stepping.cfl_coef");
    stepcfg_.dt_max = params_.get<double>("time_stepping.dt_max");
    stepcfg_.fixed_dt = params_.get<double>("time_stepping.fixed_dt");
    stepcfg_.t_end = params_.get<double>("time_stepping.t_end");
    stepcfg_.n_iters = params_.get<std::int64_t>("time_stepping.n_iters");
    stepper_ = std::make_unique<ExactLinStepper>(stepcfg_.scheme,
                                                 solver_->linear_coef(), &timers_);
    sigma_dirty_ = false;

    init_fields();

    forcing_enabled_ = params_.get<bool>("forcing.enable");
    if (forcing_enabled_) {
        forcing_rate_ = params_.get<double>("forcing.rate");
        forcing_klo_ = params_.get<double>("forcing.k_lo");
        forcing_khi_ = params_.get<double>("forcing.k_hi");
        forcing_rng_.seed(
            static_cast<std::uint64_t>(params_.get<std::int64_t>("forcing.seed")));
        forcing_.assign(state_->n_vars(),
                        std::vector<cplx>(oper_.spect_size, cplx(0.0, 0.0)));
    }

    apply_preprocess();
    output_->attach(*this);
}

Simulation::~Simulation() = default;

void Simulation::init_fields() {
    std::string type = params_.get<std::string>("init_fields.type");
    if (type == "constant") {
        double value = params_.get<double>("init_fields.constant.value");
        StateVec& s = state_->spect_mut();
        for (auto& var : s) {
            std::fill(var.begin(), var.end(), cplx(0.0, 0.0));
            var[0] = cplx(value, 0.0);
        }
        solver_->sanitize_state();
    } else if (type == "noise") {
        double amplitude = params_.get<double>("init_fields.noise.amplitude");
        double k_lo = params_.get<double>("init_fields.noise.k_lo");
        double k_hi = params_.get<double>("init_fields.noise.k_hi");
        std::mt19937_64 rng(
            static_cast<std::uint64_t>(params_.get<std::int64_t>("init_fields.noise.seed")));
        StateVec& s = state_->spect_mut();
        for (auto& var : s) var = random_field(oper_, rng, k_lo, k_hi);
        solver_->sanitize_state();
        double e = energy();
        double target = amplitude * amplitude;
        StateVec& post = state_->spect_mut();
        if (amplitude == 0.0 || e == 0.0) {
            if (amplitude == 0.0)
                for (auto& var : post) std::fill(var.begin(), var.end(), cplx(0.0, 0.0));
        } else {
            double scale = std::sqrt(target / e);
            for (auto& var : post)
                for (auto& c : var) c *= scale;
        }
    } else if (type == "dipole") {
        double gamma = params_.get<double>("init_fields.dipole.gamma");
        double radius = params_.get<double>("init_fields.dipole.radius");
        if (!(radius > 0.0)) throw ConfigError("init_fields.dipole.radius must be > 0");
        // Two opposite-sign Gaussian vortices on the first variable,
        // offset by L/8 each side of the box center along axis 1.
        const double lx = oper_.L[0], ly = oper_.L[1];
        const int nx = oper_.n[0], ny = oper_.n[1];
        real_field w(oper_.phys_size);
        double amp = gamma / (M_PI * radius * radius);
        auto image_dist2 = [](double d, double l) {
            d = std::fmod(std::fmod(d, l) + 1.5 * l, l) - 0.5 * l;
            return d * d;
        };
        for (int i = 0; i < nx; ++i) {
            double x = lx * i / nx;
            for (int j = 0; j < ny; ++j) {
                double y = ly * j / ny;
                double d1 = image_dist2(x - 0.5 * lx, lx) +
                            image_dist2(y - (0.5 * ly + 0.125 * ly), ly);
                double d2 = image_dist2(x - 0.5 * lx, lx) +
                            image_dist2(y - (0.5 * ly - 0.125 * ly), ly);
                w[static_cast<std::size_t>(i) * ny + j] =
                    amp * (std::exp(-d1 / (radius * radius)) -
                           std::exp(-d2 / (radius * radius)));
            }
        }
        state_->load_phys(info_.keys_state_phys[0], w);
        for (std::size_t v = 1; v < state_->n_vars(); ++v) {
            auto& var = state_->spect_mut()[v];
            std::fill(var.begin(), var.end(), cplx(0.0, 0.0));
        }
        solver_->sanitize_state();
    } else {  // from_file
        std::string path = params_.get<std::string>("init_fields.from_file.path");
        if (path.empty()) throw ConfigError("init_fields.from_file.path is empty");
        FieldFile file = load_field_file(path);
        if (file.shape != oper_.n)
            throw ShapeError("snapshot '" + path + "' has a different grid shape");
        if (file.vars != info_.keys_state_phys)
            throw ConfigError("snapshot '" + path + "' holds different variables");
        // Trust the file: it was written from a sanitized state, and
        // re-sanitizing would break the bit-exact reload guarantee.
        state_->load_phys_all_trusted(file.fields);
        t_ = file.time;
    }
}

void Simulation::apply_preprocess() {
    if (params_.get<bool>("preprocess.rescale_enable")) {
        double target = params_.get<double>("preprocess.rescale_energy");
        if (!(target >= 0.0)) throw ConfigError("preprocess.rescale_energy must be >= 0");
        double e = energy();
        if (e > 0.0) {
            double scale = std::sqrt(target / e);
            for (auto& var : state_->spect_mut())
                for (auto& c : var) c *= scale;
            char buf[128];
            std::snprintf(buf, sizeof(buf),
                          "preprocess: rescaled energy %.6g -> %.6g (factor %.6g)", e,
                          target, scale);
            output_->log(buf);
        }
    }
    if (params_.get<bool>("preprocess.viscosity_enable")) {
        double coef = params_.get<double>("preprocess.viscosity_coef");
        double rate = params_.get<double>("forcing.rate");
        double dx = *std::max_element(oper_.dx.begin(), oper_.dx.end());
        double nu = coef * std::pow(dx, 4.0 / 3.0) * std::cbrt(rate);
        solver_->set_nu(nu);
        sigma_dirty_ = true;
        char buf[128];
        std::snprintf(buf, sizeof(buf), "preprocess: viscosity set to %.6g", nu);
        output_->log(buf);
    }
}

void Simulation::ensure_sigma() {
    if (!sigma_dirty_) return;
    stepper_->set_sigma(solver_->linear_coef());
    sigma_dirty_ = false;
}

double Simulation::compute_dt() {
    double dt;
    if (stepcfg_.fixed_dt > 0.0) {
        dt = stepcfg_.fixed_dt;
    } else {
        dt = compute_cfl_dt(solver_->max_velocity_per_axis(), oper_.dx,
                            stepcfg_.cfl_coef, stepcfg_.dt_max);
    }
    if (stepcfg_.t_end >= 0.0) {
        double remaining = stepcfg_.t_end - t_;
        if (remaining < dt) dt = remaining;
    }
    return dt;
}

void Simulation::compute_tendency(const StateVec& s, StateVec& out) {
    solver_->tendency(s, out);
}

bool Simulation::refresh_forcing() {
    if (!forcing_enabled_) return false;
    for (auto& var : forcing_) var = random_field(oper_, forcing_rng_, forcing_klo_, forcing_khi_);
    solver_->prepare_forcing(forcing_);

    // Split the forcing into a deterministic part along the band-masked
    // state (which injects exactly the target rate; the metric is diagonal
    // in k, so out-of-band state components cannot contribute) and a
    // unit-energy random part orthogonalized against the state (zero
    // injection).  Only a state with no energy in the band degenerates.
    StateVec ub = state_->spect();
    for (auto& var : ub)
        for (std::size_t i = 0; i < oper_.spect_size; ++i) {
            double kc = oper_.shell[i] * oper_.delta_k;
            if (kc < forcing_klo_ || kc > forcing_khi_) var[i] = cplx(0.0, 0.0);
        }
    double ibb = solver_->injection_inner(ub);
    double eu = energy();

    if (ibb <= 1e-6 * 2.0 * eu || eu <= 0.0) {
        double ef = solver_->addend_energy(forcing_);
        if (ef <= 0.0) {
            for (auto& var : forcing_)
                std::fill(var.begin(), var.end(), cplx(0.0, 0.0));
            last_injection_ = 0.0;
        } else {
            double unit = 1.0 / std::sqrt(ef);
            for (auto& var : forcing_)
                for (auto& c : var) c *= unit;
            last_injection_ = solver_->injection_inner(forcing_);
        }
        ++forcing_fallback_count_;
        output_->log("forcing: no state energy in the band, unit-energy fallback");
        return true;
    }

    double iuf = solver_->injection_inner(forcing_);
    for (std::size_t v = 0; v < forcing_.size(); ++v)
        for (std::size_t i = 0; i < oper_.spect_size; ++i)
            forcing_[v][i] -= (iuf / ibb) * ub[v][i];
    double ef = solver_->addend_energy(forcing_);
    if (ef > 0.0) {
        double unit = 1.0 / std::sqrt(ef);
        for (auto& var : forcing_)
            for (auto& c : var) c *= unit;
    }
    for (std::size_t v = 0; v < forcing_.size(); ++v)
        for (std::size_t i = 0; i < oper_.spect_size; ++i)
            forcing_[v][i] += (forcing_rate_ / ibb) * ub[v][i];
    last_injection_ = forcing_rate_;
    return true;
}

void Simulation::step_once() {
    if (read_only_) throw ConfigError("this simulation was loaded read-only");
    ensure_sigma();
    double dt = compute_dt();
    if (!(dt > 0.0)) throw ConfigError("step_once: nonpositive dt (past t_end?)");
    refresh_forcing();

    auto rhs = [this](const StateVec& s, StateVec& out) {
        solver_->tendency(s, out);
        if (forcing_enabled_)
            for (std::size_t v = 0; v < out.size(); ++v)
                for (std::size_t i = 0; i < out[v].size(); ++i)
                    out[v][i] += forcing_[v][i];
    };
    stepper_->step(state_->spect_mut(), dt, rhs);

    t_ += dt;
    ++it_;
    last_dt_ = dt;
    check_finite();
}

void Simulation::check_finite() const {
    const StateVec& s = state_->spect();
    for (std::size_t v = 0; v < s.size(); ++v)
        for (const cplx& c : s[v])
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw DivergenceError(it_, info_.keys_state_spect[v]);
}

RunSummary Simulation::run() {
    if (read_only_) throw ConfigError("this simulation was loaded read-only");
    ensure_sigma();
    auto start = std::chrono::steady_clock::now();
    output_->on_run_start();

    long steps = 0;
    auto done = [&] {
        if (stepcfg_.n_iters >= 0) return steps >= stepcfg_.n_iters;
        return t_ >= stepcfg_.t_end - 1e-12;
    };
    while (!done()) {
        step_once();
        ++steps;
        output_->after_step();
    }
    output_->on_run_end();

    RunSummary summary;
    summary.iterations = steps;
    summary.t_final = t_;
    std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    summary.walltime = wall.count();
    summary.kernel_seconds = timers_.totals();
    return summary;
}

double Simulation::energy() const {
    std::vector<double> e;
    solver_->mode_energy(e);
    double acc = 0.0;
    for (double v : e) acc += v;
    return acc;
}

double Simulation::enstrophy() const {
    if (!solver_->has_enstrophy()) return 0.0;
    std::vector<double> z;
    solver_->mode_enstrophy(z);
    double acc = 0.0;
    for (double v : z) acc += v;
    return acc;
}

double Simulation::dissipation_rate() const {
    std::vector<double> d;
    solver_->mode_dissipation(d);
    double acc = 0.0;
    for (double v : d) acc += v;
    return -acc;
}

void Simulation::set_n_iters(long n) {
    stepcfg_.n_iters = n;
    stepcfg_.t_end = -1.0;
}

void Simulation::set_t_end(double t_end) {
    stepcfg_.t_end = t_end;
    stepcfg_.n_iters = -1;
}

void Simulation::set_fixed_dt(double dt) {
    if (!(dt > 0.0)) throw ConfigError("fixed dt must be > 0");
    stepcfg_.fixed_dt = dt;
}

void Simulation::set_quiet(bool q) { output_->set_quiet(q); }

// ----------------------------------------------------------------- loaders

namespace {

ParamTree params_from_dir(const std::string& dir) {
    fs::path p = fs::path(dir) / "params.txt";
    std::ifstream in(p);
    if (!in) throw IoError("no params.txt in '" + dir + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return ParamTree::deserialize(text);
}

struct SnapshotRef {
    fs::path path;
    double time;
};

std::vector<SnapshotRef> list_snapshots(const std::string& dir) {
    fs::path snapdir = fs::path(dir) / "snapshots";
    std::vector<SnapshotRef> found;
    if (!fs::is_directory(snapdir)) return found;
    for (const auto& entry : fs::directory_iterator(snapdir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().extension() != ".fld") continue;
        found.push_back({entry.path(), read_field_header(entry.path().string()).time});
    }
    std::sort(found.begin(), found.end(),
              [](const SnapshotRef& a, const SnapshotRef& b) { return a.time < b.time; });
    return found;
}

void load_snapshot_into(Simulation& sim, const FieldFile& file) {
    if (file.shape != sim.oper().n)
        throw ShapeError("snapshot grid shape does not match params");
    if (file.vars != sim.info().keys_state_phys)
        throw IoError("snapshot variables do not match the solver state");
    sim.state().load_phys_all_trusted(file.fields);
}

}  // namespace

std::unique_ptr<Simulation> load_sim_for_plot(const std::string& dir) {
    ParamTree params = params_from_dir(dir);
    params.set("output.enable_files", false);
    params.set("init_fields.type", std::string("constant"));
    params.set("init_fields.constant.value", 0.0);
    auto sim = std::unique_ptr<Simulation>(new Simulation(params));
    sim->read_only_ = true;

    auto snaps = list_snapshots(dir);
    if (!snaps.empty()) {
        FieldFile file = load_field_file(snaps.back().path.string());
        load_snapshot_into(*sim, file);
        sim->t_ = file.time;
    }
    sim->output_->log("loaded (read-only) from " + dir);
    return sim;
}

std::unique_ptr<Simulation> load_state_phys_file(const std::string& dir, double time) {
    ParamTree params = params_from_dir(dir);
    params.set("output.enable_files", false);
    params.set("init_fields.type", std::string("constant"));
    params.set("init_fields.constant.value", 0.0);

    auto snaps = list_snapshots(dir);
    if (snaps.empty()) throw IoError("no snapshots in '" + dir + "'");

    const SnapshotRef* pick = nullptr;
    if (time < 0.0) {
        pick = &snaps.back();
    } else {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : snaps) {
            double d = std::abs(s.time - time);
            if (d < best) {
                best = d;
                pick = &s;
            }
        }
        double tol = 1e-9 * std::max(1.0, std::abs(time));
        if (!pick || best > tol)
            throw IoError("no snapshot near requested time " + std::to_string(time) +
                          " in '" + dir + "'");
    }

    FieldFile file = load_field_file(pick->path.string());
    std::string expect = params_digest(params);
    if (file.digest != expect)
        throw IoError("snapshot digest " + file.digest + " does not match params digest " +
                      expect + " (different run setup)");

    auto sim = std::unique_ptr<Simulation>(new Simulation(params));
    load_snapshot_into(*sim, file);
    sim->t_ = file.time;
    sim->output_->log("restarted from " + pick->path.string());
    return sim;
}

}  // namespace spectralkit
