#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "spectralkit/grid.hpp"
#include "spectralkit/params.hpp"
#include "spectralkit/solver_info.hpp"
#include "spectralkit/state.hpp"
#include "spectralkit/time_stepping.hpp"

namespace spectralkit {

class Simulation;
class OutputManager;

// Equation-specific part of a simulation: the nonlinear tendency, the
// diagonal linear coefficients, and per-mode diagnostics.  One instance
// per Simulation; scratch buffers live here, so instances are not shared.
class Solver : public ComputableProvider {
public:
    explicit Solver(Simulation& sim) : sim_(sim) {}
    virtual ~Solver() = default;

    virtual const SolverInfo& info() const = 0;

    // One coefficient array per state variable; empty array = zero linear
    // part.  The stepper integrates u' = sigma*u exactly.
    virtual std::vector<std::vector<double>> linear_coef() const;

    // Dealiased nonlinear tendency.  Must not touch sim state.
    virtual void tendency(const StateVec& state, StateVec& out) = 0;

    // Largest |u_d| over the grid per axis, for the CFL limit.
    virtual std::vector<double> max_velocity_per_axis() = 0;

    std::vector<std::string> keys_computable() const override { return {}; }
    void compute_field(const std::string& key, real_field& out) override;

    // Per stored mode: energy density e_i with Sum_i e_i = E.
    virtual void mode_energy(std::vector<double>& e) const;
    virtual bool has_enstrophy() const { return false; }
    virtual void mode_enstrophy(std::vector<double>& z) const;
    // Per-mode energy transfer by a given nonlinear tendency.
    virtual void mode_transfer(const StateVec& nonlin, std::vector<double>& t) const;
    // Per-mode viscous term, -2 nu |k|^2 e_i (non-positive).
    void mode_dissipation(std::vector<double>& d) const;
    // Energy-injection rate of a forcing addend against the current state.
    virtual double injection_inner(const StateVec& f) const;
    // Energy of an addend in the same metric as injection_inner.
    virtual double addend_energy(const StateVec& f) const;

    double nu() const { return nu_; }
    void set_nu(double nu);

    // Restore solver invariants on the current state (zero mean,
    // divergence-free, dealiased).  Default: nothing to enforce.
    virtual void sanitize_state() {}
    // Apply the same invariants to a forcing addend.
    virtual void prepare_forcing(StateVec& f) const;

protected:
    Simulation& sim_;
    double nu_ = 0.0;
};

using SolverFactory = std::function<std::unique_ptr<Solver>(Simulation&)>;

struct SolverEntry {
    SolverInfo info;
    SolverFactory factory;
    // Appends solver-specific parameters to the default tree (optional).
    std::function<void(ParamTree&)> extend_defaults;
};

// Global solver registry.  Registration validates the descriptor and
// makes its component ids resolvable.
void register_solver(SolverEntry entry);
const SolverEntry& resolve_solver(const std::string& short_name);
std::vector<std::string> registered_solvers();
bool solver_registered(const std::string& short_name);
// Registers trivial/ad1d/ns2d/ns3d once; safe to call repeatedly.
void ensure_builtin_solvers();

// Frozen default parameter tree for one solver; leaf values remain
// settable.  Carries the solver id in the "solver" leaf.
ParamTree create_default_params(const std::string& solver);

// 16-hex-digit digest tying snapshots to the run setup (solver + grid).
std::string params_digest(const ParamTree& params);

class Simulation {
public:
    // Builds every sub-object in a fixed order: params, solver descriptor,
    // grid, output, state, stepper, initial fields, forcing, preprocess.
    explicit Simulation(const ParamTree& params);
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    const ParamTree& params() const { return params_; }
    const SolverInfo& info() const { return info_; }
    const SpectralGrid& oper() const { return oper_; }
    StateSet& state() { return *state_; }
    const StateSet& state() const { return *state_; }
    Solver& solver() { return *solver_; }
    const Solver& solver() const { return *solver_; }
    OutputManager& output() { return *output_; }
    KernelTimers& timers() { return timers_; }

    double t() const { return t_; }
    long iteration() const { return it_; }
    double last_dt() const { return last_dt_; }

    // Step size for the next step: fixed_dt when set, else the CFL bound,
    // clamped to land exactly on t_end.
    double compute_dt();

    // Nonlinear tendency of an arbitrary stage state (no forcing).
    void compute_tendency(const StateVec& s, StateVec& out);

    // One full step: refresh forcing, advance, guard against non-finite
    // values (DivergenceError), advance t and the iteration count.
    void step_once();

    // Run to the stopping rule (t_end absolute, or n_iters counted from
    // this call), writing output on the configured cadence.
    RunSummary run();

    double energy() const;
    double enstrophy() const;
    // Viscous dissipation rate 2 nu Sum |k|^2 e_i (non-negative).
    double dissipation_rate() const;
    double last_injection() const { return last_injection_; }

    bool forcing_enabled() const { return forcing_enabled_; }
    // Draws and rescales the forcing addend from the current state;
    // records the realized injection rate.  Returns false when disabled.
    bool refresh_forcing();
    const StateVec& forcing_addend() const { return forcing_; }
    long forcing_fallback_count() const { return forcing_fallback_count_; }

    // Stopping-rule and stepping overrides (benchmarks, tests, restart).
    void set_n_iters(long n);
    void set_t_end(double t_end);
    void set_fixed_dt(double dt);
    void set_quiet(bool q);

private:
    friend std::unique_ptr<Simulation> load_sim_for_plot(const std::string& dir);
    friend std::unique_ptr<Simulation> load_state_phys_file(const std::string& dir,
                                                            double time);

    void ensure_sigma();
    void check_finite() const;
    void init_fields();
    void apply_preprocess();

    ParamTree params_;
    SolverInfo info_;
    SpectralGrid oper_;
    std::unique_ptr<OutputManager> output_;
    std::unique_ptr<StateSet> state_;
    std::unique_ptr<Solver> solver_;
    std::unique_ptr<ExactLinStepper> stepper_;
    StepperConfig stepcfg_;
    KernelTimers timers_;

    bool forcing_enabled_ = false;
    std::mt19937_64 forcing_rng_;
    double forcing_rate_ = 0.0;
    double forcing_klo_ = 0.0, forcing_khi_ = 0.0;
    StateVec forcing_;
    double last_injection_ = 0.0;
    long forcing_fallback_count_ = 0;

    double t_ = 0.0;
    long it_ = 0;
    double last_dt_ = 0.0;
    bool sigma_dirty_ = true;
    bool read_only_ = false;
};

// Reopens a finished simulation directory for reading its outputs; the
// returned object refuses to step.
std::unique_ptr<Simulation> load_sim_for_plot(const std::string& dir);

// Restarts from the snapshot nearest to `time` (relative tolerance 1e-9;
// time < 0 picks the latest).  File output stays off on the reloaded run.
std::unique_ptr<Simulation> load_state_phys_file(const std::string& dir,
                                                 double time = -1.0);

}  // namespace spectralkit
