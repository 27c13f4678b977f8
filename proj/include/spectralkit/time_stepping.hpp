#pragma once

#include <chrono>
#include <complex>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "spectralkit/errors.hpp"

namespace spectralkit {

enum class Scheme { RK2, RK4 };

Scheme scheme_from_string(const std::string& s);
const char* scheme_name(Scheme s);

struct StepperConfig {
    Scheme scheme = Scheme::RK4;
    double cfl_coef = 0.5;
    double dt_max = 0.1;
    double fixed_dt = 0.0;  // > 0 means constant dt
    double t_end = -1.0;    // exactly one of t_end / n_iters must be >= 0
    long n_iters = -1;
};

/// dt = min(dt_max, cfl_coef * min_d(dx_d / max(|u_d|, eps))).
double compute_cfl_dt(const std::vector<double>& max_vel_per_axis,
                      const std::vector<double>& dx_per_axis, double cfl_coef,
                      double dt_max);

struct RunSummary {
    long iterations = 0;
    double t_final = 0.0;
    double walltime = 0.0;
    std::map<std::string, double> kernel_seconds;
};

/// Cumulative per-kernel wall clocks. Scopes must not overlap so that the
/// totals never exceed the enclosing walltime.
class KernelTimers {
public:
    class Scope {
    public:
        Scope(KernelTimers* t, const char* name)
            : t_(t), name_(name), start_(std::chrono::steady_clock::now()) {}
        ~Scope() {
            if (!t_) return;
            std::chrono::duration<double> d = std::chrono::steady_clock::now() - start_;
            t_->add(name_, d.count());
        }
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

    private:
        KernelTimers* t_;
        const char* name_;
        std::chrono::steady_clock::time_point start_;
    };

    Scope scope(const char* name) { return Scope(this, name); }
    void add(const std::string& name, double seconds) { totals_[name] += seconds; }
    const std::map<std::string, double>& totals() const { return totals_; }
    void reset() { totals_.clear(); }

private:
    std::map<std::string, double> totals_;
};

/// One spectral array per state variable.
using StateVec = std::vector<std::vector<std::complex<double>>>;
/// Maps a stage state to its (dealiased) nonlinear tendency.
using TendencyFn = std::function<void(const StateVec&, StateVec&)>;

/// RK2/RK4 with the diagonal linear term sigma integrated exactly via the
/// integrating-factor substitution v = exp(-sigma t) u: pure linear problems
/// are advanced by exactly exp(sigma dt) regardless of dt.
class ExactLinStepper {
public:
    /// sigma: one array per state variable (1/s); an empty array means zero.
    ExactLinStepper(Scheme scheme, std::vector<std::vector<double>> sigma,
                    KernelTimers* timers = nullptr);

    void set_sigma(std::vector<std::vector<double>> sigma);
    Scheme scheme() const { return scheme_; }

    /// Advance state by one step of du/dt = nonlin(u) + sigma*u.
    void step(StateVec& state, double dt, const TendencyFn& nonlin);

private:
    void refresh_exp(double dt, std::size_t nvars);
    void eval(const TendencyFn& nonlin, const StateVec& in, StateVec& out,
              const StateVec& ref);

    Scheme scheme_;
    std::vector<std::vector<double>> sigma_;
    KernelTimers* timers_;
    double cached_dt_ = 0.0;
    bool exp_valid_ = false;
    std::vector<std::vector<double>> e_half_, e_full_;  // empty entry = all ones
    StateVec k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace spectralkit
