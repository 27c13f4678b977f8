#include "spectralkit/time_stepping.hpp"

#include <cmath>

namespace spectralkit {

Scheme scheme_from_string(const std::string& s) {
    if (s == "RK2" || s == "rk2") return Scheme::RK2;
    if (s == "RK4" || s == "rk4") return Scheme::RK4;
    throw ConfigError("unknown time scheme '" + s + "' (use RK2 or RK4)");
}

const char* scheme_name(Scheme s) { return s == Scheme::RK2 ? "RK2" : "RK4"; }

double compute_cfl_dt(const std::vector<double>& max_vel_per_axis,
                      const std::vector<double>& dx_per_axis, double cfl_coef,
                      double dt_max) {
    if (max_vel_per_axis.size() != dx_per_axis.size())
        throw ConfigError("compute_cfl_dt: velocity/dx axis counts differ");
    double dt = dt_max;
    for (std::size_t d = 0; d < dx_per_axis.size(); ++d) {
        double vel = std::max(std::abs(max_vel_per_axis[d]), 1e-30);
        dt = std::min(dt, cfl_coef * dx_per_axis[d] / vel);
    }
    return dt;
}

ExactLinStepper::ExactLinStepper(Scheme scheme, std::vector<std::vector<double>> sigma,
                                 KernelTimers* timers)
    : scheme_(scheme), sigma_(std::move(sigma)), timers_(timers) {}

void ExactLinStepper::set_sigma(std::vector<std::vector<double>> sigma) {
    sigma_ = std::move(sigma);
    exp_valid_ = false;
}

void ExactLinStepper::refresh_exp(double dt, std::size_t nvars) {
    if (sigma_.size() != nvars)
        throw ShapeError("stepper has " + std::to_string(sigma_.size()) +
                         " linear-coefficient arrays for " + std::to_string(nvars) +
                         " state variables");
    if (exp_valid_ && dt == cached_dt_) return;
    e_half_.assign(nvars, {});
    e_full_.assign(nvars, {});
    for (std::size_t v = 0; v < nvars; ++v) {
        if (sigma_[v].empty()) continue;  // zero linear term: factors are 1
        const auto& s = sigma_[v];
        e_half_[v].resize(s.size());
        e_full_[v].resize(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            e_half_[v][i] = std::exp(0.5 * dt * s[i]);
            e_full_[v][i] = std::exp(dt * s[i]);
        }
    }
    cached_dt_ = dt;
    exp_valid_ = true;
}

void ExactLinStepper::eval(const TendencyFn& nonlin, const StateVec& in, StateVec& out,
                           const StateVec& ref) {
    nonlin(in, out);
    if (out.size() != ref.size())
        throw ShapeError("tendency returned " + std::to_string(out.size()) +
                         " variables, state has " + std::to_string(ref.size()));
    for (std::size_t v = 0; v < ref.size(); ++v)
        if (out[v].size() != ref[v].size())
            throw ShapeError("tendency variable " + std::to_string(v) + " has " +
                             std::to_string(out[v].size()) + " modes, state has " +
                             std::to_string(ref[v].size()));
}

void ExactLinStepper::step(StateVec& state, double dt, const TendencyFn& nonlin) {
    const std::size_t nvars = state.size();
    refresh_exp(dt, nvars);

    auto resize_like = [&](StateVec& w) {
        w.resize(nvars);
        for (std::size_t v = 0; v < nvars; ++v) w[v].resize(state[v].size());
    };
    resize_like(tmp_);

    if (scheme_ == Scheme::RK2) {
        eval(nonlin, state, k1_, state);
        {
            auto t = KernelTimers::Scope(timers_, "rk");
            for (std::size_t v = 0; v < nvars; ++v) {
                const auto& e1 = e_half_[v];
                const double hdt = 0.5 * dt;
                if (e1.empty()) {
                    for (std::size_t i = 0; i < state[v].size(); ++i)
                        tmp_[v][i] = state[v][i] + hdt * k1_[v][i];
                } else {
                    for (std::size_t i = 0; i < state[v].size(); ++i)
                        tmp_[v][i] = e1[i] * (state[v][i] + hdt * k1_[v][i]);
                }
            }
        }
        eval(nonlin, tmp_, k2_, state);
        {
            auto t = KernelTimers::Scope(timers_, "rk");
            // u+ = E2 u + dt E1 k2
            for (std::size_t v = 0; v < nvars; ++v) {
                const auto& e1 = e_half_[v];
                const auto& e2 = e_full_[v];
                if (e2.empty()) {
                    for (std::size_t i = 0; i < state[v].size(); ++i) {
                        std::complex<double> delta = dt * k2_[v][i];
                        // Skipping exact-zero updates keeps no-op tendencies
                        // bit-identical (no -0.0 flips).
                        if (delta != 0.0) state[v][i] += delta;
                    }
                } else {
                    for (std::size_t i = 0; i < state[v].size(); ++i)
                        state[v][i] = e2[i] * state[v][i] + dt * e1[i] * k2_[v][i];
                }
            }
        }
        return;
    }

    // RK4 under the integrating factor, with E1 = exp(sigma dt/2), E2 = exp(sigma dt):
    //   k1 = N(u)
    //   k2 = N(E1 (u + dt/2 k1))
    //   k3 = N(E1 u + dt/2 k2)
    //   k4 = N(E2 u + dt E1 k3)
    //   u+ = E2 u + dt/6 (E2 k1 + 2 E1 (k2 + k3) + k4)
    eval(nonlin, state, k1_, state);
    {
        auto t = KernelTimers::Scope(timers_, "rk");
        for (std::size_t v = 0; v < nvars; ++v) {
            const auto& e1 = e_half_[v];
            const double hdt = 0.5 * dt;
            if (e1.empty()) {
                for (std::size_t i = 0; i < state[v].size(); ++i)
                    tmp_[v][i] = state[v][i] + hdt * k1_[v][i];
            } else {
                for (std::size_t i = 0; i < state[v].size(); ++i)
                    tmp_[v][i] = e1[i] * (state[v][i] + hdt * k1_[v][i]);
            }
        }
    }
    eval(nonlin, tmp_, k2_, state);
    {
        auto t = KernelTimers::Scope(timers_, "rk");
        for (std::size_t v = 0; v < nvars; ++v) {
            const auto& e1 = e_half_[v];
            const double hdt = 0.5 * dt;
            if (e1.empty()) {
                for (std::size_t i = 0; i < state[v].size(); ++i)
                    tmp_[v][i] = state[v][i] + hdt * k2_[v][i];
            } else {
                for (std::size_t i = 0; i < state[v].size(); ++i)
                    tmp_[v][i] = e1[i] * state[v][i] + hdt * k2_[v][i];
            }
        }
    }
    eval(nonlin, tmp_, k3_, state);
    {
        auto t = KernelTimers::Scope(timers_, "rk");
        for (std::size_t v = 0; v < nvars; ++v) {
            const auto& e1 = e_half_[v];
            const auto& e2 = e_full_[v];
            if (e2.empty()) {
                for (std::size_t i = 0; i < state[v].size(); ++i)
                    tmp_[v][i] = state[v][i] + dt * k3_[v][i];
            } else {
                for (std::size_t i = 0; i < state[v].size(); ++i)
                    tmp_[v][i] = e2[i] * state[v][i] + dt * e1[i] * k3_[v][i];
            }
        }
    }
    eval(nonlin, tmp_, k4_, state);
    {
        auto t = KernelTimers::Scope(timers_, "rk");
        const double sdt = dt / 6.0;
        for (std::size_t v = 0; v < nvars; ++v) {
            const auto& e1 = e_half_[v];
            const auto& e2 = e_full_[v];
            if (e2.empty()) {
                for (std::size_t i = 0; i < state[v].size(); ++i) {
                    std::complex<double> delta =
                        sdt * (k1_[v][i] + 2.0 * (k2_[v][i] + k3_[v][i]) + k4_[v][i]);
                    if (delta != 0.0) state[v][i] += delta;
                }
            } else {
                for (std::size_t i = 0; i < state[v].size(); ++i)
                    state[v][i] = e2[i] * state[v][i] +
                                  sdt * (e2[i] * k1_[v][i] +
                                         2.0 * e1[i] * (k2_[v][i] + k3_[v][i]) +
                                         k4_[v][i]);
            }
        }
    }
}

}  // namespace spectralkit
