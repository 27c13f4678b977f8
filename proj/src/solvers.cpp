#include <algorithm>
#include <cmath>
#include <mutex>

#include "spectralkit/errors.hpp"
#include "spectralkit/simulation.hpp"

namespace spectralkit {

namespace {

SolverInfo make_info(const std::string& name, int dims,
                     std::vector<std::string> keys_phys,
                     std::vector<std::string> keys_computable) {
    SolverInfo info;
    info.short_name = name;
    info.dims = dims;
    static const char* oper_ids[] = {"operators.spectral_1d", "operators.spectral_2d",
                                     "operators.spectral_3d"};
    info.classes = {{"Operators", oper_ids[dims - 1]},
                    {"State", "state." + name},
                    {"TimeStepping", "time_stepping.exact_lin_rk"},
                    {"InitFields", "init_fields.full"},
                    {"Forcing", "forcing.random_band"},
                    {"Output", "output.standard"},
                    {"Preprocess", "preprocess.standard"}};
    for (const auto& k : keys_phys) info.keys_state_spect.push_back(k + "_fft");
    info.keys_state_phys = std::move(keys_phys);
    info.keys_computable = std::move(keys_computable);
    return info;
}

// --------------------------------------------------------------- trivial

// Does nothing, exactly: no linear part regardless of nu, zero tendency.
// Useful as a bitwise-identity baseline for the stepper and output paths.
class TrivialSolver final : public Solver {
public:
    explicit TrivialSolver(Simulation& sim) : Solver(sim) {}

    const SolverInfo& info() const override {
        static const SolverInfo info = make_info("trivial", 2, {"a"}, {});
        return info;
    }

    std::vector<std::vector<double>> linear_coef() const override {
        return std::vector<std::vector<double>>(1);
    }

    void tendency(const StateVec&, StateVec& out) override {
        out.resize(1);
        out[0].assign(sim_.oper().spect_size, cplx(0.0, 0.0));
    }

    std::vector<double> max_velocity_per_axis() override { return {0.0, 0.0}; }
};

// ----------------------------------------------------------------- ad1d

// du/dt = -c du/dx with a second-order central difference for du/dx,
// wrapped in the spectral state container.  No linear part.
class Ad1dSolver final : public Solver {
public:
    explicit Ad1dSolver(Simulation& sim)
        : Solver(sim),
          u_(sim.oper().phys_size),
          dudx_(sim.oper().phys_size),
          c_(sim.params().get<double>("advection.c")) {}

    const SolverInfo& info() const override {
        static const SolverInfo info = make_info("ad1d", 1, {"u"}, {});
        return info;
    }

    std::vector<std::vector<double>> linear_coef() const override {
        return std::vector<std::vector<double>>(1);
    }

    void tendency(const StateVec& state, StateVec& out) override {
        const auto& g = sim_.oper();
        if (state.size() != 1 || state[0].size() != g.spect_size)
            throw ShapeError("ad1d tendency: wrong state shape");
        out.resize(1);
        auto& timers = sim_.timers();
        {
            KernelTimers::Scope scope(&timers, "fft");
            g.plan->inverse(state[0], u_);
        }
        {
            KernelTimers::Scope scope(&timers, "nonlin");
            const long n = g.n[0];
            const double f = -c_ / (2.0 * g.dx[0]);
            for (long i = 0; i < n; ++i) {
                double up = u_[static_cast<std::size_t>(i + 1 == n ? 0 : i + 1)];
                double um = u_[static_cast<std::size_t>(i == 0 ? n - 1 : i - 1)];
                dudx_[static_cast<std::size_t>(i)] = f * (up - um);
            }
        }
        {
            KernelTimers::Scope scope(&timers, "fft");
            g.plan->forward(dudx_, out[0]);
        }
    }

    std::vector<double> max_velocity_per_axis() override { return {std::abs(c_)}; }

private:
    real_field u_, dudx_;
    double c_;
};

// ----------------------------------------------------------------- ns2d

// Vorticity form: dw/dt = -u.grad(w) - nu |k|^2 w, with u recovered from
// the stream function.  Energy-metric diagnostics divide by |k|^2.
class Ns2dSolver final : public Solver {
public:
    explicit Ns2dSolver(Simulation& sim)
        : Solver(sim),
          sa_(sim.oper().spect_size),
          sb_(sim.oper().spect_size),
          pa_(sim.oper().phys_size),
          pb_(sim.oper().phys_size),
          pc_(sim.oper().phys_size),
          pd_(sim.oper().phys_size),
          prod_(sim.oper().phys_size) {}

    const SolverInfo& info() const override {
        static const SolverInfo info = make_info("ns2d", 2, {"rot"}, {"ux", "uy"});
        return info;
    }

    void tendency(const StateVec& state, StateVec& out) override {
        const auto& g = sim_.oper();
        if (state.size() != 1 || state[0].size() != g.spect_size)
            throw ShapeError("ns2d tendency: wrong state shape");
        out.resize(1);
        const spect_field& w = state[0];
        auto& timers = sim_.timers();

        {
            KernelTimers::Scope scope(&timers, "nonlin");
            velocity_from_vorticity2d(g, w, sa_, sb_);
        }
        {
            KernelTimers::Scope scope(&timers, "fft");
            g.plan->inverse(sa_, pa_);  // ux
            g.plan->inverse(sb_, pb_);  // uy
        }
        {
            KernelTimers::Scope scope(&timers, "nonlin");
            gradient_component(g, w, 0, sa_);
            gradient_component(g, w, 1, sb_);
        }
        {
            KernelTimers::Scope scope(&timers, "fft");
            g.plan->inverse(sa_, pc_);  // dw/dx
            g.plan->inverse(sb_, pd_);  // dw/dy
        }
        {
            KernelTimers::Scope scope(&timers, "vector_product");
            for (std::size_t i = 0; i < prod_.size(); ++i)
                prod_[i] = -(pa_[i] * pc_[i] + pb_[i] * pd_[i]);
        }
        {
            KernelTimers::Scope scope(&timers, "fft");
            g.plan->forward(prod_, out[0]);
        }
        {
            KernelTimers::Scope scope(&timers, "nonlin");
            dealias(g, out[0]);
            out[0][0] = cplx(0.0, 0.0);
        }
    }

    std::vector<double> max_velocity_per_axis() override {
        const auto& g = sim_.oper();
        auto& timers = sim_.timers();
        {
            KernelTimers::Scope scope(&timers, "nonlin");
            velocity_from_vorticity2d(g, sim_.state().spect()[0], sa_, sb_);
        }
        {
            KernelTimers::Scope scope(&timers, "fft");
            g.plan->inverse(sa_, pa_);
            g.plan->inverse(sb_, pb_);
        }
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < pa_.size(); ++i) {
            mx = std::max(mx, std::abs(pa_[i]));
            my = std::max(my, std::abs(pb_[i]));
        }
        return {mx, my};
    }

    std::vector<std::string> keys_computable() const override { return {"ux", "uy"}; }

    void compute_field(const std::string& key, real_field& out) override {
        const auto& g = sim_.oper();
        if (key != "ux" && key != "uy") {
            Solver::compute_field(key, out);
            return;
        }
        velocity_from_vorticity2d(g, sim_.state().spect()[0], sa_, sb_);
        out.resize(g.phys_size);
        KernelTimers::Scope scope(&sim_.timers(), "fft");
        g.plan->inverse(key == "ux" ? sa_ : sb_, out);
    }

    // Energy of the flow from the vorticity: e = w_k |w^|^2 / (2 |k|^2).
    void mode_energy(std::vector<double>& e) const override {
        const auto& g = sim_.oper();
        const spect_field& w = sim_.state().spect()[0];
        e.assign(g.spect_size, 0.0);
        for (std::size_t i = 1; i < g.spect_size; ++i)
            if (g.k_sq[i] > 0.0)
                e[i] = 0.5 * g.parseval_w[i] * std::norm(w[i]) / g.k_sq[i];
    }

    bool has_enstrophy() const override { return true; }

    void mode_enstrophy(std::vector<double>& z) const override {
        const auto& g = sim_.oper();
        const spect_field& w = sim_.state().spect()[0];
        z.assign(g.spect_size, 0.0);
        for (std::size_t i = 0; i < g.spect_size; ++i)
            z[i] = 0.5 * g.parseval_w[i] * std::norm(w[i]);
    }

    void mode_transfer(const StateVec& nonlin, std::vector<double>& t) const override {
        const auto& g = sim_.oper();
        const spect_field& w = sim_.state().spect()[0];
        t.assign(g.spect_size, 0.0);
        for (std::size_t i = 1; i < g.spect_size; ++i)
            if (g.k_sq[i] > 0.0)
                t[i] = g.parseval_w[i] *
                       (w[i].real() * nonlin[0][i].real() +
                        w[i].imag() * nonlin[0][i].imag()) /
                       g.k_sq[i];
    }

    double injection_inner(const StateVec& f) const override {
        const auto& g = sim_.oper();
        const spect_field& w = sim_.state().spect()[0];
        double acc = 0.0;
        for (std::size_t i = 1; i < g.spect_size; ++i)
            if (g.k_sq[i] > 0.0)
                acc += g.parseval_w[i] *
                       (w[i].real() * f[0][i].real() + w[i].imag() * f[0][i].imag()) /
                       g.k_sq[i];
        return acc;
    }

    double addend_energy(const StateVec& f) const override {
        const auto& g = sim_.oper();
        double acc = 0.0;
        for (std::size_t i = 1; i < g.spect_size; ++i)
            if (g.k_sq[i] > 0.0)
                acc += 0.5 * g.parseval_w[i] * std::norm(f[0][i]) / g.k_sq[i];
        return acc;
    }

    void sanitize_state() override {
        auto& w = sim_.state().spect_mut()[0];
        dealias(sim_.oper(), w);
        w[0] = cplx(0.0, 0.0);
    }

    void prepare_forcing(StateVec& f) const override {
        dealias(sim_.oper(), f[0]);
        f[0][0] = cplx(0.0, 0.0);
    }

private:
    spect_field sa_, sb_;
    real_field pa_, pb_, pc_, pd_, prod_;
};

// ----------------------------------------------------------------- ns3d

// Rotational form: dv/dt = P(v x curl v) - nu |k|^2 v, P the Leray
// projection.  The state stays divergence-free because every tendency is
// projected and the linear term is diagonal.
class Ns3dSolver final : public Solver {
public:
    explicit Ns3dSolver(Simulation& sim) : Solver(sim) {
        const auto& g = sim.oper();
        for (auto* s : {&wx_, &wy_, &wz_}) s->resize(g.spect_size);
        for (auto* p : {&ux_, &uy_, &uz_, &ox_, &oy_, &oz_, &cx_, &cy_, &cz_})
            p->resize(g.phys_size);
    }

    const SolverInfo& info() const override {
        static const SolverInfo info =
            make_info("ns3d", 3, {"vx", "vy", "vz"}, {"rotz"});
        return info;
    }

    void tendency(const StateVec& state, StateVec& out) override {
        const auto& g = sim_.oper();
        if (state.size() != 3)
            throw ShapeError("ns3d tendency: expected three state variables");
        out.resize(3);
        auto& timers = sim_.timers();

        {
            KernelTimers::Scope scope(&timers, "curl");
            curl3d(g, state[0], state[1], state[2], wx_, wy_, wz_);
        }
        {
            KernelTimers::Scope scope(&timers, "fft");
            g.plan->inverse(state[0], ux_);
            g.plan->inverse(state[1], uy_);
            g.plan->inverse(state[2], uz_);
            g.plan->inverse(wx_, ox_);
            g.plan->inverse(wy_, oy_);
            g.plan->inverse(wz_, oz_);
        }
        {
            KernelTimers::Scope scope(&timers, "vector_product");
            for (std::size_t i = 0; i < cx_.size(); ++i) {
                cx_[i] = uy_[i] * oz_[i] - uz_[i] * oy_[i];
                cy_[i] = uz_[i] * ox_[i] - ux_[i] * oz_[i];
                cz_[i] = ux_[i] * oy_[i] - uy_[i] * ox_[i];
            }
        }
        {
            KernelTimers::Scope scope(&timers, "fft");
            g.plan->forward(cx_, out[0]);
            g.plan->forward(cy_, out[1]);
            g.plan->forward(cz_, out[2]);
        }
        {
            KernelTimers::Scope scope(&timers, "projection");
            project_divfree(g, out[0], out[1], out[2]);
            for (auto& var : out) dealias(g, var);
            for (auto& var : out) var[0] = cplx(0.0, 0.0);
        }
    }

    std::vector<double> max_velocity_per_axis() override {
        const auto& g = sim_.oper();
        const StateVec& s = sim_.state().spect();
        {
            KernelTimers::Scope scope(&sim_.timers(), "fft");
            g.plan->inverse(s[0], ux_);
            g.plan->inverse(s[1], uy_);
            g.plan->inverse(s[2], uz_);
        }
        double mx = 0.0, my = 0.0, mz = 0.0;
        for (std::size_t i = 0; i < ux_.size(); ++i) {
            mx = std::max(mx, std::abs(ux_[i]));
            my = std::max(my, std::abs(uy_[i]));
            mz = std::max(mz, std::abs(uz_[i]));
        }
        return {mx, my, mz};
    }

    std::vector<std::string> keys_computable() const override { return {"rotz"}; }

    void compute_field(const std::string& key, real_field& out) override {
        if (key != "rotz") {
            Solver::compute_field(key, out);
            return;
        }
        const auto& g = sim_.oper();
        const StateVec& s = sim_.state().spect();
        // rotz = d(vy)/dx - d(vx)/dy
        gradient_component(g, s[1], 0, wx_);
        gradient_component(g, s[0], 1, wy_);
        for (std::size_t i = 0; i < g.spect_size; ++i) wx_[i] -= wy_[i];
        out.resize(g.phys_size);
        KernelTimers::Scope scope(&sim_.timers(), "fft");
        g.plan->inverse(wx_, out);
    }

    void sanitize_state() override {
        auto& s = sim_.state().spect_mut();
        project_divfree(sim_.oper(), s[0], s[1], s[2]);
        for (auto& var : s) dealias(sim_.oper(), var);
    }

    void prepare_forcing(StateVec& f) const override {
        project_divfree(sim_.oper(), f[0], f[1], f[2]);
        for (auto& var : f) {
            dealias(sim_.oper(), var);
            var[0] = cplx(0.0, 0.0);
        }
    }

private:
    spect_field wx_, wy_, wz_;
    real_field ux_, uy_, uz_, ox_, oy_, oz_, cx_, cy_, cz_;
};

}  // namespace

void ensure_builtin_solvers() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        register_solver({make_info("trivial", 2, {"a"}, {}),
                         [](Simulation& sim) -> std::unique_ptr<Solver> {
                             return std::make_unique<TrivialSolver>(sim);
                         },
                         nullptr});
        register_solver({make_info("ad1d", 1, {"u"}, {}),
                         [](Simulation& sim) -> std::unique_ptr<Solver> {
                             return std::make_unique<Ad1dSolver>(sim);
                         },
                         [](ParamTree& p) {
                             p.add_child("advection").add_leaf("c", 1.0);
                             // A finite-difference tendency has no use for
                             // spectral truncation.
                             p.set("oper.dealias_coef", 1.0);
                         }});
        register_solver({make_info("ns2d", 2, {"rot"}, {"ux", "uy"}),
                         [](Simulation& sim) -> std::unique_ptr<Solver> {
                             return std::make_unique<Ns2dSolver>(sim);
                         },
                         nullptr});
        register_solver({make_info("ns3d", 3, {"vx", "vy", "vz"}, {"rotz"}),
                         [](Simulation& sim) -> std::unique_ptr<Solver> {
                             return std::make_unique<Ns3dSolver>(sim);
                         },
                         nullptr});
    });
}

}  // namespace spectralkit
