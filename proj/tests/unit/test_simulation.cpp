#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>

#include "doctest.h"
#include "spectralkit/errors.hpp"
#include "spectralkit/output.hpp"
#include "spectralkit/simulation.hpp"
#include "spectralkit/snapshot.hpp"

using namespace spectralkit;
namespace fs = std::filesystem;

namespace {

std::unique_ptr<Simulation> make_sim(
    const std::string& solver,
    const std::function<void(ParamTree&)>& tweak = nullptr) {
    ensure_builtin_solvers();
    ParamTree params = create_default_params(solver);
    params.set("output.enable_files", false);
    if (tweak) tweak(params);
    auto sim = std::make_unique<Simulation>(params);
    sim->set_quiet(true);
    return sim;
}

struct TempDir {
    TempDir() {
        char tmpl[] = "/tmp/spectralkit_test_XXXXXX";
        REQUIRE(mkdtemp(tmpl) != nullptr);
        path = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string path;
};

// The single run directory created under root.
std::string only_subdir(const std::string& root) {
    std::string found;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) {
            REQUIRE(found.empty());
            found = e.path().string();
        }
    REQUIRE(!found.empty());
    return found;
}

bool spect_equal_bits(const StateVec& a, const StateVec& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t v = 0; v < a.size(); ++v) {
        if (a[v].size() != b[v].size()) return false;
        if (std::memcmp(a[v].data(), b[v].data(), a[v].size() * sizeof(cplx)) != 0)
            return false;
    }
    return true;
}

double max_rel_diff(const StateVec& a, const StateVec& b) {
    REQUIRE(a.size() == b.size());
    double scale = 0.0, diff = 0.0;
    for (std::size_t v = 0; v < a.size(); ++v)
        for (std::size_t i = 0; i < a[v].size(); ++i) {
            scale = std::max(scale, std::abs(a[v][i]));
            diff = std::max(diff, std::abs(a[v][i] - b[v][i]));
        }
    return scale > 0.0 ? diff / scale : diff;
}

}  // namespace

TEST_CASE("registry: built-ins resolvable, unknown name lists what exists") {
    ensure_builtin_solvers();
    auto names = registered_solvers();
    for (const char* want : {"trivial", "ad1d", "ns2d", "ns3d"}) {
        CAPTURE(want);
        CHECK(solver_registered(want));
        CHECK(std::find(names.begin(), names.end(), want) != names.end());
    }
    CHECK(resolve_solver("ns2d").info.short_name == "ns2d");

    try {
        resolve_solver("nope");
        FAIL("expected RegistryError");
    } catch (const RegistryError& e) {
        CHECK(std::string(e.what()).find("ns2d") != std::string::npos);
    }
    CHECK_THROWS_AS(create_default_params("nope"), RegistryError);
    CHECK_THROWS_AS(register_solver(resolve_solver("ns2d")), RegistryError);
}

TEST_CASE("construction: smoke run state is finite, forcing absent by default") {
    auto sim = make_sim("ns2d", [](ParamTree& p) {
        p.set("oper.nx", std::int64_t(64));
        p.set("oper.ny", std::int64_t(64));
    });
    CHECK(sim->energy() > 0.0);
    CHECK(std::isfinite(sim->energy()));
    CHECK_FALSE(sim->forcing_enabled());
    CHECK(sim->info().short_name == "ns2d");
    CHECK(sim->iteration() == 0);
    CHECK(sim->t() == 0.0);
}

TEST_CASE("construction: bad parameters fail before allocation") {
    CHECK_THROWS_AS(make_sim("ns2d",
                             [](ParamTree& p) {
                                 p.set("oper.nx", std::int64_t(7));
                                 p.set("oper.ny", std::int64_t(7));
                             }),
                    ConfigError);
    CHECK_THROWS_AS(make_sim("ns2d",
                             [](ParamTree& p) { p.set("oper.dealias_coef", 0.0); }),
                    ConfigError);
    CHECK_THROWS_AS(make_sim("ns2d",
                             [](ParamTree& p) {
                                 p.set("time_stepping.n_iters", std::int64_t(5));
                             }),
                    ConfigError);  // two stopping rules
    CHECK_THROWS_AS(make_sim("ns2d",
                             [](ParamTree& p) { p.set("time_stepping.t_end", -1.0); }),
                    ConfigError);  // no stopping rule
    CHECK_THROWS_AS(make_sim("ns3d",
                             [](ParamTree& p) {
                                 p.set("init_fields.type", std::string("dipole"));
                             }),
                    ConfigError);
}

TEST_CASE("init: constant fills the field, mean mode carries the value") {
    auto sim = make_sim("ad1d", [](ParamTree& p) {
        p.set("init_fields.type", std::string("constant"));
        p.set("init_fields.constant.value", 2.0);
    });
    const auto& u = sim->state().var_phys("u");
    for (double v : u) CHECK(v == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sim->state().spect()[0][0].real() == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("init: noise is deterministic per seed") {
    auto tweak = [](ParamTree& p) {
        p.set("init_fields.noise.seed", std::int64_t(7));
    };
    auto a = make_sim("ns2d", tweak);
    auto b = make_sim("ns2d", tweak);
    CHECK(spect_equal_bits(a->state().spect(), b->state().spect()));

    auto c = make_sim("ns2d", [](ParamTree& p) {
        p.set("init_fields.noise.seed", std::int64_t(8));
    });
    CHECK_FALSE(spect_equal_bits(a->state().spect(), c->state().spect()));
}

TEST_CASE("init: dipole builds a mean-free 2D field") {
    auto sim = make_sim("ns2d", [](ParamTree& p) {
        p.set("init_fields.type", std::string("dipole"));
        p.set("oper.nx", std::int64_t(32));
        p.set("oper.ny", std::int64_t(32));
    });
    CHECK(sim->energy() > 0.0);
    CHECK(std::abs(sim->state().spect()[0][0]) == 0.0);
}

TEST_CASE("init: from_file reproduces a saved state bit for bit") {
    TempDir tmp;
    auto a = make_sim("ns2d", [](ParamTree& p) {
        p.set("init_fields.noise.seed", std::int64_t(21));
    });
    FieldFile file;
    file.time = 0.75;
    file.shape = a->oper().n;
    file.vars = a->info().keys_state_phys;
    file.digest = params_digest(a->params());
    file.fields.push_back(a->state().var_phys("rot"));
    std::string path = tmp.path + "/state.fld";
    save_field_file(path, file);

    auto b = make_sim("ns2d", [&](ParamTree& p) {
        p.set("init_fields.type", std::string("from_file"));
        p.set("init_fields.from_file.path", path);
    });
    CHECK(b->t() == 0.75);
    const auto& pa = a->state().var_phys("rot");
    const auto& pb = b->state().var_phys("rot");
    REQUIRE(pa.size() == pb.size());
    CHECK(std::memcmp(pa.data(), pb.data(), pa.size() * sizeof(double)) == 0);

    // Saving the reloaded state writes the identical file.
    FieldFile file2 = file;
    file2.fields[0] = pb;
    std::string path2 = tmp.path + "/state2.fld";
    save_field_file(path2, file2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);

    auto bad = [&](auto mutate) {
        FieldFile broken = file;
        mutate(broken);
        std::string p3 = tmp.path + "/broken.fld";
        save_field_file(p3, broken);
        CHECK_THROWS(make_sim("ns2d", [&](ParamTree& p) {
            p.set("init_fields.type", std::string("from_file"));
            p.set("init_fields.from_file.path", p3);
        }));
    };
    bad([](FieldFile& f) {
        f.shape = {8, 8};
        f.fields[0].assign(64, 0.0);
    });
    bad([](FieldFile& f) { f.vars = {"zzz"}; });
}

TEST_CASE("forcing: realized injection equals the requested rate") {
    auto sim = make_sim("ns2d", [](ParamTree& p) {
        p.set("oper.nx", std::int64_t(64));
        p.set("oper.ny", std::int64_t(64));
        p.set("forcing.enable", true);
        p.set("forcing.rate", 2.5);
        p.set("forcing.k_lo", 2.0);
        p.set("forcing.k_hi", 4.0);
        p.set("init_fields.noise.seed", std::int64_t(13));
    });
    REQUIRE(sim->forcing_enabled());
    REQUIRE(sim->refresh_forcing());
    CHECK(sim->forcing_fallback_count() == 0);
    CHECK(sim->last_injection() == doctest::Approx(2.5).epsilon(1e-12));

    // Independent inner product of the stored addend against the state.
    double inner = sim->solver().injection_inner(sim->forcing_addend());
    CHECK(inner == doctest::Approx(2.5).epsilon(1e-10));

    // Support confined to the band (shell-center membership).
    const auto& g = sim->oper();
    const auto& f = sim->forcing_addend();
    for (std::size_t i = 0; i < g.spect_size; ++i) {
        double kc = g.shell[i] * g.delta_k;
        if (kc < 2.0 || kc > 4.0) {
            CHECK(std::abs(f[0][i]) == 0.0);
        }
    }

    // Injection holds across stepping as well.
    for (int i = 0; i < 5; ++i) sim->step_once();
    CHECK(sim->last_injection() == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(sim->forcing_fallback_count() == 0);
}

TEST_CASE("forcing: zero state takes the unit-energy fallback") {
    auto sim = make_sim("ns2d", [](ParamTree& p) {
        p.set("forcing.enable", true);
        p.set("init_fields.type", std::string("constant"));
        p.set("init_fields.constant.value", 0.0);
    });
    REQUIRE(sim->refresh_forcing());
    CHECK(sim->forcing_fallback_count() == 1);
    CHECK(std::isfinite(sim->last_injection()));
    const auto& f = sim->forcing_addend();
    double norm = 0.0;
    for (const auto& c : f[0]) norm += std::norm(c);
    CHECK(norm > 0.0);
    CHECK(std::isfinite(norm));
}

TEST_CASE("preprocess: rescale hits the target energy exactly") {
    auto sim = make_sim("ns2d", [](ParamTree& p) {
        p.set("init_fields.noise.amplitude", 2.0);
        p.set("preprocess.rescale_enable", true);
        p.set("preprocess.rescale_energy", 1.0);
    });
    CHECK(sim->energy() == doctest::Approx(1.0).epsilon(1e-12));

    auto off = make_sim("ns2d", [](ParamTree& p) {
        p.set("init_fields.noise.amplitude", 2.0);
    });
    CHECK(off->energy() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("preprocess: viscosity follows the resolution scaling") {
    auto sim = make_sim("ns2d", [](ParamTree& p) {
        p.set("oper.nx", std::int64_t(64));
        p.set("oper.ny", std::int64_t(64));
        p.set("preprocess.viscosity_enable", true);
        p.set("preprocess.viscosity_coef", 1.0);
        p.set("forcing.rate", 1.0);
    });
    double expected = std::pow(2.0 * M_PI / 64.0, 4.0 / 3.0);
    CHECK(sim->solver().nu() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("trivial solver leaves the state bit-identical across steps") {
    auto sim = make_sim("trivial", [](ParamTree& p) {
        p.set("nu_2", 0.05);  // must not matter: no linear part at all
        p.set("time_stepping.fixed_dt", 0.1);
        p.set("time_stepping.t_end", -1.0);
        p.set("time_stepping.n_iters", std::int64_t(50));
    });
    StateVec before = sim->state().spect();
    sim->run();
    CHECK(sim->iteration() == 50);
    CHECK(spect_equal_bits(before, sim->state().spect()));
}

TEST_CASE("state consistency: spect -> phys -> spect after stepping") {
    auto sim = make_sim("ns2d", [](ParamTree& p) {
        p.set("time_stepping.fixed_dt", 1e-3);
        p.set("init_fields.noise.seed", std::int64_t(2));
    });
    for (int i = 0; i < 3; ++i) sim->step_once();
    StateVec s0 = sim->state().spect();
    const auto& phys = sim->state().var_phys("rot");
    sim->state().load_phys("rot", phys);
    CHECK(max_rel_diff(s0, sim->state().spect()) < 1e-12);
}

TEST_CASE("reload: plot view matches the last snapshot and refuses to step") {
    TempDir tmp;
    std::string simdir;
    StateVec final_state;
    {
        auto sim = make_sim("ns2d", [&](ParamTree& p) {
            p.set("oper.nx", std::int64_t(32));
            p.set("oper.ny", std::int64_t(32));
            p.set("output.enable_files", true);
            p.set("output.root_dir", tmp.path);
            p.set("time_stepping.fixed_dt", 0.01);
            p.set("time_stepping.t_end", -1.0);
            p.set("time_stepping.n_iters", std::int64_t(10));
        });
        sim->run();
        simdir = sim->output().dir();
        final_state = sim->state().spect();
        CHECK(only_subdir(tmp.path) == simdir);
    }
    for (const char* name :
         {"params.txt", "info_solver.txt", "spatial_means.ndrec", "spectra.ndrec",
          "spect_energy_budg.ndrec", "increments.ndrec", "run.log", "snapshots"}) {
        CAPTURE(name);
        CHECK(fs::exists(fs::path(simdir) / name));
    }

    ParamTree expected = create_default_params("ns2d");
    expected.set("oper.nx", std::int64_t(32));
    expected.set("oper.ny", std::int64_t(32));
    auto view = load_sim_for_plot(simdir);
    CHECK(view->info().short_name == "ns2d");
    CHECK(view->params().child("oper").serialize() ==
          expected.child("oper").serialize());
    CHECK(view->t() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(max_rel_diff(view->state().spect(), final_state) < 1e-12);
    CHECK_THROWS_AS(view->step_once(), ConfigError);
}

TEST_CASE("reload: resumed run matches an uninterrupted one") {
    TempDir tmp;
    auto tweak = [&](ParamTree& p) {
        p.set("oper.nx", std::int64_t(32));
        p.set("oper.ny", std::int64_t(32));
        p.set("nu_2", 1e-3);
        p.set("init_fields.noise.seed", std::int64_t(17));
        p.set("time_stepping.fixed_dt", 0.01);
        p.set("time_stepping.t_end", -1.0);
        p.set("time_stepping.n_iters", std::int64_t(15));
    };

    auto uninterrupted = make_sim("ns2d", tweak);
    uninterrupted->run();

    std::string simdir;
    {
        auto first = make_sim("ns2d", [&](ParamTree& p) {
            tweak(p);
            p.set("output.enable_files", true);
            p.set("output.root_dir", tmp.path);
            p.set("time_stepping.n_iters", std::int64_t(10));
        });
        first->run();
        simdir = first->output().dir();
    }

    auto resumed = load_state_phys_file(simdir, -1.0);
    resumed->set_quiet(true);
    CHECK(resumed->t() == doctest::Approx(0.1).epsilon(1e-12));
    resumed->set_n_iters(5);
    resumed->run();
    CHECK(resumed->t() == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(max_rel_diff(resumed->state().spect(), uninterrupted->state().spect()) <
          1e-12);
}

TEST_CASE("reload: empty directory and stale digest are refused") {
    TempDir tmp;
    CHECK_THROWS_AS(load_sim_for_plot(tmp.path), IoError);
    CHECK_THROWS_AS(load_state_phys_file(tmp.path, -1.0), IoError);

    std::string simdir;
    {
        auto sim = make_sim("ns2d", [&](ParamTree& p) {
            p.set("oper.nx", std::int64_t(16));
            p.set("oper.ny", std::int64_t(16));
            p.set("output.enable_files", true);
            p.set("output.root_dir", tmp.path);
            p.set("time_stepping.fixed_dt", 0.01);
            p.set("time_stepping.t_end", -1.0);
            p.set("time_stepping.n_iters", std::int64_t(2));
        });
        sim->run();
        simdir = sim->output().dir();
    }

    // Grid size changed after the fact: snapshots no longer belong to
    // this parameter set.
    std::ifstream in(simdir + "/params.txt");
    std::string text((std::istreambuf_iterator<char>(in)), {});
    in.close();
    ParamTree tampered = ParamTree::deserialize(text);
    tampered.set("oper.nx", std::int64_t(32));
    tampered.set("oper.ny", std::int64_t(32));
    std::ofstream out(simdir + "/params.txt", std::ios::trunc);
    out << tampered.serialize();
    out.close();

    try {
        load_state_phys_file(simdir, -1.0);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("digest") != std::string::npos);
    }

    // A time with no nearby snapshot is also refused.
    TempDir tmp2;
    auto sim2 = make_sim("ns2d", [&](ParamTree& p) {
        p.set("oper.nx", std::int64_t(16));
        p.set("oper.ny", std::int64_t(16));
        p.set("output.enable_files", true);
        p.set("output.root_dir", tmp2.path);
        p.set("time_stepping.fixed_dt", 0.01);
        p.set("time_stepping.t_end", -1.0);
        p.set("time_stepping.n_iters", std::int64_t(2));
    });
    sim2->run();
    CHECK_THROWS_AS(load_state_phys_file(sim2->output().dir(), 99.0), IoError);
}

namespace {

class NanSolver final : public Solver {
public:
    explicit NanSolver(Simulation& sim) : Solver(sim) {}
    const SolverInfo& info() const override { return nan_info(); }
    static const SolverInfo& nan_info() {
        static const SolverInfo info = [] {
            register_component_id("state.nanburst");
            SolverInfo i;
            i.short_name = "nanburst";
            i.dims = 1;
            i.classes = {{"Operators", "operators.spectral_1d"},
                         {"State", "state.nanburst"},
                         {"TimeStepping", "time_stepping.exact_lin_rk"},
                         {"InitFields", "init_fields.full"},
                         {"Forcing", "forcing.random_band"},
                         {"Output", "output.standard"},
                         {"Preprocess", "preprocess.standard"}};
            i.keys_state_phys = {"q"};
            i.keys_state_spect = {"q_fft"};
            return i;
        }();
        return info;
    }
    void tendency(const StateVec&, StateVec& out) override {
        out.resize(1);
        out[0].assign(sim_.oper().spect_size,
                      cplx(std::numeric_limits<double>::quiet_NaN(), 0.0));
    }
    std::vector<double> max_velocity_per_axis() override { return {0.0}; }
};

}  // namespace

TEST_CASE("a non-finite state raises a divergence error naming the field") {
    ensure_builtin_solvers();
    if (!solver_registered("nanburst"))
        register_solver({NanSolver::nan_info(),
                         [](Simulation& sim) -> std::unique_ptr<Solver> {
                             return std::make_unique<NanSolver>(sim);
                         },
                         nullptr});
    auto sim = make_sim("nanburst", [](ParamTree& p) {
        p.set("time_stepping.fixed_dt", 0.1);
        p.set("init_fields.type", std::string("constant"));
        p.set("init_fields.constant.value", 1.0);
    });
    try {
        sim->step_once();
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        std::string msg = e.what();
        CHECK(msg.find("q_fft") != std::string::npos);
        CHECK(msg.find("iteration 1") != std::string::npos);
    }
}
