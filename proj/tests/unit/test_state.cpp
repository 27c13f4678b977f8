#include <cmath>
#include <cstring>

#include "doctest.h"
#include "spectralkit/errors.hpp"
#include "spectralkit/solver_info.hpp"
#include "spectralkit/state.hpp"

using namespace spectralkit;

namespace {

SpectralGrid grid2d() { return make_grid({16, 16}, {2 * M_PI, 2 * M_PI}); }

struct FakeProvider : ComputableProvider {
    std::vector<std::string> keys_computable() const override { return {"twice_a"}; }
    void compute_field(const std::string& key, real_field& out) override {
        REQUIRE(key == "twice_a");
        for (double& v : out) v *= 2.0;
    }
    real_field base;
};

}  // namespace

TEST_CASE("state keys must pair phys with phys+_fft") {
    auto g = grid2d();
    CHECK_NOTHROW(StateSet(g, {"rot"}, {"rot_fft"}));
    CHECK_THROWS_AS(StateSet(g, {"rot"}, {"vort_fft"}), ConfigError);
    CHECK_THROWS_AS(StateSet(g, {"a", "b"}, {"a_fft"}), ConfigError);
    CHECK_THROWS_AS(StateSet(g, {}, {}), ConfigError);
}

TEST_CASE("physical view regenerates from the spectral side") {
    auto g = grid2d();
    StateSet state(g, {"u"}, {"u_fft"});

    // u = cos(x): single mode at kx=1, ky=0 with amplitude 1/2.
    real_field u(g.phys_size);
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            u[static_cast<std::size_t>(i) * g.n[1] + j] = std::cos(2 * M_PI * i / g.n[0]);
    state.load_phys("u", u);

    const auto& uhat = state.var_spect("u_fft");
    CHECK(std::abs(uhat[1 * g.spect_shape[1] + 0] - cplx(0.5, 0.0)) < 1e-14);

    const auto& back = state.var_phys("u");
    double err = 0;
    for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(back[i] - u[i]));
    CHECK(err < 1e-13);
}

TEST_CASE("mutating the spectral side invalidates the physical cache") {
    auto g = grid2d();
    StateSet state(g, {"u"}, {"u_fft"});

    auto v0 = state.version();
    state.var_spect_mut("u_fft")[0] = cplx(3.0, 0.0);  // constant field = 3
    CHECK(state.version() > v0);
    CHECK(state.var_phys("u")[0] == doctest::Approx(3.0).epsilon(1e-15));

    state.spect_mut()[0][0] = cplx(5.0, 0.0);
    CHECK(state.var_phys("u")[7] == doctest::Approx(5.0).epsilon(1e-15));

    // const access does not invalidate
    auto v1 = state.version();
    (void)state.spect();
    (void)state.var_spect("u_fft");
    CHECK(state.version() == v1);
}

TEST_CASE("spect -> phys -> spect reproduces the dealiased state") {
    auto g = grid2d();
    StateSet state(g, {"w"}, {"w_fft"});

    std::mt19937_64 rng(11);
    auto& w = state.var_spect_mut("w_fft");
    w = random_field(g, rng, 1.0, 5.0);
    dealias(g, w);
    auto saved = w;

    real_field phys = state.var_phys("w");
    state.load_phys("w", phys);

    double err = 0;
    const auto& again = state.var_spect("w_fft");
    for (std::size_t i = 0; i < saved.size(); ++i)
        err = std::max(err, std::abs(again[i] - saved[i]));
    CHECK(err < 1e-12);
}

TEST_CASE("computable keys are served through the provider") {
    auto g = grid2d();
    StateSet state(g, {"a"}, {"a_fft"});
    CHECK(state.keys_computable().empty());

    FakeProvider provider;
    state.set_provider(&provider);
    CHECK(state.keys_computable() == std::vector<std::string>{"twice_a"});

    state.var_spect_mut("a_fft")[0] = cplx(2.0, 0.0);
    real_field out = state.var_phys("a");
    state.compute_field("twice_a", out);
    CHECK(out[0] == doctest::Approx(4.0).epsilon(1e-14));

    real_field copy;
    state.compute_field("a", copy);
    CHECK(copy.size() == g.phys_size);
    CHECK(copy[3] == doctest::Approx(2.0).epsilon(1e-14));

    CHECK_THROWS_AS(state.compute_field("nope", out), ConfigError);
    CHECK_THROWS_AS(state.var_spect("nope"), ConfigError);
    CHECK_THROWS_AS(state.load_phys("a", real_field(3)), ShapeError);
}

TEST_CASE("solver descriptor round-trips through its printed tree") {
    SolverInfo info;
    info.short_name = "ns2d";
    info.dims = 2;
    info.classes = {{"Operators", "operators.spectral_2d"},
                    {"State", "state.ns2d"},
                    {"TimeStepping", "time_stepping.exact_lin_rk"},
                    {"InitFields", "init_fields.full"},
                    {"Forcing", "forcing.random_band"},
                    {"Output", "output.standard"},
                    {"Preprocess", "preprocess.standard"}};
    info.keys_state_phys = {"rot"};
    info.keys_state_spect = {"rot_fft"};
    info.keys_computable = {"ux", "uy"};

    CHECK_NOTHROW(validate_solver_info(info));

    std::string printed = info.print();
    CHECK(printed.find("info_solver") != std::string::npos);
    CHECK(printed.find("short_name") != std::string::npos);
    SolverInfo back = SolverInfo::parse(printed);
    CHECK(back == info);
    CHECK(back.print() == printed);

    CHECK(info.class_id("State") == "state.ns2d");
    CHECK_THROWS_AS(info.class_id("Nope"), ConfigError);
}

TEST_CASE("solver descriptor validation rejects bad shapes") {
    SolverInfo info;
    info.short_name = "x";
    info.dims = 2;
    for (const char* role : solver_class_roles)
        info.classes.emplace_back(role, "output.standard");
    info.keys_state_phys = {"a"};
    info.keys_state_spect = {"a_fft"};

    SolverInfo bad_dims = info;
    bad_dims.dims = 4;
    CHECK_THROWS_AS(validate_solver_info(bad_dims), ConfigError);

    SolverInfo bad_role = info;
    bad_role.classes[2].first = "Stepper";
    CHECK_THROWS_AS(validate_solver_info(bad_role), ConfigError);

    SolverInfo bad_id = info;
    bad_id.classes[0].second = "operators.bogus";
    CHECK_THROWS_AS(validate_solver_info(bad_id), ConfigError);

    SolverInfo bad_keys = info;
    bad_keys.keys_state_spect = {"b_fft"};
    CHECK_THROWS_AS(validate_solver_info(bad_keys), ConfigError);

    register_component_id("operators.bogus");
    CHECK_NOTHROW(validate_solver_info(bad_id));
    CHECK(component_id_known("operators.bogus"));
    CHECK_FALSE(component_id_known("never.registered"));
}
