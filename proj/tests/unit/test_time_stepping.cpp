#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "spectralkit/time_stepping.hpp"

using namespace spectralkit;
using cd = std::complex<double>;

namespace {

// Scalar problem embedded as a one-mode state.
StateVec scalar_state(double v) { return {{cd(v, 0.0)}}; }

double scalar(const StateVec& s) { return s[0][0].real(); }

TendencyFn zero_tendency() {
    return [](const StateVec& s, StateVec& out) {
        out.assign(s.size(), {});
        for (std::size_t v = 0; v < s.size(); ++v) out[v].assign(s[v].size(), cd(0.0));
    };
}

TendencyFn linear_decay() {
    return [](const StateVec& s, StateVec& out) {
        out = s;
        for (auto& var : out)
            for (auto& x : var) x = -x;
    };
}

TendencyFn cubic_decay() {
    return [](const StateVec& s, StateVec& out) {
        out = s;
        for (auto& var : out)
            for (auto& x : var) x = -x * x * x;
    };
}

// Integrate du/dt = N(u) from 1.0 to T and return the final value.
double integrate(Scheme scheme, const TendencyFn& f, double T, double dt,
                 std::vector<double> sigma = {}) {
    std::vector<std::vector<double>> sig(1);
    if (!sigma.empty()) sig[0] = sigma;
    ExactLinStepper st(scheme, sig);
    StateVec u = scalar_state(1.0);
    double t = 0;
    while (t < T - 1e-12) {
        double step = std::min(dt, T - t);
        st.step(u, step, f);
        t += step;
    }
    return scalar(u);
}

}  // namespace

TEST_CASE("CFL formula") {
    CHECK(compute_cfl_dt({2.0}, {0.1}, 0.5, 1.0) == doctest::Approx(0.025).epsilon(1e-15));
    CHECK(compute_cfl_dt({0.0}, {0.1}, 0.5, 0.01) == 0.01);  // dt_max binds
    CHECK(compute_cfl_dt({1.0, 4.0}, {0.1, 0.1}, 0.5, 1.0) ==
          doctest::Approx(0.0125).epsilon(1e-15));
    CHECK_THROWS_AS(compute_cfl_dt({1.0}, {0.1, 0.1}, 0.5, 1.0), ConfigError);
}

TEST_CASE("pure linear problems are integrated exactly") {
    for (Scheme s : {Scheme::RK2, Scheme::RK4}) {
        ExactLinStepper st(s, {{-1.0}});
        StateVec u = scalar_state(1.0);
        st.step(u, 0.1, zero_tendency());
        CHECK(std::abs(scalar(u) - std::exp(-0.1)) < 1e-16);
        st.step(u, 0.1, zero_tendency());
        CHECK(std::abs(scalar(u) - std::exp(-0.1) * std::exp(-0.1)) < 1e-16);
    }
}

TEST_CASE("classical growth factors when sigma = 0") {
    // RK4: 1 - h + h^2/2 - h^3/6 + h^4/24 at h = 0.1
    ExactLinStepper rk4(Scheme::RK4, {{}});
    StateVec u = scalar_state(1.0);
    rk4.step(u, 0.1, linear_decay());
    CHECK(scalar(u) == doctest::Approx(0.90483750).epsilon(1e-12));
    CHECK(std::abs(scalar(u) - std::exp(-0.1)) ==
          doctest::Approx(8.2e-8).epsilon(0.02));

    // RK2 midpoint: 1 - h + h^2/2
    ExactLinStepper rk2(Scheme::RK2, {{}});
    StateVec v = scalar_state(1.0);
    rk2.step(v, 0.1, linear_decay());
    CHECK(scalar(v) == doctest::Approx(0.905).epsilon(1e-12));
    CHECK(std::abs(scalar(v) - std::exp(-0.1)) ==
          doctest::Approx(1.6e-4).epsilon(0.05));
}

TEST_CASE("one-step error falls ~2^5 when dt halves (RK4)") {
    auto err_at = [](double h) {
        ExactLinStepper st(Scheme::RK4, {{}});
        StateVec u = scalar_state(1.0);
        st.step(u, h, linear_decay());
        return std::abs(scalar(u) - std::exp(-h));
    };
    double ratio = err_at(0.1) / err_at(0.05);
    CHECK(ratio > 28.0);
    CHECK(ratio < 36.0);
}

TEST_CASE("measured global orders on the nonlinear scalar test") {
    // du/dt = -u^3, u(0) = 1  =>  u(t) = 1/sqrt(1 + 2t)
    // dt must sit in the asymptotic range: the signed RK4 error crosses zero
    // near dt = 0.07, which wrecks ratios measured at coarser steps.
    const double T = 1.0;
    const double exact = 1.0 / std::sqrt(1.0 + 2.0 * T);
    auto global_err = [&](Scheme s, double dt) {
        return std::abs(integrate(s, cubic_decay(), T, dt) - exact);
    };
    for (auto [scheme, lo, hi] :
         {std::tuple{Scheme::RK2, 1.8, 2.2}, std::tuple{Scheme::RK4, 3.8, 4.2}}) {
        double e1 = global_err(scheme, 0.0125);
        double e2 = global_err(scheme, 0.00625);
        double e3 = global_err(scheme, 0.003125);
        double o1 = std::log2(e1 / e2);
        double o2 = std::log2(e2 / e3);
        CHECK(o1 > lo);
        CHECK(o1 < hi);
        CHECK(o2 > lo);
        CHECK(o2 < hi);
    }
}

TEST_CASE("mixed linear+nonlinear: integrating factor converges at scheme order") {
    // du/dt = -u - u^3: reference from a very fine RK4 run
    double ref = integrate(Scheme::RK4, cubic_decay(), 1.0, 1e-4, {-1.0});
    double e1 = std::abs(integrate(Scheme::RK4, cubic_decay(), 1.0, 0.05, {-1.0}) - ref);
    double e2 = std::abs(integrate(Scheme::RK4, cubic_decay(), 1.0, 0.025, {-1.0}) - ref);
    double order = std::log2(e1 / e2);
    CHECK(order > 3.7);
    CHECK(order < 4.3);
}

TEST_CASE("zero tendency with zero sigma leaves the state bit-identical") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(-1, 1);
    StateVec u(2);
    u[0].resize(64);
    u[1].resize(16);
    for (auto& var : u)
        for (auto& x : var) x = cd(d(rng), d(rng));
    u[0][3] = cd(-0.0, 0.0);  // negative zero must survive too
    StateVec orig = u;

    ExactLinStepper st(Scheme::RK4, {{}, {}});
    for (int i = 0; i < 10; ++i) st.step(u, 0.05, zero_tendency());

    REQUIRE(u[0].size() == orig[0].size());
    CHECK(std::memcmp(u[0].data(), orig[0].data(), u[0].size() * sizeof(cd)) == 0);
    CHECK(std::memcmp(u[1].data(), orig[1].data(), u[1].size() * sizeof(cd)) == 0);
}

TEST_CASE("exponential factors refresh when dt changes") {
    ExactLinStepper st(Scheme::RK4, {{-1.0}});
    StateVec u = scalar_state(1.0);
    st.step(u, 0.1, zero_tendency());
    st.step(u, 0.2, zero_tendency());
    CHECK(std::abs(scalar(u) - std::exp(-0.1) * std::exp(-0.2)) < 1e-15);
}

TEST_CASE("tendency shape mismatches are rejected") {
    ExactLinStepper st(Scheme::RK2, {{}});
    StateVec u = scalar_state(1.0);
    auto bad_count = [](const StateVec&, StateVec& out) { out.assign(2, {cd(0.0)}); };
    CHECK_THROWS_AS(st.step(u, 0.1, bad_count), ShapeError);
    auto bad_size = [](const StateVec&, StateVec& out) {
        out.assign(1, std::vector<cd>(5, cd(0.0)));
    };
    CHECK_THROWS_AS(st.step(u, 0.1, bad_size), ShapeError);

    ExactLinStepper wrong_sigma(Scheme::RK2, {{}, {}});
    CHECK_THROWS_AS(wrong_sigma.step(u, 0.1, zero_tendency()), ShapeError);
}

TEST_CASE("kernel timers accumulate under the rk scope") {
    KernelTimers timers;
    ExactLinStepper st(Scheme::RK4, {{-1.0}}, &timers);
    StateVec u = scalar_state(1.0);
    for (int i = 0; i < 5; ++i) st.step(u, 0.01, zero_tendency());
    CHECK(timers.totals().count("rk") == 1);
    CHECK(timers.totals().at("rk") >= 0.0);
}
