#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "hopfield/builtin_examples.hpp"
#include "hopfield/envelope.hpp"
#include "support/test_support.hpp"

using hopfield::activation_regime;
using hopfield::activation_spec;
using hopfield::bound_regime;
using hopfield::envelope_form;

namespace {

activation_spec make_act(const char* src, double bound, activation_regime reg) {
    activation_spec a;
    a.fx = hopfield::expr::parse(src, "u");
    a.bound = bound;
    a.regime = reg;
    return a;
}

// Independent running-extrema construction on a dense grid.
double envelope_oracle(const std::function<double(double)>& f, double x, double step) {
    double fp_pos = f(0.0), fm_pos = f(0.0), fp_neg = f(0.0), fm_neg = f(0.0);
    long samples = static_cast<long>(std::ceil(x / step));
    for (long k = 0; k <= samples; ++k) {
        double u = std::min(static_cast<double>(k) * step, x);
        fp_pos = std::max(fp_pos, f(u));
        fm_pos = std::min(fm_pos, f(u));
        fp_neg = std::max(fp_neg, f(-u));
        fm_neg = std::min(fm_neg, f(-u));
    }
    return std::max(std::max(fp_pos, fp_neg), std::max(-fm_pos, -fm_neg));
}

}  // namespace

TEST_CASE("envelopes of the reference activations") {
    const double x_max = 8.0, h = x_max / 4096.0;

    auto tanh_env = hopfield::build_envelope(make_act("tanh(u)", 1, activation_regime::bounded), x_max, h);
    CHECK(tanh_env.form == envelope_form::monotone_odd_passthrough);
    CHECK(tanh_env.values.front() == 0.0);
    for (double x : {0.25, 1.0, 2.0, 5.0})
        CHECK(tanh_env.eval(x) == Catch::Approx(std::tanh(x)).margin(1e-6));

    auto clip_env = hopfield::build_envelope(
        make_act("min(arctan(abs(u)),1)", 1, activation_regime::bounded), x_max, h);
    CHECK(clip_env.form == envelope_form::clipped);
    for (double x : {0.5, 1.0, 3.0, 7.0})
        CHECK(clip_env.eval(x) == Catch::Approx(std::min(std::atan(x), 1.0)).margin(1e-6));

    auto sig_env = hopfield::build_envelope(make_act("u/sqrt(1+u^2)", 1, activation_regime::bounded),
                                            x_max, h);
    for (double x : {0.25, 1.0, 4.0})
        CHECK(sig_env.eval(x) == Catch::Approx(x / std::sqrt(1 + x * x)).margin(1e-6));

    // oracle comparison on a non-monotone activation
    auto bump = make_act("sin(u)*exp(0-abs(u)/3)", 1, activation_regime::bounded);
    auto bump_env = hopfield::build_envelope(bump, x_max, h);
    auto bump_fn = [&](double u) { return bump.fx.eval(u); };
    for (double x : {0.3, 1.2, 2.0, 4.5, 7.9}) {
        double want = envelope_oracle(bump_fn, x, h / 4.0);
        CHECK(bump_env.eval(x) == Catch::Approx(want).margin(1e-5));
    }
}

TEST_CASE("envelope dominance and monotonicity") {
    std::mt19937_64 rng(test_support::seed_from_env() ^ 0x66);
    std::uniform_real_distribution<double> point(-8.0, 8.0);
    const double x_max = 8.0, h = x_max / 4096.0;
    const char* sources[] = {"tanh(u)", "min(arctan(abs(u)),1)", "u/sqrt(1+u^2)",
                             "1/(1+exp(-u)) - 1/2", "max(tanh(abs(u)), u - 1/10)"};
    for (const char* src : sources) {
        auto act = make_act(src, 1, activation_regime::bounded);
        auto env = hopfield::build_envelope(act, x_max, h);
        CHECK(env.values.front() == 0.0);
        for (std::size_t k = 1; k < env.values.size(); ++k)
            CHECK(env.values[k] >= env.values[k - 1]);
        for (int t = 0; t < 100; ++t) {
            double u = point(rng);
            CHECK(std::fabs(act.fx.eval(u)) <= env.upper(std::fabs(u)) + 1e-9);
        }
    }
}

TEST_CASE("envelopes inherit the activation bounds") {
    const double x_max = 8.0, h = x_max / 4096.0;
    // logistic with slope bound 1/4: the envelope obeys f*(x) <= x/4 everywhere
    auto g_env = hopfield::build_envelope(
        make_act("1/(1+exp(-u)) - 1/2", 0.25, activation_regime::bounded), x_max, h);
    for (double x = h; x <= x_max; x += 16 * h) CHECK(g_env.eval(x) <= 0.25 * x + 1e-9);

    auto f_env = hopfield::build_envelope(make_act("tanh(u)", 1, activation_regime::bounded), x_max, h);
    for (double x = h; x <= x_max; x += 16 * h) {
        CHECK(f_env.eval(x) <= 1.0 + 1e-9);
        CHECK(f_env.eval(x) <= x + 1e-9);
    }
}

TEST_CASE("envelope evaluation edges") {
    const double x_max = 8.0, h = x_max / 4096.0;
    auto bounded = hopfield::build_envelope(
        make_act("min(arctan(abs(u)),1)", 1, activation_regime::bounded), x_max, h);
    CHECK(bounded.eval(0.0) == 0.0);
    bool clamped = false;
    CHECK(bounded.eval(10.0, &clamped) == Catch::Approx(1.0).margin(1e-9));
    CHECK(clamped);

    auto sub = hopfield::build_envelope(make_act("tanh(u)", 1, activation_regime::sublinear), x_max, h);
    CHECK_THROWS_AS(sub.eval(x_max * 2), hopfield::error);
    CHECK_THROWS_AS(sub.eval(-0.5), hopfield::error);

    CHECK(hopfield::build_envelope(make_act("tanh(u)", 1, activation_regime::bounded), x_max, h)
              .eval(1.0) == Catch::Approx(std::tanh(1.0)).margin(h * h));
}

TEST_CASE("bound iteration on a decoupled model") {
    auto spec = hopfield::load_model(R"json({"n":2,"P":1,"a":["1/2","1/4"],"nu":["0","0"]})json");
    auto s = hopfield::summarize_coefficients(spec, 100);
    auto it = hopfield::iterate_bound(spec, s, bound_regime::hat);
    CHECK(it.converged);
    CHECK(it.iterations <= 2);
    CHECK(it.converged_to == std::vector<double>{0.0, 0.0});
}

TEST_CASE("bound iteration on the first reference model (hat regime)") {
    auto spec = hopfield::load_builtin("example-4.1");
    auto s = hopfield::summarize_coefficients(spec);
    auto it = hopfield::iterate_bound(spec, s, bound_regime::hat);

    // closed-form start S_0 = (3/5, 2/3, 1)
    REQUIRE(it.trace.size() >= 2);
    CHECK(it.trace[0][0] == Catch::Approx(0.6).margin(1e-12));
    CHECK(it.trace[0][1] == Catch::Approx(2.0 / 3).margin(1e-12));
    CHECK(it.trace[0][2] == Catch::Approx(1.0).margin(1e-12));

    // componentwise non-increasing, non-negative
    for (std::size_t q = 1; q < it.trace.size(); ++q)
        for (int i = 0; i < 3; ++i) {
            CHECK(it.trace[q][i] <= it.trace[q - 1][i] + 1e-12);
            CHECK(it.trace[q][i] >= 0.0);
        }

    // the criterion matrix sits exactly on the singular boundary, so the map
    // is non-contracting at the origin and the iteration stalls with
    // polynomial decay; compare against an independent exact-envelope oracle
    CHECK_FALSE(it.converged);
    CHECK(it.iterations == 10000);
    auto g_star = [](double x) { return 1.0 / (1.0 + std::exp(-x)) - 0.5; };
    std::vector<double> s_oracle{0.6, 2.0 / 3, 1.0};
    for (int q = 0; q < 10000; ++q) {
        double s1 = (6.0 / 5) * ((1.0 / 6 + 1.0 / 6) * std::min(std::atan(s_oracle[1]), 1.0) +
                                 (2.0 / 3) * g_star(s_oracle[0]));
        double s2 = (1.0 / 3) * std::tanh(s_oracle[1]) + (1.0 / 6) * std::tanh(s_oracle[2]) +
                    (2.0 / 3) * g_star(s_oracle[2]);
        double s3 = 2.0 * ((1.0 / 4) * (s_oracle[2] / std::sqrt(1 + s_oracle[2] * s_oracle[2])) +
                           g_star(s_oracle[2]));
        s_oracle = {s1, s2, s3};
    }
    for (int i = 0; i < 3; ++i)
        CHECK(it.converged_to[i] == Catch::Approx(s_oracle[i]).margin(2e-3));
}

TEST_CASE("bound iteration on the second reference model (plus regime)") {
    auto spec = hopfield::load_builtin("example-4.2");
    auto s = hopfield::summarize_coefficients(spec);
    std::vector<double> start{1.0, 1.0, 1.0};
    auto it = hopfield::iterate_bound(spec, s, bound_regime::plus, start);
    CHECK(it.regime == bound_regime::plus);
    for (std::size_t q = 1; q < it.trace.size(); ++q)
        for (int i = 0; i < 3; ++i) CHECK(it.trace[q][i] <= it.trace[q - 1][i] + 1e-12);
    // same singular-boundary stall as the hat run on the first model
    CHECK_FALSE(it.converged);
    CHECK(it.converged_to[0] == Catch::Approx(0.01220).margin(5e-4));

    // a start below the fixed point breaks the decrease and is reported
    std::vector<double> bad{0.5, 0.0, 0.0};
    CHECK_THROWS_AS(hopfield::iterate_bound(spec, s, bound_regime::plus, bad),
                    hopfield::validation_error);
}
