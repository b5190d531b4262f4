#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hopfield/builtin_examples.hpp"
#include "hopfield/criterion.hpp"
#include "hopfield/simulator.hpp"
#include "support/test_support.hpp"

using hopfield::decide_options;
using hopfield::model_spec;
using hopfield::verdict_kind;

namespace {

bool justification_mentions(const hopfield::criterion_report& rep, const std::string& needle) {
    for (const auto& j : rep.justification)
        if (j.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("verdicts for the reference models") {
    auto r41 = hopfield::decide(hopfield::load_builtin("example-4.1"));
    CHECK(r41.verdict == verdict_kind::attractive_bounded);
    CHECK(r41.m_hat_class.m_class == hopfield::m_matrix_class::singular_m);
    CHECK_FALSE(r41.m_hat_class.irreducible);
    REQUIRE(r41.bound_trace);
    CHECK(r41.bound_trace->regime == hopfield::bound_regime::hat);
    CHECK(r41.display_verdict().find("sampled hypotheses") != std::string::npos);

    auto r42 = hopfield::decide(hopfield::load_builtin("example-4.2"));
    CHECK(r42.verdict == verdict_kind::attractive_sublinear);
    CHECK(r42.m_plus_class.m_class == hopfield::m_matrix_class::singular_m);
    CHECK(r42.m_plus_class.irreducible);
    REQUIRE(r42.null_vector);
    for (double v : *r42.null_vector) CHECK(v == Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(r42.bound_trace);
    CHECK(r42.bound_trace->regime == hopfield::bound_regime::plus);
}

TEST_CASE("perturbed coupling defeats the criterion with a named reason") {
    auto spec = hopfield::load_builtin("example-4.2");
    spec.b[1][2][0] = hopfield::expr::parse("10/4", "m");  // scale one coupling x10
    spec.declared.b_sup[1][2][0] = 2.5;
    spec.declared.b_limsup[1][2][0] = 2.5;
    auto rep = hopfield::decide(spec);
    CHECK(rep.verdict == verdict_kind::inconclusive);
    CHECK(rep.m_plus_class.m_class == hopfield::m_matrix_class::not_m);
    CHECK(justification_mentions(rep, "not an M-matrix"));
    CHECK(justification_mentions(rep, "no instability is claimed"));
}

TEST_CASE("hypothesis failures fold into the inconclusive verdict") {
    auto spec = hopfield::load_model(R"json({"n":1,"P":1,"a":["1.0"],"nu":["0"]})json");
    auto rep = hopfield::decide(spec);
    CHECK(rep.verdict == verdict_kind::inconclusive);
    CHECK(justification_mentions(rep, "(H1)"));
}

TEST_CASE("autonomous specs collapse to a single criterion matrix") {
    auto spec = hopfield::load_model(R"json({
      "n": 2, "P": 1,
      "a": ["1/2", "1/4"], "nu": ["1", "0"],
      "b": [[["1/8"], ["1/8"]], [["0"], ["1/4"]]],
      "tau": [[["0"], ["2"]], [["0"], ["1"]]],
      "f": [[[{"expr":"tanh(u)","bound":1,"regime":"bounded"}],
             [{"expr":"tanh(u)","bound":1,"regime":"bounded"}]],
            [[null],
             [{"expr":"tanh(u)","bound":1,"regime":"bounded"}]]]
    })json");
    REQUIRE(spec.autonomous());
    auto rep = hopfield::decide(spec);
    CHECK(rep.verdict == verdict_kind::attractive_autonomous);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(rep.m_plus.at(i, j) == rep.m_hat.at(i, j));
    CHECK(rep.m_plus_class.m_class == hopfield::m_matrix_class::nonsingular_m);
}

TEST_CASE("verdict soundness spot-check by simulation") {
    auto spec = hopfield::load_builtin("example-4.2");
    auto rep = hopfield::decide(spec);
    REQUIRE(rep.attractive());
    std::mt19937_64 rng(test_support::seed_from_env() ^ 0x88);
    std::uniform_real_distribution<double> amp(-5.0, 5.0);
    hopfield::sim_options opts;
    opts.stop_when_converged = true;
    for (int trial = 0; trial < 3; ++trial) {
        hopfield::initial_condition ic;
        ic.sigma = 0;
        ic.tail = {0.0, 0.0, 0.0};
        for (int s = 0; s < 8; ++s) ic.support.push_back({amp(rng), amp(rng), amp(rng)});
        auto sim = hopfield::run(spec, ic, 3000, opts);
        REQUIRE(sim.converged_at);
    }
}

TEST_CASE("downscaling couplings keeps the bounded-arm verdict") {
    // shrinking couplings only strengthens diagonal dominance of the limsup matrix
    for (double scale : {0.75, 0.5, 0.25, 0.0}) {
        auto spec = hopfield::load_builtin("example-4.1");
        char buf[64];
        std::snprintf(buf, sizeof buf, "(%.17g)*cos(pi*m)", scale / 6.0);
        spec.b[1][2][1] = hopfield::expr::parse(buf, "m");  // b_232 scaled down
        spec.declared.b_sup[1][2][1] = scale / 6.0;
        spec.declared.b_limsup[1][2][1] = scale / 6.0;
        auto rep = hopfield::decide(spec);
        INFO("scale " << scale);
        CHECK(rep.verdict == verdict_kind::attractive_bounded);
    }
}

TEST_CASE("identity rescaling is a no-op") {
    auto spec = hopfield::load_builtin("example-4.2");
    std::vector<double> ones{1.0, 1.0, 1.0};
    auto same = hopfield::rescale_model(spec, ones);
    auto ic = hopfield::builtin_initial_condition();
    auto r1 = hopfield::run(spec, ic, 120);
    auto r2 = hopfield::run(same, ic, 120);
    for (std::size_t k = 0; k < r1.trajectory.size(); ++k)
        for (int i = 0; i < 3; ++i)
            CHECK(r1.trajectory[k][i] == Catch::Approx(r2.trajectory[k][i]).margin(1e-14));
}

TEST_CASE("rescaled trajectories are the original divided by d") {
    auto scalar = hopfield::load_model(R"json({
      "n": 1, "P": 1,
      "a": ["1/2*cos(pi*m)"], "nu": ["1"],
      "b": [[["1/4"]]], "tau": [[["2"]]],
      "f": [[[{"expr":"tanh(u)","bound":1,"regime":"bounded"}]]],
      "I": [{"expr":"(1/2)^m","certificate":{"type":"geometric","ratio":"1/2"}}]
    })json");
    std::vector<double> d{2.0};
    auto rescaled = hopfield::rescale_model(scalar, d);

    hopfield::initial_condition ic;
    ic.sigma = 0;
    ic.tail = {0.0};
    ic.support = {{0.7}, {-0.4}, {0.9}};
    hopfield::initial_condition ic_scaled = ic;
    for (auto& row : ic_scaled.support)
        for (double& v : row) v /= d[0];

    auto orig = hopfield::run(scalar, ic, 100);
    auto resc = hopfield::run(rescaled, ic_scaled, 100);
    for (std::size_t k = 0; k < orig.trajectory.size(); ++k)
        CHECK(resc.trajectory[k][0] == Catch::Approx(orig.trajectory[k][0] / d[0]).margin(1e-12));

    // random positive d on the full reference model
    std::mt19937_64 rng(test_support::seed_from_env() ^ 0xAA);
    std::uniform_real_distribution<double> dv(0.5, 2.0);
    auto spec = hopfield::load_builtin("example-4.2");
    std::vector<double> d3{dv(rng), dv(rng), dv(rng)};
    auto spec_scaled = hopfield::rescale_model(spec, d3);
    auto ref_ic = hopfield::builtin_initial_condition();
    auto ref_scaled = ref_ic;
    for (auto& row : ref_scaled.support)
        for (int i = 0; i < 3; ++i) row[static_cast<std::size_t>(i)] /= d3[static_cast<std::size_t>(i)];
    auto a = hopfield::run(spec, ref_ic, 200);
    auto b = hopfield::run(spec_scaled, ref_scaled, 200);
    double diff = 0.0;
    for (std::size_t k = 0; k < a.trajectory.size(); ++k)
        for (int i = 0; i < 3; ++i)
            diff = std::max(diff, std::fabs(a.trajectory[k][i] / d3[static_cast<std::size_t>(i)] -
                                            b.trajectory[k][i]));
    CHECK(diff <= 1e-10);

    std::vector<double> bad{1.0, -1.0, 1.0};
    CHECK_THROWS_AS(hopfield::rescale_model(spec, bad), hopfield::error);
}

TEST_CASE("rescaling by the null vector leaves the reference model unchanged") {
    auto spec = hopfield::load_builtin("example-4.2");
    auto rep = hopfield::decide(spec);
    REQUIRE(rep.null_vector);
    auto same = hopfield::rescale_model(spec, *rep.null_vector);  // d = (1,1,1)
    auto ic = hopfield::builtin_initial_condition();
    auto r1 = hopfield::run(spec, ic, 100);
    auto r2 = hopfield::run(same, ic, 100);
    for (std::size_t k = 0; k < r1.trajectory.size(); ++k)
        for (int i = 0; i < 3; ++i)
            CHECK(r1.trajectory[k][i] == Catch::Approx(r2.trajectory[k][i]).margin(1e-13));
}
