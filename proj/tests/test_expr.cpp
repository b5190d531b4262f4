#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hopfield/expr.hpp"
#include "support/test_support.hpp"

using hopfield::expr;

TEST_CASE("coefficient expressions from the reference models") {
    CHECK(expr::parse("cos(pi*m)/6", "m").eval(0.0) == Catch::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(expr::parse("u", "u").eval(3.5) == 3.5);
    CHECK(expr::parse("floor(m/4)", "m").eval(7.0) == 1.0);
    CHECK(expr::parse("1/(2*(1+exp(-m))) - 1/4", "m").eval(0.0) == 0.0);
    CHECK(expr::parse("tanh(u)", "u").eval(0.0) == 0.0);
    CHECK(expr::parse("1/((l+1)*(l+2))", "l").eval(0.0) == 0.5);
    CHECK(expr::parse("min(arctan(abs(u)),1)", "u").eval(-0.5) ==
          Catch::Approx(std::atan(0.5)).epsilon(1e-15));
    CHECK(expr::parse("max(tanh(abs(u)), u - 1/10)", "u").eval(2.0) == Catch::Approx(1.9));
    CHECK(expr::parse("u/sqrt(1+u^2)", "u").eval(1.0) == Catch::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("precedence and associativity follow the grammar") {
    CHECK(expr::parse("2+3*4", "m").eval(0) == 14.0);
    CHECK(expr::parse("2+(3*4)", "m").eval(0) == 14.0);
    CHECK(expr::parse("6/3/2", "m").eval(0) == 1.0);
    CHECK(expr::parse("2-3-4", "m").eval(0) == -5.0);
    CHECK(expr::parse("2^3^2", "m").eval(0) == 512.0);  // right-associative
    CHECK(expr::parse("-2^2", "m").eval(0) == -4.0);    // unary minus applies to the power
    CHECK(expr::parse("2^-2", "m").eval(0) == 0.25);
    CHECK(expr::parse("2*m+1", "m").eval(3) == 7.0);
    CHECK(expr::parse("pi", "m").eval(0) == Catch::Approx(3.14159265358979).epsilon(1e-14));
    CHECK(expr::parse("e", "m").eval(0) == Catch::Approx(2.71828182845905).epsilon(1e-14));
    CHECK(expr::parse("2e3", "m").eval(0) == 2000.0);
    CHECK(expr::parse("2*e", "m").eval(0) == Catch::Approx(2 * 2.71828182845905).epsilon(1e-14));

    std::mt19937_64 rng(test_support::seed_from_env());
    std::uniform_real_distribution<double> val(-4.0, 4.0);
    for (int t = 0; t < 200; ++t) {
        double a = val(rng), b = val(rng), c = val(rng);
        char flat[128], grouped[128];
        std::snprintf(flat, sizeof flat, "%.17g+%.17g*%.17g", a, b, c);
        std::snprintf(grouped, sizeof grouped, "%.17g+(%.17g*%.17g)", a, b, c);
        CHECK(expr::parse(flat, "m").eval(0) == expr::parse(grouped, "m").eval(0));
    }
}

TEST_CASE("parse errors carry positions") {
    const std::vector<std::string> malformed = {
        "1+",      "(2*m",      "foo(3)", "sin()",  "min(1)", "2**3",
        "m n",     ")",         "",       "1..2",   "pow(1,2,3)", "unknownvar",
        "sin(u,1)" };
    for (const auto& src : malformed) {
        INFO("source: '" << src << "'");
        try {
            expr::parse(src, "m");
            FAIL("expected a parse error");
        } catch (const hopfield::parse_error& e) {
            CHECK(e.position() <= src.size());
            CHECK(std::string(e.what()).size() > 5);
        }
    }
}

TEST_CASE("evaluation domain errors") {
    CHECK_THROWS_AS(expr::parse("1/m", "m").eval(0.0), hopfield::eval_error);
    CHECK_THROWS_AS(expr::parse("sqrt(0-m)", "m").eval(4.0), hopfield::eval_error);
    CHECK_THROWS_AS(expr::parse("exp(m)", "m").eval(1000.0), hopfield::eval_error);
    CHECK_THROWS_AS(expr::parse("2^m", "m").eval(409600.0), hopfield::eval_error);
    CHECK_THROWS_AS(expr::parse("m", "m").eval(std::numeric_limits<double>::infinity()),
                    hopfield::eval_error);
    CHECK_THROWS_AS(expr::parse("(0-2)^(1/2)", "m").eval(0.0), hopfield::eval_error);
}

namespace {

// Random expression trees over total builtins, for the print/parse round trip.
expr random_expr(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> kind(0, depth <= 0 ? 1 : 8);
    std::uniform_real_distribution<double> cval(-3.0, 3.0);
    using binop = hopfield::detail::expr_node::binop;
    switch (kind(rng)) {
        case 0: return expr::constant(cval(rng), "m");
        case 1: return expr::variable("m");
        case 2: return expr::negate(random_expr(rng, depth - 1));
        case 3: return expr::binary(binop::add, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 4: return expr::binary(binop::sub, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 5: return expr::binary(binop::mul, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 6: return expr::call(hopfield::builtin_fn::tanh, random_expr(rng, depth - 1));
        case 7: return expr::call(hopfield::builtin_fn::min, random_expr(rng, depth - 1),
                                  random_expr(rng, depth - 1));
        default: return expr::call(hopfield::builtin_fn::floor, random_expr(rng, depth - 1));
    }
}

}  // namespace

TEST_CASE("print-then-parse round trip evaluates bit-identically") {
    std::mt19937_64 rng(test_support::seed_from_env() ^ 0x99);
    std::uniform_real_distribution<double> point(-10.0, 10.0);
    std::uniform_int_distribution<int> depth(1, 5);
    for (int t = 0; t < 1000; ++t) {
        expr original = random_expr(rng, depth(rng));
        std::string text = original.to_string();
        INFO("printed: " << text);
        expr reparsed = expr::parse(text, "m");
        for (int k = 0; k < 100; ++k) {
            double x = point(rng);
            REQUIRE(original.eval(x) == reparsed.eval(x));
        }
    }

    // operators with structure-sensitive printing
    for (const char* src : {"m/(1+m^2)", "(1-m)^2", "m-(m-1)", "2^(0-m)", "-(m+1)*2",
                            "sign(m)*abs(m)", "pow(abs(m)+1,1/2)"}) {
        expr e = expr::parse(src, "m");
        expr r = expr::parse(e.to_string(), "m");
        for (double x : {-2.5, -1.0, 0.0, 0.5, 3.0}) CHECK(e.eval(x) == r.eval(x));
    }
}

TEST_CASE("builtins agree with the math library") {
    for (int k = -50; k <= 50; ++k) {
        double u = k / 7.0;
        CHECK(expr::parse("sin(u)", "u").eval(u) == std::sin(u));
        CHECK(expr::parse("cos(u)", "u").eval(u) == std::cos(u));
        CHECK(expr::parse("arctan(u)", "u").eval(u) == std::atan(u));
        CHECK(expr::parse("tanh(u)", "u").eval(u) == std::tanh(u));
        CHECK(expr::parse("exp(u)", "u").eval(u) == std::exp(u));
        CHECK(expr::parse("floor(u)", "u").eval(u) == std::floor(u));
        CHECK(expr::parse("abs(u)", "u").eval(u) == std::fabs(u));
        if (u >= 0) CHECK(expr::parse("sqrt(u)", "u").eval(u) == std::sqrt(u));
    }
    CHECK(expr::parse("sign(u)", "u").eval(-3.0) == -1.0);
    CHECK(expr::parse("sign(u)", "u").eval(0.0) == 0.0);
    CHECK(expr::parse("sign(u)", "u").eval(0.25) == 1.0);
}

TEST_CASE("affine substitution composes the variable") {
    expr f = expr::parse("tanh(u) + u^2", "u");
    expr g = f.substitute_affine(2.0, 1.0);
    for (double x : {-1.0, 0.0, 0.3, 2.0})
        CHECK(g.eval(x) == Catch::Approx(std::tanh(2 * x + 1) + (2 * x + 1) * (2 * x + 1)).epsilon(1e-15));
    expr r = expr::parse(g.to_string(), "u");
    for (double x : {-1.0, 0.0, 0.3, 2.0}) CHECK(g.eval(x) == r.eval(x));

    CHECK(expr::parse("m+1", "m").references_variable());
    CHECK_FALSE(expr::parse("3*4+sin(2)", "m").references_variable());
}
