#include "opexp/printer.hpp"
#include "opexp/series_engine.hpp"
#include "opexp/validate.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

using namespace opexp;

namespace {

std::string probs() { return OPEXP_PROBLEMS_DIR; }

Problem pde3() {
    return parse_problem(R"(
kind = pde
unknown = u
eq: D(u,t,t) = u * D(u,t,x)
init: u|a = h
init: D(u,t)|a = g
)");
}

ParseContext hg_ctx() {
    ParseContext ctx;
    ctx.functions = {"h", "g", "c"};
    return ctx;
}

} // namespace

TEST_CASE("taylor_coefficients reproduces the showcase PDE expansion") {
    auto series = taylor_coefficients(reduce_to_first_order(pde3()), 4);
    const SeriesSolution& u = component(series, "u");
    ParseContext ctx = hg_ctx();
    CHECK(u.k[0] == parse("h", ctx));
    CHECK(u.k[1] == parse("g", ctx));
    CHECK(u.k[2] == parse("h*g'", ctx));
    CHECK(u.k[3] == parse("h^2*g'' + g'*(h*h' + g)", ctx));
    CHECK(u.k[4] == parse("h*h'^2*g' + 3*h^2*h'*g'' + h^2*h''*g' + h^3*g''' + 2*h'*g*g'"
                          " + 2*h*g'^2 + 3*h*g*g''",
                          ctx));
}

TEST_CASE("zero right-hand side evolves nothing") {
    Problem p = parse_problem("kind = ode\nunknowns = u\neq: D(u,t) = 0\ninit: u|a = c\n");
    auto series = taylor_coefficients(p, 5);
    CHECK(series[0].k[0] == sym("c"));
    for (int n = 1; n <= 5; ++n) CHECK(series[0].k[static_cast<size_t>(n)].is_zero());
    CHECK(to_text(series[0]) == "u = c");
}

TEST_CASE("riccati coefficients are n! c^(n+1)") {
    Problem p = load_problem(probs() + "/riccati.prob");
    auto series = taylor_coefficients(p, 3);
    Rational fact(1);
    for (int n = 0; n <= 3; ++n) {
        if (n > 0) fact *= Rational(n);
        CHECK(series[0].k[static_cast<size_t>(n)] == num(fact) * pow(sym("c"), n + 1));
    }
}

TEST_CASE("resummed series for the showcase PDE, order 2") {
    auto gen = resummed_series(pde3(), exp_sub(), 2);
    const GeneralizedSeries& g = gen[0];
    ParseContext ctx = hg_ctx();
    CHECK(g.tau0 == Rational(1));
    CHECK(g.b[0] == parse("h", ctx));
    CHECK(g.b[1] == parse("-g/p", ctx));
    CHECK(g.b[2] == parse("(h*g' + g*p)/(2*p^2)", ctx));
}

TEST_CASE("identity substitution resums to the plain series") {
    Problem p = load_problem(probs() + "/logistic.prob");
    auto gen = resummed_series(p, identity_sub(), 5);
    auto plain = taylor_coefficients(p, 5);
    Rational fact(1);
    for (int n = 0; n <= 5; ++n) {
        if (n > 0) fact *= Rational(n);
        CHECK(gen[0].b[static_cast<size_t>(n)] ==
              simplify(num(Rational(1) / fact) * plain[0].k[static_cast<size_t>(n)]));
    }
    // and expanding returns the embedded Taylor series unchanged
    SeriesSolution back = expand_generalized(gen[0], 5);
    for (int n = 0; n <= 5; ++n)
        CHECK(back.k[static_cast<size_t>(n)] == plain[0].k[static_cast<size_t>(n)]);
}

TEST_CASE("decay resums to an exactly terminating series") {
    Problem p = load_problem(probs() + "/decay.prob");
    auto gen = resummed_series(p, bind_param(exp_sub(), Rational(1)), 6);
    CHECK(gen[0].b[0] == sym("c"));
    CHECK(gen[0].b[1] == sym("c"));
    for (int n = 2; n <= 6; ++n) CHECK(gen[0].b[static_cast<size_t>(n)].is_zero());
}

TEST_CASE("expand_generalized cancels a symbolic parameter") {
    auto gen = resummed_series(pde3(), exp_sub(), 4);
    auto plain = taylor_coefficients(reduce_to_first_order(pde3()), 4);
    SeriesSolution back = expand_generalized(gen[0], 4);
    for (int n = 0; n <= 4; ++n) {
        CAPTURE(n);
        REQUIRE(back.k[static_cast<size_t>(n)] == component(plain, "u").k[static_cast<size_t>(n)]);
    }
}

TEST_CASE("expand_generalized matches for numeric p") {
    auto plain = taylor_coefficients(reduce_to_first_order(pde3()), 4);
    for (Rational pv : {Rational(1), Rational(2), Rational(3, 2)}) {
        auto gen = resummed_series(pde3(), bind_param(exp_sub(), pv), 4);
        SeriesSolution back = expand_generalized(gen[0], 4);
        for (int n = 0; n <= 4; ++n)
            REQUIRE(back.k[static_cast<size_t>(n)] ==
                    component(plain, "u").k[static_cast<size_t>(n)]);
    }
}

TEST_CASE("moebius resummation is consistent too") {
    Problem p = load_problem(probs() + "/riccati.prob");
    auto plain = taylor_coefficients(p, 4);
    auto gen = resummed_series(p, mobius_sub(), 4);
    SeriesSolution back = expand_generalized(gen[0], 4);
    for (int n = 0; n <= 4; ++n)
        REQUIRE(back.k[static_cast<size_t>(n)] == plain[0].k[static_cast<size_t>(n)]);
}

TEST_CASE("defining-equation residual vanishes through order N - K") {
    // plain Taylor series of the showcase PDE
    Problem p = pde3();
    auto series = taylor_coefficients(reduce_to_first_order(p), 5);
    Expr poly = series_polynomial(component(series, "u"));
    auto res = residual_expansion(p, {poly}, 3); // N - torder = 3
    for (int n = 0; n <= 3; ++n) REQUIRE(res[0][static_cast<size_t>(n)].is_zero());

    // generalized series with symbolic p
    auto gen = resummed_series(p, exp_sub(), 4);
    Expr gpoly = series_polynomial(gen[0]);
    auto gres = residual_expansion(p, {gpoly}, 2);
    for (int n = 0; n <= 2; ++n) REQUIRE(gres[0][static_cast<size_t>(n)].is_zero());

    // a first-order ODE keeps one more order
    Problem r = load_problem(probs() + "/riccati.prob");
    auto rs = taylor_coefficients(r, 6);
    auto rres = residual_expansion(r, {series_polynomial(rs[0])}, 5);
    for (int n = 0; n <= 5; ++n) REQUIRE(rres[0][static_cast<size_t>(n)].is_zero());
}

TEST_CASE("fourier_form regroups the decay series into harmonics") {
    Problem p = load_problem(probs() + "/decay.prob");
    auto gen = resummed_series(p, exp_sub(), 1);
    // b = [c, c/p]: u = c + (c/p)(e^{-pt} - 1); at p = 1 this is c*e^{-t}
    FourierSeries f = fourier_form(gen[0], sym("omega"));
    // harmonics of c + (c/(i w))(e^{-i w t} - 1): k=0: c - c/(i w), k=1: c/(i w)
    Expr ciw = simplify(sym("c") / (imaginary() * sym("omega")));
    CHECK(f.harmonics[0] == simplify(sym("c") - ciw));
    CHECK(f.harmonics[1] == ciw);

    // the two-term shape c + c(e^{-pt} - 1) collapses to the pure first
    // harmonic, the regrouped form of c*e^{-i w t}
    GeneralizedSeries two = gen[0];
    two.b = {sym("c"), sym("c")};
    FourierSeries f2 = fourier_form(two, sym("omega"));
    CHECK(f2.harmonics[0].is_zero());
    CHECK(f2.harmonics[1] == sym("c"));
}

TEST_CASE("fourier_form of a constant series is a single k=0 harmonic") {
    Problem p = parse_problem("kind = ode\nunknowns = u\neq: D(u,t) = 0\ninit: u|a = c\n");
    auto gen = resummed_series(p, exp_sub(), 3);
    FourierSeries f = fourier_form(gen[0], sym("omega"));
    CHECK(f.harmonics[0] == sym("c"));
    for (int k = 1; k <= 3; ++k) CHECK(f.harmonics[static_cast<size_t>(k)].is_zero());
}

TEST_CASE("fourier_form generic order-1 binomial") {
    // b0 + b1 (e^{-i w t} - 1) -> {k=0: b0 - b1, k=1: b1}
    Problem p = load_problem(probs() + "/linear.prob");
    auto gen = resummed_series(p, exp_sub(), 1);
    FourierSeries f = fourier_form(gen[0], sym("omega"));
    Expr b0 = gen[0].b[0];
    Expr b1 = simplify(substitute(gen[0].b[1], sym_atom("p"), imaginary() * sym("omega")));
    CHECK(f.harmonics[0] == simplify(b0 - b1));
    CHECK(f.harmonics[1] == b1);
    CHECK_THROWS_AS(fourier_form(resummed_series(p, identity_sub(), 1)[0], sym("omega")),
                    std::invalid_argument);
}

TEST_CASE("realness at truncation: Im of the Fourier form is O(t^(N+1))") {
    Problem p = load_problem(probs() + "/decay.prob");
    const int order = 3;
    auto gen = resummed_series(p, exp_sub(), order);
    FourierSeries f = fourier_form(gen[0], sym("omega"));
    Expr poly = fourier_polynomial(f, "t");

    const double omegas[] = {0.5, 1.0, 1.5, 2.0, 3.0};
    const double ts[] = {0.4, 0.2, 0.1, 0.05};
    int points = 0;
    for (double w : omegas) {
        double ratio_at_largest = -1;
        for (double t : ts) {
            Bindings b;
            b[sym_atom("c")] = 1.0;
            b[sym_atom("omega")] = w;
            b[sym_atom("t")] = t;
            std::complex<double> v = eval_complex(poly, b);
            double ratio = std::abs(v.imag()) / std::pow(t, order + 1);
            if (ratio_at_largest < 0) ratio_at_largest = ratio;
            // the ratio stays bounded as t -> 0
            REQUIRE(ratio <= 10.0 * ratio_at_largest + 1e-9);
            ++points;
        }
    }
    CHECK(points == 20);
}

TEST_CASE("oracle equivalence on a few problems, order 10") {
    for (const char* name : {"/linear.prob", "/riccati.prob", "/coupled.prob"}) {
        Problem p = load_problem(probs() + name);
        auto engine = taylor_coefficients(p, 10);
        auto oracle = oracle_coefficients(p, 10);
        for (size_t i = 0; i < p.dim(); ++i)
            for (int n = 0; n <= 10; ++n)
                REQUIRE(engine[i].k[static_cast<size_t>(n)] ==
                        oracle[i].k[static_cast<size_t>(n)]);
    }
}

TEST_CASE("series printing") {
    Problem p = load_problem(probs() + "/riccati.prob");
    auto series = taylor_coefficients(p, 3);
    CHECK(to_text(series[0]) == "u = c + c^2*t + 2*c^3*t^2/2 + 6*c^4*t^3/6");
    auto gen = resummed_series(load_problem(probs() + "/decay.prob"),
                               bind_param(exp_sub(), Rational(1)), 2);
    CHECK(to_text(gen[0]) == "u = c + c*(-1 + exp(-t))");
    CHECK(to_latex(series[0]).find("c^{2}") != std::string::npos);
}
