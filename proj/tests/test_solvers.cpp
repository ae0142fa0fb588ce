#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "elsolve/errors.hpp"
#include "elsolve/solvers.hpp"
#include "support.hpp"

using namespace elsolve;
using elsolve::testing::ModelProblem;

namespace {

SolverOptions iterations(std::size_t n) {
    SolverOptions o;
    o.iterations = n;
    return o;
}

}  // namespace

TEST_CASE("richardson on tiny systems") {
    SUBCASE("1x1: one step annihilates the error") {
        const auto batch = testing::diagonal_batch({2.0}, {2.0});
        const ElementOperator op(batch);
        const auto res = richardson(op, {}, std::vector<double>{0.0}, {2.0, 2.0}, iterations(1));
        CHECK(res.x[0] == 1.0);
        CHECK(res.history.residual_norms.size() == 2);
        CHECK(res.history.residual_norms[1] == 0.0);
    }
    SUBCASE("diag(1,3): error contracts by exactly (l2-l1)/(l2+l1)") {
        const auto batch = testing::diagonal_batch({1.0, 3.0}, {1.0, 3.0});
        const ElementOperator op(batch);
        const auto res = richardson(op, {}, std::vector<double>{0.0, 0.0}, {1.0, 3.0}, iterations(1));
        const std::vector<double> u{1.0, 1.0};
        const double ratio = testing::distance(res.x, u) / testing::distance(std::vector<double>{0.0, 0.0}, u);
        CHECK(ratio == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("starting at the solution stays there") {
        const ModelProblem p(3);
        const ElementOperator op(p.batch);
        const auto u = p.reference_solution();
        const auto res = richardson(op, p.dirichlet, u, p.exact_bounds(), iterations(10));
        for (double rn : res.history.residual_norms) {
            CHECK(rn <= 1e-13);
        }
    }
}

TEST_CASE("zero iterations return the initial guess") {
    const ModelProblem p(2);
    const ElementOperator op(p.batch);
    const auto b = p.exact_bounds();
    for (const auto& res : {richardson(op, p.dirichlet, p.x0, b, iterations(0)),
                            chebyshev2(op, p.dirichlet, p.x0, b, 4, iterations(0)),
                            chebyshev3(op, p.dirichlet, p.x0, b, iterations(0))}) {
        CHECK(res.x == p.x0);
        CHECK(res.history.residual_norms.size() == 1);
        CHECK(res.history.iterations == 0);
    }
}

TEST_CASE("chebyshev_roots") {
    SUBCASE("N = 1 is the interval centre") {
        const auto c = chebyshev_roots({0.3, 5.1}, 1);
        REQUIRE(c.alphas.size() == 1);
        CHECK(c.alphas[0] == 0.5 * (0.3 + 5.1));
    }
    SUBCASE("degenerate interval") {
        for (double a : chebyshev_roots({2.0, 2.0}, 7).alphas) {
            CHECK(a == 2.0);
        }
    }
    SUBCASE("[0, 8], N = 2") {
        const auto c = chebyshev_roots({0.0, 8.0}, 2);
        CHECK(c.alphas[0] == doctest::Approx(4.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-15));
        CHECK(c.alphas[1] == doctest::Approx(4.0 - 2.0 * std::sqrt(2.0)).epsilon(1e-15));
        // P_2(t) = T_2(-(t - 4) / 4) / T_2(1), T_2(s) = 2 s^2 - 1
        for (double t : c.alphas) {
            const double s = -(t - 4.0) / 4.0;
            CHECK(std::abs(2.0 * s * s - 1.0) <= 1e-15);
        }
    }
    SUBCASE("roots lie inside the interval, descending, symmetric about the centre") {
        const SpectralBounds b{0.0192612, 7.9807388};
        for (int n : {2, 3, 8, 31, 32}) {
            const auto c = chebyshev_roots(b, n);
            CHECK(c.center == b.center());
            CHECK(c.half_width == b.half_width());
            for (int k = 0; k < n; ++k) {
                CHECK(c.alphas[k] > b.lambda1);
                CHECK(c.alphas[k] < b.lambda2);
                CHECK(c.alphas[k] + c.alphas[n - 1 - k] == doctest::Approx(2.0 * b.center()).epsilon(1e-15));
                CHECK(c.alphas[k] == doctest::Approx(b.center() + b.half_width() *
                                                                      std::cos(std::numbers::pi * (k + 0.5) / n))
                                         .epsilon(1e-14));
            }
            CHECK(std::is_sorted(c.alphas.rbegin(), c.alphas.rend()));
        }
    }
    CHECK_THROWS_AS(chebyshev_roots({1.0, 2.0}, 0), ParameterError);
}

TEST_CASE("chebyshev_scaling_factor") {
    const SpectralBounds b{1.0, 3.0};
    CHECK(chebyshev_scaling_factor(b, 0) == 1.0);
    CHECK(chebyshev_scaling_factor(b, 1) == 2.0);
    CHECK(chebyshev_scaling_factor(b, 2) == 7.0);
    // T_k(2) = cosh(k arccosh 2)
    for (int k = 0; k < 20; ++k) {
        CHECK(chebyshev_scaling_factor(b, k) ==
              doctest::Approx(std::cosh(k * std::acosh(2.0))).epsilon(1e-12));
        CHECK(chebyshev_scaling_factor(b, k + 1) > chebyshev_scaling_factor(b, k));
    }
    CHECK_THROWS_AS(chebyshev_scaling_factor({2.0, 2.0}, 3), ParameterError);
    CHECK_THROWS_AS(chebyshev_scaling_factor(b, -1), ParameterError);
}

TEST_CASE("chebyshev2 with N = 1 is richardson, bitwise") {
    const ModelProblem p(3);
    const ElementOperator op(p.batch);
    const auto b = p.exact_bounds();
    std::vector<GlobalVector> rich, cheb;
    SolverOptions o1 = iterations(50);
    o1.observer = [&](std::size_t, std::span<const double> x) { rich.emplace_back(x.begin(), x.end()); };
    SolverOptions o2 = iterations(50);
    o2.observer = [&](std::size_t, std::span<const double> x) { cheb.emplace_back(x.begin(), x.end()); };
    richardson(op, p.dirichlet, p.x0, b, o1);
    chebyshev2(op, p.dirichlet, p.x0, b, 1, o2);
    REQUIRE(rich.size() == 51);
    CHECK(rich == cheb);
}

TEST_CASE("1x1 chebyshev iterations converge in one step") {
    const auto batch = testing::diagonal_batch({4.0}, {2.0});
    const ElementOperator op(batch);
    const auto res = chebyshev2(op, {}, std::vector<double>{0.0}, {4.0, 4.0}, 5, iterations(1));
    CHECK(res.x[0] == 0.5);
}

TEST_CASE("chebyshev3 first step and trivial residual") {
    const ModelProblem p(3);
    const ElementOperator op(p.batch);
    const auto b = p.exact_bounds();
    SUBCASE("x1 = x0 + r0 / d") {
        const auto res = chebyshev3(op, p.dirichlet, p.x0, b, iterations(1));
        const auto r0 = mask_dirichlet(op.residual(p.x0), p.dirichlet);
        for (std::size_t g = 0; g < r0.size(); ++g) {
            CHECK(res.x[g] == p.x0[g] + (1.0 / b.center()) * r0[g]);
        }
    }
    SUBCASE("r0 = 0 keeps x0") {
        const auto zero = testing::ModelProblem(3, 0.0, [](double, double) { return 0.0; });
        const ElementOperator op0(zero.batch);
        // u = 1 solves the homogeneous problem exactly
        const auto res = chebyshev3(op0, zero.dirichlet, GlobalVector(zero.batch.n_nodes, 1.0), b, iterations(20));
        for (double v : res.x) {
            CHECK(v == 1.0);
        }
    }
    CHECK_THROWS_AS(chebyshev3(op, p.dirichlet, p.x0, {2.0, 2.0}, iterations(3)), ParameterError);
}

TEST_CASE("chebyshev3 follows the explicit scaling-factor recurrence") {
    for (int level : {2, 3, 4}) {
        const ModelProblem p(level);
        const ElementOperator op(p.batch);
        const auto b = p.exact_bounds();
        const std::size_t iters = 40;
        std::vector<GlobalVector> xs;
        SolverOptions o = iterations(iters);
        o.observer = [&](std::size_t, std::span<const double> x) { xs.emplace_back(x.begin(), x.end()); };
        chebyshev3(op, p.dirichlet, p.x0, b, o);
        const auto ref = testing::chebyshev3_scaling_form(op, p.dirichlet, p.x0, b, iters);
        REQUIRE(xs.size() == ref.size());
        for (std::size_t k = 0; k < xs.size(); ++k) {
            CHECK(testing::relative_difference(xs[k], ref[k]) <= 1e-10);
        }
    }
}

TEST_CASE("property: chebyshev3 on random diagonal systems") {
    // Hand-rolled generator: spectra drawn inside random intervals.
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const double l1 = 0.01 + unit(rng);
        const double l2 = l1 * (1.5 + 200.0 * unit(rng));
        const std::size_t n = 5 + trial;
        std::vector<double> diag(n), rhs(n);
        for (std::size_t k = 0; k < n; ++k) {
            diag[k] = k == 0 ? l1 : (k == 1 ? l2 : l1 + (l2 - l1) * unit(rng));
            rhs[k] = unit(rng) - 0.5;
        }
        const auto batch = testing::diagonal_batch(diag, rhs);
        const ElementOperator op(batch);
        const SpectralBounds b{l1, l2};
        const std::vector<double> x0(n, 0.0);
        std::vector<double> u(n);
        for (std::size_t k = 0; k < n; ++k) {
            u[k] = rhs[k] / diag[k];
        }
        const std::size_t steps = 3 + trial % 12;
        std::vector<GlobalVector> xs;
        SolverOptions o = iterations(steps);
        o.observer = [&](std::size_t, std::span<const double> x) { xs.emplace_back(x.begin(), x.end()); };
        chebyshev3(op, {}, x0, b, o);
        const auto ref = testing::chebyshev3_scaling_form(op, {}, x0, b, steps);
        for (std::size_t k = 1; k <= steps; ++k) {
            CHECK(testing::relative_difference(xs[k], ref[k]) <= 1e-10);
            const double bound = 2.0 * std::pow(chebyshev_rate(b), static_cast<double>(k));
            CHECK(testing::distance(xs[k], u) <= bound * testing::distance(x0, u) * (1.0 + 1e-6));
        }
    }
}

TEST_CASE("two- and three-level iterates coincide after one full cycle") {
    for (int level : {2, 3}) {
        const ModelProblem p(level);
        const ElementOperator op(p.batch);
        const auto b = p.exact_bounds();
        for (int n : {2, 4, 8}) {
            const auto two = chebyshev2(op, p.dirichlet, p.x0, b, n, iterations(n));
            const auto three = chebyshev3(op, p.dirichlet, p.x0, b, iterations(n));
            CHECK(testing::relative_difference(two.x, three.x) <= 1e-8);
        }
    }
}

TEST_CASE("chebyshev error bound") {
    for (int level : {2, 3}) {
        const ModelProblem p(level);
        const ElementOperator op(p.batch);
        const auto b = p.exact_bounds();
        const auto u = p.reference_solution();
        const double e0 = testing::distance(p.x0, u);
        for (int n : {4, 8, 16}) {
            const auto res = chebyshev3(op, p.dirichlet, p.x0, b, iterations(n));
            const double bound = 2.0 * std::pow(chebyshev_rate(b), n) * e0 * (1.0 + 1e-6);
            CHECK(testing::distance(res.x, u) <= bound);
        }
    }
}

TEST_CASE("richardson contracts every step") {
    const ModelProblem p(3);
    const ElementOperator op(p.batch);
    const auto b = p.exact_bounds();
    const auto u = p.reference_solution();
    SolverOptions o = iterations(60);
    o.reference = std::span<const double>(u);
    const auto res = richardson(op, p.dirichlet, p.x0, b, o);
    const auto& e = res.history.error_norms;
    REQUIRE(e.size() == 61);
    for (std::size_t k = 0; k + 1 < e.size(); ++k) {
        CHECK(e[k + 1] <= richardson_rate(b) * e[k] + 1e-12);
    }
}

TEST_CASE("Dirichlet values never move") {
    const ModelProblem p(3);
    const ElementOperator op(p.batch);
    const auto b = p.exact_bounds();
    std::size_t checked = 0;
    SolverOptions o = iterations(64);
    o.observer = [&](std::size_t, std::span<const double> x) {
        for (std::size_t k = 0; k < p.dirichlet.nodes.size(); ++k) {
            CHECK(x[p.dirichlet.nodes[k]] == p.x0[p.dirichlet.nodes[k]]);
        }
        ++checked;
    };
    richardson(op, p.dirichlet, p.x0, b, o);
    chebyshev2(op, p.dirichlet, p.x0, b, 8, o);
    chebyshev3(op, p.dirichlet, p.x0, b, o);
    CHECK(checked == 3 * 65);
}

TEST_CASE("divergence is flagged, not thrown") {
    const ModelProblem p(3);
    const ElementOperator op(p.batch);
    ConvergenceHistory h;
    CHECK_NOTHROW(h = richardson(op, p.dirichlet, p.x0, {1e-3, 2e-3}, iterations(2000)).history);
    CHECK(h.diverged);
    CHECK(h.iterations < 2000);
    CHECK(!std::isfinite(h.residual_norms.back()));
    for (std::size_t k = 0; k + 1 < h.residual_norms.size(); ++k) {
        CHECK(std::isfinite(h.residual_norms[k]));
    }
}

TEST_CASE("relative residual tolerance stops early") {
    const ModelProblem p(3);
    const ElementOperator op(p.batch);
    SolverOptions o = iterations(500);
    o.tolerance = 1e-6;
    const auto res = chebyshev3(op, p.dirichlet, p.x0, p.exact_bounds(), o);
    CHECK(res.history.converged_early);
    CHECK(res.history.iterations < 500);
    CHECK(res.history.residual_norms.back() <= 1e-6 * res.history.residual_norms.front());
    CHECK(res.history.residual_norms.size() == res.history.iterations + 1);
}

TEST_CASE("parameter errors") {
    const ModelProblem p(2);
    const ElementOperator op(p.batch);
    CHECK_THROWS_AS(richardson(op, p.dirichlet, p.x0, {0.0, 1.0}, iterations(1)), ParameterError);
    CHECK_THROWS_AS(richardson(op, p.dirichlet, p.x0, {2.0, 1.0}, iterations(1)), ParameterError);
    CHECK_THROWS_AS(chebyshev2(op, p.dirichlet, p.x0, {1.0, 2.0}, 0, iterations(1)), ParameterError);
    CHECK_THROWS_AS(richardson(op, p.dirichlet, GlobalVector(2, 0.0), {1.0, 2.0}, iterations(1)), ShapeError);
}
