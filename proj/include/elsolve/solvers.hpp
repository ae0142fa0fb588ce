#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "elsolve/element_operator.hpp"

namespace elsolve {

/// Interval [lambda1, lambda2] enclosing the spectrum on the free nodes.
struct SpectralBounds {
    double lambda1 = 0.0;
    double lambda2 = 0.0;

    double center() const { return 0.5 * (lambda1 + lambda2); }
    double half_width() const { return 0.5 * (lambda2 - lambda1); }
};

/// Throws ParameterError unless 0 < lambda1 <= lambda2 < inf.
void validate(const SpectralBounds& bounds);

/// Roots of the Chebyshev polynomial shifted to [lambda1, lambda2], in the
/// order alpha_k = d + c * cos(pi * (k + 1/2) / N), k = 0..N-1, i.e. from the
/// largest root down to the smallest.
struct ChebyshevCycle {
    std::size_t length = 0;
    std::vector<double> alphas;
    double center = 0.0;
    double half_width = 0.0;
};

ChebyshevCycle chebyshev_roots(const SpectralBounds& bounds, int n);

/// C_k = T_k((lambda1 + lambda2) / (lambda2 - lambda1)) via the three-term
/// recurrence. Requires lambda1 < lambda2.
double chebyshev_scaling_factor(const SpectralBounds& bounds, int k);

struct ConvergenceHistory {
    /// ||r^k||_2 for k = 0..iterations.
    std::vector<double> residual_norms;
    /// ||x^k - u||_2 when a reference solution was supplied.
    std::vector<double> error_norms;
    std::size_t iterations = 0;
    bool diverged = false;
    bool converged_early = false;
    double wall_seconds = 0.0;
};

struct SolveResult {
    GlobalVector x;
    ConvergenceHistory history;
};

struct SolverOptions {
    std::size_t iterations = 0;
    /// Stop once ||r^k|| / ||r^0|| <= tolerance.
    std::optional<double> tolerance;
    /// Enables error_norms in the history.
    std::optional<std::span<const double>> reference;
    /// Called with (k, x^k) for k = 0..iterations.
    std::function<void(std::size_t, std::span<const double>)> observer;
};

/// x^{k+1} = x^k + omega r^k with omega = 2 / (lambda1 + lambda2).
SolveResult richardson(const ElementOperator& op, const DirichletData& d, std::span<const double> x0,
                       const SpectralBounds& bounds, const SolverOptions& options);

/// Cyclic two-level Chebyshev: x^{k+1} = x^k + r^k / alpha_{k mod N}, roots
/// taken in the natural order of chebyshev_roots. Known to be unstable for
/// large N in this order.
SolveResult chebyshev2(const ElementOperator& op, const DirichletData& d, std::span<const double> x0,
                       const SpectralBounds& bounds, int cycle_length, const SolverOptions& options);

/// Three-level Chebyshev in its two-term alpha/beta form: p = r + beta p,
/// x += alpha p, with alpha_0 = 1/d. Iterate k satisfies
/// x^k - u = P_k(A)(x^0 - u) for the scaled Chebyshev polynomial P_k.
/// Requires lambda1 < lambda2.
SolveResult chebyshev3(const ElementOperator& op, const DirichletData& d, std::span<const double> x0,
                       const SpectralBounds& bounds, const SolverOptions& options);

/// Asymptotic Chebyshev contraction (sqrt(l2) - sqrt(l1)) / (sqrt(l2) + sqrt(l1)).
double chebyshev_rate(const SpectralBounds& bounds);

/// Richardson contraction (l2 - l1) / (l2 + l1).
double richardson_rate(const SpectralBounds& bounds);

}  // namespace elsolve
