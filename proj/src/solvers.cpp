#include "elsolve/solvers.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "elsolve/errors.hpp"

namespace elsolve {

namespace {

// Residual evaluation, masking and bookkeeping shared by all three methods.
class IterationRecorder {
public:
    IterationRecorder(const ElementOperator& op, const DirichletData& d, std::span<const double> x0,
                      const SolverOptions& options)
        : op_(op), d_(d), options_(options), start_(std::chrono::steady_clock::now()) {
        if (x0.size() != op.size()) {
            throw ShapeError("initial guess has length " + std::to_string(x0.size()) + ", expected " +
                             std::to_string(op.size()));
        }
        if (options.reference && options.reference->size() != op.size()) {
            throw ShapeError("reference solution has the wrong length");
        }
        if (options.tolerance && !(*options.tolerance >= 0.0)) {
            throw ParameterError("tolerance must be nonnegative");
        }
        x.assign(x0.begin(), x0.end());
        r.resize(op.size());
    }

    GlobalVector x;
    GlobalVector r;

    // Computes the masked residual of the current x and records iterate k.
    // Returns false once the run must stop (divergence).
    bool update_residual(std::size_t k) {
        op_.residual_into(x, r, ws_);
        mask_dirichlet_inplace(r, d_);
        const double rn = norm2(r);
        history_.residual_norms.push_back(rn);
        if (options_.reference) {
            double s = 0.0;
            for (std::size_t g = 0; g < x.size(); ++g) {
                const double e = x[g] - (*options_.reference)[g];
                s += e * e;
            }
            history_.error_norms.push_back(std::sqrt(s));
        }
        history_.iterations = k;
        if (options_.observer) {
            options_.observer(k, x);
        }
        if (!std::isfinite(rn)) {
            history_.diverged = true;
            return false;
        }
        return true;
    }

    bool tolerance_reached() {
        if (!options_.tolerance) {
            return false;
        }
        const double r0 = history_.residual_norms.front();
        const double rk = history_.residual_norms.back();
        if (rk <= *options_.tolerance * r0) {
            history_.converged_early = history_.iterations < options_.iterations;
            return true;
        }
        return false;
    }

    SolveResult finish() {
        history_.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        return {std::move(x), std::move(history_)};
    }

private:
    const ElementOperator& op_;
    const DirichletData& d_;
    const SolverOptions& options_;
    Workspace ws_;
    ConvergenceHistory history_;
    std::chrono::steady_clock::time_point start_;
};

// x^{k+1} = x^k + steps[k mod N] * r^k. Richardson is the N = 1 case.
SolveResult cyclic_steps(const ElementOperator& op, const DirichletData& d, std::span<const double> x0,
                         const std::vector<double>& steps, const SolverOptions& options) {
    IterationRecorder rec(op, d, x0, options);
    if (!rec.update_residual(0)) {
        return rec.finish();
    }
    for (std::size_t k = 0; k < options.iterations; ++k) {
        if (rec.tolerance_reached()) {
            break;
        }
        const double step = steps[k % steps.size()];
        for (std::size_t g = 0; g < rec.x.size(); ++g) {
            rec.x[g] += step * rec.r[g];
        }
        if (!rec.update_residual(k + 1)) {
            break;
        }
    }
    return rec.finish();
}

}  // namespace

void validate(const SpectralBounds& bounds) {
    if (!std::isfinite(bounds.lambda1) || !std::isfinite(bounds.lambda2) || !(bounds.lambda1 > 0.0) ||
        !(bounds.lambda2 >= bounds.lambda1)) {
        throw ParameterError("spectral bounds must satisfy 0 < lambda1 <= lambda2 < inf, got [" +
                             std::to_string(bounds.lambda1) + ", " + std::to_string(bounds.lambda2) + "]");
    }
}

ChebyshevCycle chebyshev_roots(const SpectralBounds& bounds, int n) {
    if (n <= 0) {
        throw ParameterError("Chebyshev cycle length must be positive, got " + std::to_string(n));
    }
    ChebyshevCycle cycle;
    cycle.length = static_cast<std::size_t>(n);
    cycle.center = bounds.center();
    cycle.half_width = bounds.half_width();
    cycle.alphas.resize(cycle.length);
    for (int k = 0; k < n; ++k) {
        // cos(pi (k + 1/2) / N), evaluated on the first half and mirrored so
        // the root set is symmetric about the center and the middle root is
        // the center exactly.
        double cosine = 0.0;
        if (2 * k + 1 < n) {
            cosine = std::cos(std::numbers::pi * (k + 0.5) / n);
        } else if (2 * k + 1 > n) {
            cosine = -std::cos(std::numbers::pi * ((n - 1 - k) + 0.5) / n);
        }
        cycle.alphas[static_cast<std::size_t>(k)] = cycle.center + cycle.half_width * cosine;
    }
    return cycle;
}

double chebyshev_scaling_factor(const SpectralBounds& bounds, int k) {
    if (k < 0) {
        throw ParameterError("scaling factor index must be nonnegative");
    }
    if (!(bounds.lambda2 > bounds.lambda1)) {
        throw ParameterError("scaling factor recurrence needs lambda1 < lambda2");
    }
    const double t = (bounds.lambda1 + bounds.lambda2) / (bounds.lambda2 - bounds.lambda1);
    double prev = 1.0;
    double cur = t;
    if (k == 0) {
        return prev;
    }
    for (int i = 1; i < k; ++i) {
        const double next = 2.0 * t * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

SolveResult richardson(const ElementOperator& op, const DirichletData& d, std::span<const double> x0,
                       const SpectralBounds& bounds, const SolverOptions& options) {
    validate(bounds);
    // 1 / ((l1 + l2) / 2) == 2 / (l1 + l2); written this way so that the
    // N = 1 Chebyshev cycle produces the identical step.
    const double omega = 1.0 / bounds.center();
    return cyclic_steps(op, d, x0, {omega}, options);
}

SolveResult chebyshev2(const ElementOperator& op, const DirichletData& d, std::span<const double> x0,
                       const SpectralBounds& bounds, int cycle_length, const SolverOptions& options) {
    validate(bounds);
    const ChebyshevCycle cycle = chebyshev_roots(bounds, cycle_length);
    std::vector<double> steps;
    steps.reserve(cycle.length);
    for (double alpha : cycle.alphas) {
        steps.push_back(1.0 / alpha);
    }
    return cyclic_steps(op, d, x0, steps, options);
}

SolveResult chebyshev3(const ElementOperator& op, const DirichletData& d, std::span<const double> x0,
                       const SpectralBounds& bounds, const SolverOptions& options) {
    validate(bounds);
    if (!(bounds.lambda2 > bounds.lambda1)) {
        throw ParameterError("three-level Chebyshev needs lambda1 < lambda2");
    }
    const double center = bounds.center();
    const double half_width = bounds.half_width();

    IterationRecorder rec(op, d, x0, options);
    if (!rec.update_residual(0)) {
        return rec.finish();
    }
    GlobalVector p(rec.x.size(), 0.0);
    double alpha = 0.0;
    for (std::size_t k = 0; k < options.iterations; ++k) {
        if (rec.tolerance_reached()) {
            break;
        }
        if (k == 0) {
            p = rec.r;
            alpha = 1.0 / center;
        } else {
            // beta_1 = (c alpha_0)^2 / 2, beta_k = (c alpha_{k-1} / 2)^2 afterwards.
            // Using the second form at k = 1 as well breaks the optimality of
            // the iterates (they no longer follow the scaled polynomials).
            const double ca = half_width * alpha;
            const double beta = k == 1 ? 0.5 * ca * ca : 0.25 * ca * ca;
            for (std::size_t g = 0; g < p.size(); ++g) {
                p[g] = rec.r[g] + beta * p[g];
            }
            alpha = 1.0 / (center - beta / alpha);
        }
        for (std::size_t g = 0; g < p.size(); ++g) {
            rec.x[g] += alpha * p[g];
        }
        if (!rec.update_residual(k + 1)) {
            break;
        }
    }
    return rec.finish();
}

double chebyshev_rate(const SpectralBounds& bounds) {
    const double s1 = std::sqrt(bounds.lambda1);
    const double s2 = std::sqrt(bounds.lambda2);
    return (s2 - s1) / (s2 + s1);
}

double richardson_rate(const SpectralBounds& bounds) {
    return (bounds.lambda2 - bounds.lambda1) / (bounds.lambda2 + bounds.lambda1);
}

}  // namespace elsolve
