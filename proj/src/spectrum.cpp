#include "elsolve/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "elsolve/errors.hpp"

namespace elsolve {

namespace {

void check_side(std::size_t n) {
    if (n < 3) {
        throw ParameterError("model eigenvalues need at least 3 nodes per side, got " + std::to_string(n));
    }
}

// 1-D Dirichlet Laplacian eigenvalue 4 sin^2(i pi / (2 (n - 1))).
double mode(std::size_t i, std::size_t n) {
    const double s = std::sin(static_cast<double>(i) * std::numbers::pi / (2.0 * static_cast<double>(n - 1)));
    return 4.0 * s * s;
}

// Smallest eigenvalue of a symmetric 3x3 matrix (row-major), closed form.
double min_eigenvalue_3x3(std::span<const double> a) {
    const double p1 = a[1] * a[1] + a[2] * a[2] + a[5] * a[5];
    const double q = (a[0] + a[4] + a[8]) / 3.0;
    if (p1 == 0.0) {
        return std::min({a[0], a[4], a[8]});
    }
    const double p2 = (a[0] - q) * (a[0] - q) + (a[4] - q) * (a[4] - q) + (a[8] - q) * (a[8] - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    const double b0 = (a[0] - q) / p, b4 = (a[4] - q) / p, b8 = (a[8] - q) / p;
    const double b1 = a[1] / p, b2 = a[2] / p, b5 = a[5] / p;
    const double det = b0 * (b4 * b8 - b5 * b5) - b1 * (b1 * b8 - b5 * b2) + b2 * (b1 * b5 - b4 * b2);
    const double r = std::clamp(det / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    return q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
}

}  // namespace

SpectralBounds model_eigen_bounds(std::size_t n) {
    check_side(n);
    return {2.0 * mode(1, n), 2.0 * mode(n - 2, n)};
}

std::vector<double> model_eigenvalues_all(std::size_t n) {
    check_side(n);
    std::vector<double> out;
    out.reserve((n - 2) * (n - 2));
    for (std::size_t i = 1; i <= n - 2; ++i) {
        for (std::size_t j = 1; j <= n - 2; ++j) {
            out.push_back(mode(i, n) + mode(j, n));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double power_iteration_lambda_max(const ElementOperator& op, const DirichletData& d,
                                  const PowerIterationOptions& options) {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> start(op.size());
    for (double& v : start) {
        v = dist(rng);
    }
    return power_iteration_lambda_max(op, d, std::move(start), options);
}

double power_iteration_lambda_max(const ElementOperator& op, const DirichletData& d, std::vector<double> start,
                                  const PowerIterationOptions& options) {
    if (options.max_iterations < 1) {
        throw ParameterError("power iteration needs at least one iteration");
    }
    if (start.size() != op.size()) {
        throw ShapeError("start vector has the wrong length");
    }
    mask_dirichlet_inplace(start, d);
    double nv = norm2(start);
    if (!(nv > 0.0) || !std::isfinite(nv)) {
        throw SeedError("start vector vanishes on the free nodes");
    }
    for (double& v : start) {
        v /= nv;
    }

    Workspace ws;
    std::vector<double> w(op.size());
    double lambda = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        op.apply_into(start, w, ws);
        mask_dirichlet_inplace(w, d);
        double rq = 0.0;
        for (std::size_t g = 0; g < w.size(); ++g) {
            rq += start[g] * w[g];
        }
        const bool settled = std::abs(rq - lambda) < options.tolerance * std::max(1.0, std::abs(rq));
        lambda = rq;
        if (settled) {
            break;
        }
        const double nw = norm2(w);
        if (nw == 0.0) {
            break;
        }
        for (std::size_t g = 0; g < w.size(); ++g) {
            start[g] = w[g] / nw;
        }
    }
    return lambda;
}

SpectralBounds mass_spectrum_bounds(const ElementBatch& batch, const DirichletData& d) {
    const auto& mass = batch.mass;
    if (mass.local_size != 3 || mass.n_elements != batch.n_elements() || mass.values.empty()) {
        throw ShapeError("mass bounds need a triangle batch with local mass matrices");
    }
    std::vector<bool> constrained(batch.n_nodes, false);
    for (NodeId g : d.nodes) {
        constrained[g] = true;
    }
    std::vector<double> diag_lower(batch.n_nodes, 0.0);
    std::vector<double> row_abs(batch.n_nodes, 0.0);
    const auto& idx = batch.index.gather;
    for (std::size_t e = 0; e < mass.n_elements; ++e) {
        const double lmin = min_eigenvalue_3x3(mass.slice(e));
        for (std::size_t i = 0; i < 3; ++i) {
            const NodeId gi = idx[e * 3 + i];
            diag_lower[gi] += lmin;
            for (std::size_t j = 0; j < 3; ++j) {
                if (!constrained[idx[e * 3 + j]]) {
                    row_abs[gi] += std::abs(mass(i, j, e));
                }
            }
        }
    }
    SpectralBounds out{std::numeric_limits<double>::infinity(), 0.0};
    for (NodeId g = 0; g < batch.n_nodes; ++g) {
        if (!constrained[g]) {
            out.lambda1 = std::min(out.lambda1, diag_lower[g]);
            out.lambda2 = std::max(out.lambda2, row_abs[g]);
        }
    }
    if (out.lambda2 == 0.0) {
        throw ParameterError("no free nodes");
    }
    return out;
}

SpectralBounds model_bounds_with_mass(std::size_t n, const ElementBatch& batch, const DirichletData& d) {
    const SpectralBounds k = model_eigen_bounds(n);
    if (batch.nu == 0.0) {
        return k;
    }
    const SpectralBounds m = mass_spectrum_bounds(batch, d);
    return {k.lambda1 + batch.nu * m.lambda1, k.lambda2 + batch.nu * m.lambda2};
}

}  // namespace elsolve
