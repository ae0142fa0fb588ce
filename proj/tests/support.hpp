#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "elsolve/element_operator.hpp"
#include "elsolve/elements.hpp"
#include "elsolve/mesh.hpp"
#include "elsolve/oracle/reference_oracle.hpp"
#include "elsolve/solvers.hpp"
#include "elsolve/spectrum.hpp"

namespace elsolve::testing {

inline double one(double, double) { return 1.0; }

/// Model problem: f = 1, u = 1 on the boundary.
struct ModelProblem {
    Mesh mesh;
    ElementBatch batch;
    DirichletData dirichlet;
    GlobalVector x0;

    explicit ModelProblem(int level, double nu = 0.0, SourceFunction f = one)
        : mesh(build_unit_square_mesh(level)),
          batch(build_element_batch(mesh, nu, f)),
          dirichlet(dirichlet_on_boundary(mesh, one)),
          x0(apply_initial_guess(mesh, dirichlet)) {}

    oracle::SparseMatrix assembled() const {
        return oracle::assemble_sparse(batch.system, batch.index.scatter, batch.n_nodes);
    }
    std::vector<double> assembled_rhs() const {
        return oracle::assemble_vector(batch.loads, batch.index.scatter, batch.n_nodes);
    }
    std::vector<double> reference_solution() const {
        return oracle::solve_reference(assembled(), assembled_rhs(), dirichlet);
    }
    SpectralBounds exact_bounds() const { return model_eigen_bounds(mesh.nodes_per_side()); }
};

/// Diagonal system diag(diag) x = rhs built from 1x1 "elements".
inline ElementBatch diagonal_batch(const std::vector<double>& diag, const std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    LocalMatrices a{1, n, diag};
    LocalVectors b{1, n, rhs};
    IndexArrays idx;
    idx.local_size = 1;
    idx.n_elements = n;
    for (std::size_t k = 0; k < n; ++k) {
        idx.gather.push_back(k);
    }
    idx.scatter = idx.gather;
    return make_element_batch(n, std::move(a), std::move(b), std::move(idx));
}

/// Neumaier-compensated sum, so tolerances near machine precision measure the
/// summands rather than the order they were added in.
inline double accurate_sum(std::span<const double> values) {
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        const double t = sum + v;
        carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + carry;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) {
        x = dist(rng);
    }
    return v;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        s += (a[k] - b[k]) * (a[k] - b[k]);
    }
    return std::sqrt(s);
}

inline double relative_difference(std::span<const double> a, std::span<const double> b) {
    return distance(a, b) / norm2(b);
}

/// Three-level Chebyshev written directly in terms of the scaling factors
/// C_k = T_k((l1 + l2) / (l2 - l1)):
///   x^1     = x^0 + 2 / (l1 + l2) r^0
///   x^{k+1} = x^k + C_{k-1}/C_{k+1} (x^k - x^{k-1}) + 4/(l2 - l1) C_k/C_{k+1} r^k.
/// Independent of the alpha/beta implementation; used as its cross-check.
/// Returns the iterates x^0..x^iters.
inline std::vector<GlobalVector> chebyshev3_scaling_form(const ElementOperator& op, const DirichletData& d,
                                                         std::span<const double> x0, const SpectralBounds& b,
                                                         std::size_t iters) {
    const double l1 = b.lambda1;
    const double l2 = b.lambda2;
    const double t = (l1 + l2) / (l2 - l1);
    std::vector<GlobalVector> xs;
    xs.emplace_back(x0.begin(), x0.end());
    if (iters == 0) {
        return xs;
    }
    auto masked_residual = [&](const GlobalVector& x) { return mask_dirichlet(op.residual(x), d); };
    GlobalVector r = masked_residual(xs[0]);
    GlobalVector x1 = xs[0];
    for (std::size_t g = 0; g < x1.size(); ++g) {
        x1[g] += 2.0 / (l1 + l2) * r[g];
    }
    xs.push_back(std::move(x1));
    double c_prev = 1.0;  // C_{k-1}
    double c_cur = t;     // C_k
    for (std::size_t k = 1; k < iters; ++k) {
        const double c_next = 2.0 * t * c_cur - c_prev;
        r = masked_residual(xs[k]);
        GlobalVector next = xs[k];
        for (std::size_t g = 0; g < next.size(); ++g) {
            next[g] += c_prev / c_next * (xs[k][g] - xs[k - 1][g]) + 4.0 / (l2 - l1) * c_cur / c_next * r[g];
        }
        xs.push_back(std::move(next));
        c_prev = c_cur;
        c_cur = c_next;
    }
    return xs;
}

}  // namespace elsolve::testing
