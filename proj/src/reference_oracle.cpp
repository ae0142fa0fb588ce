#include "elsolve/oracle/reference_oracle.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "elsolve/errors.hpp"

namespace elsolve::oracle {

namespace {

using Triplet = std::tuple<std::size_t, std::size_t, double>;

std::vector<long> free_numbering(std::size_t n, const DirichletData& d, std::size_t& n_free) {
    std::vector<long> map(n, 0);
    for (NodeId g : d.nodes) {
        map[g] = -1;
    }
    n_free = 0;
    for (auto& m : map) {
        if (m == 0) {
            m = static_cast<long>(n_free++);
        }
    }
    return map;
}

}  // namespace

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::VectorXd y = data * xv;
    return {y.data(), y.data() + y.size()};
}

SparseMatrix assemble_sparse(const LocalMatrices& slices, std::span<const NodeId> scatter, std::size_t n_nodes) {
    const std::size_t nb = slices.local_size;
    if (scatter.size() != nb * slices.n_elements || slices.values.size() != nb * nb * slices.n_elements) {
        throw ShapeError("local matrices and scatter indices have inconsistent shapes");
    }
    std::vector<Triplet> triplets;
    triplets.reserve(slices.values.size());
    for (std::size_t e = 0; e < slices.n_elements; ++e) {
        for (std::size_t i = 0; i < nb; ++i) {
            for (std::size_t j = 0; j < nb; ++j) {
                const NodeId row = scatter[e * nb + i];
                const NodeId col = scatter[e * nb + j];
                if (row >= n_nodes || col >= n_nodes) {
                    throw IndexError("scatter index out of range");
                }
                triplets.emplace_back(row, col, slices(i, j, e));
            }
        }
    }
    std::sort(triplets.begin(), triplets.end());

    std::vector<Eigen::Triplet<double>> consolidated;
    for (std::size_t k = 0; k < triplets.size();) {
        const auto [row, col, first] = triplets[k];
        double sum = first;
        std::size_t m = k + 1;
        for (; m < triplets.size() && std::get<0>(triplets[m]) == row && std::get<1>(triplets[m]) == col; ++m) {
            sum += std::get<2>(triplets[m]);
        }
        consolidated.emplace_back(static_cast<int>(row), static_cast<int>(col), sum);
        k = m;
    }
    SparseMatrix out;
    out.n = n_nodes;
    out.data.resize(static_cast<Eigen::Index>(n_nodes), static_cast<Eigen::Index>(n_nodes));
    out.data.setFromTriplets(consolidated.begin(), consolidated.end());
    return out;
}

std::vector<double> assemble_vector(const LocalVectors& loads, std::span<const NodeId> scatter,
                                    std::size_t n_nodes) {
    if (scatter.size() != loads.values.size()) {
        throw ShapeError("loads and scatter indices differ in size");
    }
    std::vector<double> b(n_nodes, 0.0);
    for (std::size_t k = 0; k < scatter.size(); ++k) {
        if (scatter[k] >= n_nodes) {
            throw IndexError("scatter index out of range");
        }
        b[scatter[k]] += loads.values[k];
    }
    return b;
}

std::vector<double> residual(const SparseMatrix& a, std::span<const double> b, std::span<const double> x) {
    std::vector<double> ax = a.multiply(x);
    for (std::size_t g = 0; g < ax.size(); ++g) {
        ax[g] = b[g] - ax[g];
    }
    return ax;
}

std::vector<double> solve_reference(const SparseMatrix& a, std::span<const double> b, const DirichletData& d) {
    const std::size_t n = a.n;
    if (b.size() != n) {
        throw ShapeError("right-hand side has the wrong length");
    }
    std::size_t n_free = 0;
    const std::vector<long> map = free_numbering(n, d, n_free);
    std::vector<double> u(n, 0.0);
    for (std::size_t k = 0; k < d.nodes.size(); ++k) {
        u[d.nodes[k]] = d.values[k];
    }
    if (n_free == 0) {
        return u;
    }

    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n_free));
    std::vector<Eigen::Triplet<double>> reduced;
    for (std::size_t row = 0; row < n; ++row) {
        if (map[row] < 0) {
            continue;
        }
        double r = b[row];
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a.data, static_cast<Eigen::Index>(row));
             it; ++it) {
            const auto col = static_cast<std::size_t>(it.col());
            if (map[col] < 0) {
                r -= it.value() * u[col];
            } else {
                reduced.emplace_back(static_cast<int>(map[row]), static_cast<int>(map[col]), it.value());
            }
        }
        rhs[map[row]] = r;
    }
    Eigen::SparseMatrix<double> a_ff(static_cast<Eigen::Index>(n_free), static_cast<Eigen::Index>(n_free));
    a_ff.setFromTriplets(reduced.begin(), reduced.end());

    Eigen::VectorXd sol;
    if (n_free <= kDirectLimit) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a_ff);
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-12 * ldlt.vectorD().maxCoeff())) {
            throw FactorizationError("reduced system is not symmetric positive definite");
        }
        sol = ldlt.solve(rhs);
    } else {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(a_ff);
        cg.setTolerance(1e-13);
        cg.setMaxIterations(static_cast<Eigen::Index>(10 * n_free));
        sol = cg.solve(rhs);
        if (cg.info() != Eigen::Success) {
            throw FactorizationError("conjugate gradients did not reach the reference tolerance");
        }
    }
    for (std::size_t g = 0; g < n; ++g) {
        if (map[g] >= 0) {
            u[g] = sol[map[g]];
        }
    }
    return u;
}

std::vector<double> dense_interior_eigenvalues(const SparseMatrix& a, const DirichletData& d) {
    std::size_t n_free = 0;
    const std::vector<long> map = free_numbering(a.n, d, n_free);
    if (n_free > kDenseLimit) {
        throw SizeError("dense eigensolver limited to " + std::to_string(kDenseLimit) + " free nodes, got " +
                        std::to_string(n_free));
    }
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_free), static_cast<Eigen::Index>(n_free));
    for (Eigen::Index row = 0; row < a.data.outerSize(); ++row) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a.data, row); it; ++it) {
            const long r = map[static_cast<std::size_t>(row)];
            const long c = map[static_cast<std::size_t>(it.col())];
            if (r >= 0 && c >= 0) {
                dense(r, c) = it.value();
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw FactorizationError("dense eigensolver failed");
    }
    const Eigen::VectorXd& ev = solver.eigenvalues();
    std::vector<double> out(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace elsolve::oracle
