#pragma once

// Ground truth built on assembled sparse matrices. Used by the tests and the
// benchmark harness only; the solvers never touch it.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "elsolve/element_operator.hpp"
#include "elsolve/elements.hpp"

namespace elsolve::oracle {

struct SparseMatrix {
    std::size_t n = 0;
    Eigen::SparseMatrix<double, Eigen::RowMajor> data;

    double at(std::size_t row, std::size_t col) const {
        return data.coeff(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }
    std::vector<double> multiply(std::span<const double> x) const;
};

/// sum_e C_e^T S_e C_e by triplet scatter. Duplicates are consolidated in
/// sorted (row, col, value) order, so the result does not depend on the
/// element order.
SparseMatrix assemble_sparse(const LocalMatrices& slices, std::span<const NodeId> scatter, std::size_t n_nodes);

std::vector<double> assemble_vector(const LocalVectors& loads, std::span<const NodeId> scatter,
                                    std::size_t n_nodes);

/// b - A x.
std::vector<double> residual(const SparseMatrix& a, std::span<const double> b, std::span<const double> x);

/// Solves A u = b with u fixed on the Dirichlet nodes. Constrained columns
/// move to the right-hand side; the reduced SPD system is factorized
/// (LDL^T) up to kDirectLimit unknowns, and solved by conjugate gradients to
/// relative residual 1e-13 above that.
std::vector<double> solve_reference(const SparseMatrix& a, std::span<const double> b, const DirichletData& d);

inline constexpr std::size_t kDirectLimit = 70000;
inline constexpr std::size_t kDenseLimit = 2000;

/// Ascending spectrum of the free-node principal submatrix.
std::vector<double> dense_interior_eigenvalues(const SparseMatrix& a, const DirichletData& d);

}  // namespace elsolve::oracle
