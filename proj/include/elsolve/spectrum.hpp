#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "elsolve/element_operator.hpp"
#include "elsolve/solvers.hpp"

namespace elsolve {

/// Extreme eigenvalues of the P1 stiffness matrix on the interior nodes of
/// the structured n x n unit-square mesh:
/// lambda(i, j) = 4 (sin^2(i pi / (2(n-1))) + sin^2(j pi / (2(n-1)))),
/// i, j = 1..n-2. Requires n >= 3.
SpectralBounds model_eigen_bounds(std::size_t n);

/// All (n-2)^2 eigenvalues of the formula above, ascending.
std::vector<double> model_eigenvalues_all(std::size_t n);

struct PowerIterationOptions {
    std::size_t max_iterations = 1000;
    double tolerance = 1e-10;
    std::uint64_t seed = 0;
};

/// Rayleigh-quotient estimate of the largest eigenvalue of the operator
/// restricted to the free nodes. Underestimates; callers add their own
/// margin.
double power_iteration_lambda_max(const ElementOperator& op, const DirichletData& d,
                                  const PowerIterationOptions& options = {});

/// Same, starting from a caller-supplied vector (masked before use).
double power_iteration_lambda_max(const ElementOperator& op, const DirichletData& d,
                                  std::vector<double> start, const PowerIterationOptions& options = {});

/// Interval [m_min, m_max] enclosing the spectrum of the assembled mass
/// matrix restricted to the free nodes. m_max is the Gershgorin bound; m_min
/// uses M_e >= (area/12) I per element, giving
/// min over free nodes of (incident area) / 12.
SpectralBounds mass_spectrum_bounds(const ElementBatch& batch, const DirichletData& d);

/// Enclosing interval for K + nu M on the structured n x n mesh: model
/// stiffness bounds shifted by nu * [m_min, m_max].
SpectralBounds model_bounds_with_mass(std::size_t n, const ElementBatch& batch, const DirichletData& d);

}  // namespace elsolve
