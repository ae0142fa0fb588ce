#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "elsolve/mesh.hpp"

namespace elsolve {

/// Batch of local matrices, slice-contiguous: entry (i, j) of element e
/// lives at e * n_b * n_b + i * n_b + j.
struct LocalMatrices {
    std::size_t local_size = 3;
    std::size_t n_elements = 0;
    std::vector<double> values;

    double operator()(std::size_t i, std::size_t j, std::size_t e) const {
        return values[(e * local_size + i) * local_size + j];
    }
    double& operator()(std::size_t i, std::size_t j, std::size_t e) {
        return values[(e * local_size + i) * local_size + j];
    }
    std::span<const double> slice(std::size_t e) const {
        return {values.data() + e * local_size * local_size, local_size * local_size};
    }
};

/// Batch of local vectors; entry j of element e lives at e * n_b + j.
struct LocalVectors {
    std::size_t local_size = 3;
    std::size_t n_elements = 0;
    std::vector<double> values;

    double operator()(std::size_t j, std::size_t e) const { return values[e * local_size + j]; }
    double& operator()(std::size_t j, std::size_t e) { return values[e * local_size + j]; }
};

using SourceFunction = std::function<double(double x, double y)>;

inline constexpr double kDegenerateArea = 1e-14;

/// area(e) * G^T G with G the constant P1 gradients. Exact.
LocalMatrices local_stiffness_batch(const Mesh& mesh);

/// (area(e) / 12) * [[2,1,1],[1,2,1],[1,1,2]]. Exact.
LocalMatrices local_mass_batch(const Mesh& mesh);

/// Centroid rule: b_e[j] = f(centroid) * area / 3.
LocalVectors local_load_batch(const Mesh& mesh, const SourceFunction& f);

/// A_e = K_e + nu * M_e.
LocalMatrices combine_system(const LocalMatrices& stiffness, const LocalMatrices& mass, double nu);

/// Everything the matrix-free operator needs: combined local matrices, local
/// loads and the index arrays of the underlying mesh. The stiffness and mass
/// batches are kept for spectral estimates and the sparse oracle.
///
/// The local size is not tied to triangles; hand-built batches with other
/// sizes (e.g. 1x1 "elements" forming a diagonal system) are valid.
struct ElementBatch {
    std::size_t n_nodes = 0;
    double nu = 0.0;
    LocalMatrices stiffness;
    LocalMatrices mass;
    LocalMatrices system;
    LocalVectors loads;
    IndexArrays index;

    std::size_t local_size() const { return system.local_size; }
    std::size_t n_elements() const { return system.n_elements; }
};

/// Builds K_e, M_e, A_e and b_e for `mesh` in one pass.
ElementBatch build_element_batch(const Mesh& mesh, double nu, const SourceFunction& f);

/// Batch from raw local data (stiffness and mass left empty). Validates
/// shapes and indices.
ElementBatch make_element_batch(std::size_t n_nodes, LocalMatrices system, LocalVectors loads,
                                IndexArrays index);

}  // namespace elsolve
