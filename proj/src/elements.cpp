#include "elsolve/elements.hpp"

#include <cmath>
#include <string>

#include "elsolve/errors.hpp"

namespace elsolve {

namespace {

double checked_area(const Mesh& mesh, std::size_t e) {
    const double area = signed_area(mesh, e);
    if (!(area > kDegenerateArea)) {
        throw GeometryError("element " + std::to_string(e) + " is degenerate or inverted (area " +
                            std::to_string(area) + ")");
    }
    return area;
}

LocalMatrices empty_matrices(std::size_t n_elements) {
    LocalMatrices out;
    out.local_size = 3;
    out.n_elements = n_elements;
    out.values.assign(9 * n_elements, 0.0);
    return out;
}

}  // namespace

LocalMatrices local_stiffness_batch(const Mesh& mesh) {
    LocalMatrices k = empty_matrices(mesh.n_elements());
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const double area = checked_area(mesh, e);
        const auto& tri = mesh.elements[e];
        // grad(phi_i) = (y_{i+1} - y_{i+2}, x_{i+2} - x_{i+1}) / (2 area)
        double gx[3];
        double gy[3];
        for (std::size_t i = 0; i < 3; ++i) {
            const Point& p1 = mesh.nodes[tri[(i + 1) % 3]];
            const Point& p2 = mesh.nodes[tri[(i + 2) % 3]];
            gx[i] = (p1.y - p2.y) / (2.0 * area);
            gy[i] = (p2.x - p1.x) / (2.0 * area);
        }
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                k(i, j, e) = area * (gx[i] * gx[j] + gy[i] * gy[j]);
            }
        }
    }
    return k;
}

LocalMatrices local_mass_batch(const Mesh& mesh) {
    LocalMatrices m = empty_matrices(mesh.n_elements());
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const double a12 = checked_area(mesh, e) / 12.0;
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                m(i, j, e) = (i == j ? 2.0 : 1.0) * a12;
            }
        }
    }
    return m;
}

LocalVectors local_load_batch(const Mesh& mesh, const SourceFunction& f) {
    LocalVectors b;
    b.local_size = 3;
    b.n_elements = mesh.n_elements();
    b.values.assign(3 * b.n_elements, 0.0);
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
        const double area = checked_area(mesh, e);
        const auto& [i0, i1, i2] = mesh.elements[e];
        const double cx = (mesh.nodes[i0].x + mesh.nodes[i1].x + mesh.nodes[i2].x) / 3.0;
        const double cy = (mesh.nodes[i0].y + mesh.nodes[i1].y + mesh.nodes[i2].y) / 3.0;
        const double fc = f(cx, cy);
        if (!std::isfinite(fc)) {
            throw EvaluationError("source function is not finite at centroid of element " +
                                  std::to_string(e));
        }
        const double share = fc * area / 3.0;
        for (std::size_t j = 0; j < 3; ++j) {
            b(j, e) = share;
        }
    }
    return b;
}

LocalMatrices combine_system(const LocalMatrices& stiffness, const LocalMatrices& mass, double nu) {
    if (stiffness.local_size != mass.local_size || stiffness.n_elements != mass.n_elements ||
        stiffness.values.size() != mass.values.size()) {
        throw ShapeError("stiffness and mass batches have different shapes");
    }
    if (!(nu >= 0.0) || !std::isfinite(nu)) {
        throw ParameterError("nu must be a finite nonnegative number");
    }
    LocalMatrices a = stiffness;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        a.values[k] += nu * mass.values[k];
    }
    return a;
}

ElementBatch build_element_batch(const Mesh& mesh, double nu, const SourceFunction& f) {
    ElementBatch batch;
    batch.n_nodes = mesh.n_nodes();
    batch.nu = nu;
    batch.stiffness = local_stiffness_batch(mesh);
    batch.mass = local_mass_batch(mesh);
    batch.system = combine_system(batch.stiffness, batch.mass, nu);
    batch.loads = local_load_batch(mesh, f);
    batch.index = build_index_arrays(mesh);
    return batch;
}

ElementBatch make_element_batch(std::size_t n_nodes, LocalMatrices system, LocalVectors loads,
                                IndexArrays index) {
    const std::size_t nb = system.local_size;
    const std::size_t ne = system.n_elements;
    if (system.values.size() != nb * nb * ne || loads.local_size != nb || loads.n_elements != ne ||
        loads.values.size() != nb * ne || index.local_size != nb || index.n_elements != ne ||
        index.gather.size() != nb * ne || index.scatter.size() != nb * ne) {
        throw ShapeError("local matrices, loads and index arrays have inconsistent shapes");
    }
    for (std::size_t k = 0; k < nb * ne; ++k) {
        if (index.gather[k] >= n_nodes || index.scatter[k] >= n_nodes) {
            throw IndexError("index array entry out of range for " + std::to_string(n_nodes) +
                             " nodes");
        }
    }
    ElementBatch batch;
    batch.n_nodes = n_nodes;
    batch.system = std::move(system);
    batch.loads = std::move(loads);
    batch.index = std::move(index);
    return batch;
}

}  // namespace elsolve
