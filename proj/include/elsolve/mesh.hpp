#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

namespace elsolve {

using NodeId = std::size_t;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Vertex triple of a triangle, counterclockwise, right-angle vertex first
/// for structured meshes.
using Triangle = std::array<NodeId, 3>;

/// Conforming triangulation of the unit square.
///
/// Structured meshes of level L have (2^L + 1)^2 nodes numbered row-major
/// (y outer, x inner) and 2 * 4^L elements. Cell (i, j) is split along the
/// lower-left to upper-right diagonal into elements 2*(j*2^L + i) (lower,
/// below the diagonal) and 2*(j*2^L + i) + 1 (upper).
struct Mesh {
    std::vector<Point> nodes;
    std::vector<Triangle> elements;
    std::vector<NodeId> boundary_nodes;
    int level = 0;

    std::size_t n_nodes() const { return nodes.size(); }
    std::size_t n_elements() const { return elements.size(); }
    /// Nodes per side, 2^level + 1.
    std::size_t nodes_per_side() const { return (std::size_t{1} << level) + 1; }
};

inline constexpr int kMaxMeshLevel = 12;

Mesh build_unit_square_mesh(int level);

/// Splits every triangle into four congruent children through its edge
/// midpoints. The result is renumbered so that it matches
/// build_unit_square_mesh(level + 1) node for node and element for element.
Mesh uniform_refine(const Mesh& mesh);

/// Nodes with a coordinate within 1e-12 of 0 or 1, ascending.
std::vector<NodeId> boundary_nodes(const Mesh& mesh);

/// Signed area of element e (positive for counterclockwise vertices).
double signed_area(const Mesh& mesh, std::size_t e);

/// Element-to-node index arrays replacing the Boolean restriction and
/// connectivity matrices. Both hold the global node of local vertex j of
/// element e at position e * local_size + j; `gather` feeds the restriction
/// x_e = x[gather], `scatter` feeds the accumulation of local residuals.
struct IndexArrays {
    std::size_t local_size = 3;
    std::size_t n_elements = 0;
    std::vector<NodeId> gather;
    std::vector<NodeId> scatter;

    NodeId gather_at(std::size_t j, std::size_t e) const { return gather[e * local_size + j]; }
    NodeId scatter_at(std::size_t j, std::size_t e) const { return scatter[e * local_size + j]; }
};

IndexArrays build_index_arrays(const Mesh& mesh);

/// Writes `nodes.txt` (x y per line) and `elements.txt` (three 0-based
/// indices per line) into `dir`.
void write_mesh_text(const Mesh& mesh, const std::filesystem::path& dir);

}  // namespace elsolve
