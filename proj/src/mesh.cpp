#include "elsolve/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>

#include "elsolve/errors.hpp"

namespace elsolve {

namespace {

constexpr double kBoundaryTol = 1e-12;

void check_level(int level) {
    if (level < 0) {
        throw ParameterError("mesh level must be nonnegative, got " + std::to_string(level));
    }
    if (level > kMaxMeshLevel) {
        throw SizeError("mesh level " + std::to_string(level) + " exceeds the maximum of " +
                        std::to_string(kMaxMeshLevel));
    }
}

// Lower triangle of cell (i, j): (i+1,j), (i+1,j+1), (i,j).
// Upper triangle: (i,j+1), (i,j), (i+1,j+1).
Triangle cell_triangle(std::size_t i, std::size_t j, std::size_t side, bool upper) {
    auto id = [side](std::size_t ix, std::size_t iy) { return iy * side + ix; };
    if (!upper) {
        return {id(i + 1, j), id(i + 1, j + 1), id(i, j)};
    }
    return {id(i, j + 1), id(i, j), id(i + 1, j + 1)};
}

}  // namespace

Mesh build_unit_square_mesh(int level) {
    check_level(level);
    Mesh mesh;
    mesh.level = level;
    const std::size_t cells = std::size_t{1} << level;
    const std::size_t side = cells + 1;
    const double h = 1.0 / static_cast<double>(cells);

    mesh.nodes.reserve(side * side);
    for (std::size_t iy = 0; iy < side; ++iy) {
        for (std::size_t ix = 0; ix < side; ++ix) {
            // exact endpoints so boundary classification never depends on rounding
            const double x = ix == cells ? 1.0 : static_cast<double>(ix) * h;
            const double y = iy == cells ? 1.0 : static_cast<double>(iy) * h;
            mesh.nodes.push_back({x, y});
        }
    }

    mesh.elements.reserve(2 * cells * cells);
    for (std::size_t j = 0; j < cells; ++j) {
        for (std::size_t i = 0; i < cells; ++i) {
            mesh.elements.push_back(cell_triangle(i, j, side, false));
            mesh.elements.push_back(cell_triangle(i, j, side, true));
        }
    }
    mesh.boundary_nodes = boundary_nodes(mesh);
    return mesh;
}

Mesh uniform_refine(const Mesh& mesh) {
    check_level(mesh.level + 1);

    // Midpoint insertion.
    std::vector<Point> nodes = mesh.nodes;
    std::unordered_map<std::uint64_t, NodeId> midpoint_of;
    auto midpoint = [&](NodeId a, NodeId b) {
        const auto lo = std::min(a, b);
        const auto hi = std::max(a, b);
        const std::uint64_t key = (static_cast<std::uint64_t>(lo) << 32) | hi;
        auto [it, inserted] = midpoint_of.try_emplace(key, nodes.size());
        if (inserted) {
            nodes.push_back({0.5 * (mesh.nodes[a].x + mesh.nodes[b].x),
                             0.5 * (mesh.nodes[a].y + mesh.nodes[b].y)});
        }
        return it->second;
    };

    std::vector<Triangle> children;
    children.reserve(4 * mesh.n_elements());
    for (const auto& [a, b, c] : mesh.elements) {
        const NodeId ab = midpoint(a, b);
        const NodeId bc = midpoint(b, c);
        const NodeId ca = midpoint(c, a);
        children.push_back({a, ab, ca});
        children.push_back({ab, b, bc});
        children.push_back({ca, bc, c});
        children.push_back({ab, bc, ca});
    }

    // Renumber onto the lattice of the next level.
    Mesh refined;
    refined.level = mesh.level + 1;
    const std::size_t cells = std::size_t{1} << refined.level;
    const std::size_t side = cells + 1;
    const double scale = static_cast<double>(cells);

    struct LatticePos {
        std::size_t ix;
        std::size_t iy;
    };
    std::vector<LatticePos> lattice(nodes.size());
    std::vector<NodeId> new_id(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double fx = nodes[k].x * scale;
        const double fy = nodes[k].y * scale;
        const double rx = std::round(fx);
        const double ry = std::round(fy);
        if (std::abs(fx - rx) > 1e-9 || std::abs(fy - ry) > 1e-9 || rx < 0 || ry < 0 || rx > scale ||
            ry > scale) {
            throw GeometryError("uniform_refine requires a structured unit-square mesh");
        }
        lattice[k] = {static_cast<std::size_t>(rx), static_cast<std::size_t>(ry)};
        new_id[k] = lattice[k].iy * side + lattice[k].ix;
    }

    refined.nodes.resize(side * side);
    for (std::size_t iy = 0; iy < side; ++iy) {
        for (std::size_t ix = 0; ix < side; ++ix) {
            refined.nodes[iy * side + ix] = {ix == cells ? 1.0 : static_cast<double>(ix) / scale,
                                             iy == cells ? 1.0 : static_cast<double>(iy) / scale};
        }
    }

    refined.elements.assign(2 * cells * cells, Triangle{});
    std::vector<bool> filled(refined.elements.size(), false);
    for (const auto& child : children) {
        std::size_t i = cells;
        std::size_t j = cells;
        for (NodeId v : child) {
            i = std::min(i, lattice[v].ix);
            j = std::min(j, lattice[v].iy);
        }
        bool has_lower_right = false;
        for (NodeId v : child) {
            has_lower_right |= lattice[v].ix == i + 1 && lattice[v].iy == j;
        }
        const bool upper = !has_lower_right;
        const Triangle expected = cell_triangle(i, j, side, upper);
        Triangle mapped{new_id[child[0]], new_id[child[1]], new_id[child[2]]};
        std::sort(mapped.begin(), mapped.end());
        Triangle sorted_expected = expected;
        std::sort(sorted_expected.begin(), sorted_expected.end());
        const std::size_t e = 2 * (j * cells + i) + (upper ? 1 : 0);
        if (i >= cells || j >= cells || mapped != sorted_expected || filled[e]) {
            throw GeometryError("uniform_refine requires a structured unit-square mesh");
        }
        refined.elements[e] = expected;
        filled[e] = true;
    }
    refined.boundary_nodes = boundary_nodes(refined);
    return refined;
}

std::vector<NodeId> boundary_nodes(const Mesh& mesh) {
    std::vector<NodeId> out;
    for (NodeId k = 0; k < mesh.nodes.size(); ++k) {
        const auto [x, y] = mesh.nodes[k];
        const bool on_boundary = std::abs(x) <= kBoundaryTol || std::abs(x - 1.0) <= kBoundaryTol ||
                                 std::abs(y) <= kBoundaryTol || std::abs(y - 1.0) <= kBoundaryTol;
        if (on_boundary) {
            out.push_back(k);
        }
    }
    return out;
}

double signed_area(const Mesh& mesh, std::size_t e) {
    const auto& [a, b, c] = mesh.elements[e];
    const Point& p = mesh.nodes[a];
    const Point& q = mesh.nodes[b];
    const Point& r = mesh.nodes[c];
    return 0.5 * ((q.x - p.x) * (r.y - p.y) - (r.x - p.x) * (q.y - p.y));
}

IndexArrays build_index_arrays(const Mesh& mesh) {
    IndexArrays idx;
    idx.local_size = 3;
    idx.n_elements = mesh.n_elements();
    idx.gather.reserve(3 * idx.n_elements);
    for (const auto& tri : mesh.elements) {
        for (NodeId v : tri) {
            if (v >= mesh.n_nodes()) {
                throw IndexError("element references node " + std::to_string(v) + " of " +
                                 std::to_string(mesh.n_nodes()));
            }
            idx.gather.push_back(v);
        }
    }
    idx.scatter = idx.gather;
    return idx;
}

void write_mesh_text(const Mesh& mesh, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream nodes(dir / "nodes.txt");
    nodes.precision(17);
    for (const auto& p : mesh.nodes) {
        nodes << p.x << ' ' << p.y << '\n';
    }
    std::ofstream elements(dir / "elements.txt");
    for (const auto& [a, b, c] : mesh.elements) {
        elements << a << ' ' << b << ' ' << c << '\n';
    }
    if (!nodes || !elements) {
        throw Error("failed to write mesh files to " + dir.string());
    }
}

}  // namespace elsolve
