#include "elsolve/element_operator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

#include "elsolve/errors.hpp"
#include "parallel.hpp"

namespace elsolve {

namespace {

void check_finite(std::span<const double> x) {
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!std::isfinite(x[k])) {
            throw EvaluationError("non-finite entry at index " + std::to_string(k));
        }
    }
}

void check_sorted_unique(const std::vector<NodeId>& nodes) {
    for (std::size_t k = 1; k < nodes.size(); ++k) {
        if (nodes[k] == nodes[k - 1]) {
            throw ParameterError("duplicate Dirichlet node " + std::to_string(nodes[k]));
        }
    }
}

// Sorts nodes ascending, carrying values along.
void sort_pairs(std::vector<NodeId>& nodes, std::vector<double>& values) {
    if (nodes.size() != values.size()) {
        throw ShapeError("Dirichlet nodes and values differ in length");
    }
    std::vector<std::size_t> order(nodes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });
    std::vector<NodeId> n2;
    std::vector<double> v2;
    n2.reserve(nodes.size());
    v2.reserve(nodes.size());
    for (std::size_t k : order) {
        n2.push_back(nodes[k]);
        v2.push_back(values[k]);
    }
    nodes = std::move(n2);
    values = std::move(v2);
}

}  // namespace

DirichletData make_dirichlet(std::size_t n_nodes, std::vector<NodeId> nodes, std::vector<double> values) {
    sort_pairs(nodes, values);
    check_sorted_unique(nodes);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (nodes[k] >= n_nodes) {
            throw IndexError("Dirichlet node " + std::to_string(nodes[k]) + " out of range");
        }
        if (!std::isfinite(values[k])) {
            throw EvaluationError("non-finite Dirichlet value at node " + std::to_string(nodes[k]));
        }
    }
    return {std::move(nodes), std::move(values)};
}

DirichletData make_dirichlet(const Mesh& mesh, std::vector<NodeId> nodes, std::vector<double> values) {
    DirichletData d = make_dirichlet(mesh.n_nodes(), std::move(nodes), std::move(values));
    const auto& bnd = mesh.boundary_nodes;
    for (NodeId g : d.nodes) {
        if (!std::binary_search(bnd.begin(), bnd.end(), g)) {
            throw ParameterError("Dirichlet node " + std::to_string(g) + " is not on the boundary");
        }
    }
    return d;
}

DirichletData dirichlet_on_boundary(const Mesh& mesh, const SourceFunction& g) {
    std::vector<double> values;
    values.reserve(mesh.boundary_nodes.size());
    for (NodeId k : mesh.boundary_nodes) {
        values.push_back(g(mesh.nodes[k].x, mesh.nodes[k].y));
    }
    return make_dirichlet(mesh, mesh.boundary_nodes, std::move(values));
}

ElementOperator::ElementOperator(const ElementBatch& batch, ExecutionPolicy policy)
    : batch_(&batch), policy_(policy) {
    if (policy_.threads < 1) {
        throw ParameterError("thread count must be at least 1");
    }
    const auto& scatter = batch.index.scatter;
    const std::size_t n = batch.n_nodes;
    if (scatter.size() != batch.local_size() * batch.n_elements() ||
        batch.index.gather.size() != scatter.size() ||
        batch.system.values.size() != scatter.size() * batch.local_size() ||
        batch.loads.values.size() != scatter.size()) {
        throw ShapeError("element batch has inconsistent shapes");
    }
    incidence_offsets_.assign(n + 1, 0);
    for (std::size_t k = 0; k < scatter.size(); ++k) {
        if (scatter[k] >= n || batch.index.gather[k] >= n) {
            throw IndexError("index array entry " + std::to_string(k) + " out of range");
        }
        ++incidence_offsets_[scatter[k] + 1];
    }
    std::partial_sum(incidence_offsets_.begin(), incidence_offsets_.end(), incidence_offsets_.begin());
    incidence_.resize(scatter.size());
    std::vector<std::size_t> cursor(incidence_offsets_.begin(), incidence_offsets_.end() - 1);
    for (std::size_t k = 0; k < scatter.size(); ++k) {
        incidence_[cursor[scatter[k]]++] = k;
    }
}

void ElementOperator::local_pass(LocalKind kind, std::span<const double> x, std::vector<double>& local) const {
    const ElementBatch& b = *batch_;
    const std::size_t nb = b.local_size();
    local.resize(nb * b.n_elements());
    const double* a = b.system.values.data();
    const double* loads = b.loads.values.data();
    const NodeId* gather = b.index.gather.data();
    detail::parallel_for(b.n_elements(), policy_.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t e = begin; e < end; ++e) {
            const double* ae = a + e * nb * nb;
            const NodeId* ge = gather + e * nb;
            for (std::size_t i = 0; i < nb; ++i) {
                double s = 0.0;
                if (kind != LocalKind::Load) {
                    for (std::size_t j = 0; j < nb; ++j) {
                        s += ae[i * nb + j] * x[ge[j]];
                    }
                }
                switch (kind) {
                    case LocalKind::Residual: local[e * nb + i] = loads[e * nb + i] - s; break;
                    case LocalKind::Product: local[e * nb + i] = s; break;
                    case LocalKind::Load: local[e * nb + i] = loads[e * nb + i]; break;
                }
            }
        }
    });
}

void ElementOperator::accumulate(const std::vector<double>& local, std::span<double> out) const {
    if (policy_.deterministic) {
        detail::parallel_for(out.size(), policy_.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t g = begin; g < end; ++g) {
                double s = 0.0;
                for (std::size_t k = incidence_offsets_[g]; k < incidence_offsets_[g + 1]; ++k) {
                    s += local[incidence_[k]];
                }
                out[g] = s;
            }
        });
        return;
    }
    std::fill(out.begin(), out.end(), 0.0);
    const auto& scatter = batch_->index.scatter;
    detail::parallel_for(local.size(), policy_.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            std::atomic_ref<double>(out[scatter[k]]).fetch_add(local[k], std::memory_order_relaxed);
        }
    });
}

void ElementOperator::residual_into(std::span<const double> x, std::span<double> out, Workspace& ws) const {
    local_pass(LocalKind::Residual, x, ws.local);
    accumulate(ws.local, out);
}

void ElementOperator::apply_into(std::span<const double> x, std::span<double> out, Workspace& ws) const {
    local_pass(LocalKind::Product, x, ws.local);
    accumulate(ws.local, out);
}

GlobalVector ElementOperator::residual(std::span<const double> x) const {
    if (x.size() != size()) {
        throw ShapeError("vector length " + std::to_string(x.size()) + " does not match " +
                         std::to_string(size()) + " nodes");
    }
    check_finite(x);
    GlobalVector r(size());
    Workspace ws;
    residual_into(x, r, ws);
    return r;
}

GlobalVector ElementOperator::apply(std::span<const double> x) const {
    if (x.size() != size()) {
        throw ShapeError("vector length " + std::to_string(x.size()) + " does not match " +
                         std::to_string(size()) + " nodes");
    }
    check_finite(x);
    GlobalVector y(size());
    Workspace ws;
    apply_into(x, y, ws);
    return y;
}

GlobalVector ElementOperator::assemble_rhs() const {
    GlobalVector b(size());
    std::vector<double> local;
    local_pass(LocalKind::Load, {}, local);
    accumulate(local, b);
    return b;
}

GlobalVector assemble_rhs(const LocalVectors& loads, std::span<const NodeId> scatter, std::size_t n_nodes) {
    if (scatter.size() != loads.values.size()) {
        throw ShapeError("load batch and scatter indices differ in size");
    }
    GlobalVector b(n_nodes, 0.0);
    for (std::size_t k = 0; k < scatter.size(); ++k) {
        if (scatter[k] >= n_nodes) {
            throw IndexError("scatter index " + std::to_string(scatter[k]) + " out of range");
        }
        b[scatter[k]] += loads.values[k];
    }
    return b;
}

void mask_dirichlet_inplace(std::span<double> r, const DirichletData& d) {
    for (NodeId g : d.nodes) {
        r[g] = 0.0;
    }
}

GlobalVector mask_dirichlet(GlobalVector r, const DirichletData& d) {
    mask_dirichlet_inplace(r, d);
    return r;
}

GlobalVector apply_initial_guess(std::size_t n_nodes, const DirichletData& d) {
    GlobalVector x(n_nodes, 0.0);
    for (std::size_t k = 0; k < d.nodes.size(); ++k) {
        x[d.nodes[k]] = d.values[k];
    }
    return x;
}

GlobalVector apply_initial_guess(const Mesh& mesh, const DirichletData& d) {
    return apply_initial_guess(mesh.n_nodes(), d);
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double a : v) {
        s += a * a;
    }
    return std::sqrt(s);
}

}  // namespace elsolve
