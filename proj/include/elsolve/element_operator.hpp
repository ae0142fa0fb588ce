#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "elsolve/elements.hpp"
#include "elsolve/mesh.hpp"

namespace elsolve {

using GlobalVector = std::vector<double>;

/// Constrained nodes and their prescribed values. `nodes` is sorted and
/// duplicate free.
struct DirichletData {
    std::vector<NodeId> nodes;
    std::vector<double> values;

    bool empty() const { return nodes.empty(); }
};

/// Validates and sorts; every node must lie on the mesh boundary.
DirichletData make_dirichlet(const Mesh& mesh, std::vector<NodeId> nodes, std::vector<double> values);

/// u = g(x, y) on every boundary node of `mesh`.
DirichletData dirichlet_on_boundary(const Mesh& mesh, const SourceFunction& g);

/// Dirichlet data without mesh geometry, e.g. for hand-built batches. Only
/// range, sortedness and duplicates are checked.
DirichletData make_dirichlet(std::size_t n_nodes, std::vector<NodeId> nodes, std::vector<double> values);

struct ExecutionPolicy {
    int threads = 1;
    /// Deterministic accumulation is bitwise reproducible for any thread
    /// count. The fast path uses atomic adds and is reproducible only to
    /// rounding.
    bool deterministic = true;
};

/// Scratch space for one residual evaluation.
struct Workspace {
    std::vector<double> local;
};

/// Matrix-free operator A = sum_e C_e^T A_e C_e over an element batch. The
/// global matrix is never formed; every application restricts x to the
/// elements, multiplies by the local matrices and accumulates back.
///
/// Holds a reference to the batch, which must outlive the operator. All
/// member functions are const and safe to call concurrently when each caller
/// passes its own Workspace.
class ElementOperator {
public:
    explicit ElementOperator(const ElementBatch& batch, ExecutionPolicy policy = {});

    const ElementBatch& batch() const { return *batch_; }
    const ExecutionPolicy& policy() const { return policy_; }
    std::size_t size() const { return batch_->n_nodes; }

    /// r = sum_e C_e^T (b_e - A_e x_e). Throws EvaluationError on non-finite x.
    GlobalVector residual(std::span<const double> x) const;

    /// Assembled load vector b = sum_e C_e^T b_e.
    GlobalVector assemble_rhs() const;

    /// y = A x.
    GlobalVector apply(std::span<const double> x) const;

    /// Unchecked variants writing into `out`; used by the solvers.
    void residual_into(std::span<const double> x, std::span<double> out, Workspace& ws) const;
    void apply_into(std::span<const double> x, std::span<double> out, Workspace& ws) const;

private:
    enum class LocalKind { Residual, Product, Load };
    void local_pass(LocalKind kind, std::span<const double> x, std::vector<double>& local) const;
    void accumulate(const std::vector<double>& local, std::span<double> out) const;

    const ElementBatch* batch_;
    ExecutionPolicy policy_;
    // Node-to-local-entry incidence in CSR form, entries ascending, so that
    // each node sums its contributions in element order.
    std::vector<std::size_t> incidence_offsets_;
    std::vector<std::size_t> incidence_;
};

/// b = sum_e C_e^T b_e for local vectors scattered through `scatter`.
GlobalVector assemble_rhs(const LocalVectors& loads, std::span<const NodeId> scatter, std::size_t n_nodes);

/// r with r[g] = 0 for every constrained g.
GlobalVector mask_dirichlet(GlobalVector r, const DirichletData& d);
void mask_dirichlet_inplace(std::span<double> r, const DirichletData& d);

/// Conforming initial guess: prescribed values on constrained nodes, zero elsewhere.
GlobalVector apply_initial_guess(std::size_t n_nodes, const DirichletData& d);
GlobalVector apply_initial_guess(const Mesh& mesh, const DirichletData& d);

double norm2(std::span<const double> v);

}  // namespace elsolve
