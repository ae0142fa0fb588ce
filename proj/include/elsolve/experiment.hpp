#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "elsolve/element_operator.hpp"
#include "elsolve/errors.hpp"
#include "elsolve/mesh.hpp"
#include "elsolve/solvers.hpp"

namespace elsolve {

/// Invalid experiment configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

enum class SolverKind { Richardson, Chebyshev2, Chebyshev3, Direct };

std::string to_string(SolverKind kind);
/// Parses richardson | cheb2 | cheb3 | direct | all.
std::vector<SolverKind> parse_solver_selection(const std::string& name);

/// Defaults reproduce the model experiment: nu = 0, f = 1, u = 1 on the
/// boundary, 33 x 33 nodes, 124 iterations, cycle length 32.
struct ExperimentConfig {
    int level = 5;
    double nu = 0.0;
    std::size_t iterations = 124;
    std::vector<SolverKind> solvers{SolverKind::Richardson, SolverKind::Chebyshev2, SolverKind::Chebyshev3};
    int cycle_length = 32;
    std::optional<double> tolerance;
    int threads = 1;
    bool deterministic = true;
    std::optional<std::filesystem::path> out_dir;
    bool export_vtk = false;
    bool export_mesh = false;
    bool compare_direct = false;
    SourceFunction source = [](double, double) { return 1.0; };
    SourceFunction boundary_value = [](double, double) { return 1.0; };
};

/// Throws ConfigError with a message naming the offending option.
void validate(const ExperimentConfig& config);

struct SolverRun {
    SolverKind kind = SolverKind::Richardson;
    GlobalVector x;
    ConvergenceHistory history;
    /// ||x_final - u|| / ||x0 - u|| when a direct reference was computed.
    std::optional<double> error_ratio;
};

struct ExperimentReport {
    Mesh mesh;
    SpectralBounds bounds;
    GlobalVector initial_guess;
    std::optional<GlobalVector> reference;
    std::vector<SolverRun> runs;
    double setup_seconds = 0.0;
    double reference_seconds = 0.0;

    bool any_diverged() const;
    const SolverRun* find(SolverKind kind) const;
};

/// Builds the mesh, element batch and Dirichlet data, picks spectral bounds
/// (model formula for nu = 0, model stiffness bounds plus mass bounds
/// tightened by power iteration for nu > 0), runs every requested solver
/// from the same conforming initial guess and writes outputs when
/// `out_dir` is set.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// CSV `k,residual_norm[,error_norm]`, 17 significant digits.
void export_history(const ConvergenceHistory& history, const std::filesystem::path& path);

/// CSV `x,y,u` per node, or legacy VTK ASCII when the path ends in `.vtk`.
void export_solution(const Mesh& mesh, std::span<const double> u, const std::filesystem::path& path);

/// Reads the u column of a solution CSV.
std::vector<double> read_solution_csv(const std::filesystem::path& path);

/// Human-readable summary, one line per solver.
std::string format_report(const ExperimentReport& report);

}  // namespace elsolve
