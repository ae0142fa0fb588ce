#include "elsolve/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "elsolve/elements.hpp"
#include "elsolve/oracle/reference_oracle.hpp"
#include "elsolve/spectrum.hpp"

namespace elsolve {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    return out;
}

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        s += (a[k] - b[k]) * (a[k] - b[k]);
    }
    return std::sqrt(s);
}

SpectralBounds choose_bounds(const Mesh& mesh, const ElementBatch& batch, const ElementOperator& op,
                             const DirichletData& d) {
    const std::size_t n = mesh.nodes_per_side();
    if (batch.nu == 0.0) {
        return model_eigen_bounds(n);
    }
    SpectralBounds safe = model_bounds_with_mass(n, batch, d);
    const double estimate = power_iteration_lambda_max(op, d);
    safe.lambda2 = std::min(safe.lambda2, 1.02 * estimate);
    return safe;
}

void write_summary_json(const ExperimentReport& report, const ExperimentConfig& config,
                        const std::filesystem::path& path) {
    nlohmann::json j;
    j["level"] = config.level;
    j["nodes"] = report.mesh.n_nodes();
    j["elements"] = report.mesh.n_elements();
    j["nu"] = config.nu;
    j["iterations"] = config.iterations;
    j["cycle_length"] = config.cycle_length;
    j["lambda1"] = report.bounds.lambda1;
    j["lambda2"] = report.bounds.lambda2;
    j["setup_seconds"] = report.setup_seconds;
    for (const auto& run : report.runs) {
        nlohmann::json s;
        s["solver"] = to_string(run.kind);
        s["iterations"] = run.history.iterations;
        s["diverged"] = run.history.diverged;
        s["wall_seconds"] = run.history.wall_seconds;
        if (!run.history.residual_norms.empty()) {
            s["initial_residual_norm"] = run.history.residual_norms.front();
            s["final_residual_norm"] = run.history.residual_norms.back();
        }
        if (run.error_ratio) {
            s["error_ratio"] = *run.error_ratio;
        }
        j["runs"].push_back(s);
    }
    open_out(path) << j.dump(2) << '\n';
}

}  // namespace

std::string to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::Richardson: return "richardson";
        case SolverKind::Chebyshev2: return "cheb2";
        case SolverKind::Chebyshev3: return "cheb3";
        case SolverKind::Direct: return "direct";
    }
    return "unknown";
}

std::vector<SolverKind> parse_solver_selection(const std::string& name) {
    if (name == "richardson") return {SolverKind::Richardson};
    if (name == "cheb2") return {SolverKind::Chebyshev2};
    if (name == "cheb3") return {SolverKind::Chebyshev3};
    if (name == "direct") return {SolverKind::Direct};
    if (name == "all") return {SolverKind::Richardson, SolverKind::Chebyshev2, SolverKind::Chebyshev3};
    throw ConfigError("--solver must be one of richardson, cheb2, cheb3, direct, all (got '" + name + "')");
}

void validate(const ExperimentConfig& config) {
    if (config.level < 1 || config.level > kMaxMeshLevel) {
        throw ConfigError("--level must be between 1 and " + std::to_string(kMaxMeshLevel) +
                          " (level 0 has no interior node)");
    }
    if (!std::isfinite(config.nu) || config.nu < 0.0) {
        throw ConfigError("--nu must be a finite nonnegative number");
    }
    if (config.cycle_length < 1) {
        throw ConfigError("--cycle-n must be at least 1");
    }
    if (config.tolerance && !(*config.tolerance > 0.0)) {
        throw ConfigError("--tol must be positive");
    }
    if (config.threads < 1) {
        throw ConfigError("--threads must be at least 1");
    }
    if (config.solvers.empty()) {
        throw ConfigError("no solver selected");
    }
    for (SolverKind kind : config.solvers) {
        if (kind == SolverKind::Chebyshev3 && config.level == 1 && config.nu == 0.0) {
            throw ConfigError("cheb3 needs lambda1 < lambda2; level 1 has a single interior node, use --level >= 2");
        }
    }
}

bool ExperimentReport::any_diverged() const {
    for (const auto& run : runs) {
        if (run.history.diverged) {
            return true;
        }
    }
    return false;
}

const SolverRun* ExperimentReport::find(SolverKind kind) const {
    for (const auto& run : runs) {
        if (run.kind == kind) {
            return &run;
        }
    }
    return nullptr;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    validate(config);
    ExperimentReport report;
    const auto t_setup = Clock::now();
    report.mesh = build_unit_square_mesh(config.level);
    const ElementBatch batch = build_element_batch(report.mesh, config.nu, config.source);
    const DirichletData d = dirichlet_on_boundary(report.mesh, config.boundary_value);
    const ElementOperator op(batch, {config.threads, config.deterministic});
    report.initial_guess = apply_initial_guess(report.mesh, d);
    report.bounds = choose_bounds(report.mesh, batch, op, d);
    report.setup_seconds = seconds_since(t_setup);

    bool want_direct = config.compare_direct;
    for (SolverKind kind : config.solvers) {
        want_direct |= kind == SolverKind::Direct;
    }
    if (want_direct) {
        const auto t_ref = Clock::now();
        const auto a = oracle::assemble_sparse(batch.system, batch.index.scatter, batch.n_nodes);
        const auto b = oracle::assemble_vector(batch.loads, batch.index.scatter, batch.n_nodes);
        report.reference = oracle::solve_reference(a, b, d);
        report.reference_seconds = seconds_since(t_ref);
    }

    SolverOptions options;
    options.iterations = config.iterations;
    options.tolerance = config.tolerance;
    if (config.compare_direct) {
        options.reference = std::span<const double>(*report.reference);
    }

    for (SolverKind kind : config.solvers) {
        SolverRun run;
        run.kind = kind;
        SolveResult result;
        switch (kind) {
            case SolverKind::Richardson:
                result = richardson(op, d, report.initial_guess, report.bounds, options);
                break;
            case SolverKind::Chebyshev2:
                result = chebyshev2(op, d, report.initial_guess, report.bounds, config.cycle_length, options);
                break;
            case SolverKind::Chebyshev3:
                result = chebyshev3(op, d, report.initial_guess, report.bounds, options);
                break;
            case SolverKind::Direct:
                result.x = *report.reference;
                result.history.wall_seconds = report.reference_seconds;
                break;
        }
        run.x = std::move(result.x);
        run.history = std::move(result.history);
        if (config.compare_direct && kind != SolverKind::Direct) {
            const double e0 = distance(report.initial_guess, *report.reference);
            run.error_ratio = distance(run.x, *report.reference) / e0;
        }
        report.runs.push_back(std::move(run));
    }

    if (config.out_dir) {
        const auto& dir = *config.out_dir;
        std::filesystem::create_directories(dir);
        for (const auto& run : report.runs) {
            const std::string name = to_string(run.kind);
            if (run.kind != SolverKind::Direct) {
                export_history(run.history, dir / ("history_" + name + ".csv"));
            }
            export_solution(report.mesh, run.x, dir / ("solution_" + name + ".csv"));
            if (config.export_vtk) {
                export_solution(report.mesh, run.x, dir / ("solution_" + name + ".vtk"));
            }
        }
        if (config.export_mesh) {
            write_mesh_text(report.mesh, dir);
        }
        write_summary_json(report, config, dir / "summary.json");
    }
    return report;
}

void export_history(const ConvergenceHistory& history, const std::filesystem::path& path) {
    auto out = open_out(path);
    const bool with_error = !history.error_norms.empty();
    out << (with_error ? "k,residual_norm,error_norm\n" : "k,residual_norm\n");
    for (std::size_t k = 0; k < history.residual_norms.size(); ++k) {
        out << k << ',' << fmt17(history.residual_norms[k]);
        if (with_error) {
            out << ',' << fmt17(history.error_norms[k]);
        }
        out << '\n';
    }
}

void export_solution(const Mesh& mesh, std::span<const double> u, const std::filesystem::path& path) {
    if (u.size() != mesh.n_nodes()) {
        throw ShapeError("solution length does not match the mesh");
    }
    auto out = open_out(path);
    if (path.extension() == ".vtk") {
        out << "# vtk DataFile Version 3.0\nelsolve solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
        out << "POINTS " << mesh.n_nodes() << " double\n";
        for (const auto& p : mesh.nodes) {
            out << fmt17(p.x) << ' ' << fmt17(p.y) << " 0\n";
        }
        out << "CELLS " << mesh.n_elements() << ' ' << 4 * mesh.n_elements() << '\n';
        for (const auto& [a, b, c] : mesh.elements) {
            out << "3 " << a << ' ' << b << ' ' << c << '\n';
        }
        out << "CELL_TYPES " << mesh.n_elements() << '\n';
        for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
            out << "5\n";
        }
        out << "POINT_DATA " << mesh.n_nodes() << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
        for (double v : u) {
            out << fmt17(v) << '\n';
        }
        return;
    }
    out << "x,y,u\n";
    for (std::size_t g = 0; g < u.size(); ++g) {
        out << fmt17(mesh.nodes[g].x) << ',' << fmt17(mesh.nodes[g].y) << ',' << fmt17(u[g]) << '\n';
    }
}

std::vector<double> read_solution_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::string line;
    std::getline(in, line);
    if (line != "x,y,u") {
        throw Error(path.string() + " is not a solution CSV");
    }
    std::vector<double> u;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto last = line.rfind(',');
        u.push_back(std::stod(line.substr(last + 1)));
    }
    return u;
}

std::string format_report(const ExperimentReport& report) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "mesh: level %d, %zu nodes, %zu elements; bounds [%.9g, %.9g]; setup %.3fs\n",
                  report.mesh.level, report.mesh.n_nodes(), report.mesh.n_elements(), report.bounds.lambda1,
                  report.bounds.lambda2, report.setup_seconds);
    os << buf;
    for (const auto& run : report.runs) {
        const auto& h = run.history;
        if (run.kind == SolverKind::Direct) {
            std::snprintf(buf, sizeof buf, "%-10s  reference solve %.3fs\n", "direct", h.wall_seconds);
            os << buf;
            continue;
        }
        std::snprintf(buf, sizeof buf, "%-10s  iters %4zu  |r0| %.6e  |r| %.6e", to_string(run.kind).c_str(),
                      h.iterations, h.residual_norms.front(), h.residual_norms.back());
        os << buf;
        if (run.error_ratio) {
            std::snprintf(buf, sizeof buf, "  |e|/|e0| %.6e", *run.error_ratio);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "  %.3fs%s\n", h.wall_seconds, h.diverged ? "  DIVERGED" : "");
        os << buf;
    }
    return os.str();
}

}  // namespace elsolve
