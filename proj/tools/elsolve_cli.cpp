// Runs the model benchmark: -Laplace(u) + nu u = f on the unit square with
// u = 1 on the boundary, solved matrix-free by Richardson and two- and
// three-level Chebyshev iterations.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "elsolve/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Matrix-free P1 element solvers on the unit square"};

    elsolve::ExperimentConfig config;
    std::string solver = "all";
    double tol = 0.0;
    std::string out_dir;
    bool nondeterministic = false;

    app.add_option("--level", config.level, "Refinement level L, 2^L + 1 nodes per side")->capture_default_str();
    app.add_option("--nu", config.nu, "Reaction coefficient nu >= 0")->capture_default_str();
    app.add_option("--iters", config.iterations, "Iterations per solver")->capture_default_str();
    app.add_option("--solver", solver, "richardson | cheb2 | cheb3 | direct | all")->capture_default_str();
    app.add_option("--cycle-n", config.cycle_length, "Two-level Chebyshev cycle length N")->capture_default_str();
    auto* tol_opt = app.add_option("--tol", tol, "Stop early once |r_k| / |r_0| <= tol");
    app.add_option("--threads", config.threads, "Threads for the element loops")->capture_default_str();
    app.add_flag("--deterministic,!--no-deterministic", config.deterministic,
                 "Bitwise reproducible accumulation (default on)");
    app.add_flag("--fast", nondeterministic, "Atomic accumulation; same as --no-deterministic");
    app.add_option("--out-dir", out_dir, "Directory for CSV/VTK/JSON outputs");
    app.add_flag("--export-vtk", config.export_vtk, "Also write legacy VTK solutions");
    app.add_flag("--export-mesh", config.export_mesh, "Also write nodes.txt and elements.txt");
    app.add_flag("--compare-direct", config.compare_direct, "Report errors against a direct reference solve");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        config.solvers = elsolve::parse_solver_selection(solver);
        if (*tol_opt) {
            config.tolerance = tol;
        }
        if (nondeterministic) {
            config.deterministic = false;
        }
        if (!out_dir.empty()) {
            config.out_dir = out_dir;
        }
        elsolve::validate(config);
    } catch (const elsolve::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        const auto report = elsolve::run_experiment(config);
        std::cout << elsolve::format_report(report);
        return report.any_diverged() ? kExitDiverged : 0;
    } catch (const elsolve::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
