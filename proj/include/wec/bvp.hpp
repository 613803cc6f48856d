// Two-point boundary-value solver: 3-stage Lobatto IIIA collocation with
// damped Newton iteration and residual-driven adaptive mesh refinement.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wec::bvp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// First-order ODE system y' = rhs(t, y) on [t0, tf] with two-point
/// boundary residual bc(y(t0), y(tf)) = 0 of the same dimension.
struct BvpProblem {
    int dimension = 0;
    std::function<Vec(double, const Vec&)> rhs;
    std::function<Vec(const Vec&, const Vec&)> bc;
    // Optional analytic Jacobian of rhs with respect to y; when absent the
    // solver falls back to one-sided finite differences.
    std::function<Mat(double, const Vec&)> jac;
    double t0 = 0.0;
    double tf = 1.0;
};

struct SolverSettings {
    double rel_tol = 1e-4;
    double abs_tol = 1e-4;
    int max_mesh = 10000;
    int max_newton = 40;
    int initial_mesh_size = 11;
    // false: solve the collocation system on the guess mesh only; the
    // interval residuals are still reported but do not gate success.
    bool adaptive_mesh = true;
};

struct BvpGuess {
    std::vector<double> mesh;
    std::vector<Vec> y;
};

enum class BvpStatus { Success, NoConvergence, MeshOverflow, SingularJacobian };

std::string to_string(BvpStatus s);

/// Converged mesh, nodal values and the C1 quartic interpolant data.
/// eval() reproduces nodal values exactly at node times.
struct BvpSolution {
    BvpStatus status = BvpStatus::NoConvergence;
    std::string message;

    std::vector<double> mesh;
    std::vector<Vec> y_nodes;
    std::vector<Vec> f_nodes;           // rhs at nodes
    std::vector<Vec> y_mid;             // collocation midpoint values, per interval
    std::vector<Vec> f_mid;
    std::vector<double> interval_residuals;

    double residual_norm = 0.0;         // max scaled collocation residual
    double bc_residual_norm = 0.0;
    int newton_iterations = 0;
    int mesh_points = 0;

    // Instrumentation: Jacobian entries written vs. the block-bidiagonal +
    // boundary-block budget they must stay within.
    long jacobian_entries_written = 0;
    long jacobian_band_budget = 0;

    Vec eval(double t) const;
    Vec eval_derivative(double t) const;

    bool ok() const { return status == BvpStatus::Success; }
};

/// Solve the collocation system on the guess mesh, then refine until the
/// interpolant residual is below rel_tol everywhere or a cap is hit.
BvpSolution solve(const BvpProblem& problem, const BvpGuess& guess,
                  const SolverSettings& settings);

/// Scaled max-norm ODE residual of the candidate interpolant per mesh
/// interval, sampled off the collocation abscissae.
std::vector<double> estimate_residual(const BvpProblem& problem, const BvpSolution& candidate,
                                      const SolverSettings& settings);

/// Subdivide intervals whose residual exceeds tolerance (quartered beyond
/// 100x), coarsen runs far below it. Throws no errors; returns empty mesh
/// when the cap would be exceeded.
std::vector<double> refine_mesh(const std::vector<double>& mesh,
                                const std::vector<double>& residuals,
                                const SolverSettings& settings);

}  // namespace wec::bvp
