// Two-set numerical continuation: march the final time out from 1 s, then
// march the regularization parameter down, warm-starting every step.
#pragma once

#include <string>
#include <vector>

#include <wec/bvp.hpp>
#include <wec/excitation.hpp>
#include <wec/model.hpp>

namespace wec {

struct ContinuationSchedule {
    double tf_start = 1.0;
    double tf_target = 50.0;
    int tf_steps = 10;       // values in Set 1 (linear, endpoints included)
    double eps_start = 0.1;
    double eps_target = 1e-3;
    int eps_steps = 8;       // values in Set 2 (log-spaced, endpoints included)
    bool adaptive_halving = true;
    int max_halvings = 6;

    void validate() const;
};

struct StepRecord {
    int set = 0;             // 1 = tf march, 2 = epsilon march
    double parameter = 0.0;  // tf [s] or epsilon [m/s]
    bool converged = false;
    int newton_iterations = 0;
    int mesh_points = 0;
    double energy_J = 0.0;
};

struct ContinuationTrace {
    std::vector<StepRecord> records;
};

struct ContinuationResult {
    bvp::BvpSolution solution;
    ContinuationTrace trace;
    bool ok = false;
    std::string message;
    double final_epsilon = 0.0;
    double final_tf = 0.0;
};

/// TPBVP for one case at a given regularization level and horizon.
bvp::BvpProblem make_wec_problem(const CaseSpec& spec, double epsilon, double tf);

inline ModelParams model_params(const CaseSpec& spec, double epsilon) {
    return {spec.m, spec.k, spec.c, spec.gamma, epsilon};
}

/// Affine time remap of a converged solution onto [t0, tf_new]; the clock
/// state (component 2) is reset to the node times.
bvp::BvpGuess rescale_guess(const bvp::BvpSolution& sol, double tf_new);

/// Linear state ramp to zero, clock equal to time, all costates at 0.1.
bvp::BvpGuess cold_start_guess(const CaseSpec& spec, double tf, int mesh_size);

ContinuationResult run_continuation(const CaseSpec& spec, const ContinuationSchedule& schedule,
                                    const bvp::SolverSettings& settings);

}  // namespace wec
