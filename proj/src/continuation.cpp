#include <wec/continuation.hpp>

#include <cmath>
#include <stdexcept>

#include <wec/postprocess.hpp>

namespace wec {

void ContinuationSchedule::validate() const {
    if (!(tf_start <= tf_target)) throw std::invalid_argument("schedule: tf_start > tf_target");
    if (!(eps_target <= eps_start)) throw std::invalid_argument("schedule: eps_target > eps_start");
    if (!(eps_target > 0.0)) throw std::invalid_argument("schedule: eps_target must be positive");
    if (tf_steps < 1 || eps_steps < 1) throw std::invalid_argument("schedule: step counts must be >= 1");
}

bvp::BvpProblem make_wec_problem(const CaseSpec& spec, double epsilon, double tf) {
    const ModelParams p = model_params(spec, epsilon);
    p.validate();
    const FourierForce force = spec.force;
    bvp::BvpProblem prob;
    prob.dimension = AugmentedState::dim;
    prob.t0 = spec.t0;
    prob.tf = tf;
    prob.rhs = [p, force](double t, const bvp::Vec& y) {
        const AugmentedState d = rhs_augmented(t, AugmentedState::from_ptr(y.data()), p, force);
        const auto a = d.to_array();
        return bvp::Vec(Eigen::Map<const Eigen::VectorXd>(a.data(), 6));
    };
    prob.jac = [p, force](double t, const bvp::Vec& y) {
        double buf[36];
        rhs_jacobian_augmented(t, AugmentedState::from_ptr(y.data()), p, force, buf);
        return bvp::Mat(Eigen::Map<const Eigen::Matrix<double, 6, 6, Eigen::RowMajor>>(buf));
    };
    const BoundaryMode mode = spec.mode;
    const double x1_0 = spec.x1_0, x2_0 = spec.x2_0, t0 = spec.t0;
    prob.bc = [mode, x1_0, x2_0, t0](const bvp::Vec& ya, const bvp::Vec& yb) {
        bvp::Vec r(6);
        if (mode == BoundaryMode::FixedInitial) {
            r[0] = ya[0] - x1_0;
            r[1] = ya[1] - x2_0;
        } else {  // free initial states: transversality on the leading costates
            r[0] = ya[3];
            r[1] = ya[4];
        }
        r[2] = ya[2] - t0;  // clock starts at t0
        r[3] = yb[3];       // lam1(tf) = 0, x1(tf) free
        r[4] = yb[4];       // lam2(tf) = 0, x2(tf) free
        r[5] = yb[5];       // lam3(tf) = 0, x3(tf) free
        return r;
    };
    return prob;
}

bvp::BvpGuess rescale_guess(const bvp::BvpSolution& sol, double tf_new) {
    if (!(tf_new > 0.0)) throw std::invalid_argument("rescale_guess: tf_new must be positive");
    const double t0 = sol.mesh.front();
    const double tf_old = sol.mesh.back();
    bvp::BvpGuess g;
    g.mesh.reserve(sol.mesh.size());
    g.y = sol.y_nodes;
    for (size_t i = 0; i < sol.mesh.size(); ++i) {
        const double t = t0 + (sol.mesh[i] - t0) * (tf_new - t0) / (tf_old - t0);
        g.mesh.push_back(t);
        g.y[i][2] = t;  // keep the x3 = t identity
    }
    g.mesh.back() = tf_new;
    return g;
}

bvp::BvpGuess cold_start_guess(const CaseSpec& spec, double tf, int mesh_size) {
    if (mesh_size < 3) throw std::invalid_argument("cold_start_guess: mesh_size < 3");
    bvp::BvpGuess g;
    for (int i = 0; i < mesh_size; ++i) {
        const double s = static_cast<double>(i) / (mesh_size - 1);
        const double t = spec.t0 + s * (tf - spec.t0);
        bvp::Vec y(6);
        const double x1 = spec.mode == BoundaryMode::FixedInitial ? spec.x1_0 : 0.0;
        const double x2 = spec.mode == BoundaryMode::FixedInitial ? spec.x2_0 : 0.0;
        y[0] = (1.0 - s) * x1;
        y[1] = (1.0 - s) * x2;
        y[2] = t;
        y[3] = 0.1;
        y[4] = 0.1;
        y[5] = 0.1;
        g.mesh.push_back(t);
        g.y.push_back(y);
    }
    return g;
}

namespace {

double quick_energy(const bvp::BvpSolution& sol, const CaseSpec& spec, double epsilon) {
    const Trajectory traj =
        sample_trajectory(sol, model_params(spec, epsilon), spec.force, 1001);
    return harvested_energy(traj);
}

}  // namespace

ContinuationResult run_continuation(const CaseSpec& spec, const ContinuationSchedule& schedule,
                                    const bvp::SolverSettings& settings) {
    schedule.validate();
    ContinuationResult result;

    auto solve_step = [&](int set, double param, double tf, double eps,
                          const bvp::BvpGuess& guess) {
        const bvp::BvpProblem prob = make_wec_problem(spec, eps, tf);
        bvp::BvpSolution s = bvp::solve(prob, guess, settings);
        StepRecord rec;
        rec.set = set;
        rec.parameter = param;
        rec.converged = s.ok();
        rec.newton_iterations = s.newton_iterations;
        rec.mesh_points = s.mesh_points;
        if (s.ok()) rec.energy_J = quick_energy(s, spec, eps);
        result.trace.records.push_back(rec);
        return s;
    };

    // Set 1: cold start at the short horizon, then march tf out.
    //
    // The control law reads the direction of the vector (gamma*H1, eps*lam1), so a
    // guess whose costates sit near the magnitude where that vector degenerates
    // leaves Newton with an ill-conditioned linearization. When the standard cold
    // start stalls, retry with the costate guess scaled up a decade at a time until
    // the solve lands in a well-conditioned basin.
    bvp::BvpSolution current;
    for (double scale : {1.0, 1e1, 1e2, 1e3, 1e4, 1e5}) {
        bvp::BvpGuess guess =
            cold_start_guess(spec, schedule.tf_start, settings.initial_mesh_size);
        for (auto& y : guess.y)
            for (int j = 3; j < 6; ++j) y[j] *= scale;
        current = solve_step(1, schedule.tf_start, schedule.tf_start, schedule.eps_start,
                             guess);
        if (current.ok()) break;
    }
    if (!current.ok()) {
        result.solution = current;
        result.message = "cold start at tf=" + std::to_string(schedule.tf_start) +
                         " failed: " + current.message;
        return result;
    }

    const bool tf_march = schedule.tf_target > schedule.tf_start;
    if (tf_march) {
        const int steps = std::max(2, schedule.tf_steps);
        double tf_prev = schedule.tf_start;
        int i = 1;
        double tf_next = schedule.tf_start +
                         (schedule.tf_target - schedule.tf_start) * i / (steps - 1);
        int halvings = 0;
        while (true) {
            bvp::BvpSolution s = solve_step(1, tf_next, tf_next, schedule.eps_start,
                                            rescale_guess(current, tf_next));
            if (s.ok()) {
                current = s;
                tf_prev = tf_next;
                if (tf_next >= schedule.tf_target) break;
                ++i;
                halvings = 0;
                tf_next = std::min(schedule.tf_target,
                                   schedule.tf_start +
                                       (schedule.tf_target - schedule.tf_start) * i / (steps - 1));
                if (tf_next <= tf_prev) break;
            } else {
                if (!schedule.adaptive_halving || ++halvings > schedule.max_halvings) {
                    result.solution = s;
                    result.message = "continuation stalled in Set 1 at tf=" +
                                     std::to_string(tf_next) + ": " + s.message;
                    return result;
                }
                tf_next = 0.5 * (tf_prev + tf_next);
            }
        }
    }

    // Set 2: fixed horizon, march epsilon down log-spaced.
    if (schedule.eps_target < schedule.eps_start) {
        const int steps = std::max(2, schedule.eps_steps);
        const double ratio = std::log(schedule.eps_target / schedule.eps_start);
        double eps_prev = schedule.eps_start;
        int i = 1;
        double eps_next = schedule.eps_start * std::exp(ratio * i / (steps - 1));
        int halvings = 0;
        while (true) {
            bvp::BvpGuess guess{current.mesh, current.y_nodes};
            bvp::BvpSolution s =
                solve_step(2, eps_next, schedule.tf_target, eps_next, guess);
            if (s.ok()) {
                current = s;
                eps_prev = eps_next;
                if (eps_next <= schedule.eps_target) break;
                ++i;
                halvings = 0;
                eps_next = std::max(schedule.eps_target,
                                    schedule.eps_start * std::exp(ratio * i / (steps - 1)));
                if (eps_next >= eps_prev) break;
            } else {
                if (!schedule.adaptive_halving || ++halvings > schedule.max_halvings) {
                    result.solution = s;
                    result.message = "continuation stalled in Set 2 at eps=" +
                                     std::to_string(eps_next) + ": " + s.message;
                    return result;
                }
                eps_next = std::sqrt(eps_prev * eps_next);  // geometric midpoint
            }
        }
        result.final_epsilon = eps_prev;
    } else {
        result.final_epsilon = schedule.eps_start;
    }

    result.solution = current;
    result.ok = true;
    result.message = "converged";
    result.final_tf = current.mesh.back();
    return result;
}

}  // namespace wec
