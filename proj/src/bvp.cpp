#include <wec/bvp.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace wec::bvp {

namespace {

constexpr double kNewtonTolFactor = 1e-2;   // Newton residual target, relative to rel_tol
constexpr double kMinDamping = 1.0 / (1 << 20);
constexpr int kMaxRefinements = 14;

struct QuarticCoeffs {
    Vec a, b, c, d, e;  // S(s) = a + b s + c s^2 + d s^3 + e s^4, s = (t - t_i)/h
};

// Quartic matching y, y' at both nodes' collocation data and the midpoint value.
QuarticCoeffs interval_coeffs(const Vec& y0, const Vec& y1, const Vec& ym, const Vec& f0,
                              const Vec& f1, double h) {
    QuarticCoeffs q;
    q.a = y0;
    q.b = h * f0;
    const Vec A = y1 - y0 - h * f0;
    const Vec B = h * (f1 - f0);
    const Vec C = ym - y0 - 0.5 * h * f0;
    q.e = 16.0 * C - 8.0 * A + 2.0 * B;
    q.d = B - 2.0 * A - 2.0 * q.e;
    q.c = A - q.d - q.e;
    return q;
}

// Analytic RHS Jacobian when the problem provides one, else one-sided finite
// differences.
Mat fd_jacobian(const BvpProblem& prob, double t, const Vec& y, const Vec& f0) {
    if (prob.jac) return prob.jac(t, y);
    const int n = prob.dimension;
    Mat J(n, n);
    const double sq = std::sqrt(std::numeric_limits<double>::epsilon());
    Vec yp = y;
    for (int j = 0; j < n; ++j) {
        const double step = sq * std::max(std::abs(y[j]), 1.0);
        yp[j] = y[j] + step;
        J.col(j) = (prob.rhs(t, yp) - f0) / step;
        yp[j] = y[j];
    }
    return J;
}

Mat fd_bc_jacobian(const BvpProblem& prob, const Vec& ya, const Vec& yb, const Vec& g0,
                   bool wrt_first) {
    const int n = prob.dimension;
    Mat J(n, n);
    const double sq = std::sqrt(std::numeric_limits<double>::epsilon());
    Vec a = ya, b = yb;
    Vec& v = wrt_first ? a : b;
    const Vec& base = wrt_first ? ya : yb;
    for (int j = 0; j < n; ++j) {
        const double step = sq * std::max(std::abs(base[j]), 1.0);
        v[j] = base[j] + step;
        J.col(j) = (prob.bc(a, b) - g0) / step;
        v[j] = base[j];
    }
    return J;
}

struct MeshWork {
    std::vector<double> mesh;
    std::vector<Vec> y;       // nodal values (the Newton unknowns)
    std::vector<Vec> f;       // rhs at nodes
    std::vector<Vec> ym, fm;  // per-interval collocation midpoints
    Vec bc_res;

    int nodes() const { return static_cast<int>(mesh.size()); }
};

// Evaluates rhs/midpoints and the full collocation + BC residual vector.
void assemble_residual(const BvpProblem& prob, MeshWork& w, Vec& F) {
    const int n = prob.dimension;
    const int N = w.nodes();

    w.f.resize(N);
    w.ym.assign(N - 1, Vec());
    w.fm.assign(N - 1, Vec());
    for (int i = 0; i < N; ++i) w.f[i] = prob.rhs(w.mesh[i], w.y[i]);
    w.bc_res = prob.bc(w.y.front(), w.y.back());

    F.resize(n * N);
    F.head(n) = w.bc_res;
    for (int i = 0; i < N - 1; ++i) {
        const double h = w.mesh[i + 1] - w.mesh[i];
        const double tm = 0.5 * (w.mesh[i] + w.mesh[i + 1]);
        w.ym[i] = 0.5 * (w.y[i] + w.y[i + 1]) - (h / 8.0) * (w.f[i + 1] - w.f[i]);
        w.fm[i] = prob.rhs(tm, w.ym[i]);
        F.segment(n * (i + 1), n) =
            w.y[i + 1] - w.y[i] - (h / 6.0) * (w.f[i] + 4.0 * w.fm[i] + w.f[i + 1]);
    }
}

// Row weights for the Newton merit norm, computed at a base iterate. Keeping the
// weights fixed through a line search makes the merit an honest fixed norm of the
// residual vector, so a Newton direction is always a descent direction for it.
Vec residual_weights(const BvpProblem& prob, const MeshWork& w, const SolverSettings& set) {
    const int n = prob.dimension;
    const int N = w.nodes();
    const double thr = set.abs_tol / set.rel_tol;
    Vec wt(n * N);
    // Boundary rows: weight by the global magnitude of the matching component.
    for (int j = 0; j < n; ++j) {
        double comp_max = 0.0;
        for (int i = 0; i < N; ++i) comp_max = std::max(comp_max, std::abs(w.y[i][j]));
        wt[j] = 1.0 / (thr + comp_max);
    }
    for (int i = 0; i < N - 1; ++i) {
        const double h = w.mesh[i + 1] - w.mesh[i];
        for (int j = 0; j < n; ++j) {
            const double fscale = std::max({std::abs(w.f[i][j]), std::abs(w.fm[i][j]),
                                            std::abs(w.f[i + 1][j])});
            wt[n * (i + 1) + j] = 1.0 / (h * (thr + fscale));
        }
    }
    return wt;
}

double weighted_norm(const Vec& F, const Vec& wt) {
    if (!F.allFinite()) return std::numeric_limits<double>::infinity();
    return F.cwiseProduct(wt).cwiseAbs().maxCoeff();
}

}  // namespace

std::string to_string(BvpStatus s) {
    switch (s) {
        case BvpStatus::Success: return "Success";
        case BvpStatus::NoConvergence: return "NoConvergence";
        case BvpStatus::MeshOverflow: return "MeshOverflow";
        case BvpStatus::SingularJacobian: return "SingularJacobian";
    }
    return "Unknown";
}

Vec BvpSolution::eval(double t) const {
    const auto it = std::upper_bound(mesh.begin(), mesh.end(), t);
    int i = static_cast<int>(it - mesh.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(mesh.size()) - 2);
    const double h = mesh[i + 1] - mesh[i];
    const double s = (t - mesh[i]) / h;
    const auto q = interval_coeffs(y_nodes[i], y_nodes[i + 1], y_mid[i], f_nodes[i],
                                   f_nodes[i + 1], h);
    return q.a + s * (q.b + s * (q.c + s * (q.d + s * q.e)));
}

Vec BvpSolution::eval_derivative(double t) const {
    const auto it = std::upper_bound(mesh.begin(), mesh.end(), t);
    int i = static_cast<int>(it - mesh.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(mesh.size()) - 2);
    const double h = mesh[i + 1] - mesh[i];
    const double s = (t - mesh[i]) / h;
    const auto q = interval_coeffs(y_nodes[i], y_nodes[i + 1], y_mid[i], f_nodes[i],
                                   f_nodes[i + 1], h);
    return (q.b + s * (2.0 * q.c + s * (3.0 * q.d + s * 4.0 * q.e))) / h;
}

std::vector<double> estimate_residual(const BvpProblem& problem, const BvpSolution& candidate,
                                      const SolverSettings& settings) {
    const int N = static_cast<int>(candidate.mesh.size());
    const double thr = settings.abs_tol / settings.rel_tol;
    std::vector<double> res(N - 1, 0.0);
    // Sample off the collocation abscissae {0, 1/2, 1}.
    constexpr double samples[2] = {0.25, 0.75};
    for (int i = 0; i < N - 1; ++i) {
        const double h = candidate.mesh[i + 1] - candidate.mesh[i];
        for (double s : samples) {
            const double t = candidate.mesh[i] + s * h;
            const Vec y = candidate.eval(t);
            const Vec dy = candidate.eval_derivative(t);
            const Vec f = problem.rhs(t, y);
            for (int j = 0; j < problem.dimension; ++j) {
                const double r = std::abs(dy[j] - f[j]) / (thr + std::abs(f[j]));
                res[i] = std::max(res[i], r);
            }
        }
        res[i] *= h;  // integral-style measure; fourth order under halving
    }
    return res;
}

std::vector<double> refine_mesh(const std::vector<double>& mesh,
                                const std::vector<double>& residuals,
                                const SolverSettings& settings) {
    const double tol = settings.rel_tol;
    const double coarse_tol = 0.01 * tol;
    std::vector<double> out;
    out.push_back(mesh.front());
    const int M = static_cast<int>(residuals.size());
    for (int i = 0; i < M; ++i) {
        const double a = mesh[i], b = mesh[i + 1];
        if (residuals[i] > 100.0 * tol) {
            out.push_back(a + 0.25 * (b - a));
            out.push_back(a + 0.50 * (b - a));
            out.push_back(a + 0.75 * (b - a));
        } else if (residuals[i] > tol) {
            out.push_back(0.5 * (a + b));
        } else if (i + 1 < M && residuals[i] < coarse_tol && residuals[i + 1] < coarse_tol) {
            // Merge this interval with the next; the shared node is dropped.
            out.push_back(mesh[i + 2]);
            ++i;
            continue;
        }
        out.push_back(b);
    }
    if (static_cast<int>(out.size()) > settings.max_mesh) return {};
    return out;
}

BvpSolution solve(const BvpProblem& problem, const BvpGuess& guess,
                  const SolverSettings& settings) {
    const int n = problem.dimension;
    BvpSolution sol;

    MeshWork w;
    w.mesh = guess.mesh;
    w.y = guess.y;
    if (w.mesh.size() < 2 || w.mesh.size() != w.y.size()) {
        sol.message = "guess mesh/values malformed";
        return sol;
    }

    auto finalize = [&](BvpStatus status, const std::string& msg) {
        sol.status = status;
        sol.message = msg;
        sol.mesh = w.mesh;
        sol.y_nodes = w.y;
        sol.f_nodes = w.f;
        sol.y_mid = w.ym;
        sol.f_mid = w.fm;
        sol.mesh_points = w.nodes();
        const double thr = settings.abs_tol / settings.rel_tol;
        if (w.bc_res.size() == n) {
            sol.bc_residual_norm = 0.0;
            for (int j = 0; j < n; ++j) {
                double comp_max = 0.0;
                for (const auto& y : w.y) comp_max = std::max(comp_max, std::abs(y[j]));
                sol.bc_residual_norm = std::max(
                    sol.bc_residual_norm, std::abs(w.bc_res[j]) / (thr + comp_max));
            }
        }
        return sol;
    };

    int total_newton = 0;
    for (int round = 0; round <= kMaxRefinements; ++round) {
        const int N = w.nodes();
        Vec F;
        assemble_residual(problem, w, F);
        Vec wts = residual_weights(problem, w, settings);
        double fnorm = weighted_norm(F, wts);

        // Damped Newton on the current mesh.
        bool newton_ok = false;
        for (int it = 0; it < settings.max_newton; ++it) {
            if (fnorm <= kNewtonTolFactor * settings.rel_tol) {
                newton_ok = true;
                break;
            }
            ++total_newton;

            // Jacobian assembly: block bidiagonal plus the two boundary blocks.
            std::vector<Eigen::Triplet<double>> trips;
            trips.reserve(static_cast<size_t>(n) * n * (2 * N));
            long written = 0;
            auto put_block = [&](int row0, int col0, const Mat& B) {
                for (int r = 0; r < n; ++r)
                    for (int c = 0; c < n; ++c) {
                        trips.emplace_back(row0 + r, col0 + c, B(r, c));
                        ++written;
                    }
            };
            const Mat Ba = fd_bc_jacobian(problem, w.y.front(), w.y.back(), w.bc_res, true);
            const Mat Bb = fd_bc_jacobian(problem, w.y.front(), w.y.back(), w.bc_res, false);
            put_block(0, 0, Ba);
            put_block(0, n * (N - 1), Bb);

            const Mat I = Mat::Identity(n, n);
            Mat Jprev = fd_jacobian(problem, w.mesh[0], w.y[0], w.f[0]);
            for (int i = 0; i < N - 1; ++i) {
                const double h = w.mesh[i + 1] - w.mesh[i];
                const double tm = 0.5 * (w.mesh[i] + w.mesh[i + 1]);
                const Mat Ji = Jprev;
                const Mat J1 = fd_jacobian(problem, w.mesh[i + 1], w.y[i + 1], w.f[i + 1]);
                const Mat Jm = fd_jacobian(problem, tm, w.ym[i], w.fm[i]);
                const Mat dRdyi =
                    -I - (h / 6.0) * Ji - (2.0 * h / 3.0) * Jm * (0.5 * I + (h / 8.0) * Ji);
                const Mat dRdy1 =
                    I - (h / 6.0) * J1 - (2.0 * h / 3.0) * Jm * (0.5 * I - (h / 8.0) * J1);
                put_block(n * (i + 1), n * i, dRdyi);
                put_block(n * (i + 1), n * (i + 1), dRdy1);
                Jprev = J1;
            }
            sol.jacobian_entries_written = written;
            sol.jacobian_band_budget = static_cast<long>(n) * n * (2L + 2L * (N - 1));

            Eigen::SparseMatrix<double> J(n * N, n * N);
            J.setFromTriplets(trips.begin(), trips.end());
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
            lu.compute(J);
            if (lu.info() != Eigen::Success) {
                sol.newton_iterations = total_newton;
                return finalize(BvpStatus::SingularJacobian, "pivot failure in collocation LU");
            }
            const Vec dY = lu.solve(-F);
            if (!dY.allFinite()) {
                sol.newton_iterations = total_newton;
                return finalize(BvpStatus::SingularJacobian, "non-finite Newton step");
            }

            // Armijo backtracking on the residual norm with weights frozen at the
            // base iterate, so the factored direction is guaranteed descent.
            const std::vector<Vec> y_base = w.y;
            double lambda = 1.0;
            double trial_norm = std::numeric_limits<double>::infinity();
            Vec Ftrial;
            while (true) {
                for (int i = 0; i < N; ++i) w.y[i] = y_base[i] + lambda * dY.segment(n * i, n);
                assemble_residual(problem, w, Ftrial);
                trial_norm = weighted_norm(Ftrial, wts);
                if (trial_norm <= (1.0 - 1e-4 * lambda) * fnorm) break;
                if (lambda <= kMinDamping) break;
                lambda *= 0.5;
            }
            if (trial_norm > (1.0 - 1e-4 * lambda) * fnorm) {
                // The Newton direction found no descent: the Jacobian is likely
                // near-singular (sharp switching layers), inflating the step along
                // a near-null direction. Fall back to Levenberg-Marquardt steps on
                // the weighted least-squares residual with increasing damping.
                bool rescued = false;
                Eigen::SparseMatrix<double> WJ = wts.asDiagonal() * J;
                const Vec WF = wts.cwiseProduct(F);
                Eigen::SparseMatrix<double> A0 = Eigen::SparseMatrix<double>(WJ.transpose()) * WJ;
                const Vec grad = WJ.transpose() * WF;
                Vec D(n * N);
                for (int r = 0; r < n * N; ++r) D[r] = std::max(A0.coeff(r, r), 1e-30);
                for (double mu = 1e-6; mu <= 1e6 && !rescued; mu *= 100.0) {
                    Eigen::SparseMatrix<double> A = A0;
                    for (int r = 0; r < n * N; ++r) A.coeffRef(r, r) += mu * D[r];
                    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
                    ldlt.compute(A);
                    if (ldlt.info() != Eigen::Success) continue;
                    const Vec dlm = ldlt.solve(-grad);
                    if (!dlm.allFinite()) continue;
                    for (double lm_lam = 1.0; lm_lam >= kMinDamping; lm_lam *= 0.5) {
                        for (int i = 0; i < N; ++i)
                            w.y[i] = y_base[i] + lm_lam * dlm.segment(n * i, n);
                        assemble_residual(problem, w, Ftrial);
                        trial_norm = weighted_norm(Ftrial, wts);
                        if (trial_norm <= (1.0 - 1e-6 * lm_lam) * fnorm) {
                            rescued = true;
                            break;
                        }
                    }
                }
                if (!rescued) {
                    w.y = y_base;
                    assemble_residual(problem, w, F);
                    sol.newton_iterations = total_newton;
                    sol.residual_norm = fnorm;
                    return finalize(BvpStatus::NoConvergence,
                                    "Newton stalled; last weighted residual " +
                                        std::to_string(fnorm));
                }
            }
            F = Ftrial;
            wts = residual_weights(problem, w, settings);
            fnorm = weighted_norm(F, wts);
        }
        sol.newton_iterations = total_newton;
        if (!newton_ok) {
            sol.residual_norm = fnorm;
            return finalize(BvpStatus::NoConvergence, "Newton iteration cap reached");
        }

        // Mesh acceptance on the interpolant residual.
        BvpSolution cand = finalize(BvpStatus::Success, "");
        cand.interval_residuals = estimate_residual(problem, cand, settings);
        const double maxres = cand.interval_residuals.empty()
                                  ? 0.0
                                  : *std::max_element(cand.interval_residuals.begin(),
                                                      cand.interval_residuals.end());
        cand.residual_norm = maxres;
        cand.newton_iterations = total_newton;
        if (maxres <= settings.rel_tol || !settings.adaptive_mesh) {
            cand.message = "converged";
            sol = cand;
            return sol;
        }
        if (round == kMaxRefinements) {
            cand.status = BvpStatus::NoConvergence;
            cand.message = "refinement rounds exhausted";
            sol = cand;
            return sol;
        }
        std::vector<double> new_mesh = refine_mesh(w.mesh, cand.interval_residuals, settings);
        if (new_mesh.empty()) {
            cand.status = BvpStatus::MeshOverflow;
            cand.message = "mesh cap exceeded during refinement";
            sol = cand;
            return sol;
        }
        std::vector<Vec> new_y(new_mesh.size());
        for (size_t i = 0; i < new_mesh.size(); ++i) new_y[i] = cand.eval(new_mesh[i]);
        w.mesh = std::move(new_mesh);
        w.y = std::move(new_y);
    }
    return sol;  // unreachable
}

}  // namespace wec::bvp
