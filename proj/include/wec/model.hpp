// Point-absorber WEC dynamics with epsilon-trig control regularization.
// Pure stateless functions; all quantities in SI units.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include <wec/excitation.hpp>

namespace wec {

/// Physical constants of the heave-only point-absorber model.
struct ModelParams {
    double m;        ///< buoy mass [kg]
    double k;        ///< hydrostatic stiffness [kg/s^2]
    double c;        ///< hydrodynamic damping [kg/s]
    double gamma;    ///< PTO force bound [N]
    double epsilon;  ///< regularization error parameter [m/s]

    void validate() const {
        if (!(m > 0.0)) throw std::invalid_argument("model.m must be positive");
        if (!(k > 0.0)) throw std::invalid_argument("model.k must be positive");
        if (!(c > 0.0)) throw std::invalid_argument("model.c must be positive");
        if (!(gamma > 0.0)) throw std::invalid_argument("model.gamma must be positive");
        if (!(epsilon > 0.0)) throw std::invalid_argument("model.epsilon must be positive");
    }
};

/// States (x1 displacement, x2 velocity, x3 clock) and their costates.
struct AugmentedState {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;
    double lam1 = 0.0;
    double lam2 = 0.0;
    double lam3 = 0.0;

    static constexpr int dim = 6;

    std::array<double, 6> to_array() const { return {x1, x2, x3, lam1, lam2, lam3}; }
    static AugmentedState from_array(const std::array<double, 6>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5]};
    }
    static AugmentedState from_ptr(const double* p) {
        return {p[0], p[1], p[2], p[3], p[4], p[5]};
    }
};

/// Control evaluated at one state: trig control, physical PTO force,
/// switching function and Hamiltonian values.
struct ControlSample {
    double u_trig;       ///< trigonometric control [rad], in (-pi, pi]
    double u;            ///< PTO force [N], |u| <= gamma exactly
    double h1;           ///< switching function [m/s]
    double hamiltonian;  ///< H at the selected control
};

/// Switching function H1 = -(lam2 + m*x2)/m.
inline double switching_function(const AugmentedState& z, const ModelParams& p) {
    return -(z.lam2 + p.m * z.x2) / p.m;
}

/// Hamiltonian of the regularized system at a given trig control.
inline double hamiltonian(const AugmentedState& z, double u_trig, const ModelParams& p,
                          const FourierForce& f) {
    const double s = std::sin(u_trig);
    const double fe = force_eval(f, z.x3);
    return -p.gamma * z.x2 * s + z.lam1 * (z.x2 + p.epsilon * std::cos(u_trig)) +
           (z.lam2 / p.m) * (fe - p.k * z.x1 - p.c * z.x2 - p.gamma * s) + z.lam3;
}

/// Minimizer of the control-dependent Hamiltonian part
/// gamma*H1*sin(u_trig) + epsilon*lam1*cos(u_trig).
/// The degenerate case (both coefficients zero) returns u_trig = 0.
inline ControlSample optimal_control(const AugmentedState& z, const ModelParams& p,
                                     const FourierForce& f) {
    const double h1 = switching_function(z, p);
    const double a = p.gamma * h1;
    const double b = p.epsilon * z.lam1;
    double u_trig = 0.0;
    if (a != 0.0 || b != 0.0) {
        // a*sin + b*cos is minimized at atan2(-a, -b); quadrant-aware, no division.
        u_trig = std::atan2(-a, -b);
        if (u_trig <= -M_PI) u_trig = M_PI;
    }
    ControlSample cs;
    cs.u_trig = u_trig;
    cs.u = p.gamma * std::sin(u_trig);
    cs.h1 = h1;
    cs.hamiltonian = hamiltonian(z, u_trig, p, f);
    return cs;
}

/// Augmented state/costate derivative with the control at its optimum.
inline AugmentedState rhs_augmented(double /*t*/, const AugmentedState& z,
                                    const ModelParams& p, const FourierForce& f) {
    const ControlSample cs = optimal_control(z, p, f);
    const double fe = force_eval(f, z.x3);
    AugmentedState d;
    d.x1 = z.x2 + p.epsilon * std::cos(cs.u_trig);
    d.x2 = (fe - p.k * z.x1 - p.c * z.x2 - cs.u) / p.m;
    d.x3 = 1.0;
    d.lam1 = p.k * z.lam2 / p.m;
    d.lam2 = -z.lam1 + p.c * z.lam2 / p.m + cs.u;
    d.lam3 = -(z.lam2 / p.m) * force_derivative(f, z.x3);
    return d;
}

/// Analytic Jacobian of rhs_augmented with respect to (x1,x2,x3,lam1,lam2,lam3),
/// written row-major into J[36]. The control's dependence on the state enters
/// through u_trig = atan2(-gamma*H1, -epsilon*lam1); at the degenerate point the
/// control is held fixed, matching optimal_control's convention.
inline void rhs_jacobian_augmented(double /*t*/, const AugmentedState& z,
                                   const ModelParams& p, const FourierForce& f,
                                   double* J) {
    for (int i = 0; i < 36; ++i) J[i] = 0.0;
    const ControlSample cs = optimal_control(z, p, f);
    const double s = std::sin(cs.u_trig);
    const double co = std::cos(cs.u_trig);

    const double a = p.gamma * cs.h1;
    const double b = p.epsilon * z.lam1;
    const double r2 = a * a + b * b;
    // d(u_trig)/da and /db; zero in the degenerate case where the control froze.
    const double ta = r2 > 0.0 ? b / r2 : 0.0;
    const double tb = r2 > 0.0 ? -a / r2 : 0.0;
    // a = -gamma*(lam2 + m*x2)/m, b = epsilon*lam1.
    const double th_x2 = ta * (-p.gamma);
    const double th_l1 = tb * p.epsilon;
    const double th_l2 = ta * (-p.gamma / p.m);

    const double dfe = force_derivative(f, z.x3);
    const double d2fe = force_second_derivative(f, z.x3);

    // d.x1 = x2 + eps*cos(u_trig)
    J[0 * 6 + 1] = 1.0 - p.epsilon * s * th_x2;
    J[0 * 6 + 3] = -p.epsilon * s * th_l1;
    J[0 * 6 + 4] = -p.epsilon * s * th_l2;
    // d.x2 = (fe - k*x1 - c*x2 - gamma*sin(u_trig))/m
    J[1 * 6 + 0] = -p.k / p.m;
    J[1 * 6 + 1] = (-p.c - p.gamma * co * th_x2) / p.m;
    J[1 * 6 + 2] = dfe / p.m;
    J[1 * 6 + 3] = -p.gamma * co * th_l1 / p.m;
    J[1 * 6 + 4] = -p.gamma * co * th_l2 / p.m;
    // d.x3 = 1: all zero.
    // d.lam1 = k*lam2/m
    J[3 * 6 + 4] = p.k / p.m;
    // d.lam2 = -lam1 + c*lam2/m + gamma*sin(u_trig)
    J[4 * 6 + 1] = p.gamma * co * th_x2;
    J[4 * 6 + 3] = -1.0 + p.gamma * co * th_l1;
    J[4 * 6 + 4] = p.c / p.m + p.gamma * co * th_l2;
    // d.lam3 = -(lam2/m)*fe'(x3)
    J[5 * 6 + 2] = -(z.lam2 / p.m) * d2fe;
    J[5 * 6 + 4] = -dfe / p.m;
}

/// Traditional singular control law, valid where H1 vanishes. Used as an
/// independent cross-check on classified singular arcs.
inline double singular_control_oracle(const AugmentedState& z, const ModelParams& p,
                                      const FourierForce& f) {
    const double fe = force_eval(f, z.x3);
    const double dfe = force_derivative(f, z.x3);
    return (p.k * z.lam2 + p.m * p.k * z.x2 +
            2.0 * p.c * (fe - p.c * z.x2 - p.k * z.x1) - p.m * dfe) /
           (2.0 * p.c);
}

/// Map a trig control onto an asymmetric interval [u_min, u_max].
inline double trig_map_asymmetric(double u_trig, double u_min, double u_max) {
    if (!(u_min < u_max)) throw std::invalid_argument("trig_map_asymmetric: u_min must be < u_max");
    const double c0 = 0.5 * (u_max + u_min);
    const double c1 = 0.5 * (u_max - u_min);
    return c1 * std::sin(u_trig) + c0;
}

}  // namespace wec
