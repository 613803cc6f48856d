// Fourier-series excitation force models and the built-in problem cases.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace wec {

struct FourierTerm {
    double amplitude;  ///< a_i (scaled by FourierForce::scale)
    double omega;      ///< angular frequency [rad/s]
    double phi;        ///< phase [rad]
};

/// Finite sinusoid series f_e(t) = scale * sum a_i sin(omega_i t + phi_i).
struct FourierForce {
    double scale = 1.0;
    std::vector<FourierTerm> terms;
};

inline double force_eval(const FourierForce& f, double t) {
    double s = 0.0;
    for (const auto& tm : f.terms) s += tm.amplitude * std::sin(tm.omega * t + tm.phi);
    return f.scale * s;
}

/// Analytic time derivative of force_eval.
inline double force_derivative(const FourierForce& f, double t) {
    double s = 0.0;
    for (const auto& tm : f.terms) s += tm.amplitude * tm.omega * std::cos(tm.omega * t + tm.phi);
    return f.scale * s;
}

/// Analytic second time derivative of force_eval.
inline double force_second_derivative(const FourierForce& f, double t) {
    double s = 0.0;
    for (const auto& tm : f.terms)
        s -= tm.amplitude * tm.omega * tm.omega * std::sin(tm.omega * t + tm.phi);
    return f.scale * s;
}

/// Steady-state initial displacement and velocity for a periodic excitation
/// with damping c: x1_0 = -(1/2c) sum a_i cos(phi_i)/omega_i,
/// x2_0 = (1/2c) sum a_i sin(phi_i).
std::pair<double, double> case1_initial_conditions(const FourierForce& f, double c);

enum class BoundaryMode { FixedInitial, FreeInitial };

/// One fully-specified problem instance: model constants, excitation,
/// boundary conditions and time window.
struct CaseSpec {
    std::string name;
    double m = 2.0e5;
    double k = 1.2e5;
    double c = 1.0e5;
    double gamma = 1.5e5;
    FourierForce force;
    BoundaryMode mode = BoundaryMode::FixedInitial;
    double x1_0 = 0.0;
    double x2_0 = 0.0;
    double t0 = 0.0;
    double tf = 50.0;
};

/// Loads the shipped coefficient file and returns the three built-in cases.
/// `data_file` empty means the default install location (overridable with
/// the WEC_DATA_FILE environment variable).
std::vector<CaseSpec> builtin_cases(const std::string& data_file = "");

/// Coefficient-file access, exposed for custom configs that reference the
/// named series ("periodic" / "nonperiodic").
FourierForce load_force_series(const std::string& series_name, const std::string& data_file = "");

}  // namespace wec
