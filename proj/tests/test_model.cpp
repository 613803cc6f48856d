#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <wec/model.hpp>

using namespace wec;

namespace {

const ModelParams kRefParams{2e5, 1.2e5, 1e5, 1.5e5, 1e-3};

FourierForce zero_force() {
    FourierForce f;
    f.terms.push_back({0.0, 1.0, 0.0});
    return f;
}

AugmentedState random_state(std::mt19937& rng, double span = 2.0) {
    std::uniform_real_distribution<double> d(-span, span);
    return {d(rng), d(rng), d(rng), d(rng), d(rng), d(rng)};
}

ModelParams random_params(std::mt19937& rng) {
    std::uniform_real_distribution<double> d(0.1, 3.0);
    return {d(rng), d(rng), d(rng), d(rng), 0.01 * d(rng)};
}

}  // namespace

TEST_CASE("switching function") {
    const auto f = zero_force();
    (void)f;
    SUBCASE("exact cancellation lam2 = -m*x2") {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> d(-5.0, 5.0);
        for (int i = 0; i < 20; ++i) {
            AugmentedState z;
            z.x2 = d(rng);
            z.lam2 = -kRefParams.m * z.x2;
            CHECK(switching_function(z, kRefParams) == doctest::Approx(0.0).epsilon(1e-14));
        }
    }
    SUBCASE("reduces to -lam2/m at rest") {
        AugmentedState z;
        z.lam2 = 2e5;
        CHECK(switching_function(z, kRefParams) == doctest::Approx(-1.0));
    }
    SUBCASE("matches extended-precision re-evaluation") {
        std::mt19937 rng(11);
        for (int i = 0; i < 200; ++i) {
            const AugmentedState z = random_state(rng, 10.0);
            const ModelParams p = random_params(rng);
            const long double expect =
                -(static_cast<long double>(z.lam2) / p.m) - static_cast<long double>(z.x2);
            CHECK(switching_function(z, p) ==
                  doctest::Approx(static_cast<double>(expect)).epsilon(1e-12));
        }
    }
}

TEST_CASE("optimal control branch selection") {
    const auto f = zero_force();
    SUBCASE("pure error-control term: H1 = 0, lam1 > 0") {
        AugmentedState z;
        z.lam1 = 1.0;
        z.x2 = 0.0;
        z.lam2 = 0.0;
        const auto cs = optimal_control(z, kRefParams, f);
        CHECK(cs.u_trig == doctest::Approx(M_PI));
        CHECK(std::abs(cs.u) < 1e-9);
    }
    SUBCASE("bang branch: lam1 = 0, H1 < 0 gives +gamma") {
        AugmentedState z;
        z.lam2 = 1.0;  // H1 = -1/m < 0
        const auto cs = optimal_control(z, kRefParams, f);
        CHECK(cs.u_trig == doctest::Approx(M_PI / 2));
        CHECK(cs.u == doctest::Approx(kRefParams.gamma));
    }
    SUBCASE("degenerate coefficients give u_trig = 0") {
        AugmentedState z;  // all zero: H1 = 0 and lam1 = 0
        const auto cs = optimal_control(z, kRefParams, f);
        CHECK(cs.u_trig == 0.0);
        CHECK(cs.u == 0.0);
    }
    SUBCASE("control bound holds exactly") {
        std::mt19937 rng(3);
        for (int i = 0; i < 500; ++i) {
            const AugmentedState z = random_state(rng, 20.0);
            const ModelParams p = random_params(rng);
            const auto cs = optimal_control(z, p, f);
            CHECK(std::abs(cs.u) <= p.gamma);
            CHECK(cs.u_trig > -M_PI);
            CHECK(cs.u_trig <= M_PI);
        }
    }
    SUBCASE("dense grid-search oracle") {
        std::mt19937 rng(23);
        for (int trial = 0; trial < 4; ++trial) {
            const AugmentedState z = random_state(rng);
            const ModelParams p = random_params(rng);
            const auto cs = optimal_control(z, p, f);
            const double a = p.gamma * cs.h1;
            const double b = p.epsilon * z.lam1;
            auto part = [&](double th) { return a * std::sin(th) + b * std::cos(th); };
            double best = std::numeric_limits<double>::infinity();
            const int n = 1000000;
            for (int i = 1; i <= n; ++i)
                best = std::min(best, part(-M_PI + 2.0 * M_PI * i / n));
            const double amp = std::hypot(a, b);
            CHECK(part(cs.u_trig) <= best + 1e-10 * std::max(amp, 1.0));
        }
    }
    SUBCASE("PMP pointwise minimality on a 1024 probe grid") {
        std::mt19937 rng(29);
        for (int trial = 0; trial < 50; ++trial) {
            const AugmentedState z = random_state(rng);
            const ModelParams p = random_params(rng);
            const auto cs = optimal_control(z, p, f);
            for (int i = 1; i <= 1024; ++i) {
                const double probe = -M_PI + 2.0 * M_PI * i / 1024;
                CHECK(cs.hamiltonian <= hamiltonian(z, probe, p, f) + 1e-12);
            }
        }
    }
    SUBCASE("bang sign convention vs switching function") {
        std::mt19937 rng(31);
        for (int trial = 0; trial < 500; ++trial) {
            const AugmentedState z = random_state(rng, 5.0);
            const ModelParams p = random_params(rng);
            const auto cs = optimal_control(z, p, f);
            const double delta = 10.0 * p.epsilon * std::abs(z.lam1) / p.gamma;
            if (cs.h1 > delta) CHECK(std::abs(cs.u + p.gamma) <= 0.01 * p.gamma);
            if (cs.h1 < -delta) CHECK(std::abs(cs.u - p.gamma) <= 0.01 * p.gamma);
        }
    }
}

TEST_CASE("hamiltonian") {
    const auto f = zero_force();
    SUBCASE("all-zero input") {
        CHECK(hamiltonian(AugmentedState{}, 0.0, kRefParams, f) == 0.0);
    }
    SUBCASE("error-control term only") {
        AugmentedState z;
        z.lam1 = 1.0;
        CHECK(hamiltonian(z, 0.0, kRefParams, f) == doctest::Approx(1e-3));
    }
    SUBCASE("matches term-by-term extended precision") {
        std::mt19937 rng(17);
        FourierForce force;
        force.terms = {{1.3, 0.7, 0.2}, {0.4, 1.9, -0.8}};
        for (int i = 0; i < 200; ++i) {
            const AugmentedState z = random_state(rng);
            const ModelParams p = random_params(rng);
            const double ut = std::uniform_real_distribution<double>(-M_PI, M_PI)(rng);
            long double fe = 0.0L;
            for (const auto& tm : force.terms)
                fe += static_cast<long double>(tm.amplitude) * sinl(tm.omega * z.x3 + tm.phi);
            const long double expect =
                -static_cast<long double>(p.gamma) * z.x2 * sinl(ut) +
                static_cast<long double>(z.lam1) * (z.x2 + p.epsilon * cosl(ut)) +
                static_cast<long double>(z.lam2) / p.m *
                    (fe - p.k * z.x1 - p.c * z.x2 - p.gamma * sinl(ut)) +
                z.lam3;
            CHECK(hamiltonian(z, ut, p, force) ==
                  doctest::Approx(static_cast<double>(expect)).epsilon(1e-10));
        }
    }
}

TEST_CASE("augmented RHS") {
    SUBCASE("zero state, zero force") {
        const auto f = zero_force();
        const auto d = rhs_augmented(0.0, AugmentedState{}, kRefParams, f);
        CHECK(d.x1 == doctest::Approx(kRefParams.epsilon));
        CHECK(d.x2 == 0.0);
        CHECK(d.x3 == 1.0);
        CHECK(d.lam1 == 0.0);
        CHECK(d.lam2 == 0.0);
        CHECK(d.lam3 == 0.0);
    }
    SUBCASE("positive switching function selects -gamma") {
        FourierForce f;
        f.terms = {{2e4, 0.5, 0.3}};
        AugmentedState z;
        z.lam2 = -kRefParams.m;  // H1 = 1 > 0
        const auto cs = optimal_control(z, kRefParams, f);
        CHECK(cs.u == doctest::Approx(-kRefParams.gamma));
        const auto d = rhs_augmented(0.0, z, kRefParams, f);
        CHECK(d.x2 ==
              doctest::Approx((force_eval(f, 0.0) + kRefParams.gamma) / kRefParams.m));
    }
    SUBCASE("Euler-Lagrange consistency by central differences") {
        FourierForce f;
        f.terms = {{1.7, 0.9, 0.4}, {0.6, 2.1, -1.1}};
        std::mt19937 rng(41);
        for (int trial = 0; trial < 50; ++trial) {
            const AugmentedState z = random_state(rng);
            const ModelParams p = random_params(rng);
            const auto cs = optimal_control(z, p, f);
            const auto d = rhs_augmented(0.0, z, p, f);
            auto arr = z.to_array();
            // u held fixed at the optimum (envelope property).
            auto H_at = [&](const std::array<double, 6>& a) {
                return hamiltonian(AugmentedState::from_array(a), cs.u_trig, p, f);
            };
            const auto dz = d.to_array();
            for (int j = 0; j < 6; ++j) {
                const double step = 1e-6 * std::max(std::abs(arr[j]), 1.0);
                auto hi = arr, lo = arr;
                hi[j] += step;
                lo[j] -= step;
                const double grad = (H_at(hi) - H_at(lo)) / (2.0 * step);
                // States: xdot = +dH/dlam; costates: lamdot = -dH/dx.
                double lhs, rhs;
                if (j < 3) {
                    lhs = dz[j + 3];  // lam_j' vs -dH/dx_j
                    rhs = -grad;
                } else {
                    lhs = dz[j - 3];  // x_j' vs +dH/dlam_j
                    rhs = grad;
                }
                const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-3});
                CHECK(std::abs(lhs - rhs) / scale < 1e-5);
            }
        }
    }
}

TEST_CASE("RHS Jacobian matches finite differences") {
    FourierForce f;
    f.terms = {{1.7, 0.9, 0.4}, {0.6, 2.1, -1.1}};
    std::mt19937 rng(47);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const AugmentedState z = random_state(rng);
        const ModelParams p = random_params(rng);
        // Skip states near the control degeneracy, where the RHS is not smooth
        // and finite differences straddle the atan2 branch.
        const auto cs = optimal_control(z, p, f);
        const double amp = std::hypot(p.gamma * cs.h1, p.epsilon * z.lam1);
        if (amp < 1e-2) continue;
        ++checked;
        double J[36];
        rhs_jacobian_augmented(0.0, z, p, f, J);
        const auto base = z.to_array();
        for (int j = 0; j < 6; ++j) {
            const double step = 1e-6 * std::max(std::abs(base[j]), 1.0);
            auto hi = base, lo = base;
            hi[j] += step;
            lo[j] -= step;
            const auto dhi = rhs_augmented(0.0, AugmentedState::from_array(hi), p, f).to_array();
            const auto dlo = rhs_augmented(0.0, AugmentedState::from_array(lo), p, f).to_array();
            for (int i = 0; i < 6; ++i) {
                const double fd = (dhi[i] - dlo[i]) / (2.0 * step);
                const double scale = std::max({std::abs(fd), std::abs(J[i * 6 + j]), 1.0});
                CHECK(std::abs(J[i * 6 + j] - fd) / scale < 5e-4);
            }
        }
    }
    CHECK(checked > 30);
}

TEST_CASE("singular control oracle") {
    SUBCASE("zero state, zero-amplitude force") {
        CHECK(singular_control_oracle(AugmentedState{}, kRefParams, zero_force()) == 0.0);
    }
    SUBCASE("displacement-only term") {
        ModelParams p{1.0, 1.0, 1.0, 1.0, 1e-3};
        AugmentedState z;
        z.x1 = 1.0;
        CHECK(singular_control_oracle(z, p, zero_force()) == doctest::Approx(-1.0));
    }
}

TEST_CASE("asymmetric trig map") {
    SUBCASE("symmetric bounds reduce to gamma*sin") {
        std::mt19937 rng(53);
        std::uniform_real_distribution<double> d(-M_PI, M_PI);
        const double gamma = kRefParams.gamma;
        for (int i = 0; i < 100; ++i) {
            const double ut = d(rng);
            CHECK(trig_map_asymmetric(ut, -gamma, gamma) == gamma * std::sin(ut));
        }
    }
    SUBCASE("midpoint at u_trig = 0") {
        CHECK(trig_map_asymmetric(0.0, 0.0, 10.0) == doctest::Approx(5.0));
        CHECK(trig_map_asymmetric(M_PI / 2, -kRefParams.gamma, kRefParams.gamma) ==
              doctest::Approx(kRefParams.gamma));
    }
    SUBCASE("dense sweep covers exactly [-1, 3]") {
        double lo = 1e9, hi = -1e9;
        for (int i = 0; i <= 100000; ++i) {
            const double ut = -M_PI + 2.0 * M_PI * i / 100000.0;
            const double v = trig_map_asymmetric(ut, -1.0, 3.0);
            CHECK(v >= -1.0);
            CHECK(v <= 3.0);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(lo == doctest::Approx(-1.0).epsilon(1e-8));
        CHECK(hi == doctest::Approx(3.0).epsilon(1e-8));
    }
    SUBCASE("rejects inverted bounds") {
        CHECK_THROWS_AS(trig_map_asymmetric(0.0, 1.0, 1.0), std::invalid_argument);
    }
}
