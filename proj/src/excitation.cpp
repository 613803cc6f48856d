#include <wec/excitation.hpp>

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#ifndef WEC_DEFAULT_DATA_FILE
#define WEC_DEFAULT_DATA_FILE "data/wec_excitation.json"
#endif

namespace wec {

namespace {

std::string resolve_data_file(const std::string& requested) {
    if (!requested.empty()) return requested;
    if (const char* env = std::getenv("WEC_DATA_FILE"); env && *env) return env;
    return WEC_DEFAULT_DATA_FILE;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open coefficient file: " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("schema_version", 0) != 1)
        throw std::runtime_error("unsupported schema_version in " + path);
    return j;
}

FourierForce parse_series(const nlohmann::json& j, const std::string& name) {
    FourierForce f;
    const auto& s = j.at(name);
    f.scale = s.at("scale").get<double>();
    if (name == "periodic") {
        const auto amps = s.at("amplitudes_N").get<std::vector<double>>();
        const double period = s.at("period_s").get<double>();
        const auto mults = s.at("omega_pi_multiples").get<std::vector<double>>();
        const auto fracs = s.at("phi_pi_fractions").get<std::vector<std::vector<double>>>();
        if (amps.size() != mults.size() || amps.size() != fracs.size())
            throw std::runtime_error("periodic series: coefficient vectors differ in length");
        for (size_t i = 0; i < amps.size(); ++i) {
            f.terms.push_back({amps[i], mults[i] * M_PI / period,
                               M_PI * fracs[i].at(0) / fracs[i].at(1)});
        }
    } else {
        const auto amps = s.at("amplitudes").get<std::vector<double>>();
        const auto omegas = s.at("omegas_rad_s").get<std::vector<double>>();
        const auto phis = s.at("phis_rad").get<std::vector<double>>();
        if (amps.size() != omegas.size() || amps.size() != phis.size())
            throw std::runtime_error(name + " series: coefficient vectors differ in length");
        for (size_t i = 0; i < amps.size(); ++i)
            f.terms.push_back({amps[i], omegas[i], phis[i]});
    }
    return f;
}

}  // namespace

std::pair<double, double> case1_initial_conditions(const FourierForce& f, double c) {
    double sx1 = 0.0, sx2 = 0.0;
    for (const auto& tm : f.terms) {
        if (tm.omega == 0.0)
            throw std::invalid_argument("case1_initial_conditions: zero-frequency term");
        sx1 += tm.amplitude * std::cos(tm.phi) / tm.omega;
        sx2 += tm.amplitude * std::sin(tm.phi);
    }
    return {-f.scale * sx1 / (2.0 * c), f.scale * sx2 / (2.0 * c)};
}

FourierForce load_force_series(const std::string& series_name, const std::string& data_file) {
    return parse_series(load_json(resolve_data_file(data_file)), series_name);
}

std::vector<CaseSpec> builtin_cases(const std::string& data_file) {
    const auto j = load_json(resolve_data_file(data_file));
    const FourierForce periodic = parse_series(j, "periodic");
    const FourierForce nonperiodic = parse_series(j, "nonperiodic");

    CaseSpec c1;
    c1.name = "case1";
    c1.gamma = 1.5e5;
    c1.force = periodic;
    c1.mode = BoundaryMode::FixedInitial;
    std::tie(c1.x1_0, c1.x2_0) = case1_initial_conditions(periodic, c1.c);

    CaseSpec c2;
    c2.name = "case2";
    c2.gamma = 1.5e5;
    c2.force = periodic;
    c2.mode = BoundaryMode::FixedInitial;
    c2.x1_0 = 0.0;
    c2.x2_0 = 0.0;

    CaseSpec c3;
    c3.name = "case3";
    c3.gamma = 1.0e5;
    c3.force = nonperiodic;
    c3.mode = BoundaryMode::FixedInitial;
    c3.x1_0 = 0.0;
    c3.x2_0 = 0.0;

    return {c1, c2, c3};
}

}  // namespace wec
