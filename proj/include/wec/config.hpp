// Run configuration, validation, execution and artifact emission.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include <wec/bvp.hpp>
#include <wec/continuation.hpp>
#include <wec/excitation.hpp>
#include <wec/postprocess.hpp>

namespace wec {

struct OutputSpec {
    std::string dir = "out";
    bool csv = true;
    bool json = true;
    int resolution = 2001;
};

struct RunConfig {
    CaseSpec spec;
    ContinuationSchedule schedule;
    bvp::SolverSettings solver;
    OutputSpec output;
    ArcThresholds thresholds;
};

/// Raised on malformed configs; `key` names the offending field.
struct ConfigError : std::runtime_error {
    std::string key;
    ConfigError(std::string k, const std::string& msg)
        : std::runtime_error(k + ": " + msg), key(std::move(k)) {}
};

/// Builds a config for a builtin case name (case1|case2|case3).
RunConfig config_for_case(const std::string& name, const std::string& data_file = "");

/// Parses and validates a JSON config document.
RunConfig parse_config(const nlohmann::json& doc, const std::string& data_file = "");
RunConfig load_config(const std::string& path, const std::string& data_file = "");

/// Checks invariants beyond parsing; throws ConfigError naming the key.
void validate_config(const RunConfig& cfg);

struct RunSummary {
    std::string case_id;
    std::string status;  // "converged" | "solver-failure"
    double energy_J = 0.0;
    double energy_MJ = 0.0;
    std::string arc_label;
    int arc_segments = 0;
    double final_epsilon = 0.0;
    int mesh_points = 0;
    double wall_seconds = 0.0;
    DiagnosticsReport diag;
    ContinuationTrace trace;
};

nlohmann::json summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const nlohmann::json& j);

/// Executes continuation + postprocess, writes artifacts into output.dir.
/// Returns the summary; `summary.status` distinguishes solver failure.
RunSummary run(const RunConfig& cfg);

/// Trajectory CSV with header t,x1,x2,x3,lam1,lam2,lam3,u,u_trig,H1,H,E_cum.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

struct SweepPoint {
    double epsilon;
    double energy_J;
    bool converged;
};

/// Set-2 continuation pausing at each listed epsilon (strictly decreasing).
std::vector<SweepPoint> sweep_epsilon(const RunConfig& cfg, const std::vector<double>& eps_list);

void write_sweep_csv(const std::vector<SweepPoint>& points, const std::filesystem::path& path);

}  // namespace wec
