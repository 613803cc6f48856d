// Command-line front end: run | validate | sweep-epsilon.
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <wec/config.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitSolverFailure = 2;

wec::RunConfig build_config(const std::string& case_name, const std::string& config_path,
                            const std::string& out_dir, const std::string& formats) {
    wec::RunConfig cfg;
    if (!case_name.empty() && !config_path.empty())
        throw wec::ConfigError("case", "--case and --config are mutually exclusive");
    if (!case_name.empty())
        cfg = wec::config_for_case(case_name);
    else if (!config_path.empty())
        cfg = wec::load_config(config_path);
    else
        throw wec::ConfigError("case", "one of --case or --config is required");

    if (const char* env = std::getenv("WEC_OUT_DIR"); env && *env) cfg.output.dir = env;
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    if (!formats.empty()) {
        cfg.output.csv = cfg.output.json = false;
        std::stringstream ss(formats);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok == "csv")
                cfg.output.csv = true;
            else if (tok == "json")
                cfg.output.json = true;
            else
                throw wec::ConfigError("output.formats", "unknown format: " + tok);
        }
    }
    wec::validate_config(cfg);
    return cfg;
}

std::vector<double> parse_eps_list(const std::string& s) {
    std::vector<double> eps;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) eps.push_back(std::stod(tok));
    return eps;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Indirect optimal-control solver for the point-absorber wave-energy converter"};
    app.require_subcommand(1);

    std::string case_name, config_path, out_dir, formats, eps_arg;
    int jobs = 1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--case", case_name, "builtin case: case1 | case2 | case3");
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--out-dir", out_dir, "output directory (overrides WEC_OUT_DIR)");
        cmd->add_option("--format", formats, "comma list of csv,json");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "solve a case and emit trajectory + summary");
    add_common(cmd_run);

    CLI::App* cmd_validate = app.add_subcommand("validate", "check a config without solving");
    cmd_validate->add_option("--config", config_path, "JSON config file")->required();

    CLI::App* cmd_sweep =
        app.add_subcommand("sweep-epsilon", "record converged energy at listed epsilons");
    add_common(cmd_sweep);
    cmd_sweep->add_option("--epsilons", eps_arg, "strictly decreasing comma list")->required();
    cmd_sweep->add_option("--jobs", jobs, "independent continuation chains for sweep chunks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_validate->parsed()) {
            wec::RunConfig cfg = wec::load_config(config_path);
            std::cout << "valid: " << cfg.spec.name << "\n";
            return kExitOk;
        }
        if (cmd_run->parsed()) {
            wec::RunConfig cfg = build_config(case_name, config_path, out_dir, formats);
            const wec::RunSummary s = wec::run(cfg);
            std::cout << wec::summary_to_json(s).dump(2) << "\n";
            return s.status == "converged" ? kExitOk : kExitSolverFailure;
        }
        if (cmd_sweep->parsed()) {
            wec::RunConfig cfg = build_config(case_name, config_path, out_dir, formats);
            const std::vector<double> eps = parse_eps_list(eps_arg);
            std::vector<wec::SweepPoint> points;
            jobs = std::max(1, jobs);
            if (jobs == 1 || eps.size() < 2) {
                points = wec::sweep_epsilon(cfg, eps);
            } else {
                // Contiguous chunks, one warm-start chain per thread.
                const int nchunks = std::min<int>(jobs, static_cast<int>(eps.size()));
                std::vector<std::vector<wec::SweepPoint>> results(nchunks);
                std::vector<std::thread> threads;
                for (int c = 0; c < nchunks; ++c) {
                    std::vector<double> chunk;
                    for (size_t i = c; i < eps.size(); i += nchunks) chunk.push_back(eps[i]);
                    std::sort(chunk.rbegin(), chunk.rend());
                    threads.emplace_back([&, c, chunk]() {
                        results[c] = wec::sweep_epsilon(cfg, chunk);
                    });
                }
                for (auto& t : threads) t.join();
                for (auto& r : results) points.insert(points.end(), r.begin(), r.end());
                std::sort(points.begin(), points.end(),
                          [](const auto& a, const auto& b) { return a.epsilon > b.epsilon; });
            }
            std::filesystem::create_directories(cfg.output.dir);
            const auto csv_path =
                std::filesystem::path(cfg.output.dir) / (cfg.spec.name + "_epsilon_sweep.csv");
            wec::write_sweep_csv(points, csv_path);
            bool all_ok = !points.empty();
            for (const auto& p : points) {
                std::cout << p.epsilon << "," << (p.converged ? std::to_string(p.energy_J) : "failed")
                          << "\n";
                all_ok = all_ok && p.converged;
            }
            return all_ok ? kExitOk : kExitSolverFailure;
        }
    } catch (const wec::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolverFailure;
    }
    return kExitConfigError;
}
