// bandit-sim: run, sweep-omega and chart subcommands
#include "lrbandit/experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace lrbandit;

namespace {

struct Flags {
    std::string algo = "lowestr";
    std::string omegas = "0.05,0.1,0.2,0.3,0.4,0.5";
    std::string config;  // consumed by expand_config before parsing
};

void add_experiment_options(CLI::App* app, ExperimentConfig& c, Flags& f) {
    app->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app->add_option("--config", f.config, "key=value file; flags given on the command line win");
    app->add_option("--algo", f.algo, "oful | lowestr | lowoful | lowloc | lowgloc")->capture_default_str();
    app->add_option("--d1", c.d1)->capture_default_str();
    app->add_option("--d2", c.d2)->capture_default_str();
    app->add_option("--rank", c.r)->capture_default_str();
    app->add_option("--omega-r", c.omega_r)->capture_default_str();
    app->add_option("--sigma", c.sigma)->capture_default_str();
    app->add_option("--delta", c.delta)->capture_default_str();
    app->add_option("--horizon", c.T)->capture_default_str();
    app->add_option("--t1", c.t1, "integer, auto (100/omega_r) or theory")->capture_default_str();
    app->add_option("--arms", c.n_arms)->capture_default_str();
    app->add_option("--runs", c.runs)->capture_default_str();
    app->add_option("--seed", c.base_seed)->capture_default_str();
    app->add_option("--link", c.link, "identity | logistic")->capture_default_str();
    app->add_option("--out", c.output_dir, "output directory")->required();
    app->add_option("--net-eps", c.net_eps, "LowLOC net radius (default 1/horizon)");
    app->add_option("--bt-schedule", c.bt_schedule, "default | lemma3 | lemma7 | empirical")->capture_default_str();
    app->add_option("--net-cap", c.net_cap)->capture_default_str();
    app->add_option("--net-cache", c.net_cache_dir, "directory for cached nets");
    app->add_option("--solver-step", c.solver_step, "lipschitz or a fixed step")->capture_default_str();
    app->add_option("--noise-scale", c.noise_scale, "OFUL-family radius noise scale (1 = published)")
        ->capture_default_str();
    app->add_option("--workers", c.workers, "0 = all cores")->capture_default_str();
}

// Expands `--config FILE` into flags placed before the command-line ones, so the
// command line wins under TakeLast. Keys are flag names without the dashes.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    for (std::size_t i = 1; i < args.size(); ++i) {
        std::string path;
        std::size_t span = 0;
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1], span = 2;
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9), span = 1;
        if (span == 0) continue;
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config file " + path);
        std::vector<std::string> flags;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
            const auto trim = [](std::string v) {
                const auto a = v.find_first_not_of(" \t\r");
                if (a == std::string::npos) return std::string();
                return v.substr(a, v.find_last_not_of(" \t\r") - a + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
            flags.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
        }
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + span));
        // right after the subcommand name
        std::size_t at = 1;
        while (at < args.size() && args[at].rfind("-", 0) == 0) ++at;
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min(at + 1, args.size())), flags.begin(), flags.end());
        break;
    }
    return args;
}

std::vector<double> parse_omegas(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw ConfigError("bad omega value '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("--omegas is empty");
    return out;
}

void print_summary(const RunSummary& s) {
    std::cout << algo_name(s.config.algo) << ": " << s.runs << " runs in " << s.wall_seconds << " s\n";
    for (const auto& c : s.checkpoints) std::cout << "  t=" << c.t << "  mean=" << c.mean << "  sd=" << c.sd << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for low-rank linear and generalized linear bandits"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    Flags flags;
    auto* run = app.add_subcommand("run", "run repeated episodes of one algorithm");
    add_experiment_options(run, cfg, flags);

    ExperimentConfig sweep_cfg;
    Flags sweep_flags;
    auto* sweep = app.add_subcommand("sweep-omega", "LowESTR regret at T over a list of omega_r values");
    add_experiment_options(sweep, sweep_cfg, sweep_flags);
    sweep->add_option("--omegas", sweep_flags.omegas, "comma separated")->capture_default_str();

    std::vector<std::string> chart_in;
    std::string chart_out;
    std::string chart_title;
    auto* chart = app.add_subcommand("chart", "SVG chart of a run or sweep directory");
    chart->add_option("--in", chart_in, "run or sweep directory (repeatable)")->required();
    chart->add_option("--out", chart_out, "SVG path")->required();
    chart->add_option("--title", chart_title);

    try {
        auto args = expand_config(argc, argv);
        args.erase(args.begin());
        std::reverse(args.begin(), args.end());  // CLI11 takes the vector form reversed
        app.parse(std::move(args));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            cfg.algo = algo_from_name(flags.algo);
            const auto res = run_experiment(cfg);
            print_summary(res.summary);
        } else if (sweep->parsed()) {
            sweep_cfg.algo = algo_from_name(sweep_flags.algo);
            const auto rows = run_omega_sweep(sweep_cfg, parse_omegas(sweep_flags.omegas));
            std::cout << "omega_r  t1  mean  sd\n";
            for (const auto& r : rows) std::cout << r.omega_r << "  " << r.t1 << "  " << r.mean << "  " << r.sd << '\n';
        } else if (chart->parsed()) {
            ChartSpec spec;
            spec.title = chart_title;
            for (const auto& dir : chart_in) {
                const std::filesystem::path d(dir);
                if (std::filesystem::exists(d / "sweep.csv")) {
                    spec.x_label = "omega_r";
                    spec.y_label = "cumulative regret at T";
                    spec.series.push_back(series_from_sweep(read_sweep_csv(d / "sweep.csv"), d.filename().string()));
                } else if (std::filesystem::exists(d / "traces.csv")) {
                    const auto traces = read_csv(d / "traces.csv");
                    spec.x_label = "t";
                    spec.y_label = "cumulative regret";
                    const std::string label = traces.empty() ? d.filename().string() : traces.front().algo;
                    spec.series.push_back(series_from_traces(traces, label));
                } else {
                    throw ConfigError(dir + " has neither sweep.csv nor traces.csv");
                }
            }
            emit_chart(spec, chart_out);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const InfeasibleScale& e) {
        std::cerr << "refused: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
