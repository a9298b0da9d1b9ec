#pragma once

#include "lrbandit/recovery.hpp"
#include "lrbandit/trace.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lrbandit {

struct ConfigError : Error {
    using Error::Error;
};

// LowLOC refused because its net would not fit
struct InfeasibleScale : Error {
    InfeasibleScale(const std::string& what, double estimated) : Error(what), estimated_size(estimated) {}
    double estimated_size;
};

enum class Algo { oful, lowestr, lowoful, lowloc, lowgloc };

Algo algo_from_name(const std::string& s);
std::string algo_name(Algo a);

struct ExperimentConfig {
    Algo algo = Algo::lowestr;
    int d1 = 10;
    int d2 = 10;
    int r = 3;
    double omega_r = 0.5;
    double sigma = 0.01;
    double delta = 0.01;
    int T = 3000;
    std::string t1 = "200";  // integer, "auto" = floor(100/omega_r), or "theory"
    int n_arms = 100;
    int runs = 20;
    std::uint64_t base_seed = 0;
    std::string link = "identity";
    std::string output_dir;

    // LowLOC / LowGLOC
    double net_eps = 0.0;  // 0 means 1/T
    std::string bt_schedule = "default";
    double net_cap = 5e5;
    std::string net_cache_dir;

    // stage-1 solver step: "lipschitz" or a positive number
    std::string solver_step = "lipschitz";
    // OFUL-family radius: noise scale on the log-det term (1 = published radius)
    double noise_scale = 1.0;
    int workers = 0;  // 0 = hardware concurrency

    void validate() const;
    int resolved_t1() const;
    double resolved_eps() const;
};

struct Checkpoint {
    int t = 0;
    double mean = 0.0;
    double sd = 0.0;
};

struct RunSummary {
    ExperimentConfig config;
    int runs = 0;
    std::vector<Checkpoint> checkpoints;
    double wall_seconds = 0.0;  // reported, never written to disk
};

struct ExperimentResult {
    std::vector<RegretTrace> traces;
    std::vector<RecoveryReport> recovery;  // lowestr only
    RunSummary summary;
};

std::vector<int> checkpoint_times(int T);
RunSummary summarize(const std::vector<RegretTrace>& traces, const ExperimentConfig& cfg);

ExperimentResult run_experiment(const ExperimentConfig& cfg);
void write_outputs(const ExperimentResult& res, const std::filesystem::path& dir);

struct SweepRow {
    double omega_r = 0.0;
    int t1 = 0;
    int runs = 0;
    double mean = 0.0;
    double sd = 0.0;
};

int sweep_t1(double omega_r);
std::vector<SweepRow> run_omega_sweep(const ExperimentConfig& base, const std::vector<double>& omegas);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);

// shortest round-trip decimal
std::string format_double(double v);

void write_csv(const std::vector<RegretTrace>& traces, const std::filesystem::path& path);
std::vector<RegretTrace> read_csv(const std::filesystem::path& path);

std::string summary_to_json(const RunSummary& s);
std::string config_to_text(const ExperimentConfig& cfg);

struct ChartSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> mean;
    std::vector<double> sd;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<ChartSeries> series;
};

ChartSeries series_from_sweep(const std::vector<SweepRow>& rows, const std::string& label);
// mean +- sd of cumulative regret per round, thinned to at most max_points
ChartSeries series_from_traces(const std::vector<RegretTrace>& traces, const std::string& label,
                               int max_points = 300);

// band polygon in data coordinates: upper edge left to right, then lower edge back
std::vector<std::pair<double, double>> band_vertices(const ChartSeries& s);

std::string render_chart(const ChartSpec& spec);
void emit_chart(const ChartSpec& spec, const std::filesystem::path& path);

}  // namespace lrbandit
