#include "lrbandit/experiment.hpp"

#include "lrbandit/covering.hpp"
#include "lrbandit/lowloc.hpp"
#include "lrbandit/lowoful.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

namespace lrbandit {

Algo algo_from_name(const std::string& s) {
    if (s == "oful") return Algo::oful;
    if (s == "lowestr") return Algo::lowestr;
    if (s == "lowoful") return Algo::lowoful;
    if (s == "lowloc") return Algo::lowloc;
    if (s == "lowgloc") return Algo::lowgloc;
    throw ConfigError("unknown algo '" + s + "'");
}

std::string algo_name(Algo a) {
    switch (a) {
        case Algo::oful: return "oful";
        case Algo::lowestr: return "lowestr";
        case Algo::lowoful: return "lowoful";
        case Algo::lowloc: return "lowloc";
        case Algo::lowgloc: return "lowgloc";
    }
    return "?";
}

int sweep_t1(double omega_r) {
    if (!(omega_r > 0)) throw ConfigError("omega_r must be positive");
    // guard against 100/0.1 landing just under an integer
    return static_cast<int>(std::floor(100.0 / omega_r + 1e-9));
}

namespace {

BtSchedule schedule_for(const ExperimentConfig& c) {
    if (c.bt_schedule == "default") return c.algo == Algo::lowgloc ? BtSchedule::lemma7 : BtSchedule::lemma3;
    if (c.bt_schedule == "lemma3") return BtSchedule::lemma3;
    if (c.bt_schedule == "lemma7") return BtSchedule::lemma7;
    if (c.bt_schedule == "empirical") return BtSchedule::empirical;
    throw ConfigError("unknown bt-schedule '" + c.bt_schedule + "'");
}

SolverConfig solver_for(const ExperimentConfig& c) {
    SolverConfig s;
    if (c.solver_step == "lipschitz") {
        s.lipschitz_step = true;
        return s;
    }
    double v = 0;
    const auto* b = c.solver_step.data();
    auto [p, ec] = std::from_chars(b, b + c.solver_step.size(), v);
    if (ec != std::errc() || p != b + c.solver_step.size() || !(v > 0))
        throw ConfigError("solver-step must be 'lipschitz' or a positive number");
    s.step = v;
    return s;
}

}  // namespace

double ExperimentConfig::resolved_eps() const { return net_eps > 0 ? net_eps : 1.0 / T; }

int ExperimentConfig::resolved_t1() const {
    if (t1 == "auto") return sweep_t1(omega_r);
    if (t1 == "theory") return tuned_t1(d1, d2, r, T, omega_r);
    int v = 0;
    auto [p, ec] = std::from_chars(t1.data(), t1.data() + t1.size(), v);
    if (ec != std::errc() || p != t1.data() + t1.size()) throw ConfigError("t1 must be an integer, 'auto' or 'theory'");
    return v;
}

void ExperimentConfig::validate() const {
    if (d1 < 1 || d2 < 1) throw ConfigError("d1 and d2 must be positive");
    if (r < 1 || r > std::min(d1, d2)) throw ConfigError("rank must be in [1, min(d1, d2)]");
    if (!(omega_r > 0 && omega_r <= 0.5)) throw ConfigError("omega-r must be in (0, 0.5]");
    if (!(sigma >= 0 && sigma <= 1)) throw ConfigError("sigma must be in [0, 1]");
    if (!(delta > 0 && delta < 0.25)) throw ConfigError("delta must be in (0, 0.25)");
    if (T < 1) throw ConfigError("horizon must be positive");
    if (n_arms < 1) throw ConfigError("arms must be positive");
    if (runs < 1) throw ConfigError("runs must be positive");
    if (workers < 0) throw ConfigError("workers must be >= 0");
    if (!(noise_scale > 0)) throw ConfigError("noise-scale must be positive");
    if (link != "identity" && link != "logistic") throw ConfigError("link must be identity or logistic");
    if (link == "logistic" && algo != Algo::lowgloc) throw ConfigError("the logistic link needs algo=lowgloc");
    solver_for(*this);
    schedule_for(*this);
    if (algo == Algo::lowestr) {
        const int v = resolved_t1();
        if (v < 1 || v >= T) throw ConfigError("t1 must satisfy 1 <= t1 < horizon");
    }
    if (algo == Algo::lowloc || algo == Algo::lowgloc) {
        if (!(net_cap >= 1)) throw ConfigError("net-cap must be >= 1");
        const double eps = resolved_eps();
        if (!(eps > 0 && eps <= 2)) throw ConfigError("net-eps must be in (0, 2]");
        NetOptions o;
        o.cap = net_cap;
        const double est = estimate_net_size(d1, d2, r, eps, o);
        if (est > net_cap)
            throw InfeasibleScale("LowLOC net at this scale is infeasible: about " + format_double(std::round(est)) +
                                      " experts against a cap of " + format_double(net_cap),
                                  est);
    }
}

std::vector<int> checkpoint_times(int T) {
    std::vector<int> ts;
    for (int t : {100, 500, 1000, 3000})
        if (t < T) ts.push_back(t);
    ts.push_back(T);
    return ts;
}

RunSummary summarize(const std::vector<RegretTrace>& traces, const ExperimentConfig& cfg) {
    RunSummary s;
    s.config = cfg;
    s.runs = static_cast<int>(traces.size());
    for (int t : checkpoint_times(cfg.T)) {
        Checkpoint c;
        c.t = t;
        double sum = 0.0;
        for (const auto& tr : traces) sum += tr.cumulative.at(static_cast<std::size_t>(t - 1));
        const double n = static_cast<double>(traces.size());
        c.mean = n > 0 ? sum / n : 0.0;
        double ss = 0.0;
        for (const auto& tr : traces) {
            const double d = tr.cumulative.at(static_cast<std::size_t>(t - 1)) - c.mean;
            ss += d * d;
        }
        c.sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
        s.checkpoints.push_back(c);
    }
    return s;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const LinkSpec link = link_from_name(cfg.link);

    std::shared_ptr<const LowRankNet> net;
    if (cfg.algo == Algo::lowloc || cfg.algo == Algo::lowgloc) {
        NetOptions o;
        o.cap = cfg.net_cap;
        try {
            if (cfg.net_cache_dir.empty())
                net = std::make_shared<LowRankNet>(build_net(cfg.d1, cfg.d2, cfg.r, cfg.resolved_eps(), o));
            else
                net = std::make_shared<LowRankNet>(
                    build_net_cached(cfg.net_cache_dir, cfg.d1, cfg.d2, cfg.r, cfg.resolved_eps(), o));
        } catch (const CapExceeded& e) {
            throw InfeasibleScale(std::string("LowLOC net at this scale is infeasible: ") + e.what(),
                                  e.estimated_size);
        }
    }

    ExperimentResult res;
    res.traces.resize(static_cast<std::size_t>(cfg.runs));
    res.recovery.resize(cfg.algo == Algo::lowestr ? static_cast<std::size_t>(cfg.runs) : 0);

    auto one_run = [&](int i) {
        const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(i);
        const BanditInstance inst = make_diag_instance(cfg.d1, cfg.d2, cfg.r, cfg.omega_r, cfg.sigma, link);
        const ArmSet arms = sample_unit_arm_set(cfg.d1, cfg.d2, cfg.n_arms, seed);
        RegretTrace tr;
        switch (cfg.algo) {
            case Algo::oful:
                tr = oful_run(inst, arms, cfg.T, cfg.delta, seed, cfg.noise_scale);
                break;
            case Algo::lowoful:
                tr = lowoful_oracle_run(inst, arms, cfg.T, cfg.delta, seed, cfg.noise_scale);
                break;
            case Algo::lowestr: {
                LowEstrConfig lc;
                lc.T = cfg.T;
                lc.T1 = cfg.resolved_t1();
                lc.r = cfg.r;
                lc.omega_r = cfg.omega_r;
                lc.sigma = cfg.sigma;
                lc.delta = cfg.delta;
                lc.solver = solver_for(cfg);
                lc.noise_scale = cfg.noise_scale;
                auto out = lowestr_run(inst, arms, lc, seed);
                res.recovery[static_cast<std::size_t>(i)] = out.report;
                tr = std::move(out.trace);
                break;
            }
            case Algo::lowloc:
            case Algo::lowgloc: {
                LowLocConfig lc;
                lc.horizon = cfg.T;
                lc.delta = cfg.delta;
                lc.mode = cfg.algo == Algo::lowloc ? LowLocMode::linear : LowLocMode::glm;
                lc.link = link;
                lc.schedule = schedule_for(cfg);
                tr = lowloc_run(inst, arms, net, lc, seed);
                break;
            }
        }
        tr.run_id = i;
        tr.seed = seed;
        res.traces[static_cast<std::size_t>(i)] = std::move(tr);
    };

    int workers = cfg.workers > 0 ? cfg.workers : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, cfg.runs);
    if (workers == 1) {
        for (int i = 0; i < cfg.runs; ++i) one_run(i);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex fail_mu;
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int i = next++; i < cfg.runs; i = next++) {
                    try {
                        one_run(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lk(fail_mu);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    res.summary = summarize(res.traces, cfg);
    res.summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!cfg.output_dir.empty()) write_outputs(res, cfg.output_dir);
    return res;
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error("format_double: conversion failed");
    return std::string(buf, p);
}

void write_csv(const std::vector<RegretTrace>& traces, const std::filesystem::path& path) {
    std::vector<const RegretTrace*> order;
    for (const auto& t : traces) order.push_back(&t);
    std::stable_sort(order.begin(), order.end(),
                     [](const RegretTrace* a, const RegretTrace* b) { return a->run_id < b->run_id; });
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "algo,run_id,seed,t,instant_regret,cumulative_regret\n";
    for (const auto* tr : order) {
        for (std::size_t k = 0; k < tr->instant.size(); ++k) {
            out << tr->algo << ',' << tr->run_id << ',' << tr->seed << ',' << (k + 1) << ','
                << format_double(tr->instant[k]) << ',' << format_double(tr->cumulative[k]) << '\n';
        }
    }
    if (!out) throw Error("failed writing " + path.string());
}

namespace {

template <class T>
T parse_field(const std::string& s, const std::string& what) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw Error("csv: bad " + what + " '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

std::vector<RegretTrace> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "algo,run_id,seed,t,instant_regret,cumulative_regret")
        throw Error(path.string() + ": unexpected header");
    std::vector<RegretTrace> traces;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 6) throw Error(path.string() + ": malformed row");
        const int run = parse_field<int>(f[1], "run_id");
        if (traces.empty() || traces.back().run_id != run || traces.back().algo != f[0]) {
            traces.emplace_back();
            traces.back().algo = f[0];
            traces.back().run_id = run;
            traces.back().seed = parse_field<std::uint64_t>(f[2], "seed");
        }
        auto& tr = traces.back();
        const int t = parse_field<int>(f[3], "t");
        if (t != tr.horizon() + 1) throw Error(path.string() + ": rows out of order");
        tr.instant.push_back(parse_field<double>(f[4], "instant_regret"));
        tr.cumulative.push_back(parse_field<double>(f[5], "cumulative_regret"));
    }
    return traces;
}

std::string config_to_text(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "algo=" << algo_name(c.algo) << '\n'
      << "d1=" << c.d1 << '\n'
      << "d2=" << c.d2 << '\n'
      << "rank=" << c.r << '\n'
      << "omega-r=" << format_double(c.omega_r) << '\n'
      << "sigma=" << format_double(c.sigma) << '\n'
      << "delta=" << format_double(c.delta) << '\n'
      << "horizon=" << c.T << '\n'
      << "t1=" << c.t1 << '\n'
      << "arms=" << c.n_arms << '\n'
      << "runs=" << c.runs << '\n'
      << "seed=" << c.base_seed << '\n'
      << "link=" << c.link << '\n';
    if (c.algo == Algo::lowloc || c.algo == Algo::lowgloc) {
        o << "net-eps=" << format_double(c.resolved_eps()) << '\n'
          << "bt-schedule=" << c.bt_schedule << '\n'
          << "net-cap=" << format_double(c.net_cap) << '\n';
    }
    if (c.algo == Algo::lowestr) o << "solver-step=" << c.solver_step << '\n';
    if (c.algo == Algo::oful || c.algo == Algo::lowestr || c.algo == Algo::lowoful)
        o << "noise-scale=" << format_double(c.noise_scale) << '\n';
    return o.str();
}

std::string summary_to_json(const RunSummary& s) {
    nlohmann::ordered_json j;
    const auto& c = s.config;
    nlohmann::ordered_json cfg;
    cfg["algo"] = algo_name(c.algo);
    cfg["d1"] = c.d1;
    cfg["d2"] = c.d2;
    cfg["r"] = c.r;
    cfg["omega_r"] = c.omega_r;
    cfg["sigma"] = c.sigma;
    cfg["delta"] = c.delta;
    cfg["T"] = c.T;
    cfg["T1"] = c.algo == Algo::lowestr ? nlohmann::ordered_json(c.resolved_t1()) : nlohmann::ordered_json(nullptr);
    cfg["n_arms"] = c.n_arms;
    cfg["runs"] = c.runs;
    cfg["base_seed"] = c.base_seed;
    cfg["link"] = c.link;
    if (c.algo == Algo::oful || c.algo == Algo::lowestr || c.algo == Algo::lowoful) cfg["noise_scale"] = c.noise_scale;
    if (c.algo == Algo::lowloc || c.algo == Algo::lowgloc) {
        cfg["net_eps"] = c.resolved_eps();
        cfg["bt_schedule"] = c.bt_schedule;
    }
    j["config"] = cfg;
    j["runs"] = s.runs;
    nlohmann::ordered_json cps = nlohmann::ordered_json::array();
    for (const auto& cp : s.checkpoints) {
        nlohmann::ordered_json e;
        e["t"] = cp.t;
        e["mean"] = cp.mean;
        e["sd"] = cp.sd;
        cps.push_back(e);
    }
    j["checkpoints"] = cps;
    return j.dump(2) + "\n";
}

void write_outputs(const ExperimentResult& res, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_csv(res.traces, dir / "traces.csv");
    auto put = [&](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        out << text;
        if (!out) throw Error("failed writing " + p.string());
    };
    put(dir / "summary.json", summary_to_json(res.summary));
    put(dir / "config.txt", config_to_text(res.summary.config));
    const auto& c = res.summary.config;
    const LinkSpec link = link_from_name(c.link);
    put(dir / "instance.json",
        instance_to_json(make_diag_instance(c.d1, c.d2, c.r, c.omega_r, c.sigma, link)) + "\n");
    if (!res.recovery.empty()) {
        std::string lines;
        for (const auto& r : res.recovery) lines += report_to_json(r) + "\n";
        put(dir / "recovery.jsonl", lines);
    }
}

std::vector<SweepRow> run_omega_sweep(const ExperimentConfig& base, const std::vector<double>& omegas) {
    if (omegas.empty()) throw ConfigError("sweep: no omega values");
    std::vector<SweepRow> rows;
    for (double w : omegas) {
        ExperimentConfig c = base;
        c.omega_r = w;
        c.t1 = std::to_string(sweep_t1(w));
        if (!base.output_dir.empty())
            c.output_dir = (std::filesystem::path(base.output_dir) / ("omega_" + format_double(w))).string();
        const auto res = run_experiment(c);
        const auto& last = res.summary.checkpoints.back();
        rows.push_back(SweepRow{w, c.resolved_t1(), res.summary.runs, last.mean, last.sd});
    }
    if (!base.output_dir.empty()) write_sweep_csv(rows, std::filesystem::path(base.output_dir) / "sweep.csv");
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "omega_r,t1,runs,mean_cumulative_regret,sd_cumulative_regret\n";
    for (const auto& r : rows)
        out << format_double(r.omega_r) << ',' << r.t1 << ',' << r.runs << ',' << format_double(r.mean) << ','
            << format_double(r.sd) << '\n';
}

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "omega_r,t1,runs,mean_cumulative_regret,sd_cumulative_regret")
        throw Error(path.string() + ": unexpected header");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw Error(path.string() + ": malformed row");
        rows.push_back(SweepRow{parse_field<double>(f[0], "omega_r"), parse_field<int>(f[1], "t1"),
                                parse_field<int>(f[2], "runs"), parse_field<double>(f[3], "mean"),
                                parse_field<double>(f[4], "sd")});
    }
    return rows;
}

}  // namespace lrbandit
