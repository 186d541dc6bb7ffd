#include "starcco/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "starcco/env.hpp"

namespace starcco {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* const kAxisNames[] = {"grids", "n_ris", "elements", "size_case1", "size_case2", "size_case3", "frequency"};

const std::set<std::string> kStrategies = {"AVUS", "LFUS", "BM1", "BM2", "NoRIS"};

std::size_t exact_sqrt(double v, const char* what) {
    const auto r = static_cast<std::size_t>(std::llround(std::sqrt(v)));
    if (v < 1.0 || static_cast<double>(r * r) != v)
        throw PlanError(std::string(what) + " must be a perfect square, got " + format_number(v));
    return r;
}

std::string sanitize(std::string s) {
    for (auto& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

std::string cell_dir_name(SweepAxis axis, double value, const std::string& strategy, std::uint64_t seed) {
    return "cells/" + to_string(axis) + "-" + format_number(value) + "/" + strategy + "/seed-" + std::to_string(seed);
}

} // namespace

std::string to_string(SweepAxis a) { return kAxisNames[static_cast<int>(a)]; }

SweepAxis sweep_axis_from_string(const std::string& s) {
    for (int i = 0; i < 7; ++i)
        if (s == kAxisNames[i]) return static_cast<SweepAxis>(i);
    throw PlanError("unknown sweep axis '" + s + "'");
}

void ExperimentPlan::validate() const {
    if (seeds.empty()) throw PlanError("plan needs at least one seed");
    if (strategies.empty()) throw PlanError("plan needs at least one strategy");
    for (const auto& s : strategies)
        if (!kStrategies.count(s)) throw PlanError("unknown strategy '" + s + "'");
    for (std::size_t i = 1; i < values.size(); ++i)
        if (!(values[i] > values[i - 1])) throw PlanError("axis values must be strictly increasing");
    if (budget_steps == 0) throw PlanError("step budget must be positive");
    if (threads == 0) throw PlanError("thread count must be positive");
    try {
        train.validate();
        for (double v : values) cell_scenario(*this, v, strategies.front()).validate();
    } catch (const InvalidArgument& e) {
        throw PlanError(e.what());
    }
}

ExperimentPlan plan_from_json(const json& j) {
    ExperimentPlan p;
    try {
        p.name = j.value("name", p.name);
        p.axis = sweep_axis_from_string(j.at("axis").get<std::string>());
        p.values = j.value("values", std::vector<double>{});
        p.strategies = j.value("strategies", std::vector<std::string>{"AVUS", "LFUS", "BM1", "BM2", "NoRIS"});
        p.seeds = j.value("seeds", std::vector<std::uint64_t>{1, 2, 3});
        if (j.contains("budget")) {
            const auto& b = j.at("budget");
            p.budget_episodes = b.value("episodes", p.budget_episodes);
            p.budget_steps = b.value("steps", p.budget_steps);
        }
        p.scenario = j.value("scenario", json::object());
        if (j.contains("train")) p.train = train_config_from_json(j.at("train"));
        p.threads = j.value("threads", p.threads);
    } catch (const json::exception& e) {
        throw PlanError(std::string("malformed plan: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw PlanError(e.what());
    }
    p.validate();
    return p;
}

json to_json(const ExperimentPlan& p) {
    return {{"name", p.name},
            {"axis", to_string(p.axis)},
            {"values", p.values},
            {"strategies", p.strategies},
            {"seeds", p.seeds},
            {"budget", {{"episodes", p.budget_episodes}, {"steps", p.budget_steps}}},
            {"scenario", p.scenario},
            {"train", to_json(p.train)},
            {"threads", p.threads}};
}

ExperimentPlan load_plan(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw PlanError("cannot open plan file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw PlanError("plan " + path.string() + " is not valid JSON: " + e.what());
    }
    return plan_from_json(j);
}

Scenario cell_scenario(const ExperimentPlan& plan, double v, const std::string& strategy) {
    json base = plan.scenario;
    if (base.empty()) base = {{"preset", "desk"}};
    Scenario s;
    try {
        s = scenario_from_json(base);
    } catch (const json::exception& e) {
        throw PlanError(std::string("malformed scenario: ") + e.what());
    }
    const double h = s.ris.empty() ? 0.5 : s.ris.front().height;
    const double w = s.ris.empty() ? 1.0 : s.ris.front().width;
    const std::size_t n_ris = s.ris.size();
    // surfaces scale their element grid with area, one element per pitch^2
    const double pitch = base.value("element_pitch", 0.5);
    auto resize_surfaces = [&](double height, double width) {
        s.ris = desk_placements(s.rs, n_ris, height, width);
        s.elements.k_h = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(width / pitch)));
        s.elements.k_v = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(height / pitch)));
        s.elements.k_re = s.elements.k_h * s.elements.k_v / 2;
    };
    switch (plan.axis) {
    case SweepAxis::Grids: {
        const std::size_t n = exact_sqrt(v, "grid count");
        s.rs = static_cast<double>(n) * s.rg;
        s.ris = desk_placements(s.rs, n_ris, h, w);
        break;
    }
    case SweepAxis::NRis:
        if (v < 0.0 || v != std::floor(v)) throw PlanError("surface count must be a non-negative integer");
        s.ris = desk_placements(s.rs, static_cast<std::size_t>(v), h, w);
        break;
    case SweepAxis::Elements: {
        const std::size_t k = exact_sqrt(v, "element count");
        s.elements.k_h = k;
        s.elements.k_v = k;
        s.elements.k_re = k * k / 2;
        break;
    }
    case SweepAxis::SizeCase1: resize_surfaces(v, 2.0); break;
    case SweepAxis::SizeCase2: resize_surfaces(v, 6.0); break;
    case SweepAxis::SizeCase3: resize_surfaces(2.0, v); break;
    case SweepAxis::Frequency:
        if (!(v > 0.0)) throw PlanError("frequency must be positive (GHz)");
        s.channel.carrier_frequency = v * 1e9;
        s.reference_gain_from_frequency = true;
        if (v >= 24.0) s.channel.rician = {ChannelParams::kLosOnly, ChannelParams::kLosOnly, ChannelParams::kLosOnly};
        break;
    }
    if (strategy == "NoRIS") s.ris.clear();
    s.env.episode_length = plan.budget_steps;
    s.name += "/" + to_string(plan.axis) + "=" + format_number(v);
    return s;
}

TrainConfig cell_train_config(const ExperimentPlan& plan) {
    TrainConfig c = plan.train;
    c.episodes = plan.budget_episodes;
    c.steps_per_episode = plan.budget_steps;
    return c;
}

void ResultTable::write_csv(std::ostream& os) const {
    os << "axis,axis_value,strategy,seed,final_coverage,final_capacity,curve_path,archive_path,status\n";
    for (const auto& r : rows)
        os << r.axis << ',' << format_number(r.axis_value) << ',' << r.strategy << ',' << r.seed << ','
           << format_number(r.final_coverage) << ',' << format_number(r.final_capacity) << ',' << r.curve_path << ','
           << r.archive_path << ',' << sanitize(r.status) << '\n';
}

ResultTable ResultTable::read_csv(std::istream& is) {
    ResultTable t;
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("empty result table");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() < 9) throw InvalidArgument("result row has " + std::to_string(f.size()) + " fields: " + line);
        ResultRow r;
        r.axis = f[0];
        r.axis_value = std::stod(f[1]);
        r.strategy = f[2];
        r.seed = std::stoull(f[3]);
        r.final_coverage = std::stod(f[4]);
        r.final_capacity = std::stod(f[5]);
        r.curve_path = f[6];
        r.archive_path = f[7];
        r.status = f[8];
        t.rows.push_back(std::move(r));
    }
    return t;
}

void ResultTable::save(const fs::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_csv(out);
}

ResultTable ResultTable::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_csv(in);
}

namespace {

struct Cell {
    double value;
    std::string strategy;
    std::uint64_t seed;
};

std::string cell_key(const Scenario& s, const TrainConfig& c, const std::string& strategy, std::uint64_t seed) {
    const json j = {{"scenario", to_json(s)}, {"train", to_json(c)}, {"strategy", strategy}, {"seed", seed}};
    return fnv1a_hex(j.dump());
}

std::optional<ResultRow> try_resume(const fs::path& dir, const std::string& key, ResultRow row) {
    std::ifstream in(dir / "cell.json");
    if (!in) return std::nullopt;
    json j;
    try {
        in >> j;
        if (j.at("key").get<std::string>() != key || j.at("status").get<std::string>() != "ok") return std::nullopt;
        row.final_coverage = j.at("final_coverage").get<double>();
        row.final_capacity = j.at("final_capacity").get<double>();
    } catch (const json::exception&) {
        return std::nullopt;
    }
    return row;
}

ResultRow run_cell(const ExperimentPlan& plan, const Cell& cell, const fs::path& out_dir, bool resume) {
    ResultRow row;
    row.axis = to_string(plan.axis);
    row.axis_value = cell.value;
    row.strategy = cell.strategy;
    row.seed = cell.seed;
    const std::string rel = cell_dir_name(plan.axis, cell.value, cell.strategy, cell.seed);
    row.curve_path = rel + "/curves.csv";
    row.archive_path = rel + "/archive.csv";
    const fs::path dir = out_dir / rel;

    try {
        const Scenario scenario = cell_scenario(plan, cell.value, cell.strategy);
        const TrainConfig config = cell_train_config(plan);
        const std::string key = cell_key(scenario, config, cell.strategy, cell.seed);
        if (resume && fs::exists(out_dir / row.curve_path) && fs::exists(out_dir / row.archive_path))
            if (auto done = try_resume(dir, key, row)) return *done;

        fs::create_directories(dir);
        // every actor and the evaluator share one seed so strategies see the same channels
        const EnvFactory factory = [&](std::size_t) { return std::make_unique<StarRisEnv>(scenario, cell.seed); };
        const TrainResult result =
            train(Strategy::by_name(cell.strategy), factory, config, cell.seed, to_json(scenario).dump());
        row.final_coverage = result.final_point[0];
        row.final_capacity = result.final_point[1];
        auto write = [](const fs::path& path, auto&& emit) {
            std::ofstream out(path);
            if (out) emit(out);
            if (!out) throw std::runtime_error("cannot write " + path.string());
        };
        write(out_dir / row.curve_path, [&](std::ostream& os) { write_curves_csv(os, result.curves); });
        write(out_dir / row.archive_path, [&](std::ostream& os) { result.archive.write_csv(os); });
        save_checkpoint(dir / "checkpoint.txt", result.checkpoint);
        const json meta = {{"key", key},
                           {"status", "ok"},
                           {"config_hash", result.config_hash},
                           {"final_coverage", row.final_coverage},
                           {"final_capacity", row.final_capacity},
                           {"iterations", result.diagnostics.iterations}};
        std::ofstream(dir / "cell.json") << meta.dump(2) << '\n';
    } catch (const std::exception& e) {
        row.status = std::string("failed: ") + e.what();
        spdlog::error("cell {} failed: {}", rel, e.what());
        std::error_code ec;
        fs::create_directories(dir, ec);
        std::ofstream(dir / "error.txt") << e.what() << '\n';
        std::ofstream(dir / "cell.json") << json{{"status", "failed"}, {"error", e.what()}}.dump(2) << '\n';
        if (!fs::exists(out_dir / row.curve_path)) std::ofstream(out_dir / row.curve_path) << "episode,strategy,seed,cum_coverage,cum_capacity,scalarized_reward\n";
        if (!fs::exists(out_dir / row.archive_path)) std::ofstream(out_dir / row.archive_path) << "coverage,capacity,strategy,seed,preference,config_hash\n";
    }
    return row;
}

} // namespace

ResultTable run_plan(const ExperimentPlan& plan, const RunOptions& options) {
    plan.validate();
    std::vector<Cell> cells;
    for (double v : plan.values)
        for (const auto& s : plan.strategies)
            for (auto seed : plan.seeds) cells.push_back({v, s, seed});

    fs::create_directories(options.out_dir);
    ResultTable table;
    table.rows.resize(cells.size());
    const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads ? options.threads : plan.threads,
                                                                  std::max<std::size_t>(1, cells.size())));
    std::atomic<std::size_t> next{0};
    std::mutex hook_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            table.rows[i] = run_cell(plan, cells[i], options.out_dir, options.resume);
            if (options.on_cell) {
                std::lock_guard lock(hook_mutex);
                options.on_cell(table.rows[i]);
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    table.save(options.out_dir / "results.csv");
    std::ofstream(options.out_dir / "plan.json") << to_json(plan).dump(2) << '\n';
    return table;
}

} // namespace starcco
