// starcco: experiment runner for the STAR-RIS coverage/capacity simulator.
//
//   starcco run plan.json --out-dir out
//   starcco chart out/results.csv
//   starcco verify
//   starcco pareto out/cells/.../archive.csv

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "starcco/harness.hpp"

namespace fs = std::filesystem;
using namespace starcco;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPlan = 1;
constexpr int kExitVerify = 2;

int cmd_run(const std::string& plan_path, const fs::path& out_dir, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> episodes, std::optional<std::size_t> steps, std::size_t threads, bool fresh) {
    ExperimentPlan plan;
    try {
        plan = load_plan(plan_path);
        if (seed) plan.seeds = {*seed};
        if (episodes) plan.budget_episodes = *episodes;
        if (steps) plan.budget_steps = *steps;
        plan.validate();
    } catch (const std::exception& e) {
        std::cerr << "plan error: " << e.what() << '\n';
        return kExitPlan;
    }
    RunOptions opt;
    opt.out_dir = out_dir;
    opt.threads = threads;
    opt.resume = !fresh;
    opt.on_cell = [](const ResultRow& r) {
        std::cerr << r.axis << '=' << format_number(r.axis_value) << ' ' << r.strategy << " seed " << r.seed << ": "
                  << r.status << " (" << format_number(r.final_coverage) << ", " << format_number(r.final_capacity)
                  << ")\n";
    };
    const ResultTable table = run_plan(plan, opt);
    std::size_t failed = 0;
    for (const auto& r : table.rows) failed += r.status == "ok" ? 0 : 1;
    std::cout << "wrote " << (out_dir / "results.csv").string() << " (" << table.rows.size() << " rows, " << failed
              << " failed)\n";
    return kExitOk;
}

int cmd_chart(const fs::path& table_path, std::optional<fs::path> out_dir) {
    ResultTable table;
    try {
        table = ResultTable::load(table_path);
    } catch (const std::exception& e) {
        std::cerr << "cannot read table: " << e.what() << '\n';
        return kExitPlan;
    }
    if (table.rows.empty()) {
        std::cerr << "table is empty, nothing to chart\n";
        return kExitPlan;
    }
    const fs::path dir = table_path.parent_path();
    std::vector<std::string> errors;
    const auto files = emit_charts(table, dir, out_dir ? *out_dir : dir / "charts", &errors);
    for (const auto& f : files) std::cout << f.string() << '\n';
    for (const auto& e : errors) std::cerr << "error: " << e << '\n';
    return kExitOk;
}

int cmd_verify(double perturb, bool full) {
    VerifyOptions opt;
    opt.nu_perturbation = perturb;
    opt.include_training = full;
    const auto results = verify_suite(opt);
    print_report(std::cout, results);
    for (const auto& r : results)
        if (!r.passed) return kExitVerify;
    return kExitOk;
}

int cmd_pareto(const fs::path& archive_path, std::optional<fs::path> out_dir) {
    std::ifstream in(archive_path);
    if (!in) {
        std::cerr << "cannot open " << archive_path.string() << '\n';
        return kExitPlan;
    }
    ParetoArchive all;
    try {
        all = ParetoArchive::read_csv(in);
    } catch (const std::exception& e) {
        std::cerr << "bad archive: " << e.what() << '\n';
        return kExitPlan;
    }
    ParetoArchive front;
    for (const auto& e : all.entries()) front.insert(e);
    front.write_csv(std::cout);
    if (out_dir) {
        fs::create_directories(*out_dir);
        std::ofstream(*out_dir / "pareto_front.csv") << [&] {
            std::ostringstream os;
            front.write_csv(os);
            return os.str();
        }();
        std::ofstream(*out_dir / "pareto.svg") << pareto_svg(all.entries());
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"STAR-RIS coverage and capacity experiments"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> episodes, steps;
    std::size_t threads = 0;
    std::string out_dir;
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Only log errors");

    auto* run = app.add_subcommand("run", "Run every cell of an experiment plan");
    std::string plan_path;
    bool fresh = false;
    run->add_option("plan", plan_path, "Plan file (JSON)")->required();
    run->add_option("--seed", seed, "Run a single seed instead of the plan's list");
    run->add_option("--out-dir", out_dir, "Output directory")->default_val("out");
    run->add_option("--budget-episodes", episodes, "Training episodes per cell");
    run->add_option("--budget-steps", steps, "Steps per episode");
    run->add_option("--threads", threads, "Worker threads (default: plan value)");
    run->add_flag("--fresh", fresh, "Ignore finished cells from an earlier run");

    auto* chart = app.add_subcommand("chart", "Render SVG charts from a result table");
    std::string table_path;
    std::optional<std::string> chart_out;
    chart->add_option("table", table_path, "results.csv written by run")->required();
    chart->add_option("--out-dir", chart_out, "Chart directory (default: <table dir>/charts)");

    auto* verify = app.add_subcommand("verify", "Run the oracle and invariant suites");
    double perturb = 0.0;
    bool full = false;
    verify->add_option("--perturb-nu", perturb, "Add this offset to the min-norm solver output (mutation check)");
    verify->add_flag("--full", full, "Also run the tabular training check");
    verify->add_option("--seed", seed, "Accepted for symmetry; suites use fixed seeds");

    auto* pareto = app.add_subcommand("pareto", "Print the non-dominated subset of an archive");
    std::string archive_path;
    std::optional<std::string> pareto_out;
    pareto->add_option("archive", archive_path, "Archive CSV")->required();
    pareto->add_option("--out-dir", pareto_out, "Also write pareto_front.csv and pareto.svg here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitPlan;
    }
    spdlog::set_level(quiet ? spdlog::level::err : spdlog::level::warn);

    try {
        if (*run) return cmd_run(plan_path, out_dir, seed, episodes, steps, threads, fresh);
        if (*chart)
            return cmd_chart(table_path, chart_out ? std::optional<fs::path>(*chart_out) : std::nullopt);
        if (*verify) return cmd_verify(perturb, full);
        if (*pareto)
            return cmd_pareto(archive_path, pareto_out ? std::optional<fs::path>(*pareto_out) : std::nullopt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitPlan;
    }
    return kExitOk;
}
