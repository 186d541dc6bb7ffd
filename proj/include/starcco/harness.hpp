#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "starcco/scenario.hpp"
#include "starcco/trainer.hpp"

namespace starcco {

/// Thrown for malformed or inconsistent plan files.
class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SweepAxis { Grids, NRis, Elements, SizeCase1, SizeCase2, SizeCase3, Frequency };

std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

struct ExperimentPlan {
    std::string name{"plan"};
    SweepAxis axis{SweepAxis::NRis};
    std::vector<double> values;
    std::vector<std::string> strategies;
    std::vector<std::uint64_t> seeds;
    std::size_t budget_episodes{200};
    std::size_t budget_steps{200};
    nlohmann::json scenario = nlohmann::json::object();  // base scenario, may carry "preset"
    TrainConfig train{};
    std::size_t threads{1};

    void validate() const;
};

ExperimentPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentPlan& p);
ExperimentPlan load_plan(const std::filesystem::path& path);

/// Scenario for one cell. NoRIS drops every surface.
Scenario cell_scenario(const ExperimentPlan& plan, double axis_value, const std::string& strategy);

/// Training config for one cell (plan config with the budget applied).
TrainConfig cell_train_config(const ExperimentPlan& plan);

struct ResultRow {
    std::string axis;
    double axis_value{0.0};
    std::string strategy;
    std::uint64_t seed{0};
    double final_coverage{0.0};
    double final_capacity{0.0};
    std::string curve_path;    // relative to the output directory
    std::string archive_path;  // relative to the output directory
    std::string status{"ok"};  // "ok" or "failed: ..."
};

struct ResultTable {
    std::vector<ResultRow> rows;

    void write_csv(std::ostream& os) const;
    static ResultTable read_csv(std::istream& is);
    void save(const std::filesystem::path& path) const;
    static ResultTable load(const std::filesystem::path& path);
};

struct RunOptions {
    std::filesystem::path out_dir{"out"};
    std::size_t threads{0};  // 0: use the plan value
    bool resume{true};
    std::function<void(const ResultRow&)> on_cell;  // progress hook, called from the joining thread
};

/// Trains every (value, strategy, seed) cell and writes per-cell curves,
/// archives and checkpoints plus results.csv under out_dir.
ResultTable run_plan(const ExperimentPlan& plan, const RunOptions& options);

/// Line charts (mean with min-max band across seeds) of final coverage and
/// capacity against the sweep axis, plus a Pareto scatter of archive points.
/// Returns the written files; failures are reported in `errors`.
std::vector<std::filesystem::path> emit_charts(const ResultTable& table, const std::filesystem::path& table_dir,
                                               const std::filesystem::path& out_dir,
                                               std::vector<std::string>* errors = nullptr);

/// Moving average of the scalarized reward of each run, mean across seeds.
std::filesystem::path emit_curve_chart(const ResultTable& table, const std::filesystem::path& table_dir,
                                       const std::filesystem::path& out_dir, std::size_t window = 20);

/// Scatter of archive points with the front highlighted.
std::string pareto_svg(const std::vector<ArchiveEntry>& points);

struct SuiteResult {
    std::string name;
    bool passed{false};
    double seconds{0.0};
    std::string detail;
};

struct VerifyOptions {
    double nu_perturbation{0.0};  // added to every solver output in the min-norm suite
    bool include_training{false}; // also run the tabular training check
};

std::vector<SuiteResult> verify_suite(const VerifyOptions& options = {});
void print_report(std::ostream& os, const std::vector<SuiteResult>& results);

} // namespace starcco
