#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "heatcast/dataset.hpp"
#include "heatcast/enn.hpp"
#include "heatcast/synth.hpp"

namespace heatcast {

/// Study reports are structured JSON documents. Keys are emitted sorted and
/// no run metadata (timestamps, hosts) is included, so equal plans produce
/// byte-identical reports.
using Report = nlohmann::json;

/// Half-open range of calendar dates [begin, end).
struct DateRange {
    Date begin{};
    Date end{};

    bool contains(Date d) const { return begin <= d && d < end; }
};

/// Where the hourly table comes from: an on-disk CSV or the generator.
/// Exactly one of csv_path and synth must be set.
struct DataSource {
    std::optional<std::filesystem::path> csv_path;
    std::optional<SynthConfig> synth;
    std::optional<std::filesystem::path> holidays_path;
};

struct ExperimentPlan {
    DataSource source;
    DateRange train_range;
    DateRange validation_range;
    std::vector<int> windows{2, 4, 8};
    std::vector<int> hidden_layer_counts{4, 8};
    std::vector<DatasetVariant> variants{DatasetVariant::A, DatasetVariant::B,
                                         DatasetVariant::C, DatasetVariant::D};
    int trials = 10;
    int hidden_size = 15;
    TrainConfig train;
    std::uint64_t master_seed = 1;
    /// Training ranges for the data-amount study; must share their end date.
    std::vector<DateRange> year_spans;
    /// Where reports are written. Not embedded in reports.
    std::filesystem::path out_dir = "out";
};

/// One trained model of a study cell. `error` is set when training diverged;
/// the metric fields are then meaningless.
struct TrialOutcome {
    int trial = 0;
    std::uint64_t seed = 0;
    std::optional<std::string> error;
    double mape_pct = 0.0;
    double rmse_mw = 0.0;
    double mad_mw = 0.0;
    int epochs_run = 0;
};

nlohmann::json plan_to_json(const ExperimentPlan& plan);
ExperimentPlan plan_from_json(const nlohmann::json& doc);

/// Piecewise parsers for the shared config vocabulary. Unknown keys are
/// rejected.
SynthConfig synth_config_from_json(const nlohmann::json& doc);
TrainConfig train_config_from_json(const nlohmann::json& doc);
DataSource data_source_from_json(const nlohmann::json& doc);
DateRange date_range_from_json(const nlohmann::json& doc);

/// Reads a plan file. A report file is accepted too: its embedded "config"
/// object is loaded, so any report can be re-run as its own plan.
ExperimentPlan load_plan(const std::filesystem::path& path);

/// Loads or generates the hourly table and restricts it to working days.
TimeSeriesTable load_working_table(const DataSource& source);

/// Keeps records whose date lies in the range; contiguity is re-derived.
TimeSeriesTable slice_by_range(const TimeSeriesTable& table, const DateRange& range);

/// Seed for one (window, layers, variant, trial) cell, derived from the
/// master seed. Distinct cells get distinct streams.
std::uint64_t trial_seed(std::uint64_t master, int window, int layers, DatasetVariant variant,
                         int trial);

/// MAPE of the naive forecast demand(t) = demand(t-24), within segments.
double persistence_mape(const TimeSeriesTable& table);

/// Full hyperparameter grid: windows x layer counts x variants x trials.
Report run_sweep(const ExperimentPlan& plan);

/// One model family per training span (window 4, 8 hidden layers), shared
/// validation range, t-tests between spans per variant.
Report run_data_amount_study(const ExperimentPlan& plan, const std::vector<DateRange>& year_spans);

/// Variant comparison at window 4 with 8 hidden layers: overall metrics,
/// per-range tables and error histograms. Requires all four variants.
Report run_factor_study(const ExperimentPlan& plan);

/// Writes `<stem>.json` plus flat CSV exports of the trial and t-test tables
/// into `dir`. Creates the directory if needed.
void write_report(const Report& report, const std::filesystem::path& dir, const std::string& stem);

} // namespace heatcast
