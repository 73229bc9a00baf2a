#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"

#include "heatcast/errors.hpp"
#include "heatcast/experiments.hpp"
#include "heatcast/timeseries.hpp"

using namespace heatcast;

namespace {

namespace fs = std::filesystem;

/// A quick plan over one synthetic year: short epochs, small network.
ExperimentPlan quick_plan() {
    ExperimentPlan plan;
    SynthConfig synth;
    synth.years = 1;
    synth.start_year = 2008;
    synth.seed = 11;
    plan.source.synth = synth;
    plan.train_range = {parse_date("2008-01-01"), parse_date("2008-10-01")};
    plan.validation_range = {parse_date("2008-10-01"), parse_date("2009-01-01")};
    plan.windows = {2, 4};
    plan.hidden_layer_counts = {1};
    plan.variants = {DatasetVariant::D};
    plan.trials = 2;
    plan.hidden_size = 6;
    plan.train.epochs = 3;
    plan.train.early_stop_patience = 0;
    plan.master_seed = 21;
    return plan;
}

TimeSeriesTable flat_demand_table(const char* start, const std::vector<double>& daily_levels) {
    std::vector<HourlyRecord> records;
    const HourStamp first = parse_timestamp(start);
    for (std::size_t day = 0; day < daily_levels.size(); ++day) {
        for (int h = 0; h < 24; ++h) {
            HourlyRecord r;
            r.hour = first + std::chrono::hours(static_cast<long>(day) * 24 + h);
            r.demand_mw = daily_levels[day];
            r.temp_c = 1.0;
            r.solar_wm2 = 0.0;
            r.wind_ms = 2.0;
            records.push_back(r);
        }
    }
    return segment_records(std::move(records));
}

} // namespace

TEST_CASE("experiment plans survive a JSON round-trip") {
    ExperimentPlan plan = quick_plan();
    plan.source.synth->wind_persistence = 0.45;
    plan.train.learning_rate = 0.02;
    plan.train.hidden_learning_rate = 0.005;
    plan.year_spans = {{parse_date("2008-03-01"), parse_date("2008-10-01")},
                       {parse_date("2008-06-01"), parse_date("2008-10-01")}};

    const nlohmann::json doc = plan_to_json(plan);
    CHECK_FALSE(doc.contains("out_dir"));

    const ExperimentPlan back = plan_from_json(doc);
    CHECK(back.train_range.begin == plan.train_range.begin);
    CHECK(back.train_range.end == plan.train_range.end);
    CHECK(back.validation_range.begin == plan.validation_range.begin);
    CHECK(back.windows == plan.windows);
    CHECK(back.hidden_layer_counts == plan.hidden_layer_counts);
    CHECK(back.variants == plan.variants);
    CHECK(back.trials == plan.trials);
    CHECK(back.hidden_size == plan.hidden_size);
    CHECK(back.master_seed == plan.master_seed);
    CHECK(back.train.learning_rate == plan.train.learning_rate);
    CHECK(back.train.epochs == plan.train.epochs);
    REQUIRE(back.train.hidden_learning_rate.has_value());
    CHECK(*back.train.hidden_learning_rate == 0.005);
    CHECK_FALSE(back.train.input_learning_rate.has_value());
    REQUIRE(back.source.synth.has_value());
    CHECK(back.source.synth->seed == 11);
    CHECK(back.source.synth->years == 1);
    CHECK(back.source.synth->wind_persistence == 0.45);
    CHECK(back.source.synth->temp_persistence == 0.95);
    REQUIRE(back.year_spans.size() == 2);
    CHECK(back.year_spans[1].begin == parse_date("2008-06-01"));

    // Serializing the round-tripped plan reproduces the same document.
    CHECK(plan_to_json(back) == doc);
}

TEST_CASE("plan parsing rejects malformed documents") {
    const nlohmann::json good = plan_to_json(quick_plan());

    nlohmann::json unknown = good;
    unknown["surprise"] = 1;
    CHECK_THROWS_AS(plan_from_json(unknown), ConfigError);

    nlohmann::json missing = good;
    missing.erase("train_range");
    CHECK_THROWS_AS(plan_from_json(missing), ConfigError);

    nlohmann::json overlap = good;
    overlap["validation_range"]["begin"] = "2008-06-01";
    CHECK_THROWS_AS(plan_from_json(overlap), ConfigError);

    nlohmann::json bad_window = good;
    bad_window["windows"] = {2, 3};
    CHECK_THROWS_AS(plan_from_json(bad_window), ConfigError);

    nlohmann::json dup_variant = good;
    dup_variant["variants"] = {"D", "D"};
    CHECK_THROWS_AS(plan_from_json(dup_variant), ConfigError);

    nlohmann::json no_trials = good;
    no_trials["trials"] = 0;
    CHECK_THROWS_AS(plan_from_json(no_trials), ConfigError);

    nlohmann::json both_sources = good;
    both_sources["source"]["csv"] = "data.csv";
    CHECK_THROWS_AS(plan_from_json(both_sources), ConfigError);

    nlohmann::json no_source = good;
    no_source["source"].erase("synth");
    CHECK_THROWS_AS(plan_from_json(no_source), ConfigError);

    nlohmann::json reversed = good;
    reversed["train_range"] = {{"begin", "2008-10-01"}, {"end", "2008-01-01"}};
    CHECK_THROWS_AS(plan_from_json(reversed), ConfigError);
}

TEST_CASE("load_plan reads plain plans and report-embedded configs") {
    const ExperimentPlan plan = quick_plan();
    const fs::path dir = fs::temp_directory_path();

    const fs::path plain = dir / "heatcast_plan_plain.json";
    {
        std::ofstream out(plain);
        out << plan_to_json(plan).dump(2);
    }
    const ExperimentPlan a = load_plan(plain);
    CHECK(a.master_seed == plan.master_seed);
    CHECK(a.windows == plan.windows);

    const fs::path wrapped = dir / "heatcast_plan_report.json";
    {
        nlohmann::json report;
        report["study"] = "sweep";
        report["config"] = plan_to_json(plan);
        report["cells"] = nlohmann::json::array();
        std::ofstream out(wrapped);
        out << report.dump(2);
    }
    const ExperimentPlan b = load_plan(wrapped);
    CHECK(b.master_seed == plan.master_seed);
    CHECK(b.trials == plan.trials);

    CHECK_THROWS_AS(load_plan(dir / "heatcast_no_such_plan.json"), ConfigError);
}

TEST_CASE("slice_by_range keeps exactly the requested dates") {
    SynthConfig synth;
    synth.years = 1;
    synth.start_year = 2010;
    DataSource source;
    source.synth = synth;
    const TimeSeriesTable table = load_working_table(source);

    const DateRange range{parse_date("2010-02-01"), parse_date("2010-03-01")};
    const TimeSeriesTable sliced = slice_by_range(table, range);
    std::size_t count = 0;
    for (const auto& seg : sliced.segments) {
        REQUIRE_FALSE(seg.empty());
        for (const HourlyRecord& r : seg) {
            CHECK(range.contains(date_of(r.hour)));
            ++count;
        }
    }
    // February 2010: 20 working days of 24 hours.
    CHECK(count == 480);

    CHECK_THROWS_AS(slice_by_range(table, DateRange{parse_date("2031-01-01"),
                                                    parse_date("2032-01-01")}),
                    EmptyDatasetError);
}

TEST_CASE("trial seeds never collide across the grid") {
    std::set<std::uint64_t> seeds;
    std::size_t total = 0;
    for (const int window : {2, 4, 8}) {
        for (const int layers : {1, 4, 8}) {
            for (const DatasetVariant v :
                 {DatasetVariant::A, DatasetVariant::B, DatasetVariant::C, DatasetVariant::D}) {
                for (int trial = 0; trial < 10; ++trial) {
                    seeds.insert(trial_seed(99, window, layers, v, trial));
                    ++total;
                }
            }
        }
    }
    CHECK(seeds.size() == total);
    CHECK(trial_seed(1, 2, 4, DatasetVariant::A, 0) != trial_seed(2, 2, 4, DatasetVariant::A, 0));
}

TEST_CASE("persistence baseline repeats the previous day") {
    // Five Monday-to-Friday days at stepped levels: each day predicts the
    // next, so every pair errs by the day-over-day step.
    const TimeSeriesTable t =
        flat_demand_table("2010-01-04T00:00", {100.0, 110.0, 110.0, 110.0, 110.0});
    // Days 2-5 are predicted from days 1-4: APE is 10/110 once, then zero.
    const double expected = (24.0 * (10.0 / 110.0)) / (24.0 * 4.0) * 100.0;
    CHECK(persistence_mape(t) == doctest::Approx(expected).epsilon(1e-12));

    // A segment of exactly one day yields no pairs.
    const TimeSeriesTable imp = flat_demand_table("2010-01-04T00:00", {100.0});
    CHECK_THROWS_AS(persistence_mape(imp), EmptyDatasetError);
}

TEST_CASE("sweep reports every requested cell with reproducible bytes") {
    const ExperimentPlan plan = quick_plan();
    const Report report = run_sweep(plan);

    CHECK(report.at("study") == "sweep");
    CHECK(report.at("persistence_mape_pct").get<double>() > 0.0);
    const auto& cells = report.at("cells");
    REQUIRE(cells.size() == 2);

    std::set<std::string> seen;
    for (const auto& cell : cells) {
        seen.insert(std::to_string(cell.at("window").get<int>()) + "/" +
                    std::to_string(cell.at("hidden_layers").get<int>()) + "/" +
                    cell.at("variant").get<std::string>());
        CHECK(cell.at("hidden_layers") == 1);
        CHECK(cell.at("variant") == "D");
        const int window = cell.at("window").get<int>();
        CHECK(cell.at("input_width") == window + 3);

        const auto& trials = cell.at("trials");
        REQUIRE(trials.size() == 2);
        CHECK(trials[0].at("seed") != trials[1].at("seed"));
        for (const auto& trial : trials) {
            CHECK_FALSE(trial.contains("error"));
            CHECK(trial.at("mape_pct").get<double>() > 0.0);
            CHECK(trial.at("rmse_mw").get<double>() > 0.0);
            CHECK(trial.at("epochs_run") == 3);
        }
        CHECK(trials[0].at("mape_pct") != trials[1].at("mape_pct"));

        const auto& summary = cell.at("summary");
        CHECK(summary.at("requested_trials") == 2);
        CHECK(summary.at("successful_trials") == 2);
        CHECK(summary.contains("mape_mean_pct"));
        CHECK(summary.contains("mape_variance_fraction_scale"));
        CHECK(summary.contains("mape_boxplot_pct"));
    }
    CHECK(seen.size() == 2);
    CHECK(seen.contains("2/1/D"));
    CHECK(seen.contains("4/1/D"));

    // One window pair exists for the (layers, variant) cell, so the window
    // comparison table has exactly one entry.
    const auto& ttests = report.at("t_tests");
    CHECK(ttests.at("alpha") == 0.05);
    REQUIRE(ttests.at("windows").size() == 1);
    const auto& wt = ttests.at("windows")[0];
    CHECK(wt.at("a") == 2);
    CHECK(wt.at("b") == 4);
    CHECK(ttests.at("hidden_layers").empty());

    // The embedded config reruns to the same bytes.
    const Report again = run_sweep(plan_from_json(report.at("config")));
    CHECK(again.dump(2) == report.dump(2));
}

TEST_CASE("write_report emits the JSON and both CSV companions") {
    const ExperimentPlan plan = quick_plan();
    const Report report = run_sweep(plan);
    const fs::path dir = fs::temp_directory_path() / "heatcast_report_dir";
    fs::remove_all(dir);
    write_report(report, dir, "sweep");

    REQUIRE(fs::exists(dir / "sweep.json"));
    REQUIRE(fs::exists(dir / "sweep_trials.csv"));
    REQUIRE(fs::exists(dir / "sweep_ttests.csv"));

    {
        std::ifstream in(dir / "sweep.json");
        nlohmann::json loaded;
        in >> loaded;
        CHECK(loaded == report);
    }
    {
        std::ifstream in(dir / "sweep_trials.csv");
        std::string header;
        REQUIRE(std::getline(in, header));
        CHECK(header ==
              "study,label,window,hidden_layers,variant,trial,seed,mape_pct,rmse_mw,mad_mw,"
              "epochs_run,error");
        std::size_t rows = 0;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) {
                ++rows;
            }
        }
        CHECK(rows == 4);
    }
    {
        std::ifstream in(dir / "sweep_ttests.csv");
        std::string header;
        REQUIRE(std::getline(in, header));
        CHECK(header == "table,window,hidden_layers,variant,a,b,t,df,p,significant,error");
    }
}

TEST_CASE("data amount study compares training spans at fixed topology") {
    ExperimentPlan plan = quick_plan();
    plan.hidden_layer_counts = {1};
    const std::vector<DateRange> spans = {
        {parse_date("2008-01-01"), parse_date("2008-10-01")},
        {parse_date("2008-07-01"), parse_date("2008-10-01")},
    };
    const Report report = run_data_amount_study(plan, spans);

    CHECK(report.at("study") == "data-amount");
    const auto& families = report.at("families");
    REQUIRE(families.size() == 2);
    std::set<std::string> labels;
    for (const auto& family : families) {
        labels.insert(family.at("label").get<std::string>());
        CHECK(family.at("variant") == "D");
        CHECK(family.at("trials").size() == 2);
        CHECK(family.at("training_samples").get<int>() > 0);
        CHECK(family.at("summary").at("successful_trials") == 2);
    }
    CHECK(labels.size() == 2);
    CHECK(report.at("config").at("year_spans").size() == 2);
    REQUIRE(report.at("t_tests").at("spans").size() == 1);

    // The longer span sees more training samples.
    CHECK(families[0].at("training_samples").get<int>() >
          families[1].at("training_samples").get<int>());
}

TEST_CASE("data amount study validates its spans") {
    const ExperimentPlan plan = quick_plan();
    CHECK_THROWS_AS(run_data_amount_study(plan, {}), ConfigError);

    const std::vector<DateRange> mismatched_ends = {
        {parse_date("2008-01-01"), parse_date("2008-10-01")},
        {parse_date("2008-04-01"), parse_date("2008-09-01")},
    };
    CHECK_THROWS_AS(run_data_amount_study(plan, mismatched_ends), ConfigError);

    const std::vector<DateRange> duplicate_begins = {
        {parse_date("2008-01-01"), parse_date("2008-10-01")},
        {parse_date("2008-01-01"), parse_date("2008-10-01")},
    };
    CHECK_THROWS_AS(run_data_amount_study(plan, duplicate_begins), ConfigError);

    const std::vector<DateRange> leaks_into_validation = {
        {parse_date("2008-01-01"), parse_date("2008-11-01")},
    };
    CHECK_THROWS_AS(run_data_amount_study(plan, leaks_into_validation), ConfigError);
}

TEST_CASE("factor study requires all four variants and reports pairwise tests") {
    ExperimentPlan partial = quick_plan();
    partial.variants = {DatasetVariant::A, DatasetVariant::D};
    CHECK_THROWS_AS(run_factor_study(partial), ConfigError);

    ExperimentPlan plan = quick_plan();
    plan.variants = {DatasetVariant::A, DatasetVariant::B, DatasetVariant::C, DatasetVariant::D};
    plan.train.epochs = 2;
    const Report report = run_factor_study(plan);

    CHECK(report.at("study") == "factor");
    const auto& models = report.at("models");
    REQUIRE(models.size() == 4);
    std::set<std::string> variants;
    for (const auto& model : models) {
        variants.insert(model.at("variant").get<std::string>());
        CHECK(model.at("trials").size() == 2);
        const auto& rep = model.at("representative");
        CHECK(rep.at("mape_pct").get<double>() > 0.0);
        CHECK(rep.at("ranges").at("total_count").get<int>() > 0);
        CHECK_FALSE(rep.at("histogram_pct").empty());
    }
    CHECK(variants == std::set<std::string>{"A", "B", "C", "D"});
    REQUIRE(report.at("t_tests").at("pairs").size() == 6);
}
