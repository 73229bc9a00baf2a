#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "heatcast/dataset.hpp"
#include "heatcast/enn.hpp"
#include "heatcast/errors.hpp"
#include "heatcast/eval.hpp"
#include "heatcast/experiments.hpp"
#include "heatcast/synth.hpp"
#include "heatcast/timeseries.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace heatcast;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config file '" + path + "' must hold a JSON object");
    }
    return doc;
}

void check_keys(const json& doc, std::initializer_list<const char*> allowed, const char* where) {
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError(std::string("unknown key '") + key + "' in " + where);
        }
    }
}

std::string format_number(double value) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

double parse_csv_double(const std::string& field, std::size_t line) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ParseError("invalid number '" + field + "'", line);
    }
    return value;
}

DatasetVariant variant_of_model(const EnnModel& model) {
    for (const DatasetVariant v :
         {DatasetVariant::A, DatasetVariant::B, DatasetVariant::C, DatasetVariant::D}) {
        if (variant_factors(v) == model.factor_order) {
            return v;
        }
    }
    throw ConfigError("model factor set does not correspond to a dataset variant");
}

int cmd_generate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const fs::path& out_dir) {
    SynthConfig cfg;
    if (!config_path.empty()) {
        json doc = read_json_file(config_path);
        check_keys(doc, {"synth"}, "generate config");
        if (doc.contains("synth")) {
            cfg = synth_config_from_json(doc["synth"]);
        }
    }
    if (seed) {
        cfg.seed = *seed;
    }
    const TimeSeriesTable table = generate(cfg);
    fs::create_directories(out_dir);
    const fs::path csv = out_dir / "synthetic.csv";
    export_csv(table, csv);
    std::cout << "wrote " << table.record_count() << " hourly records to " << csv.string() << '\n';
    return 0;
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              const fs::path& out_dir) {
    const json doc = read_json_file(config_path);
    check_keys(doc,
               {"source", "train_range", "validation_range", "window", "hidden_layers", "variant",
                "hidden_size", "train", "seed"},
               "train config");
    const DataSource source = data_source_from_json(doc.at("source"));
    const DateRange train_range = date_range_from_json(doc.at("train_range"));
    const int window = doc.value("window", 4);
    const int layers = doc.value("hidden_layers", 8);
    const int hidden_size = doc.value("hidden_size", 15);
    const DatasetVariant variant = variant_from_name(doc.value("variant", std::string("D")));
    TrainConfig train_cfg;
    if (doc.contains("train")) {
        train_cfg = train_config_from_json(doc["train"]);
    }
    const std::uint64_t init_seed = seed ? *seed : doc.value("seed", std::uint64_t{1});

    const TimeSeriesTable full = load_working_table(source);
    const TimeSeriesTable train_table = slice_by_range(full, train_range);

    std::vector<Channel> channels{Channel::demand};
    for (const Channel c : variant_factors(variant)) {
        channels.push_back(c);
    }
    const NormalizationStats stats = compute_stats(train_table, channels);
    const SuperVectorSet train_set =
        build_supervectors(train_table, variant, window, window / 2, stats);

    SuperVectorSet validation_set;
    const SuperVectorSet* validation = nullptr;
    if (doc.contains("validation_range")) {
        const DateRange val_range = date_range_from_json(doc["validation_range"]);
        if (val_range.begin < train_range.end) {
            throw ConfigError("training range must end before the validation range begins");
        }
        validation_set =
            build_supervectors(slice_by_range(full, val_range), variant, window, 1, stats);
        validation = &validation_set;
    }

    EnnModel model = init_model(layers, static_cast<int>(train_set.inputs.front().size()),
                                hidden_size, init_seed, train_cfg.init_scale);
    model.norm_stats = stats;
    model.factor_order = variant_factors(variant);
    model.window_length = window;
    train_cfg.seed = init_seed;

    const TrainTrace trace = fit(model, train_set, validation, train_cfg);

    fs::create_directories(out_dir);
    const fs::path model_path = out_dir / "model.json";
    save_model(model, model_path);

    std::cout << "trained " << layers << "-layer model on " << train_set.size() << " samples for "
              << trace.final_epoch << " epochs" << (trace.stopped_early ? " (early stop)" : "")
              << '\n';
    std::cout << "final training loss " << format_number(trace.train_loss.back()) << '\n';
    if (validation != nullptr) {
        // the saved model carries the restored best-validation weights, so
        // report its MAPE rather than the last epoch's
        std::cout << "validation MAPE " << format_number(validation_mape(model, validation_set))
                  << "%\n";
    }
    std::cout << "wrote " << model_path.string() << '\n';
    return 0;
}

int cmd_predict(const std::string& config_path, const fs::path& out_dir) {
    const json doc = read_json_file(config_path);
    check_keys(doc, {"model", "source", "range"}, "predict config");
    EnnModel model = load_model(doc.at("model").get<std::string>());
    const DataSource source = data_source_from_json(doc.at("source"));

    TimeSeriesTable table = load_working_table(source);
    if (doc.contains("range")) {
        table = slice_by_range(table, date_range_from_json(doc["range"]));
    }
    const DatasetVariant variant = variant_of_model(model);
    const SuperVectorSet set =
        build_supervectors(table, variant, model.window_length, 1, model.norm_stats);
    const std::vector<Prediction> preds = predict_series(model, set);

    fs::create_directories(out_dir);
    const fs::path csv = out_dir / "predictions.csv";
    std::ofstream out(csv);
    if (!out) {
        throw ValidationError("cannot write predictions to '" + csv.string() + "'");
    }
    out << "timestamp,actual_mw,predicted_mw\n";
    for (std::size_t i = 0; i < preds.size(); ++i) {
        out << format_timestamp(preds[i].hour) << ',' << format_number(set.target_demand_mw[i])
            << ',' << format_number(preds[i].demand_mw) << '\n';
    }
    std::cout << "wrote " << preds.size() << " predictions to " << csv.string() << '\n';
    return 0;
}

PredictionPairs load_prediction_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open prediction file '" + path.string() + "'");
    }
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) {
        throw ParseError("prediction file is empty", line_no);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "timestamp,actual_mw,predicted_mw") {
        throw ParseError("expected header 'timestamp,actual_mw,predicted_mw'", line_no);
    }
    PredictionPairs pairs;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
            throw ParseError("expected 3 comma-separated fields", line_no);
        }
        try {
            pairs.hours.push_back(parse_timestamp(line.substr(0, c1)));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
        pairs.actual_mw.push_back(parse_csv_double(line.substr(c1 + 1, c2 - c1 - 1), line_no));
        pairs.predicted_mw.push_back(parse_csv_double(line.substr(c2 + 1), line_no));
    }
    return pairs;
}

int cmd_evaluate(const std::string& config_path, const fs::path& out_dir) {
    const json doc = read_json_file(config_path);
    check_keys(doc, {"predictions", "bin_width_pct"}, "evaluate config");
    const PredictionPairs pairs =
        load_prediction_csv(doc.at("predictions").get<std::string>());
    const double bin_width = doc.value("bin_width_pct", 5.0);

    json report;
    report["count"] = pairs.size();
    report["mape_pct"] = mape(pairs);
    report["rmse_mw"] = rmse(pairs);
    report["mad_mw"] = mad(pairs);

    const RangeBreakdown ranges = range_breakdown(pairs);
    json range_rows = json::array();
    for (const RangeRow& r : ranges.rows) {
        json row = {{"lower_mw", r.lower_mw},
                    {"count", r.count},
                    {"mape_pct", r.mape_pct},
                    {"rmse_mw", r.rmse_mw},
                    {"mad_mw", r.mad_mw}};
        row["upper_mw"] = std::isinf(r.upper_mw) ? json() : json(r.upper_mw);
        range_rows.push_back(std::move(row));
    }
    report["ranges"] = std::move(range_rows);

    json hist = json::array();
    for (const HistogramBin& b : error_histogram(pairs, bin_width)) {
        hist.push_back({{"index", b.index},
                        {"lower_pct", b.lower_pct},
                        {"upper_pct", b.upper_pct},
                        {"count", b.count},
                        {"fraction", b.fraction}});
    }
    report["histogram_pct"] = std::move(hist);

    const PredictionPairs complete = restrict_to_complete_days(pairs);
    report["complete_day_hours"] = complete.size();
    if (complete.size() > 0) {
        json daily = json::array();
        std::vector<double> daily_values;
        for (const DailyMape& d : dmape(complete)) {
            daily.push_back({{"date", format_date(d.date)}, {"mape_pct", d.mape_pct}});
            daily_values.push_back(d.mape_pct);
        }
        report["dmape"] = std::move(daily);
        const BoxplotStats box = boxplot_stats(daily_values);
        report["dmape_boxplot_pct"] = {{"min", box.min},   {"q1", box.q1},
                                       {"median", box.median}, {"q3", box.q3},
                                       {"max", box.max},   {"iqr", box.iqr},
                                       {"midrange", box.midrange}};
    }

    fs::create_directories(out_dir);
    const fs::path out_path = out_dir / "evaluation.json";
    std::ofstream out(out_path);
    if (!out) {
        throw ValidationError("cannot write evaluation to '" + out_path.string() + "'");
    }
    out << report.dump(2) << '\n';

    std::cout << "MAPE " << format_number(report["mape_pct"].get<double>()) << "%  RMSE "
              << format_number(report["rmse_mw"].get<double>()) << " MW  MAD "
              << format_number(report["mad_mw"].get<double>()) << " MW over " << pairs.size()
              << " hours\n";
    std::cout << "wrote " << out_path.string() << '\n';
    return 0;
}

int cmd_study(const std::string& kind, const std::string& config_path,
              std::optional<std::uint64_t> seed, std::optional<fs::path> out_override) {
    ExperimentPlan plan = load_plan(config_path);
    if (seed) {
        plan.master_seed = *seed;
    }
    if (out_override) {
        plan.out_dir = *out_override;
    }

    Report report;
    std::string stem;
    if (kind == "sweep") {
        report = run_sweep(plan);
        stem = "sweep";
    } else if (kind == "data-study") {
        if (plan.year_spans.empty()) {
            throw ConfigError("the data-amount study needs year_spans in the plan");
        }
        report = run_data_amount_study(plan, plan.year_spans);
        stem = "data_study";
    } else {
        report = run_factor_study(plan);
        stem = "factor_study";
    }
    write_report(report, plan.out_dir, stem);

    const auto print_summary = [](const json& group, const std::string& label) {
        const json& s = group.at("summary");
        std::cout << "  " << label << ": ";
        if (s.contains("mape_mean_pct")) {
            std::cout << "mean MAPE " << format_number(s["mape_mean_pct"].get<double>()) << "%, "
                      << "mean RMSE " << format_number(s["rmse_mean_mw"].get<double>()) << " MW";
        } else {
            std::cout << "no successful trials";
        }
        std::cout << " (" << s["successful_trials"].get<std::size_t>() << '/'
                  << s["requested_trials"].get<std::size_t>() << " trials)\n";
    };

    if (report.contains("cells")) {
        for (const json& cell : report["cells"]) {
            print_summary(cell, "window " + std::to_string(cell["window"].get<int>()) +
                                    " layers " + std::to_string(cell["hidden_layers"].get<int>()) +
                                    " variant " + cell["variant"].get<std::string>());
        }
    }
    if (report.contains("families")) {
        for (const json& fam : report["families"]) {
            print_summary(fam, fam["label"].get<std::string>() + " variant " +
                                   fam["variant"].get<std::string>());
        }
    }
    if (report.contains("models")) {
        for (const json& model : report["models"]) {
            print_summary(model, "variant " + model["variant"].get<std::string>());
        }
    }
    std::cout << "persistence baseline MAPE "
              << format_number(report["persistence_mape_pct"].get<double>()) << "%\n";
    std::cout << "wrote " << (plan.out_dir / (stem + ".json")).string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"District heat demand forecasting with a multi-hidden-layer Elman network"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed_value = 0;

    CLI::App* generate_cmd = app.add_subcommand("generate", "Write a synthetic hourly CSV");
    generate_cmd->add_option("--config", config_path, "Generator config JSON file");
    generate_cmd->add_option("--seed", seed_value, "Override the generator seed");
    generate_cmd->add_option("--out", out_dir, "Output directory");

    CLI::App* train_cmd = app.add_subcommand("train", "Train one model and save it");
    train_cmd->add_option("--config", config_path, "Training config JSON file")->required();
    train_cmd->add_option("--seed", seed_value, "Override the weight init seed");
    train_cmd->add_option("--out", out_dir, "Output directory");

    CLI::App* predict_cmd = app.add_subcommand("predict", "Predict a series with a saved model");
    predict_cmd->add_option("--config", config_path, "Prediction config JSON file")->required();
    predict_cmd->add_option("--out", out_dir, "Output directory");

    CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a prediction CSV");
    evaluate_cmd->add_option("--config", config_path, "Evaluation config JSON file")->required();
    evaluate_cmd->add_option("--out", out_dir, "Output directory");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Window x layers x variant grid study");
    CLI::App* data_cmd = app.add_subcommand("data-study", "Training span comparison study");
    CLI::App* factor_cmd = app.add_subcommand("factor-study", "Weather factor comparison study");
    for (CLI::App* cmd : {sweep_cmd, data_cmd, factor_cmd}) {
        cmd->add_option("--config", config_path, "Plan JSON file (or a previous report)")
            ->required();
        cmd->add_option("--seed", seed_value, "Override the master seed");
        cmd->add_option("--out", out_dir, "Output directory");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const auto seed_of = [&](CLI::App* cmd) -> std::optional<std::uint64_t> {
            if (cmd->count("--seed") > 0) {
                return seed_value;
            }
            return std::nullopt;
        };
        if (generate_cmd->parsed()) {
            return cmd_generate(config_path, seed_of(generate_cmd), out_dir);
        }
        if (train_cmd->parsed()) {
            return cmd_train(config_path, seed_of(train_cmd), out_dir);
        }
        if (predict_cmd->parsed()) {
            return cmd_predict(config_path, out_dir);
        }
        if (evaluate_cmd->parsed()) {
            return cmd_evaluate(config_path, out_dir);
        }
        for (CLI::App* cmd : {sweep_cmd, data_cmd, factor_cmd}) {
            if (cmd->parsed()) {
                std::optional<std::filesystem::path> out_override;
                if (cmd->count("--out") > 0) {
                    out_override = std::filesystem::path(out_dir);
                }
                return cmd_study(cmd->get_name(), config_path, seed_of(cmd), out_override);
            }
        }
        return 1;
    } catch (const heatcast::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
