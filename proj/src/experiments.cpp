#include "heatcast/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <tuple>

#include "heatcast/errors.hpp"
#include "heatcast/eval.hpp"
#include "heatcast/rng.hpp"

namespace heatcast {

using nlohmann::json;

namespace {

void require_keys(const json& doc, const std::set<std::string>& allowed, const char* where) {
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!allowed.contains(key)) {
            throw ConfigError(std::string("unknown key '") + key + "' in " + where);
        }
    }
}

json range_to_json(const DateRange& r) {
    return {{"begin", format_date(r.begin)}, {"end", format_date(r.end)}};
}

DateRange range_from_json(const json& doc, const char* where) {
    require_keys(doc, {"begin", "end"}, where);
    DateRange r;
    r.begin = parse_date(doc.at("begin").get<std::string>());
    r.end = parse_date(doc.at("end").get<std::string>());
    if (!(r.begin < r.end)) {
        throw ConfigError(std::string(where) + ": begin must precede end");
    }
    return r;
}

} // namespace

SynthConfig synth_config_from_json(const json& doc) {
    require_keys(doc,
                 {"seed", "years", "start_year", "base_load", "temp_coefficient", "reference_temp",
                  "wind_chill_coefficient", "solar_gain_coefficient", "noise_std", "demand_floor",
                  "temp_persistence", "wind_persistence", "social_profile"},
                 "synth config");
    SynthConfig cfg;
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("years")) cfg.years = doc["years"].get<int>();
    if (doc.contains("start_year")) cfg.start_year = doc["start_year"].get<int>();
    if (doc.contains("base_load")) cfg.base_load = doc["base_load"].get<double>();
    if (doc.contains("temp_coefficient")) cfg.temp_coefficient = doc["temp_coefficient"].get<double>();
    if (doc.contains("reference_temp")) cfg.reference_temp = doc["reference_temp"].get<double>();
    if (doc.contains("wind_chill_coefficient"))
        cfg.wind_chill_coefficient = doc["wind_chill_coefficient"].get<double>();
    if (doc.contains("solar_gain_coefficient"))
        cfg.solar_gain_coefficient = doc["solar_gain_coefficient"].get<double>();
    if (doc.contains("noise_std")) cfg.noise_std = doc["noise_std"].get<double>();
    if (doc.contains("demand_floor")) cfg.demand_floor = doc["demand_floor"].get<double>();
    if (doc.contains("temp_persistence"))
        cfg.temp_persistence = doc["temp_persistence"].get<double>();
    if (doc.contains("wind_persistence"))
        cfg.wind_persistence = doc["wind_persistence"].get<double>();
    if (doc.contains("social_profile")) {
        const json& profile = doc["social_profile"];
        if (!profile.is_array() || profile.size() != cfg.social_profile.size()) {
            throw ConfigError("social_profile must hold 24 multipliers");
        }
        for (std::size_t i = 0; i < cfg.social_profile.size(); ++i) {
            cfg.social_profile[i] = profile[i].get<double>();
        }
    }
    return cfg;
}

TrainConfig train_config_from_json(const json& doc) {
    require_keys(doc,
                 {"learning_rate", "context_learning_rate", "input_learning_rate",
                  "hidden_learning_rate", "output_learning_rate", "epochs", "early_stop_patience",
                  "init_scale"},
                 "train config");
    TrainConfig cfg;
    if (doc.contains("learning_rate")) cfg.learning_rate = doc["learning_rate"].get<double>();
    if (doc.contains("context_learning_rate"))
        cfg.context_learning_rate = doc["context_learning_rate"].get<double>();
    if (doc.contains("input_learning_rate"))
        cfg.input_learning_rate = doc["input_learning_rate"].get<double>();
    if (doc.contains("hidden_learning_rate"))
        cfg.hidden_learning_rate = doc["hidden_learning_rate"].get<double>();
    if (doc.contains("output_learning_rate"))
        cfg.output_learning_rate = doc["output_learning_rate"].get<double>();
    if (doc.contains("epochs")) cfg.epochs = doc["epochs"].get<int>();
    if (doc.contains("early_stop_patience"))
        cfg.early_stop_patience = doc["early_stop_patience"].get<int>();
    if (doc.contains("init_scale")) cfg.init_scale = doc["init_scale"].get<double>();
    return cfg;
}

DataSource data_source_from_json(const json& doc) {
    require_keys(doc, {"csv", "synth", "holidays"}, "source");
    DataSource source;
    if (doc.contains("csv")) {
        source.csv_path = std::filesystem::path(doc["csv"].get<std::string>());
    }
    if (doc.contains("synth")) {
        source.synth = synth_config_from_json(doc["synth"]);
    }
    if (doc.contains("holidays")) {
        source.holidays_path = std::filesystem::path(doc["holidays"].get<std::string>());
    }
    if (source.csv_path.has_value() == source.synth.has_value()) {
        throw ConfigError("exactly one of csv and synth must be configured as the data source");
    }
    return source;
}

DateRange date_range_from_json(const json& doc) {
    return range_from_json(doc, "date range");
}

namespace {

json synth_to_json(const SynthConfig& cfg) {
    json profile = json::array();
    for (const double m : cfg.social_profile) {
        profile.push_back(m);
    }
    return {{"seed", cfg.seed},
            {"years", cfg.years},
            {"start_year", cfg.start_year},
            {"base_load", cfg.base_load},
            {"temp_coefficient", cfg.temp_coefficient},
            {"reference_temp", cfg.reference_temp},
            {"wind_chill_coefficient", cfg.wind_chill_coefficient},
            {"solar_gain_coefficient", cfg.solar_gain_coefficient},
            {"noise_std", cfg.noise_std},
            {"demand_floor", cfg.demand_floor},
            {"temp_persistence", cfg.temp_persistence},
            {"wind_persistence", cfg.wind_persistence},
            {"social_profile", std::move(profile)}};
}

json train_to_json(const TrainConfig& cfg) {
    json doc = {{"learning_rate", cfg.learning_rate},
                {"context_learning_rate", cfg.context_learning_rate},
                {"epochs", cfg.epochs},
                {"early_stop_patience", cfg.early_stop_patience},
                {"init_scale", cfg.init_scale}};
    if (cfg.input_learning_rate) doc["input_learning_rate"] = *cfg.input_learning_rate;
    if (cfg.hidden_learning_rate) doc["hidden_learning_rate"] = *cfg.hidden_learning_rate;
    if (cfg.output_learning_rate) doc["output_learning_rate"] = *cfg.output_learning_rate;
    return doc;
}

template <typename T>
void require_distinct(const std::vector<T>& values, const char* what) {
    if (values.empty()) {
        throw ConfigError(std::string(what) + " must not be empty");
    }
    std::set<T> seen;
    for (const T& v : values) {
        if (!seen.insert(v).second) {
            throw ConfigError(std::string(what) + " contains a duplicate");
        }
    }
}

void validate_plan(const ExperimentPlan& plan) {
    const bool has_csv = plan.source.csv_path.has_value();
    const bool has_synth = plan.source.synth.has_value();
    if (has_csv == has_synth) {
        throw ConfigError("exactly one of csv and synth must be configured as the data source");
    }
    if (!(plan.train_range.begin < plan.train_range.end) ||
        !(plan.validation_range.begin < plan.validation_range.end)) {
        throw ConfigError("train and validation ranges must each span at least one day");
    }
    if (plan.validation_range.begin < plan.train_range.end) {
        throw ConfigError("training range must end before the validation range begins");
    }
    require_distinct(plan.windows, "windows");
    for (const int w : plan.windows) {
        if (w != 2 && w != 4 && w != 8) {
            throw ConfigError("window length must be 2, 4 or 8");
        }
    }
    require_distinct(plan.hidden_layer_counts, "hidden_layers");
    for (const int l : plan.hidden_layer_counts) {
        if (l < 1) {
            throw ConfigError("hidden layer counts must be at least 1");
        }
    }
    require_distinct(plan.variants, "variants");
    if (plan.trials < 1) {
        throw ConfigError("trials must be at least 1");
    }
    if (plan.hidden_size < 1) {
        throw ConfigError("hidden_size must be at least 1");
    }
    if (plan.train.epochs < 1 || !(plan.train.learning_rate > 0.0) ||
        plan.train.early_stop_patience < 0 || !(plan.train.init_scale > 0.0)) {
        throw ConfigError("train config out of range");
    }
}

std::string variant_label(DatasetVariant v) {
    return std::string(1, variant_name(v));
}

int variant_index(DatasetVariant v) {
    return static_cast<int>(v);
}

std::string format_number(double value) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

struct PreparedSets {
    SuperVectorSet train;
    SuperVectorSet validation;
};

PreparedSets prepare_sets(const TimeSeriesTable& train_table, const TimeSeriesTable& val_table,
                          DatasetVariant variant, int window) {
    std::vector<Channel> channels{Channel::demand};
    for (const Channel c : variant_factors(variant)) {
        channels.push_back(c);
    }
    const NormalizationStats stats = compute_stats(train_table, channels);
    PreparedSets sets;
    sets.train = build_supervectors(train_table, variant, window, window / 2, stats);
    sets.validation = build_supervectors(val_table, variant, window, 1, stats);
    return sets;
}

TrialOutcome run_trial(const PreparedSets& sets, DatasetVariant variant, int window, int layers,
                       int hidden_size, const TrainConfig& base_cfg, std::uint64_t seed, int trial,
                       const std::string& cell_label, PredictionPairs* capture) {
    TrialOutcome out;
    out.trial = trial;
    out.seed = seed;
    try {
        const int input_size = static_cast<int>(sets.train.inputs.front().size());
        EnnModel model = init_model(layers, input_size, hidden_size, seed, base_cfg.init_scale);
        model.norm_stats = sets.train.stats;
        model.factor_order = variant_factors(variant);
        model.window_length = window;

        TrainConfig cfg = base_cfg;
        cfg.seed = seed;
        const TrainTrace trace = fit(model, sets.train, &sets.validation, cfg);

        const std::vector<Prediction> preds = predict_series(model, sets.validation);
        PredictionPairs pairs;
        pairs.actual_mw = sets.validation.target_demand_mw;
        pairs.hours = sets.validation.target_hours;
        pairs.predicted_mw.reserve(preds.size());
        for (const Prediction& p : preds) {
            pairs.predicted_mw.push_back(p.demand_mw);
        }
        out.mape_pct = mape(pairs);
        out.rmse_mw = rmse(pairs);
        out.mad_mw = mad(pairs);
        out.epochs_run = trace.final_epoch;
        if (capture != nullptr) {
            *capture = std::move(pairs);
        }
    } catch (const DivergenceError& e) {
        out.error = e.what();
        std::cerr << "warning: " << cell_label << " trial " << trial << " diverged: " << e.what()
                  << '\n';
    }
    return out;
}

json outcome_to_json(const TrialOutcome& out) {
    json doc = {{"trial", out.trial}, {"seed", out.seed}};
    if (out.error) {
        doc["error"] = *out.error;
    } else {
        doc["mape_pct"] = out.mape_pct;
        doc["rmse_mw"] = out.rmse_mw;
        doc["mad_mw"] = out.mad_mw;
        doc["epochs_run"] = out.epochs_run;
    }
    return doc;
}

json outcomes_to_json(const std::vector<TrialOutcome>& outs) {
    json arr = json::array();
    for (const TrialOutcome& o : outs) {
        arr.push_back(outcome_to_json(o));
    }
    return arr;
}

std::vector<double> successful_mapes_pct(const std::vector<TrialOutcome>& outs) {
    std::vector<double> v;
    for (const TrialOutcome& o : outs) {
        if (!o.error) {
            v.push_back(o.mape_pct);
        }
    }
    return v;
}

double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (const double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

double sample_variance_of(const std::vector<double>& v) {
    const double mean = mean_of(v);
    double sum = 0.0;
    for (const double x : v) {
        const double d = x - mean;
        sum += d * d;
    }
    return sum / static_cast<double>(v.size() - 1);
}

json boxplot_to_json(const BoxplotStats& s) {
    return {{"min", s.min},     {"q1", s.q1},   {"median", s.median},
            {"q3", s.q3},       {"max", s.max}, {"iqr", s.iqr},
            {"midrange", s.midrange}};
}

/// Mean and variance of MAPE and RMSE over the successful trials of a cell.
/// Trial-to-trial MAPE variance is computed on the fraction scale.
json cell_summary(const std::vector<TrialOutcome>& outs) {
    std::vector<double> mapes_pct;
    std::vector<double> mapes_fraction;
    std::vector<double> rmses;
    std::vector<double> mads;
    for (const TrialOutcome& o : outs) {
        if (o.error) {
            continue;
        }
        mapes_pct.push_back(o.mape_pct);
        mapes_fraction.push_back(o.mape_pct / 100.0);
        rmses.push_back(o.rmse_mw);
        mads.push_back(o.mad_mw);
    }
    json s;
    s["requested_trials"] = outs.size();
    s["successful_trials"] = mapes_pct.size();
    if (!mapes_pct.empty()) {
        s["mape_mean_pct"] = mean_of(mapes_pct);
        s["rmse_mean_mw"] = mean_of(rmses);
        s["mad_mean_mw"] = mean_of(mads);
        s["mape_boxplot_pct"] = boxplot_to_json(boxplot_stats(mapes_pct));
    }
    if (mapes_pct.size() >= 2) {
        s["mape_variance_fraction_scale"] = sample_variance_of(mapes_fraction);
        s["rmse_variance_mw2"] = sample_variance_of(rmses);
    }
    return s;
}

json ttest_or_error(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) {
        return {{"error", "needs at least 2 successful trials on each side"}};
    }
    try {
        const TTestResult r = t_test(a, b);
        return {{"t", r.t_statistic},
                {"df", r.degrees_of_freedom},
                {"p", r.p_value},
                {"significant", r.significant}};
    } catch (const DegenerateDataError& e) {
        return {{"error", e.what()}};
    }
}

json range_breakdown_to_json(const RangeBreakdown& b) {
    json rows = json::array();
    for (const RangeRow& r : b.rows) {
        json row = {{"lower_mw", r.lower_mw},
                    {"count", r.count},
                    {"mape_pct", r.mape_pct},
                    {"rmse_mw", r.rmse_mw},
                    {"mad_mw", r.mad_mw}};
        if (std::isinf(r.upper_mw)) {
            row["upper_mw"] = nullptr; // unbounded top range
        } else {
            row["upper_mw"] = r.upper_mw;
        }
        rows.push_back(std::move(row));
    }
    return {{"rows", std::move(rows)}, {"total_count", b.total_count}};
}

json histogram_to_json(const std::vector<HistogramBin>& bins) {
    json arr = json::array();
    for (const HistogramBin& b : bins) {
        arr.push_back({{"index", b.index},
                       {"lower_pct", b.lower_pct},
                       {"upper_pct", b.upper_pct},
                       {"count", b.count},
                       {"fraction", b.fraction}});
    }
    return arr;
}

std::string span_label(const DateRange& span) {
    const double days = static_cast<double>((span.end - span.begin).count());
    const int years = static_cast<int>(std::lround(days / 365.25));
    if (years >= 1 && std::abs(days - years * 365.25) < 40.0) {
        return "train-" + std::to_string(years) + "y";
    }
    return "train-" + std::to_string(static_cast<long long>(days)) + "d";
}

/// CSV cell for an optional numeric field of a trial row.
std::string csv_number(const json& row, const char* key) {
    if (!row.contains(key)) {
        return "";
    }
    return format_number(row[key].get<double>());
}

std::string csv_escape(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (const char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_trials_csv(const Report& report, std::ostream& out) {
    out << "study,label,window,hidden_layers,variant,trial,seed,mape_pct,rmse_mw,mad_mw,"
           "epochs_run,error\n";
    const std::string study = report.at("study").get<std::string>();

    const auto emit_rows = [&](const json& group, const std::string& label, int window, int layers,
                               const std::string& variant) {
        for (const json& row : group.at("trials")) {
            out << study << ',' << csv_escape(label) << ',' << window << ',' << layers << ','
                << variant << ',' << row.at("trial").get<int>() << ','
                << row.at("seed").get<std::uint64_t>() << ',' << csv_number(row, "mape_pct") << ','
                << csv_number(row, "rmse_mw") << ',' << csv_number(row, "mad_mw") << ',';
            if (row.contains("epochs_run")) {
                out << row.at("epochs_run").get<int>();
            }
            out << ',';
            if (row.contains("error")) {
                out << csv_escape(row.at("error").get<std::string>());
            }
            out << '\n';
        }
    };

    if (report.contains("cells")) {
        for (const json& cell : report.at("cells")) {
            emit_rows(cell, "", cell.at("window").get<int>(), cell.at("hidden_layers").get<int>(),
                      cell.at("variant").get<std::string>());
        }
    }
    const int window = report.contains("window") ? report.at("window").get<int>() : 0;
    const int layers = report.contains("hidden_layers") ? report.at("hidden_layers").get<int>() : 0;
    if (report.contains("families")) {
        for (const json& fam : report.at("families")) {
            emit_rows(fam, fam.at("label").get<std::string>(), window, layers,
                      fam.at("variant").get<std::string>());
        }
    }
    if (report.contains("models")) {
        for (const json& model : report.at("models")) {
            emit_rows(model, "", window, layers, model.at("variant").get<std::string>());
        }
    }
}

void write_ttests_csv(const Report& report, std::ostream& out) {
    out << "table,window,hidden_layers,variant,a,b,t,df,p,significant,error\n";
    if (!report.contains("t_tests")) {
        return;
    }
    const auto plain = [](const json& v) {
        return v.is_string() ? v.get<std::string>() : v.dump();
    };
    const auto field = [&plain](const json& entry, const char* key) {
        return entry.contains(key) ? plain(entry.at(key)) : std::string();
    };
    for (const auto& [table, entries] : report.at("t_tests").items()) {
        if (!entries.is_array()) {
            continue;
        }
        for (const json& entry : entries) {
            const json& result = entry.at("result");
            out << table << ',' << field(entry, "window") << ',' << field(entry, "hidden_layers")
                << ',';
            if (entry.contains("variant")) {
                out << entry.at("variant").get<std::string>();
            }
            out << ',' << csv_escape(plain(entry.at("a"))) << ','
                << csv_escape(plain(entry.at("b"))) << ',' << csv_number(result, "t") << ','
                << csv_number(result, "df") << ',' << csv_number(result, "p") << ',';
            if (result.contains("significant")) {
                out << (result.at("significant").get<bool>() ? "true" : "false");
            }
            out << ',';
            if (result.contains("error")) {
                out << csv_escape(result.at("error").get<std::string>());
            }
            out << '\n';
        }
    }
}

} // namespace

json plan_to_json(const ExperimentPlan& plan) {
    json source;
    if (plan.source.csv_path) {
        source["csv"] = plan.source.csv_path->string();
    }
    if (plan.source.synth) {
        source["synth"] = synth_to_json(*plan.source.synth);
    }
    if (plan.source.holidays_path) {
        source["holidays"] = plan.source.holidays_path->string();
    }

    json doc;
    doc["source"] = std::move(source);
    doc["train_range"] = range_to_json(plan.train_range);
    doc["validation_range"] = range_to_json(plan.validation_range);
    doc["windows"] = plan.windows;
    doc["hidden_layers"] = plan.hidden_layer_counts;
    json variants = json::array();
    for (const DatasetVariant v : plan.variants) {
        variants.push_back(variant_label(v));
    }
    doc["variants"] = std::move(variants);
    doc["trials"] = plan.trials;
    doc["hidden_size"] = plan.hidden_size;
    doc["train"] = train_to_json(plan.train);
    doc["master_seed"] = plan.master_seed;
    if (!plan.year_spans.empty()) {
        json spans = json::array();
        for (const DateRange& r : plan.year_spans) {
            spans.push_back(range_to_json(r));
        }
        doc["year_spans"] = std::move(spans);
    }
    return doc;
}

ExperimentPlan plan_from_json(const json& doc) {
    try {
        require_keys(doc,
                     {"source", "train_range", "validation_range", "windows", "hidden_layers",
                      "variants", "trials", "hidden_size", "train", "master_seed", "year_spans",
                      "out_dir"},
                     "plan");
        ExperimentPlan plan;
        plan.source = data_source_from_json(doc.at("source"));
        plan.train_range = range_from_json(doc.at("train_range"), "train_range");
        plan.validation_range = range_from_json(doc.at("validation_range"), "validation_range");
        if (doc.contains("windows")) {
            plan.windows = doc["windows"].get<std::vector<int>>();
        }
        if (doc.contains("hidden_layers")) {
            plan.hidden_layer_counts = doc["hidden_layers"].get<std::vector<int>>();
        }
        if (doc.contains("variants")) {
            plan.variants.clear();
            for (const json& v : doc["variants"]) {
                plan.variants.push_back(variant_from_name(v.get<std::string>()));
            }
        }
        if (doc.contains("trials")) {
            plan.trials = doc["trials"].get<int>();
        }
        if (doc.contains("hidden_size")) {
            plan.hidden_size = doc["hidden_size"].get<int>();
        }
        if (doc.contains("train")) {
            plan.train = train_config_from_json(doc["train"]);
        }
        if (doc.contains("master_seed")) {
            plan.master_seed = doc["master_seed"].get<std::uint64_t>();
        }
        if (doc.contains("year_spans")) {
            for (const json& r : doc["year_spans"]) {
                plan.year_spans.push_back(range_from_json(r, "year_spans"));
            }
        }
        if (doc.contains("out_dir")) {
            plan.out_dir = std::filesystem::path(doc["out_dir"].get<std::string>());
        }
        validate_plan(plan);
        return plan;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("plan does not match the schema: ") + e.what());
    }
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open plan file '" + path.string() + "'");
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("plan file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (doc.is_object() && doc.contains("config") && doc["config"].is_object()) {
        return plan_from_json(doc["config"]);
    }
    return plan_from_json(doc);
}

TimeSeriesTable load_working_table(const DataSource& source) {
    if (source.csv_path.has_value() == source.synth.has_value()) {
        throw ConfigError("exactly one of csv and synth must be configured as the data source");
    }
    TimeSeriesTable table =
        source.csv_path ? load_csv(*source.csv_path) : generate(*source.synth);
    std::set<Date> holidays;
    if (source.holidays_path) {
        holidays = load_holidays(*source.holidays_path);
    }
    return filter_working_days(table, holidays);
}

TimeSeriesTable slice_by_range(const TimeSeriesTable& table, const DateRange& range) {
    std::vector<HourlyRecord> kept;
    for (const auto& segment : table.segments) {
        for (const HourlyRecord& r : segment) {
            if (range.contains(date_of(r.hour))) {
                kept.push_back(r);
            }
        }
    }
    if (kept.empty()) {
        throw EmptyDatasetError("no records between " + format_date(range.begin) + " and " +
                                format_date(range.end));
    }
    return segment_records(std::move(kept));
}

std::uint64_t trial_seed(std::uint64_t master, int window, int layers, DatasetVariant variant,
                         int trial) {
    return derive_seed(master, {static_cast<std::uint64_t>(window),
                                static_cast<std::uint64_t>(layers),
                                static_cast<std::uint64_t>(variant_index(variant)),
                                static_cast<std::uint64_t>(trial)});
}

double persistence_mape(const TimeSeriesTable& table) {
    PredictionPairs pairs;
    for (const auto& segment : table.segments) {
        for (std::size_t i = 24; i < segment.size(); ++i) {
            pairs.actual_mw.push_back(segment[i].demand_mw);
            pairs.predicted_mw.push_back(segment[i - 24].demand_mw);
            pairs.hours.push_back(segment[i].hour);
        }
    }
    if (pairs.actual_mw.empty()) {
        throw EmptyDatasetError("no segment is longer than 24 hours");
    }
    return mape(pairs);
}

Report run_sweep(const ExperimentPlan& plan) {
    validate_plan(plan);
    const TimeSeriesTable full = load_working_table(plan.source);
    const TimeSeriesTable train_table = slice_by_range(full, plan.train_range);
    const TimeSeriesTable val_table = slice_by_range(full, plan.validation_range);

    std::map<std::pair<int, int>, PreparedSets> cache;
    const auto sets_for = [&](DatasetVariant variant, int window) -> const PreparedSets& {
        const auto key = std::make_pair(variant_index(variant), window);
        auto it = cache.find(key);
        if (it == cache.end()) {
            it = cache.emplace(key, prepare_sets(train_table, val_table, variant, window)).first;
        }
        return it->second;
    };

    Report report;
    report["study"] = "sweep";
    report["config"] = plan_to_json(plan);
    report["persistence_mape_pct"] = persistence_mape(val_table);

    std::map<std::tuple<int, int, int>, std::vector<double>> cell_mapes;
    json cells = json::array();
    for (const int window : plan.windows) {
        for (const int layers : plan.hidden_layer_counts) {
            for (const DatasetVariant variant : plan.variants) {
                const PreparedSets& sets = sets_for(variant, window);
                const std::string label = "window " + std::to_string(window) + " / layers " +
                                          std::to_string(layers) + " / variant " +
                                          variant_label(variant);
                std::vector<TrialOutcome> outs;
                outs.reserve(static_cast<std::size_t>(plan.trials));
                for (int trial = 0; trial < plan.trials; ++trial) {
                    const std::uint64_t seed =
                        trial_seed(plan.master_seed, window, layers, variant, trial);
                    outs.push_back(run_trial(sets, variant, window, layers, plan.hidden_size,
                                             plan.train, seed, trial, label, nullptr));
                }
                json cell;
                cell["window"] = window;
                cell["hidden_layers"] = layers;
                cell["variant"] = variant_label(variant);
                cell["input_width"] = sets.train.inputs.front().size();
                cell["trials"] = outcomes_to_json(outs);
                cell["summary"] = cell_summary(outs);
                cells.push_back(std::move(cell));
                cell_mapes[{window, layers, variant_index(variant)}] = successful_mapes_pct(outs);
            }
        }
    }
    report["cells"] = std::move(cells);

    json window_tests = json::array();
    for (const int layers : plan.hidden_layer_counts) {
        for (const DatasetVariant variant : plan.variants) {
            for (std::size_t i = 0; i < plan.windows.size(); ++i) {
                for (std::size_t j = i + 1; j < plan.windows.size(); ++j) {
                    const int wa = plan.windows[i];
                    const int wb = plan.windows[j];
                    window_tests.push_back(
                        {{"hidden_layers", layers},
                         {"variant", variant_label(variant)},
                         {"a", wa},
                         {"b", wb},
                         {"result",
                          ttest_or_error(cell_mapes[{wa, layers, variant_index(variant)}],
                                         cell_mapes[{wb, layers, variant_index(variant)}])}});
                }
            }
        }
    }
    json layer_tests = json::array();
    for (const int window : plan.windows) {
        for (const DatasetVariant variant : plan.variants) {
            for (std::size_t i = 0; i < plan.hidden_layer_counts.size(); ++i) {
                for (std::size_t j = i + 1; j < plan.hidden_layer_counts.size(); ++j) {
                    const int la = plan.hidden_layer_counts[i];
                    const int lb = plan.hidden_layer_counts[j];
                    layer_tests.push_back(
                        {{"window", window},
                         {"variant", variant_label(variant)},
                         {"a", la},
                         {"b", lb},
                         {"result",
                          ttest_or_error(cell_mapes[{window, la, variant_index(variant)}],
                                         cell_mapes[{window, lb, variant_index(variant)}])}});
                }
            }
        }
    }
    report["t_tests"] = {{"alpha", 0.05},
                         {"windows", std::move(window_tests)},
                         {"hidden_layers", std::move(layer_tests)}};
    return report;
}

Report run_data_amount_study(const ExperimentPlan& plan,
                             const std::vector<DateRange>& year_spans) {
    validate_plan(plan);
    if (year_spans.empty()) {
        throw ConfigError("the data-amount study needs at least one training span");
    }
    for (const DateRange& span : year_spans) {
        if (!(span.begin < span.end)) {
            throw ConfigError("every training span must span at least one day");
        }
        if (span.end != year_spans.front().end) {
            throw ConfigError("all training spans must end at the same date");
        }
        if (plan.validation_range.begin < span.end) {
            throw ConfigError("training spans must end before the validation range begins");
        }
    }
    {
        std::set<Date> begins;
        for (const DateRange& span : year_spans) {
            if (!begins.insert(span.begin).second) {
                throw ConfigError("training spans must have distinct start dates");
            }
        }
    }

    constexpr int kWindow = 4;
    constexpr int kLayers = 8;

    const TimeSeriesTable full = load_working_table(plan.source);
    const TimeSeriesTable val_table = slice_by_range(full, plan.validation_range);

    std::vector<std::string> labels;
    for (const DateRange& span : year_spans) {
        std::string label = span_label(span);
        while (std::find(labels.begin(), labels.end(), label) != labels.end()) {
            label += "+";
        }
        labels.push_back(label);
    }

    Report report;
    report["study"] = "data-amount";
    json config = plan_to_json(plan);
    json spans_json = json::array();
    for (const DateRange& span : year_spans) {
        spans_json.push_back(range_to_json(span));
    }
    config["year_spans"] = std::move(spans_json);
    report["config"] = std::move(config);
    report["window"] = kWindow;
    report["hidden_layers"] = kLayers;
    report["persistence_mape_pct"] = persistence_mape(val_table);

    std::map<std::pair<std::size_t, int>, std::vector<double>> family_mapes;
    json families = json::array();
    for (std::size_t si = 0; si < year_spans.size(); ++si) {
        const TimeSeriesTable span_table = slice_by_range(full, year_spans[si]);
        const std::uint64_t span_master =
            derive_seed(plan.master_seed, {0x5350414eULL, static_cast<std::uint64_t>(si)});
        for (const DatasetVariant variant : plan.variants) {
            const PreparedSets sets = prepare_sets(span_table, val_table, variant, kWindow);
            const std::string label = labels[si] + " / variant " + variant_label(variant);
            std::vector<TrialOutcome> outs;
            for (int trial = 0; trial < plan.trials; ++trial) {
                const std::uint64_t seed = trial_seed(span_master, kWindow, kLayers, variant, trial);
                outs.push_back(run_trial(sets, variant, kWindow, kLayers, plan.hidden_size,
                                         plan.train, seed, trial, label, nullptr));
            }
            json family;
            family["label"] = labels[si];
            family["span"] = range_to_json(year_spans[si]);
            family["variant"] = variant_label(variant);
            family["input_width"] = sets.train.inputs.front().size();
            family["training_samples"] = sets.train.size();
            family["trials"] = outcomes_to_json(outs);
            family["summary"] = cell_summary(outs);
            families.push_back(std::move(family));
            family_mapes[{si, variant_index(variant)}] = successful_mapes_pct(outs);
        }
    }
    report["families"] = std::move(families);

    json span_tests = json::array();
    for (const DatasetVariant variant : plan.variants) {
        for (std::size_t i = 0; i < year_spans.size(); ++i) {
            for (std::size_t j = i + 1; j < year_spans.size(); ++j) {
                span_tests.push_back(
                    {{"variant", variant_label(variant)},
                     {"a", labels[i]},
                     {"b", labels[j]},
                     {"result", ttest_or_error(family_mapes[{i, variant_index(variant)}],
                                               family_mapes[{j, variant_index(variant)}])}});
            }
        }
    }
    report["t_tests"] = {{"alpha", 0.05}, {"spans", std::move(span_tests)}};
    return report;
}

Report run_factor_study(const ExperimentPlan& plan) {
    validate_plan(plan);
    {
        std::set<int> have;
        for (const DatasetVariant v : plan.variants) {
            have.insert(variant_index(v));
        }
        if (have != std::set<int>{0, 1, 2, 3}) {
            throw ConfigError("the factor study needs all four dataset variants");
        }
    }

    constexpr int kWindow = 4;
    constexpr int kLayers = 8;

    const TimeSeriesTable full = load_working_table(plan.source);
    const TimeSeriesTable train_table = slice_by_range(full, plan.train_range);
    const TimeSeriesTable val_table = slice_by_range(full, plan.validation_range);

    Report report;
    report["study"] = "factor";
    report["config"] = plan_to_json(plan);
    report["window"] = kWindow;
    report["hidden_layers"] = kLayers;
    report["persistence_mape_pct"] = persistence_mape(val_table);

    std::map<int, std::vector<double>> variant_mapes;
    json models = json::array();
    for (const DatasetVariant variant : plan.variants) {
        const PreparedSets sets = prepare_sets(train_table, val_table, variant, kWindow);
        const std::string label = "variant " + variant_label(variant);
        std::vector<TrialOutcome> outs;
        std::vector<PredictionPairs> captures(static_cast<std::size_t>(plan.trials));
        for (int trial = 0; trial < plan.trials; ++trial) {
            const std::uint64_t seed = trial_seed(plan.master_seed, kWindow, kLayers, variant, trial);
            outs.push_back(run_trial(sets, variant, kWindow, kLayers, plan.hidden_size, plan.train,
                                     seed, trial, label, &captures[static_cast<std::size_t>(trial)]));
        }

        json model;
        model["variant"] = variant_label(variant);
        model["input_width"] = sets.train.inputs.front().size();
        model["trials"] = outcomes_to_json(outs);
        model["summary"] = cell_summary(outs);

        // The per-range table and histogram come from the trial with the
        // median MAPE, identified by trial index and seed.
        std::vector<std::size_t> ok;
        for (std::size_t i = 0; i < outs.size(); ++i) {
            if (!outs[i].error) {
                ok.push_back(i);
            }
        }
        if (!ok.empty()) {
            std::sort(ok.begin(), ok.end(), [&outs](std::size_t a, std::size_t b) {
                return outs[a].mape_pct < outs[b].mape_pct;
            });
            const std::size_t rep = ok[(ok.size() - 1) / 2];
            json detail;
            detail["trial"] = outs[rep].trial;
            detail["seed"] = outs[rep].seed;
            detail["mape_pct"] = outs[rep].mape_pct;
            detail["ranges"] = range_breakdown_to_json(range_breakdown(captures[rep]));
            detail["histogram_pct"] = histogram_to_json(error_histogram(captures[rep], 5.0));
            model["representative"] = std::move(detail);
        }
        models.push_back(std::move(model));
        variant_mapes[variant_index(variant)] = successful_mapes_pct(outs);
    }
    report["models"] = std::move(models);

    json pair_tests = json::array();
    for (std::size_t i = 0; i < plan.variants.size(); ++i) {
        for (std::size_t j = i + 1; j < plan.variants.size(); ++j) {
            const DatasetVariant va = plan.variants[i];
            const DatasetVariant vb = plan.variants[j];
            pair_tests.push_back(
                {{"a", variant_label(va)},
                 {"b", variant_label(vb)},
                 {"result", ttest_or_error(variant_mapes[variant_index(va)],
                                           variant_mapes[variant_index(vb)])}});
        }
    }
    report["t_tests"] = {{"alpha", 0.05}, {"pairs", std::move(pair_tests)}};
    return report;
}

void write_report(const Report& report, const std::filesystem::path& dir, const std::string& stem) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / (stem + ".json"));
        if (!out) {
            throw ValidationError("cannot write report to '" + (dir / (stem + ".json")).string() +
                                  "'");
        }
        out << report.dump(2) << '\n';
    }
    {
        std::ofstream out(dir / (stem + "_trials.csv"));
        write_trials_csv(report, out);
    }
    {
        std::ofstream out(dir / (stem + "_ttests.csv"));
        write_ttests_csv(report, out);
    }
}

} // namespace heatcast
