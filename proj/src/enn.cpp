#include "heatcast/enn.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "heatcast/errors.hpp"
#include "heatcast/rng.hpp"

namespace heatcast {

using nlohmann::json;

namespace {

double dot_row(const Matrix& m, std::size_t row, const Vector& v) {
    const double* p = m.data.data() + row * m.cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) {
        acc += p[j] * v[j];
    }
    return acc;
}

/// Forward pass into caller-owned storage; the hot loops of training and
/// inference go through here to avoid per-sample allocation.
void forward_into(const EnnModel& model, const Vector& input, ForwardResult& out) {
    if (input.size() != static_cast<std::size_t>(model.input_size)) {
        throw DimensionError("input length " + std::to_string(input.size()) +
                             " does not match model input size " + std::to_string(model.input_size));
    }
    const std::size_t s = static_cast<std::size_t>(model.hidden_size);
    out.hidden.resize(static_cast<std::size_t>(model.n_hidden));
    const Vector* below = &input;
    for (int layer = 0; layer < model.n_hidden; ++layer) {
        const Matrix& w = model.layer_weight(layer);
        const Matrix& wc = model.w_context[static_cast<std::size_t>(layer)];
        const Vector& ctx = model.context[static_cast<std::size_t>(layer)];
        Vector& act = out.hidden[static_cast<std::size_t>(layer)];
        act.resize(s);
        for (std::size_t i = 0; i < s; ++i) {
            act[i] = std::tanh(dot_row(w, i, *below) + dot_row(wc, i, ctx));
        }
        below = &act;
    }
    out.output.resize(static_cast<std::size_t>(model.output_size));
    for (std::size_t i = 0; i < out.output.size(); ++i) {
        out.output[i] = dot_row(model.w_out, i, *below); // linear output transfer
    }
}

struct WeightSnapshot {
    Matrix w_in;
    std::vector<Matrix> w_hidden;
    Matrix w_out;
    std::vector<Matrix> w_context;
};

WeightSnapshot snapshot_weights(const EnnModel& m) {
    return {m.w_in, m.w_hidden, m.w_out, m.w_context};
}

void restore_weights(EnnModel& m, const WeightSnapshot& snap) {
    m.w_in = snap.w_in;
    m.w_hidden = snap.w_hidden;
    m.w_out = snap.w_out;
    m.w_context = snap.w_context;
}

/// Output delta and per-layer hidden deltas for one sample, using the
/// activations of the forward pass. Context inputs are treated as constants.
void compute_deltas(const EnnModel& model, const ForwardResult& fwd, const Vector& target,
                    Vector& delta_out, std::vector<Vector>& delta) {
    const std::size_t n = static_cast<std::size_t>(model.n_hidden);
    delta_out.resize(fwd.output.size());
    for (std::size_t i = 0; i < fwd.output.size(); ++i) {
        delta_out[i] = target[i] - fwd.output[i]; // linear output: g' = 1
    }
    delta.resize(n);
    for (int layer = model.n_hidden - 1; layer >= 0; --layer) {
        const std::size_t li = static_cast<std::size_t>(layer);
        const Matrix& w_above =
            (layer == model.n_hidden - 1) ? model.w_out : model.w_hidden[li];
        const Vector& delta_above =
            (layer == model.n_hidden - 1) ? delta_out : delta[li + 1];
        const Vector& act = fwd.hidden[li];
        Vector& d = delta[li];
        d.assign(act.size(), 0.0);
        for (std::size_t i = 0; i < delta_above.size(); ++i) {
            const double* row = w_above.data.data() + i * w_above.cols;
            const double da = delta_above[i];
            for (std::size_t j = 0; j < d.size(); ++j) {
                d[j] += da * row[j];
            }
        }
        for (std::size_t j = 0; j < d.size(); ++j) {
            d[j] *= 1.0 - act[j] * act[j]; // f' at the stored activation
        }
    }
}

void fill_uniform(Matrix& m, Rng& rng, double bound) {
    for (double& w : m.data) {
        w = rng.uniform(-bound, bound);
    }
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols; ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols, const char* what) {
    if (!j.is_array() || j.size() != rows) {
        throw FormatError(std::string(what) + ": expected " + std::to_string(rows) + " rows");
    }
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const json& row = j[i];
        if (!row.is_array() || row.size() != cols) {
            throw FormatError(std::string(what) + ": expected " + std::to_string(cols) +
                              " columns in every row");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(i, c) = row[c].get<double>();
        }
    }
    return m;
}

} // namespace

const Matrix& EnnModel::layer_weight(int layer) const {
    return layer == 0 ? w_in : w_hidden[static_cast<std::size_t>(layer - 1)];
}

Matrix& EnnModel::layer_weight(int layer) {
    return layer == 0 ? w_in : w_hidden[static_cast<std::size_t>(layer - 1)];
}

EnnModel init_model(int n_hidden, int input_size, int hidden_size, std::uint64_t seed,
                    double init_scale) {
    if (n_hidden < 1 || input_size < 1 || hidden_size < 1) {
        throw ConfigError("model sizes must be at least 1");
    }
    EnnModel m;
    m.n_hidden = n_hidden;
    m.input_size = input_size;
    m.hidden_size = hidden_size;
    m.output_size = 1;

    Rng rng(seed);
    const std::size_t s = static_cast<std::size_t>(hidden_size);
    const double hidden_bound = init_scale / std::sqrt(static_cast<double>(hidden_size));

    m.w_in = Matrix(s, static_cast<std::size_t>(input_size));
    fill_uniform(m.w_in, rng, init_scale / std::sqrt(static_cast<double>(input_size)));
    for (int i = 1; i < n_hidden; ++i) {
        Matrix w(s, s);
        fill_uniform(w, rng, hidden_bound);
        m.w_hidden.push_back(std::move(w));
    }
    m.w_out = Matrix(static_cast<std::size_t>(m.output_size), s);
    fill_uniform(m.w_out, rng, hidden_bound);
    for (int i = 0; i < n_hidden; ++i) {
        Matrix w(s, s);
        fill_uniform(w, rng, hidden_bound);
        m.w_context.push_back(std::move(w));
        m.context.emplace_back(s, 0.0);
    }
    return m;
}

ForwardResult forward(const EnnModel& model, const Vector& input) {
    ForwardResult out;
    forward_into(model, input, out);
    return out;
}

void step_context(EnnModel& model, const ForwardResult& activations) {
    for (int i = 0; i < model.n_hidden; ++i) {
        model.context[static_cast<std::size_t>(i)] = activations.hidden[static_cast<std::size_t>(i)];
    }
}

void reset_context(EnnModel& model) {
    for (Vector& c : model.context) {
        std::fill(c.begin(), c.end(), 0.0);
    }
}

WeightGradients squared_error_gradients(const EnnModel& model, const Vector& input,
                                        const Vector& target) {
    ForwardResult fwd;
    forward_into(model, input, fwd);
    if (target.size() != fwd.output.size()) {
        throw DimensionError("target length does not match model output size");
    }
    Vector delta_out;
    std::vector<Vector> delta;
    compute_deltas(model, fwd, target, delta_out, delta);

    // d(loss)/dW = -delta * upstream_activation^T
    WeightGradients g;
    g.w_out = Matrix(model.w_out.rows, model.w_out.cols);
    const Vector& top = fwd.hidden.back();
    outer_update(g.w_out, -1.0, delta_out, top);

    g.w_in = Matrix(model.w_in.rows, model.w_in.cols);
    outer_update(g.w_in, -1.0, delta[0], input);
    for (int layer = 1; layer < model.n_hidden; ++layer) {
        const std::size_t li = static_cast<std::size_t>(layer);
        Matrix gw(model.w_hidden[li - 1].rows, model.w_hidden[li - 1].cols);
        outer_update(gw, -1.0, delta[li], fwd.hidden[li - 1]);
        g.w_hidden.push_back(std::move(gw));
    }
    for (int layer = 0; layer < model.n_hidden; ++layer) {
        const std::size_t li = static_cast<std::size_t>(layer);
        Matrix gw(model.w_context[li].rows, model.w_context[li].cols);
        outer_update(gw, -1.0, delta[li], model.context[li]);
        g.w_context.push_back(std::move(gw));
    }
    return g;
}

double train_epoch(EnnModel& model, const SuperVectorSet& data, const TrainConfig& cfg) {
    if (data.size() == 0) {
        throw EmptyDatasetError("no training samples");
    }
    const double lr_in = cfg.input_lr();
    const double lr_hidden = cfg.hidden_lr();
    const double lr_out = cfg.output_lr();
    const double lr_ctx = cfg.context_learning_rate;

    ForwardResult fwd;
    Vector delta_out;
    std::vector<Vector> delta;
    Vector target(1, 0.0);

    double loss_sum = 0.0;
    std::size_t next_segment = 0;
    for (std::size_t idx = 0; idx < data.size(); ++idx) {
        if (next_segment < data.segment_starts.size() && data.segment_starts[next_segment] == idx) {
            reset_context(model);
            ++next_segment;
        }
        const Vector& input = data.inputs[idx];
        forward_into(model, input, fwd);
        target[0] = data.targets[idx];

        double err_sq = 0.0;
        for (std::size_t i = 0; i < fwd.output.size(); ++i) {
            const double e = target[i] - fwd.output[i];
            err_sq += e * e;
        }
        if (!std::isfinite(err_sq)) {
            throw DivergenceError(idx);
        }
        loss_sum += err_sq;

        compute_deltas(model, fwd, target, delta_out, delta);

        outer_update(model.w_out, lr_out, delta_out, fwd.hidden.back());
        for (int layer = model.n_hidden - 1; layer >= 1; --layer) {
            const std::size_t li = static_cast<std::size_t>(layer);
            outer_update(model.w_hidden[li - 1], lr_hidden, delta[li], fwd.hidden[li - 1]);
        }
        outer_update(model.w_in, lr_in, delta[0], input);
        // context update uses the pre-step context that fed this forward pass
        for (int layer = 0; layer < model.n_hidden; ++layer) {
            const std::size_t li = static_cast<std::size_t>(layer);
            outer_update(model.w_context[li], lr_ctx, delta[li], model.context[li]);
        }
        step_context(model, fwd);
    }
    return loss_sum / static_cast<double>(data.size());
}

TrainTrace fit(EnnModel& model, const SuperVectorSet& train, const SuperVectorSet* validation,
               const TrainConfig& cfg) {
    if (cfg.epochs < 1) {
        throw ConfigError("epochs must be at least 1");
    }
    if (!(cfg.learning_rate > 0.0)) {
        throw ConfigError("learning_rate must be positive");
    }
    if (cfg.context_learning_rate < 0.0) {
        throw ConfigError("context_learning_rate must be non-negative");
    }

    TrainTrace trace;
    const bool early_stop = validation != nullptr && cfg.early_stop_patience > 0;
    WeightSnapshot best;
    double best_mape = std::numeric_limits<double>::infinity();
    int epochs_since_best = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        reset_context(model);
        trace.train_loss.push_back(train_epoch(model, train, cfg));
        trace.final_epoch = epoch;

        if (validation != nullptr) {
            const double vm = validation_mape(model, *validation);
            trace.validation_mape.push_back(vm);
            if (early_stop) {
                if (vm < best_mape) {
                    best_mape = vm;
                    best = snapshot_weights(model);
                    epochs_since_best = 0;
                } else if (++epochs_since_best >= cfg.early_stop_patience) {
                    trace.stopped_early = true;
                    break;
                }
            }
        }
    }
    if (early_stop && std::isfinite(best_mape)) {
        restore_weights(model, best);
        reset_context(model);
    }
    return trace;
}

std::vector<Prediction> predict_series(EnnModel& model, const SuperVectorSet& data) {
    if (data.stats != model.norm_stats) {
        throw ConfigError("dataset was built with different normalization stats than the model");
    }
    const ChannelStats& demand = model.norm_stats.at(Channel::demand);

    std::vector<Prediction> out;
    out.reserve(data.size());
    ForwardResult fwd;
    std::size_t next_segment = 0;
    for (std::size_t idx = 0; idx < data.size(); ++idx) {
        if (next_segment < data.segment_starts.size() && data.segment_starts[next_segment] == idx) {
            reset_context(model);
            ++next_segment;
        }
        forward_into(model, data.inputs[idx], fwd);
        out.push_back({data.target_hours[idx], denormalize(fwd.output[0], demand)});
        step_context(model, fwd);
    }
    return out;
}

double validation_mape(EnnModel& model, const SuperVectorSet& data) {
    if (data.stats != model.norm_stats) {
        throw ConfigError("dataset was built with different normalization stats than the model");
    }
    const ChannelStats& demand = model.norm_stats.at(Channel::demand);

    ForwardResult fwd;
    double ape_sum = 0.0;
    std::size_t next_segment = 0;
    for (std::size_t idx = 0; idx < data.size(); ++idx) {
        if (next_segment < data.segment_starts.size() && data.segment_starts[next_segment] == idx) {
            reset_context(model);
            ++next_segment;
        }
        forward_into(model, data.inputs[idx], fwd);
        const double actual = data.target_demand_mw[idx];
        if (!(actual > 0.0)) {
            throw ValidationError("MAPE needs strictly positive actual demand");
        }
        ape_sum += std::abs(actual - denormalize(fwd.output[0], demand)) / actual;
        step_context(model, fwd);
    }
    if (data.size() == 0) {
        throw EmptyDatasetError("no validation samples");
    }
    return ape_sum / static_cast<double>(data.size()) * 100.0;
}

void save_model(const EnnModel& model, const std::filesystem::path& path) {
    json doc;
    doc["format_version"] = 1;
    doc["dims"] = {{"n", model.n_hidden},
                   {"r", model.input_size},
                   {"s", model.hidden_size},
                   {"m", model.output_size}};
    json weights;
    weights["w_in"] = matrix_to_json(model.w_in);
    json hidden = json::array();
    for (const Matrix& w : model.w_hidden) {
        hidden.push_back(matrix_to_json(w));
    }
    weights["w_hidden"] = std::move(hidden);
    weights["w_out"] = matrix_to_json(model.w_out);
    json ctx = json::array();
    for (const Matrix& w : model.w_context) {
        ctx.push_back(matrix_to_json(w));
    }
    weights["w_context"] = std::move(ctx);
    doc["weights"] = std::move(weights);

    json stats = json::object();
    for (const auto& [ch, cs] : model.norm_stats.channels) {
        stats[channel_name(ch)] = {{"mean", cs.mean}, {"variance", cs.variance}};
    }
    doc["norm_stats"] = std::move(stats);

    json factors = json::array();
    for (const Channel c : model.factor_order) {
        factors.push_back(channel_name(c));
    }
    doc["factor_order"] = std::move(factors);
    doc["window_length"] = model.window_length;

    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write model file '" + path.string() + "'");
    }
    out << doc.dump(2) << '\n';
}

EnnModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open model file '" + path.string() + "'");
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw FormatError("model file '" + path.string() + "' is not valid JSON: " + e.what());
    }

    try {
        if (!doc.contains("format_version") || doc["format_version"].get<int>() != 1) {
            throw FormatError("unsupported model format version");
        }
        const json& dims = doc.at("dims");
        EnnModel m;
        m.n_hidden = dims.at("n").get<int>();
        m.input_size = dims.at("r").get<int>();
        m.hidden_size = dims.at("s").get<int>();
        m.output_size = dims.at("m").get<int>();
        if (m.n_hidden < 1 || m.input_size < 1 || m.hidden_size < 1 || m.output_size < 1) {
            throw FormatError("model dimensions must be at least 1");
        }
        const std::size_t s = static_cast<std::size_t>(m.hidden_size);

        const json& weights = doc.at("weights");
        m.w_in = matrix_from_json(weights.at("w_in"), s, static_cast<std::size_t>(m.input_size),
                                  "w_in");
        const json& hidden = weights.at("w_hidden");
        if (!hidden.is_array() || hidden.size() != static_cast<std::size_t>(m.n_hidden - 1)) {
            throw FormatError("w_hidden must hold n-1 matrices");
        }
        for (const json& w : hidden) {
            m.w_hidden.push_back(matrix_from_json(w, s, s, "w_hidden"));
        }
        m.w_out = matrix_from_json(weights.at("w_out"), static_cast<std::size_t>(m.output_size), s,
                                   "w_out");
        const json& ctx = weights.at("w_context");
        if (!ctx.is_array() || ctx.size() != static_cast<std::size_t>(m.n_hidden)) {
            throw FormatError("w_context must hold n matrices");
        }
        for (const json& w : ctx) {
            m.w_context.push_back(matrix_from_json(w, s, s, "w_context"));
            m.context.emplace_back(s, 0.0);
        }

        for (const auto& [name, cs] : doc.at("norm_stats").items()) {
            m.norm_stats.channels[channel_from_name(name)] =
                ChannelStats{cs.at("mean").get<double>(), cs.at("variance").get<double>()};
        }
        for (const json& f : doc.at("factor_order")) {
            m.factor_order.push_back(channel_from_name(f.get<std::string>()));
        }
        m.window_length = doc.at("window_length").get<int>();
        return m;
    } catch (const json::exception& e) {
        throw FormatError("model file '" + path.string() + "' does not match the schema: " +
                          e.what());
    }
}

} // namespace heatcast
