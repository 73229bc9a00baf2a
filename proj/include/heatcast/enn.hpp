#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "heatcast/dataset.hpp"
#include "heatcast/numerics.hpp"

namespace heatcast {

/// Hyperparameters for gradient training. The shared learning_rate drives the
/// input, hidden and output weights unless a per-class override is set.
struct TrainConfig {
    double learning_rate = 0.01;
    double context_learning_rate = 0.01;
    std::optional<double> input_learning_rate;
    std::optional<double> hidden_learning_rate;
    std::optional<double> output_learning_rate;
    int epochs = 200;
    std::uint64_t seed = 0;
    int early_stop_patience = 20; // 0 disables early stopping
    double init_scale = 1.0;      // multiplies the 1/sqrt(fan_in) uniform init bound

    double input_lr() const { return input_learning_rate.value_or(learning_rate); }
    double hidden_lr() const { return hidden_learning_rate.value_or(learning_rate); }
    double output_lr() const { return output_learning_rate.value_or(learning_rate); }
};

struct TrainTrace {
    std::vector<double> train_loss;      // mean squared error per epoch, normalized scale
    std::vector<double> validation_mape; // percent; filled when validation data is given
    int final_epoch = 0;
    bool stopped_early = false;
};

/// Elman network with multiple hidden layers. Every hidden layer has a context
/// layer that holds its previous-step activation and feeds back through its
/// own weight matrix.
struct EnnModel {
    int n_hidden = 0;   // number of hidden layers
    int input_size = 0;
    int hidden_size = 0;
    int output_size = 1;

    Matrix w_in;                   // hidden_size x input_size
    std::vector<Matrix> w_hidden;  // n_hidden-1 matrices, hidden_size x hidden_size
    Matrix w_out;                  // output_size x hidden_size
    std::vector<Matrix> w_context; // n_hidden matrices, hidden_size x hidden_size
    std::vector<Vector> context;   // n_hidden vectors of length hidden_size

    // Carried so a saved model can rebuild its own inputs from raw data.
    NormalizationStats norm_stats;
    std::vector<Channel> factor_order;
    int window_length = 0;

    /// Weight matrix feeding hidden layer `layer` (0-based): w_in for layer 0,
    /// otherwise w_hidden[layer-1].
    const Matrix& layer_weight(int layer) const;
    Matrix& layer_weight(int layer);
};

struct ForwardResult {
    Vector output;
    std::vector<Vector> hidden; // activation of each hidden layer, in order
};

/// Gradients of the one-sample loss 0.5 * |target - y|^2 with respect to every
/// weight matrix, with the context vectors treated as constants. The training
/// update is W += learning_rate * (-gradient).
struct WeightGradients {
    Matrix w_in;
    std::vector<Matrix> w_hidden;
    Matrix w_out;
    std::vector<Matrix> w_context;
};

/// Weights drawn uniformly from [-b, b] with b = init_scale / sqrt(fan_in) per
/// matrix; context vectors start at zero. Identical seeds give identical models.
EnnModel init_model(int n_hidden, int input_size, int hidden_size, std::uint64_t seed,
                    double init_scale = 1.0);

/// Pure forward pass; does not touch the stored context.
ForwardResult forward(const EnnModel& model, const Vector& input);

/// Copies the hidden activations of the immediately preceding forward pass
/// into the context layers.
void step_context(EnnModel& model, const ForwardResult& activations);

void reset_context(EnnModel& model);

WeightGradients squared_error_gradients(const EnnModel& model, const Vector& input,
                                        const Vector& target);

/// One pass over the samples in temporal order: forward, delta backpropagation,
/// weight updates, context step. Context is reset at every segment start.
/// Returns the mean squared error observed during the pass.
double train_epoch(EnnModel& model, const SuperVectorSet& data, const TrainConfig& cfg);

/// Epoch loop with optional early stopping on validation MAPE. When stopping is
/// active the best-validation weights are restored at the end.
TrainTrace fit(EnnModel& model, const SuperVectorSet& train, const SuperVectorSet* validation,
               const TrainConfig& cfg);

struct Prediction {
    HourStamp hour{};
    double demand_mw = 0.0;
};

/// Context-stepped inference over the whole set, denormalized to megawatts.
/// Context is reset at each segment start, so repeated calls agree exactly.
std::vector<Prediction> predict_series(EnnModel& model, const SuperVectorSet& data);

/// Validation MAPE in percent of the model's predictions against the set's
/// megawatt targets.
double validation_mape(EnnModel& model, const SuperVectorSet& data);

/// JSON model file with full round-trip precision on every weight.
void save_model(const EnnModel& model, const std::filesystem::path& path);
EnnModel load_model(const std::filesystem::path& path);

} // namespace heatcast
