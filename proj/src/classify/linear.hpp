#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "core/matrix.hpp"

namespace rankkit {

// Hyperparameters of the one-vs-rest squared-hinge objective
//   0.5*||w_k||^2 + c * sum_i max(0, 1 - y_ik*(w_k.x_i + b_k))^2
// minimized by full-batch gradient descent with a fixed learning rate.
// The documented learning-rate default assumes unit-scale features.
struct TrainParams {
    double c = 100.0;
    std::size_t epochs = 500;
    double learning_rate = 1e-4;
    double init_noise = 0.0; // gaussian init std; 0 = zero init
};

void validate_train_params(const TrainParams& params);

class LinearModel {
public:
    // weights is classes x dims; biases has one entry per class.
    LinearModel(Matrix weights, std::vector<double> biases,
                TrainParams hyperparams);

    const Matrix& weights() const { return weights_; }
    const std::vector<double>& biases() const { return biases_; }
    const TrainParams& hyperparams() const { return hyperparams_; }
    std::size_t classes() const { return weights_.rows(); }
    std::size_t dims() const { return weights_.cols(); }

private:
    Matrix weights_;
    std::vector<double> biases_;
    TrainParams hyperparams_;
};

// Trains max(label)+1 one-vs-rest classifiers (class k positive, rest
// negative). Deterministic: the seed only feeds optional init noise, and
// gradient sums run in a canonical row order (rows sorted by content, then
// label), so permuting training rows reproduces the model bitwise.
// Throws errc::diverged, naming the epoch, if the loss leaves the finite
// range; loss_history (when given) receives one per-epoch objective series
// per class.
LinearModel train_ovr_linear(const Matrix& x, const Labels& y,
                             const TrainParams& params, std::uint64_t seed,
                             std::vector<std::vector<double>>* loss_history =
                                 nullptr);

// score(i,k) = w_k . x_i + b_k
Matrix predict_scores(const LinearModel& model, const Matrix& x);

// Objective value and exact gradient for one class, in input row order.
// The gradient has dims+1 entries: d/dw, then d/db.
std::pair<double, std::vector<double>> loss_and_gradient(
    const LinearModel& model, const Matrix& x, const Labels& y,
    std::size_t class_index);

// Weights in the binary matrix format at `path`; biases and hyperparameters
// in a JSON sidecar at `path`.json.
void save_model(const LinearModel& model, const std::string& path);
LinearModel load_model(const std::string& path);

} // namespace rankkit
