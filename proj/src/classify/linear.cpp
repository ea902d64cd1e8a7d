#include "classify/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace rankkit {

void validate_train_params(const TrainParams& params) {
    if (!(params.c > 0.0))
        throw_error(errc::domain, "regularization weight c must be positive");
    if (!(params.learning_rate > 0.0))
        throw_error(errc::domain, "learning rate must be positive");
    if (!(params.init_noise >= 0.0))
        throw_error(errc::domain, "init noise must be non-negative");
}

LinearModel::LinearModel(Matrix weights, std::vector<double> biases,
                         TrainParams hyperparams)
    : weights_(std::move(weights)),
      biases_(std::move(biases)),
      hyperparams_(hyperparams) {
    validate_matrix(weights_, "model weights");
    if (biases_.size() != weights_.rows())
        throw_error(errc::dimension_mismatch,
                    "model bias count does not match the class count");
    for (double b : biases_)
        if (!std::isfinite(b))
            throw_error(errc::not_finite, "model bias is non-finite");
    validate_train_params(hyperparams_);
}

namespace {

// Row order that depends only on row content and label, never on input
// position: permuting training rows leaves gradient sums bitwise intact.
std::vector<std::size_t> canonical_order(const Matrix& x, const Labels& y) {
    std::vector<std::size_t> order(x.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double* ra = x.row(a);
        const double* rb = x.row(b);
        for (std::size_t d = 0; d < x.cols(); ++d) {
            if (ra[d] < rb[d]) return true;
            if (ra[d] > rb[d]) return false;
        }
        return y[a] < y[b];
    });
    return order;
}

} // namespace

LinearModel train_ovr_linear(const Matrix& x, const Labels& y,
                             const TrainParams& params, std::uint64_t seed,
                             std::vector<std::vector<double>>* loss_history) {
    validate_matrix(x, "feature matrix");
    check_labels_match(x, y);
    validate_train_params(params);
    if (x.rows() < 2)
        throw_error(errc::invalid_argument,
                    "training needs at least two samples");

    std::int64_t max_label = 0;
    std::set<std::int64_t> distinct;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0) {
            std::ostringstream msg;
            msg << "label at index " << i << " is negative";
            throw_error(errc::invalid_argument, msg.str());
        }
        distinct.insert(y[i]);
        max_label = std::max(max_label, y[i]);
    }
    if (distinct.size() < 2)
        throw_error(errc::invalid_argument,
                    "training needs at least two distinct labels");

    const std::size_t k = static_cast<std::size_t>(max_label) + 1;
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const auto order = canonical_order(x, y);

    Matrix weights(k, d);
    std::vector<double> biases(k, 0.0);
    if (loss_history) loss_history->assign(k, {});

    // Classes are independent; each gets its own noise stream.
    parallel_for(k, [&](std::size_t cls) {
        double* w = weights.row(cls);
        double& b = biases[cls];
        if (params.init_noise > 0.0) {
            Rng rng(derive_seed(seed, cls));
            for (std::size_t j = 0; j < d; ++j)
                w[j] = params.init_noise * rng.next_gaussian();
            b = params.init_noise * rng.next_gaussian();
        }

        std::vector<double> grad(d, 0.0);
        for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
            std::fill(grad.begin(), grad.end(), 0.0);
            double grad_b = 0.0;
            double hinge_sq = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                const double* xi = x.row(order[t]);
                const double label =
                    y[order[t]] == static_cast<std::int64_t>(cls) ? 1.0 : -1.0;
                double score = b;
                for (std::size_t j = 0; j < d; ++j) score += w[j] * xi[j];
                const double margin = 1.0 - label * score;
                if (margin > 0.0) {
                    hinge_sq += margin * margin;
                    const double coef = -2.0 * params.c * margin * label;
                    for (std::size_t j = 0; j < d; ++j)
                        grad[j] += coef * xi[j];
                    grad_b += coef;
                }
            }
            double w_norm_sq = 0.0;
            for (std::size_t j = 0; j < d; ++j) w_norm_sq += w[j] * w[j];
            const double loss = 0.5 * w_norm_sq + params.c * hinge_sq;
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "training diverged for class " << cls << " at epoch "
                    << epoch << " (non-finite loss); lower the learning rate";
                throw_error(errc::diverged, msg.str());
            }
            if (loss_history) (*loss_history)[cls].push_back(loss);

            for (std::size_t j = 0; j < d; ++j)
                w[j] -= params.learning_rate * (w[j] + grad[j]);
            b -= params.learning_rate * grad_b;
        }

        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(w[j]) || !std::isfinite(b)) {
                std::ostringstream msg;
                msg << "training diverged for class " << cls << " at epoch "
                    << params.epochs
                    << " (non-finite parameters); lower the learning rate";
                throw_error(errc::diverged, msg.str());
            }
        }
    });

    return LinearModel(std::move(weights), std::move(biases), params);
}

Matrix predict_scores(const LinearModel& model, const Matrix& x) {
    validate_matrix(x, "feature matrix");
    if (x.cols() != model.dims()) {
        std::ostringstream msg;
        msg << "feature matrix has " << x.cols()
            << " dimensions but the model expects " << model.dims();
        throw_error(errc::dimension_mismatch, msg.str());
    }
    Matrix scores(x.rows(), model.classes());
    parallel_chunks(x.rows(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double* xi = x.row(i);
            for (std::size_t cls = 0; cls < model.classes(); ++cls) {
                const double* w = model.weights().row(cls);
                double score = model.biases()[cls];
                for (std::size_t j = 0; j < x.cols(); ++j)
                    score += w[j] * xi[j];
                scores(i, cls) = score;
            }
        }
    });
    return scores;
}

std::pair<double, std::vector<double>> loss_and_gradient(
    const LinearModel& model, const Matrix& x, const Labels& y,
    std::size_t class_index) {
    validate_matrix(x, "feature matrix");
    check_labels_match(x, y);
    if (x.cols() != model.dims())
        throw_error(errc::dimension_mismatch,
                    "feature dimensions do not match the model");
    if (class_index >= model.classes())
        throw_error(errc::invalid_argument, "class index out of range");

    const double c = model.hyperparams().c;
    const double* w = model.weights().row(class_index);
    const double b = model.biases()[class_index];
    std::vector<double> grad(model.dims() + 1, 0.0);
    double hinge_sq = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* xi = x.row(i);
        const double label =
            y[i] == static_cast<std::int64_t>(class_index) ? 1.0 : -1.0;
        double score = b;
        for (std::size_t j = 0; j < model.dims(); ++j) score += w[j] * xi[j];
        const double margin = 1.0 - label * score;
        if (margin > 0.0) {
            hinge_sq += margin * margin;
            const double coef = -2.0 * c * margin * label;
            for (std::size_t j = 0; j < model.dims(); ++j)
                grad[j] += coef * xi[j];
            grad[model.dims()] += coef;
        }
    }
    double w_norm_sq = 0.0;
    for (std::size_t j = 0; j < model.dims(); ++j) {
        w_norm_sq += w[j] * w[j];
        grad[j] += w[j];
    }
    return {0.5 * w_norm_sq + c * hinge_sq, std::move(grad)};
}

void save_model(const LinearModel& model, const std::string& path) {
    io::write_matrix_binary(model.weights(), path);
    nlohmann::json sidecar{
        {"kind", "linear_ovr_model"},
        {"biases", model.biases()},
        {"hyperparams",
         {{"c", model.hyperparams().c},
          {"epochs", model.hyperparams().epochs},
          {"learning_rate", model.hyperparams().learning_rate},
          {"init_noise", model.hyperparams().init_noise}}},
    };
    io::write_text_file(path + ".json", sidecar.dump(2) + "\n");
}

LinearModel load_model(const std::string& path) {
    Matrix weights = io::read_matrix_binary(path);
    const std::string sidecar_path = path + ".json";
    nlohmann::json sidecar;
    try {
        sidecar = nlohmann::json::parse(io::read_text_file(sidecar_path));
    } catch (const nlohmann::json::exception& e) {
        throw_error(errc::format, sidecar_path + ": " + e.what());
    }
    if (!sidecar.is_object() ||
        sidecar.value("kind", "") != "linear_ovr_model")
        throw_error(errc::format, sidecar_path + ": not a model sidecar");
    if (!sidecar.contains("biases") || !sidecar.at("biases").is_array())
        throw_error(errc::format, sidecar_path + ": missing biases");
    std::vector<double> biases;
    for (const auto& v : sidecar.at("biases")) {
        if (!v.is_number())
            throw_error(errc::format, sidecar_path + ": bias must be numeric");
        biases.push_back(v.get<double>());
    }
    TrainParams params;
    if (sidecar.contains("hyperparams")) {
        const auto& h = sidecar.at("hyperparams");
        params.c = h.value("c", params.c);
        params.epochs = h.value("epochs", params.epochs);
        params.learning_rate = h.value("learning_rate", params.learning_rate);
        params.init_noise = h.value("init_noise", params.init_noise);
    }
    return LinearModel(std::move(weights), std::move(biases), params);
}

} // namespace rankkit
