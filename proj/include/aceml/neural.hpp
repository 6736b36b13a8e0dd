#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aceml/dataset.hpp"
#include "aceml/model.hpp"
#include "aceml/rng.hpp"

namespace aceml {

enum class Activation { relu, leaky_relu, tanh, selu, elu, celu, gelu };
enum class Optimizer { sgd, adamax };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);
const char* to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& name);

struct NnConfig {
    int depth = 3;   // hidden layers; 0 = plain linear unit
    int width = 50;  // units per hidden layer
    Activation activation = Activation::relu;
    double batch_fraction = 0.1;  // batch size = max(1, round(fraction * n))
    double learning_rate = 0.01;
    int epochs = 32;
    Optimizer optimizer = Optimizer::adamax;
    // One mask per hidden layer, applied to that layer's input (so the first
    // mask hides raw features); training only, inverted scaling.
    double dropout_rate = 0.0;
    double penalty_alpha = 0.0;   // L1/L2 mix on weights (not biases)
    double penalty_lambda = 0.0;
    std::uint64_t seed = 0;  // extra entropy folded into the stream when nonzero

    int batch_size(int n) const;
    void validate() const;
};

// Fully connected MLP with a single linear output unit, trained by minibatch
// gradient descent on squared loss plus lambda*(alpha*||W||_1 + (1-alpha)*||W||_2^2).
class Mlp final : public Model {
public:
    LearnerKind kind() const override { return LearnerKind::neural_net; }
    int n_features() const override { return n_inputs_; }

    // Mean squared error plus weight penalty, inference mode.
    double training_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                         double lambda) const;
    // Full-batch gradients of training_loss; used by the optimizer and by the
    // finite-difference tests.
    void backprop(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                  double lambda, std::vector<Eigen::MatrixXd>& dW,
                  std::vector<Eigen::VectorXd>& db) const;

    std::vector<Eigen::MatrixXd> W;  // layer l maps W[l]: in x out
    std::vector<Eigen::VectorXd> b;
    Activation activation = Activation::relu;
    int n_inputs_ = 0;

protected:
    Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const override;
};

// Invoked after every batch update with the step counter (1-based) and the
// current network in inference mode.
using NnTraceHook = std::function<void(int step, const Mlp& net)>;

// Throws DivergedLoss when the batch loss stops being finite.
Mlp fit_nn(const Dataset& d, const NnConfig& cfg, RngStream& rng, const NnTraceHook& trace = {});

double activate(Activation a, double x);
double activate_grad(Activation a, double x);

}  // namespace aceml
