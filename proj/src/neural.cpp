#include "aceml/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aceml {

namespace {

constexpr double kSeluLambda = 1.0507009873554805;
constexpr double kSeluAlpha = 1.6732632423543772;
constexpr double kLeakySlope = 0.01;
constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

struct LayerCache {
    Eigen::MatrixXd pre;   // pre-activation
    Eigen::MatrixXd post;  // after activation (and dropout during training)
};

}  // namespace

const char* to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::tanh: return "tanh";
        case Activation::selu: return "selu";
        case Activation::elu: return "elu";
        case Activation::celu: return "celu";
        case Activation::gelu: return "gelu";
    }
    return "?";
}

Activation activation_from_string(const std::string& name) {
    for (Activation a : {Activation::relu, Activation::leaky_relu, Activation::tanh,
                         Activation::selu, Activation::elu, Activation::celu, Activation::gelu}) {
        if (name == to_string(a)) return a;
    }
    throw Error("unknown activation: " + name);
}

const char* to_string(Optimizer o) {
    return o == Optimizer::sgd ? "sgd" : "adamax";
}

Optimizer optimizer_from_string(const std::string& name) {
    if (name == "sgd") return Optimizer::sgd;
    if (name == "adamax") return Optimizer::adamax;
    throw Error("unknown optimizer: " + name);
}

double activate(Activation a, double x) {
    switch (a) {
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::leaky_relu: return x > 0.0 ? x : kLeakySlope * x;
        case Activation::tanh: return std::tanh(x);
        case Activation::selu:
            return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * std::expm1(x);
        case Activation::elu: return x > 0.0 ? x : std::expm1(x);
        case Activation::celu: return x > 0.0 ? x : std::expm1(x);  // alpha = 1
        case Activation::gelu: return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
    }
    return x;
}

double activate_grad(Activation a, double x) {
    switch (a) {
        case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
        case Activation::leaky_relu: return x > 0.0 ? 1.0 : kLeakySlope;
        case Activation::tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Activation::selu:
            return x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x);
        case Activation::elu:
        case Activation::celu: return x > 0.0 ? 1.0 : std::exp(x);
        case Activation::gelu: {
            const double phi = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
            return phi + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
        }
    }
    return 1.0;
}

int NnConfig::batch_size(int n) const {
    const int b = static_cast<int>(std::lround(batch_fraction * n));
    return std::clamp(b, 1, n);
}

void NnConfig::validate() const {
    if (depth < 0) throw Error("NnConfig: depth must be >= 0");
    if (depth > 0 && width < 1) throw Error("NnConfig: width must be >= 1");
    if (batch_fraction <= 0.0 || batch_fraction > 1.0) {
        throw Error("NnConfig: batch_fraction must be in (0, 1]");
    }
    if (!(learning_rate > 0.0)) throw Error("NnConfig: learning_rate must be positive");
    if (epochs < 1) throw Error("NnConfig: epochs must be >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw Error("NnConfig: dropout_rate must be in [0, 1)");
    }
    if (penalty_alpha < 0.0 || penalty_alpha > 1.0) {
        throw Error("NnConfig: penalty_alpha must be in [0, 1]");
    }
    if (penalty_lambda < 0.0) throw Error("NnConfig: penalty_lambda must be >= 0");
}

Eigen::VectorXd Mlp::predict_impl(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd a = X;
    const size_t n_layers = W.size();
    for (size_t l = 0; l + 1 < n_layers; ++l) {
        Eigen::MatrixXd z = (a * W[l]).rowwise() + b[l].transpose();
        a = z.unaryExpr([this](double v) { return activate(activation, v); });
    }
    Eigen::MatrixXd out = (a * W.back()).rowwise() + b.back().transpose();
    return out.col(0);
}

double Mlp::training_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                          double lambda) const {
    const Eigen::VectorXd pred = predict(X);
    double loss = (pred - y).squaredNorm() / static_cast<double>(X.rows());
    if (lambda > 0.0) {
        for (const auto& w : W) {
            loss += lambda * (alpha * w.cwiseAbs().sum() + (1.0 - alpha) * w.squaredNorm());
        }
    }
    return loss;
}

void Mlp::backprop(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                   double lambda, std::vector<Eigen::MatrixXd>& dW,
                   std::vector<Eigen::VectorXd>& db) const {
    const size_t n_layers = W.size();
    std::vector<LayerCache> cache(n_layers);
    Eigen::MatrixXd a = X;
    for (size_t l = 0; l + 1 < n_layers; ++l) {
        cache[l].pre = (a * W[l]).rowwise() + b[l].transpose();
        cache[l].post =
            cache[l].pre.unaryExpr([this](double v) { return activate(activation, v); });
        a = cache[l].post;
    }
    const Eigen::VectorXd pred = ((a * W.back()).rowwise() + b.back().transpose()).col(0);

    dW.resize(n_layers);
    db.resize(n_layers);
    const double inv_n = 1.0 / static_cast<double>(X.rows());
    Eigen::MatrixXd delta = (2.0 * inv_n) * (pred - y);  // column

    for (size_t l = n_layers; l-- > 0;) {
        const Eigen::MatrixXd& input = l == 0 ? X : cache[l - 1].post;
        dW[l] = input.transpose() * delta;
        db[l] = delta.colwise().sum();
        if (l > 0) {
            Eigen::MatrixXd grad_act = cache[l - 1].pre.unaryExpr(
                [this](double v) { return activate_grad(activation, v); });
            delta = (delta * W[l].transpose()).cwiseProduct(grad_act);
        }
    }
    if (lambda > 0.0) {
        for (size_t l = 0; l < n_layers; ++l) {
            dW[l] += lambda * (alpha * W[l].unaryExpr([](double v) {
                return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
            }) + 2.0 * (1.0 - alpha) * W[l]);
        }
    }
}

namespace {

void init_weights(Mlp& net, const std::vector<int>& dims, RngStream& rng) {
    const size_t n_layers = dims.size() - 1;
    net.W.resize(n_layers);
    net.b.resize(n_layers);
    for (size_t l = 0; l < n_layers; ++l) {
        const int fan_in = dims[l];
        const int fan_out = dims[l + 1];
        net.W[l].resize(fan_in, fan_out);
        if (net.activation == Activation::selu) {
            const double sd = std::sqrt(1.0 / fan_in);
            for (int i = 0; i < fan_in; ++i) {
                for (int o = 0; o < fan_out; ++o) {
                    net.W[l](i, o) = rng.normal(0.0, sd);
                }
            }
        } else {
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            for (int i = 0; i < fan_in; ++i) {
                for (int o = 0; o < fan_out; ++o) {
                    net.W[l](i, o) = rng.uniform(-bound, bound);
                }
            }
        }
        net.b[l] = Eigen::VectorXd::Zero(fan_out);
    }
}

struct AdaMaxState {
    std::vector<Eigen::MatrixXd> mW, uW;
    std::vector<Eigen::VectorXd> mb, ub;
    long t = 0;

    void init(const Mlp& net) {
        mW.clear();
        uW.clear();
        mb.clear();
        ub.clear();
        for (const auto& w : net.W) {
            mW.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
            uW.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        }
        for (const auto& bias : net.b) {
            mb.push_back(Eigen::VectorXd::Zero(bias.size()));
            ub.push_back(Eigen::VectorXd::Zero(bias.size()));
        }
    }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamaxEps = 1e-8;

void adamax_step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, Eigen::MatrixXd& m,
                 Eigen::MatrixXd& u, double lr, long t) {
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    u = (kBeta2 * u).cwiseMax(grad.cwiseAbs());
    const double corr = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    param -= (lr / corr) * (m.array() / (u.array() + kAdamaxEps)).matrix();
}

void adamax_step(Eigen::VectorXd& param, const Eigen::VectorXd& grad, Eigen::VectorXd& m,
                 Eigen::VectorXd& u, double lr, long t) {
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    u = (kBeta2 * u).cwiseMax(grad.cwiseAbs());
    const double corr = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    param -= (lr / corr) * (m.array() / (u.array() + kAdamaxEps)).matrix();
}

}  // namespace

Mlp fit_nn(const Dataset& d, const NnConfig& cfg, RngStream& rng, const NnTraceHook& trace) {
    d.validate();
    cfg.validate();

    RngStream local;
    if (cfg.seed != 0) {
        const std::uint64_t a = rng.next_u64();
        const std::uint64_t b = rng.next_u64();
        local = split_rng(a ^ cfg.seed, b);
    }
    RngStream& r = cfg.seed == 0 ? rng : local;

    const int n = d.n();
    const int p = d.p();
    std::vector<int> dims;
    dims.push_back(p);
    for (int l = 0; l < cfg.depth; ++l) dims.push_back(cfg.width);
    dims.push_back(1);

    Mlp net;
    net.activation = cfg.activation;
    net.n_inputs_ = p;
    init_weights(net, dims, r);

    const size_t n_layers = net.W.size();
    AdaMaxState opt;
    if (cfg.optimizer == Optimizer::adamax) opt.init(net);

    const int batch = cfg.batch_size(n);
    const double keep = 1.0 - cfg.dropout_rate;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<LayerCache> cache(n_layers);
    std::vector<Eigen::MatrixXd> masks(n_layers);  // dropout masks on hidden outputs
    std::vector<Eigen::MatrixXd> dW(n_layers);
    std::vector<Eigen::VectorXd> db(n_layers);

    int step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (int i = n - 1; i > 0; --i) {
            std::swap(order[i], order[r.uniform_index(static_cast<std::uint64_t>(i) + 1)]);
        }
        for (int start = 0; start < n; start += batch) {
            const int bsz = std::min(batch, n - start);
            Eigen::MatrixXd Xb(bsz, p);
            Eigen::VectorXd yb(bsz);
            for (int i = 0; i < bsz; ++i) {
                Xb.row(i) = d.X.row(order[start + i]);
                yb(i) = d.y(order[start + i]);
            }

            // Forward with dropout on each hidden layer's input (inverted
            // scaling). Dropping the first layer's input hides features the
            // way mtry subsampling does in a forest.
            Eigen::MatrixXd dropped_input;
            const auto drop = [&](Eigen::MatrixXd& act, Eigen::MatrixXd& mask) {
                mask.resize(act.rows(), act.cols());
                for (Eigen::Index rr = 0; rr < mask.rows(); ++rr) {
                    for (Eigen::Index cc = 0; cc < mask.cols(); ++cc) {
                        mask(rr, cc) = r.uniform() < keep ? 1.0 / keep : 0.0;
                    }
                }
                act = act.cwiseProduct(mask);
            };
            const bool dropout = cfg.dropout_rate > 0.0 && n_layers > 1;
            if (dropout) {
                dropped_input = Xb;
                drop(dropped_input, masks[0]);
            }
            Eigen::MatrixXd a = dropout ? dropped_input : Xb;
            for (size_t l = 0; l + 1 < n_layers; ++l) {
                cache[l].pre = (a * net.W[l]).rowwise() + net.b[l].transpose();
                cache[l].post = cache[l].pre.unaryExpr(
                    [&net](double v) { return activate(net.activation, v); });
                if (dropout && l + 2 < n_layers) {
                    drop(cache[l].post, masks[l + 1]);
                }
                a = cache[l].post;
            }
            const Eigen::VectorXd pred =
                ((a * net.W.back()).rowwise() + net.b.back().transpose()).col(0);

            const double batch_loss = (pred - yb).squaredNorm() / bsz;
            if (!std::isfinite(batch_loss)) {
                throw DivergedLoss("fit_nn: non-finite training loss at step " +
                                   std::to_string(step + 1));
            }

            Eigen::MatrixXd delta = (2.0 / bsz) * (pred - yb);
            for (size_t l = n_layers; l-- > 0;) {
                const Eigen::MatrixXd& input =
                    l == 0 ? (dropout ? dropped_input : Xb) : cache[l - 1].post;
                dW[l] = input.transpose() * delta;
                db[l] = delta.colwise().sum();
                if (l > 0) {
                    // Backing through post_{l-1}: undo the mask applied to it
                    // (layers 1..depth-1 had masked inputs), then the activation.
                    Eigen::MatrixXd grad_act = cache[l - 1].pre.unaryExpr(
                        [&net](double v) { return activate_grad(net.activation, v); });
                    delta = delta * net.W[l].transpose();
                    if (dropout && l + 1 < n_layers) {
                        delta = delta.cwiseProduct(masks[l]);
                    }
                    delta = delta.cwiseProduct(grad_act);
                }
            }
            if (cfg.penalty_lambda > 0.0) {
                for (size_t l = 0; l < n_layers; ++l) {
                    dW[l] += cfg.penalty_lambda *
                             (cfg.penalty_alpha * net.W[l].unaryExpr([](double v) {
                              return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
                          }) + 2.0 * (1.0 - cfg.penalty_alpha) * net.W[l]);
                }
            }

            ++step;
            if (cfg.optimizer == Optimizer::adamax) {
                ++opt.t;
                for (size_t l = 0; l < n_layers; ++l) {
                    adamax_step(net.W[l], dW[l], opt.mW[l], opt.uW[l], cfg.learning_rate, opt.t);
                    adamax_step(net.b[l], db[l], opt.mb[l], opt.ub[l], cfg.learning_rate, opt.t);
                }
            } else {
                for (size_t l = 0; l < n_layers; ++l) {
                    net.W[l] -= cfg.learning_rate * dW[l];
                    net.b[l] -= cfg.learning_rate * db[l];
                }
            }

            if (trace) {
                trace(step, net);
            }
        }
    }
    return net;
}

}  // namespace aceml
