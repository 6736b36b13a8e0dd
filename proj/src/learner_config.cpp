#include "aceml/learner_config.hpp"

#include <nlohmann/json.hpp>

namespace aceml {

using nlohmann::json;

const char* to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::ols: return "ols";
        case LearnerKind::elastic_net: return "elastic_net";
        case LearnerKind::tree: return "tree";
        case LearnerKind::random_forest: return "rf";
        case LearnerKind::gbt: return "gbt";
        case LearnerKind::linear_booster: return "linear_booster";
        case LearnerKind::neural_net: return "nn";
    }
    return "?";
}

LearnerKind learner_kind_from_string(const std::string& name) {
    if (name == "ols" || name == "lm") return LearnerKind::ols;
    if (name == "elastic_net" || name == "enet") return LearnerKind::elastic_net;
    if (name == "tree") return LearnerKind::tree;
    if (name == "rf" || name == "random_forest") return LearnerKind::random_forest;
    if (name == "gbt" || name == "brt") return LearnerKind::gbt;
    if (name == "linear_booster") return LearnerKind::linear_booster;
    if (name == "nn" || name == "neural_net") return LearnerKind::neural_net;
    throw Error("unknown learner kind: " + name);
}

LearnerKind kind_of(const LearnerConfig& cfg) {
    switch (cfg.index()) {
        case 0: return LearnerKind::ols;
        case 1: return LearnerKind::elastic_net;
        case 2: return LearnerKind::tree;
        case 3: return LearnerKind::random_forest;
        case 4: return LearnerKind::gbt;
        case 5: return LearnerKind::linear_booster;
        default: return LearnerKind::neural_net;
    }
}

LearnerConfig default_config(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::ols: return OlsConfig{};
        case LearnerKind::elastic_net: return ElasticNetConfig{};
        case LearnerKind::tree: {
            TreeConfig cfg;
            cfg.min_node_size = 5;
            return cfg;
        }
        case LearnerKind::random_forest: return RfConfig{};
        case LearnerKind::gbt: return GbtConfig{};
        case LearnerKind::linear_booster: return LinearBoosterConfig{};
        case LearnerKind::neural_net: return NnConfig{};
    }
    return OlsConfig{};
}

std::unique_ptr<Model> fit(const Dataset& d, const LearnerConfig& cfg, RngStream& rng) {
    if (const auto* c = std::get_if<OlsConfig>(&cfg)) {
        (void)c;
        return std::make_unique<LinearModel>(fit_ols(d));
    }
    if (const auto* c = std::get_if<ElasticNetConfig>(&cfg)) {
        double lambda = c->lambda;
        if (lambda < 0.0) {
            const auto grid = default_lambda_grid(d, c->alpha, c->n_lambda, c->lambda_min_ratio);
            lambda = cv_select_lambda(d, c->alpha, c->cv_folds, grid, rng, c->tol, c->max_iter);
        }
        return std::make_unique<LinearModel>(
            fit_elastic_net(d, c->alpha, lambda, c->tol, c->max_iter));
    }
    if (const auto* c = std::get_if<TreeConfig>(&cfg)) {
        return std::make_unique<Tree>(fit_tree(d, *c, rng));
    }
    if (const auto* c = std::get_if<RfConfig>(&cfg)) {
        return std::make_unique<RandomForest>(fit_rf(d, *c, rng));
    }
    if (const auto* c = std::get_if<GbtConfig>(&cfg)) {
        return std::make_unique<GradientBoostedTrees>(fit_gbt(d, *c, rng));
    }
    if (const auto* c = std::get_if<LinearBoosterConfig>(&cfg)) {
        return std::make_unique<LinearModel>(fit_linear_booster(d, c->n_steps, c->eta));
    }
    const auto& c = std::get<NnConfig>(cfg);
    return std::make_unique<Mlp>(fit_nn(d, c, rng));
}

std::string learner_config_to_json(const LearnerConfig& cfg) {
    json j;
    j["kind"] = to_string(kind_of(cfg));
    if (const auto* c = std::get_if<ElasticNetConfig>(&cfg)) {
        j["alpha"] = c->alpha;
        j["lambda"] = c->lambda;
        j["cv_folds"] = c->cv_folds;
        j["n_lambda"] = c->n_lambda;
        j["lambda_min_ratio"] = c->lambda_min_ratio;
        j["tol"] = c->tol;
        j["max_iter"] = c->max_iter;
    } else if (const auto* c = std::get_if<TreeConfig>(&cfg)) {
        j["max_depth"] = c->max_depth;
        j["min_node_size"] = c->min_node_size;
        j["mtry_fraction"] = c->mtry_fraction;
        j["regularization_factor"] = c->regularization_factor;
    } else if (const auto* c = std::get_if<RfConfig>(&cfg)) {
        j["n_trees"] = c->n_trees;
        j["mtry_fraction"] = c->mtry_fraction;
        j["min_node_size"] = c->min_node_size;
        j["max_depth"] = c->max_depth;
        j["regularization_factor"] = c->regularization_factor;
        j["bootstrap"] = c->bootstrap;
    } else if (const auto* c = std::get_if<GbtConfig>(&cfg)) {
        j["n_trees"] = c->n_trees;
        j["eta"] = c->eta;
        j["max_depth"] = c->max_depth;
        j["subsample"] = c->subsample;
        j["lambda_l2"] = c->lambda_l2;
        j["alpha_l1"] = c->alpha_l1;
        j["min_node_size"] = c->min_node_size;
    } else if (const auto* c = std::get_if<LinearBoosterConfig>(&cfg)) {
        j["n_steps"] = c->n_steps;
        j["eta"] = c->eta;
    } else if (const auto* c = std::get_if<NnConfig>(&cfg)) {
        j["depth"] = c->depth;
        j["width"] = c->width;
        j["activation"] = to_string(c->activation);
        j["batch_fraction"] = c->batch_fraction;
        j["learning_rate"] = c->learning_rate;
        j["epochs"] = c->epochs;
        j["optimizer"] = to_string(c->optimizer);
        j["dropout_rate"] = c->dropout_rate;
        j["penalty_alpha"] = c->penalty_alpha;
        j["penalty_lambda"] = c->penalty_lambda;
        j["seed"] = c->seed;
    }
    return j.dump(2);
}

LearnerConfig learner_config_from_json(const std::string& text) {
    json j = json::parse(text);
    const LearnerKind kind = learner_kind_from_string(j.at("kind").get<std::string>());
    LearnerConfig cfg = default_config(kind);
    switch (kind) {
        case LearnerKind::ols:
        case LearnerKind::tree: {
            if (kind == LearnerKind::tree) {
                auto& c = std::get<TreeConfig>(cfg);
                c.max_depth = j.value("max_depth", c.max_depth);
                c.min_node_size = j.value("min_node_size", c.min_node_size);
                c.mtry_fraction = j.value("mtry_fraction", c.mtry_fraction);
                c.regularization_factor =
                    j.value("regularization_factor", c.regularization_factor);
            }
            break;
        }
        case LearnerKind::elastic_net: {
            auto& c = std::get<ElasticNetConfig>(cfg);
            c.alpha = j.value("alpha", c.alpha);
            c.lambda = j.value("lambda", c.lambda);
            c.cv_folds = j.value("cv_folds", c.cv_folds);
            c.n_lambda = j.value("n_lambda", c.n_lambda);
            c.lambda_min_ratio = j.value("lambda_min_ratio", c.lambda_min_ratio);
            c.tol = j.value("tol", c.tol);
            c.max_iter = j.value("max_iter", c.max_iter);
            break;
        }
        case LearnerKind::random_forest: {
            auto& c = std::get<RfConfig>(cfg);
            c.n_trees = j.value("n_trees", c.n_trees);
            c.mtry_fraction = j.value("mtry_fraction", c.mtry_fraction);
            c.min_node_size = j.value("min_node_size", c.min_node_size);
            c.max_depth = j.value("max_depth", c.max_depth);
            c.regularization_factor = j.value("regularization_factor", c.regularization_factor);
            c.bootstrap = j.value("bootstrap", c.bootstrap);
            break;
        }
        case LearnerKind::gbt: {
            auto& c = std::get<GbtConfig>(cfg);
            c.n_trees = j.value("n_trees", c.n_trees);
            c.eta = j.value("eta", c.eta);
            c.max_depth = j.value("max_depth", c.max_depth);
            c.subsample = j.value("subsample", c.subsample);
            c.lambda_l2 = j.value("lambda_l2", c.lambda_l2);
            c.alpha_l1 = j.value("alpha_l1", c.alpha_l1);
            c.min_node_size = j.value("min_node_size", c.min_node_size);
            break;
        }
        case LearnerKind::linear_booster: {
            auto& c = std::get<LinearBoosterConfig>(cfg);
            c.n_steps = j.value("n_steps", c.n_steps);
            c.eta = j.value("eta", c.eta);
            break;
        }
        case LearnerKind::neural_net: {
            auto& c = std::get<NnConfig>(cfg);
            c.depth = j.value("depth", c.depth);
            c.width = j.value("width", c.width);
            if (j.contains("activation")) {
                c.activation = activation_from_string(j["activation"].get<std::string>());
            }
            c.batch_fraction = j.value("batch_fraction", c.batch_fraction);
            c.learning_rate = j.value("learning_rate", c.learning_rate);
            c.epochs = j.value("epochs", c.epochs);
            if (j.contains("optimizer")) {
                c.optimizer = optimizer_from_string(j["optimizer"].get<std::string>());
            }
            c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
            c.penalty_alpha = j.value("penalty_alpha", c.penalty_alpha);
            c.penalty_lambda = j.value("penalty_lambda", c.penalty_lambda);
            c.seed = j.value("seed", c.seed);
            break;
        }
    }
    return cfg;
}

}  // namespace aceml
