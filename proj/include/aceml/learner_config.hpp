#pragma once

#include <memory>
#include <string>
#include <variant>

#include "aceml/boosting.hpp"
#include "aceml/forest.hpp"
#include "aceml/linear.hpp"
#include "aceml/neural.hpp"
#include "aceml/tree.hpp"

namespace aceml {

struct OlsConfig {};

struct ElasticNetConfig {
    double alpha = 0.2;
    double lambda = -1.0;  // negative = tune by cross validation
    int cv_folds = 10;
    int n_lambda = 50;
    double lambda_min_ratio = 1e-3;
    double tol = 1e-7;
    long max_iter = 100000;
};

struct LinearBoosterConfig {
    int n_steps = 500;
    double eta = 0.1;
};

using LearnerConfig = std::variant<OlsConfig, ElasticNetConfig, TreeConfig, RfConfig, GbtConfig,
                                   LinearBoosterConfig, NnConfig>;

LearnerKind kind_of(const LearnerConfig& cfg);
LearnerConfig default_config(LearnerKind kind);

// Fit the configured learner. All fits are pure functions of
// (dataset, config, stream state).
std::unique_ptr<Model> fit(const Dataset& d, const LearnerConfig& cfg, RngStream& rng);

std::string learner_config_to_json(const LearnerConfig& cfg);
LearnerConfig learner_config_from_json(const std::string& text);

}  // namespace aceml
