#pragma once

#include <string>

#include <Eigen/Dense>

#include "aceml/errors.hpp"

namespace aceml {

enum class LearnerKind {
    ols,
    elastic_net,
    tree,
    random_forest,
    gbt,
    linear_booster,
    neural_net,
};

const char* to_string(LearnerKind kind);
LearnerKind learner_kind_from_string(const std::string& name);

// Uniform prediction interface over all learners. Trained models are
// immutable; predict is a pure function of (model state, input).
class Model {
public:
    virtual ~Model() = default;

    virtual LearnerKind kind() const = 0;
    virtual int n_features() const = 0;

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
        if (X.cols() != n_features()) {
            throw DimensionMismatch("predict: expected " + std::to_string(n_features()) +
                                    " features, got " + std::to_string(X.cols()));
        }
        return predict_impl(X);
    }

protected:
    virtual Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const = 0;
};

}  // namespace aceml
