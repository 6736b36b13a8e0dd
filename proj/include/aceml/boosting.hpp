#pragma once

#include <vector>

#include "aceml/tree.hpp"

namespace aceml {

struct GbtConfig {
    int n_trees = 140;
    double eta = 0.3;
    int max_depth = 6;
    double subsample = 1.0;  // row fraction per boosting stage, (0, 1]
    double lambda_l2 = 1.0;  // leaf denominator regularization
    double alpha_l1 = 0.0;   // leaf soft-threshold
    int min_node_size = 1;
};

// Stagewise squared-loss boosting: tree t fits the current residuals on a row
// subsample; leaf weight = soft_threshold(sum resid, alpha_l1)/(count + lambda_l2);
// prediction = mean(y) + eta * sum of member outputs.
class GradientBoostedTrees final : public Model {
public:
    LearnerKind kind() const override { return LearnerKind::gbt; }
    int n_features() const override { return n_features_; }

    double base = 0.0;
    double eta = 0.0;
    std::vector<Tree> members;
    int n_features_ = 0;

protected:
    Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const override;
};

GradientBoostedTrees fit_gbt(const Dataset& d, const GbtConfig& cfg, RngStream& rng);

}  // namespace aceml
