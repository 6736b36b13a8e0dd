#pragma once

#include <vector>

#include "aceml/tree.hpp"

namespace aceml {

struct RfConfig {
    int n_trees = 100;
    double mtry_fraction = 0.4;
    int min_node_size = 5;
    int max_depth = -1;
    double regularization_factor = 1.0;
    bool bootstrap = true;
};

// Bagged CART trees with per-split feature subsampling; prediction is the
// arithmetic mean over members.
class RandomForest final : public Model {
public:
    LearnerKind kind() const override { return LearnerKind::random_forest; }
    int n_features() const override { return n_features_; }

    const std::vector<Tree>& trees() const { return trees_; }

    std::vector<Tree> trees_;
    int n_features_ = 0;

protected:
    Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const override;
};

RandomForest fit_rf(const Dataset& d, const RfConfig& cfg, RngStream& rng);

}  // namespace aceml
