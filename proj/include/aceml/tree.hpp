#pragma once

#include <vector>

#include "aceml/dataset.hpp"
#include "aceml/model.hpp"
#include "aceml/rng.hpp"

namespace aceml {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf prediction
    int depth = 0;
    int n_samples = 0;

    bool is_leaf() const { return feature < 0; }
};

struct TreeConfig {
    int max_depth = -1;  // -1 = unlimited
    int min_node_size = 1;  // both children must keep at least this many rows
    double mtry_fraction = 1.0;  // per-split feature subsample, ceil(fraction*p) >= 1
    // Split gain of features not yet used in the current tree is multiplied by
    // this factor; 1 disables the penalty.
    double regularization_factor = 1.0;
    // Leaf weight = soft_threshold(sum(y), leaf_alpha_l1) / (count + leaf_lambda_l2).
    // Zero for both gives the plain mean leaf.
    double leaf_lambda_l2 = 0.0;
    double leaf_alpha_l1 = 0.0;
};

// Greedy CART regression tree: every split maximizes the sum-of-squares
// decrease over the sampled feature subset, thresholds sit at midpoints
// between adjacent distinct values, ties go to the lowest feature index and
// then the lowest threshold.
class Tree final : public Model {
public:
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    LearnerKind kind() const override { return LearnerKind::tree; }
    int n_features() const override { return n_features_; }

    double predict_row(const Eigen::RowVectorXd& x) const;
    int max_depth() const;

    int n_features_ = 0;

protected:
    Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const override;
};

Tree fit_tree(const Dataset& d, const TreeConfig& cfg, RngStream& rng);

// Ensemble entry point: grow on a row subset (indices may repeat for
// bootstrap resamples).
Tree fit_tree_rows(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const std::vector<int>& rows, const TreeConfig& cfg, RngStream& rng);

}  // namespace aceml
