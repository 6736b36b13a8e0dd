#include "aceml/forest.hpp"

#include <numeric>

namespace aceml {

Eigen::VectorXd RandomForest::predict_impl(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.rows());
    for (const auto& tree : trees_) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            out(i) += tree.predict_row(X.row(i));
        }
    }
    return out / static_cast<double>(trees_.size());
}

RandomForest fit_rf(const Dataset& d, const RfConfig& cfg, RngStream& rng) {
    d.validate();
    if (cfg.n_trees < 1) {
        throw Error("fit_rf: n_trees must be >= 1");
    }
    const int n = d.n();
    TreeConfig tree_cfg;
    tree_cfg.max_depth = cfg.max_depth;
    tree_cfg.min_node_size = cfg.min_node_size;
    tree_cfg.mtry_fraction = cfg.mtry_fraction;
    tree_cfg.regularization_factor = cfg.regularization_factor;

    RandomForest forest;
    forest.n_features_ = d.p();
    forest.trees_.reserve(cfg.n_trees);
    std::vector<int> rows(n);
    for (int t = 0; t < cfg.n_trees; ++t) {
        if (cfg.bootstrap) {
            for (int i = 0; i < n; ++i) {
                rows[i] = static_cast<int>(rng.uniform_index(n));
            }
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        forest.trees_.push_back(fit_tree_rows(d.X, d.y, rows, tree_cfg, rng));
    }
    return forest;
}

}  // namespace aceml
