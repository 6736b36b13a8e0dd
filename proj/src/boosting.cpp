#include "aceml/boosting.hpp"

#include <numeric>

namespace aceml {

Eigen::VectorXd GradientBoostedTrees::predict_impl(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), base);
    for (const auto& tree : members) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            out(i) += eta * tree.predict_row(X.row(i));
        }
    }
    return out;
}

GradientBoostedTrees fit_gbt(const Dataset& d, const GbtConfig& cfg, RngStream& rng) {
    d.validate();
    if (cfg.n_trees < 1) {
        throw Error("fit_gbt: n_trees must be >= 1");
    }
    if (!(cfg.eta > 0.0)) {
        throw Error("fit_gbt: eta must be positive");
    }
    if (cfg.subsample <= 0.0 || cfg.subsample > 1.0) {
        throw Error("fit_gbt: subsample must be in (0, 1]");
    }
    const int n = d.n();
    TreeConfig tree_cfg;
    tree_cfg.max_depth = cfg.max_depth;
    tree_cfg.min_node_size = cfg.min_node_size;
    tree_cfg.leaf_lambda_l2 = cfg.lambda_l2;
    tree_cfg.leaf_alpha_l1 = cfg.alpha_l1;

    GradientBoostedTrees model;
    model.n_features_ = d.p();
    model.base = d.y.mean();
    model.eta = cfg.eta;
    model.members.reserve(cfg.n_trees);

    Eigen::VectorXd resid = d.y.array() - model.base;
    const int n_sub = std::max(1, static_cast<int>(cfg.subsample * n));
    std::vector<int> pool(n);
    std::vector<int> rows;
    for (int t = 0; t < cfg.n_trees; ++t) {
        if (n_sub == n) {
            rows.resize(n);
            std::iota(rows.begin(), rows.end(), 0);
        } else {
            // Without replacement, xgboost style.
            std::iota(pool.begin(), pool.end(), 0);
            for (int i = 0; i < n_sub; ++i) {
                const auto j = i + rng.uniform_index(static_cast<std::uint64_t>(n - i));
                std::swap(pool[i], pool[j]);
            }
            rows.assign(pool.begin(), pool.begin() + n_sub);
        }
        Tree tree = fit_tree_rows(d.X, resid, rows, tree_cfg, rng);
        for (int i = 0; i < n; ++i) {
            resid(i) -= cfg.eta * tree.predict_row(d.X.row(i));
        }
        model.members.push_back(std::move(tree));
    }
    return model;
}

}  // namespace aceml
