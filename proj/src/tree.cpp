#include "aceml/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aceml {

namespace {

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

struct Grower {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& y;
    const TreeConfig& cfg;
    RngStream& rng;
    std::vector<TreeNode>& nodes;
    std::vector<char> used_feature;  // within the current tree
    int p;
    int mtry;

    Grower(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeConfig& cfg,
           RngStream& rng, std::vector<TreeNode>& nodes)
        : X(X), y(y), cfg(cfg), rng(rng), nodes(nodes) {
        p = static_cast<int>(X.cols());
        mtry = std::clamp(static_cast<int>(std::ceil(cfg.mtry_fraction * p)), 1, p);
        used_feature.assign(p, 0);
    }

    double leaf_value(const std::vector<int>& rows) const {
        double sum = 0.0;
        for (int r : rows) sum += y(r);
        return soft_threshold(sum, cfg.leaf_alpha_l1) /
               (static_cast<double>(rows.size()) + cfg.leaf_lambda_l2);
    }

    std::vector<int> sample_features() {
        if (mtry == p) {
            std::vector<int> all(p);
            std::iota(all.begin(), all.end(), 0);
            return all;
        }
        // Partial Fisher-Yates, then sorted so ties resolve by feature index.
        std::vector<int> pool(p);
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < mtry; ++i) {
            const auto j = i + rng.uniform_index(static_cast<std::uint64_t>(p - i));
            std::swap(pool[i], pool[j]);
        }
        std::vector<int> picked(pool.begin(), pool.begin() + mtry);
        std::sort(picked.begin(), picked.end());
        return picked;
    }

    int grow(std::vector<int>&& rows, int depth) {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[id].depth = depth;
        nodes[id].n_samples = static_cast<int>(rows.size());
        nodes[id].value = leaf_value(rows);

        const int m = static_cast<int>(rows.size());
        if ((cfg.max_depth >= 0 && depth >= cfg.max_depth) || m < 2 * cfg.min_node_size) {
            return id;
        }
        bool pure = true;
        for (int r : rows) {
            if (y(r) != y(rows[0])) {
                pure = false;
                break;
            }
        }
        if (pure) return id;

        double total = 0.0;
        for (int r : rows) total += y(r);
        const double base_score = total * total / m;

        const std::vector<int> feats = sample_features();
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 0.0;

        std::vector<std::pair<double, double>> vals(m);  // (x, y)
        for (int f : feats) {
            for (int i = 0; i < m; ++i) {
                vals[i] = {X(rows[i], f), y(rows[i])};
            }
            std::sort(vals.begin(), vals.end());
            const double penalty = (!used_feature[f] && cfg.regularization_factor != 1.0)
                                       ? cfg.regularization_factor
                                       : 1.0;
            double left_sum = 0.0;
            for (int i = 0; i + 1 < m; ++i) {
                left_sum += vals[i].second;
                const int n_left = i + 1;
                const int n_right = m - n_left;
                if (n_left < cfg.min_node_size || n_right < cfg.min_node_size) continue;
                if (vals[i].first == vals[i + 1].first) continue;
                const double right_sum = total - left_sum;
                const double gain = penalty * (left_sum * left_sum / n_left +
                                               right_sum * right_sum / n_right - base_score);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = (vals[i].first + vals[i + 1].first) / 2.0;
                }
            }
        }

        if (best_feature < 0) return id;

        used_feature[best_feature] = 1;
        std::vector<int> left_rows, right_rows;
        left_rows.reserve(m);
        right_rows.reserve(m);
        for (int r : rows) {
            (X(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        nodes[id].feature = best_feature;
        nodes[id].threshold = best_threshold;
        nodes[id].left = grow(std::move(left_rows), depth + 1);
        nodes[id].right = grow(std::move(right_rows), depth + 1);
        return id;
    }
};

}  // namespace

double Tree::predict_row(const Eigen::RowVectorXd& x) const {
    int id = 0;
    while (!nodes[id].is_leaf()) {
        id = x(nodes[id].feature) <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
    }
    return nodes[id].value;
}

int Tree::max_depth() const {
    int d = 0;
    for (const auto& node : nodes) {
        d = std::max(d, node.depth);
    }
    return d;
}

Eigen::VectorXd Tree::predict_impl(const Eigen::MatrixXd& X) const {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        out(i) = predict_row(X.row(i));
    }
    return out;
}

Tree fit_tree(const Dataset& d, const TreeConfig& cfg, RngStream& rng) {
    d.validate();
    std::vector<int> rows(d.n());
    std::iota(rows.begin(), rows.end(), 0);
    return fit_tree_rows(d.X, d.y, rows, cfg, rng);
}

Tree fit_tree_rows(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const std::vector<int>& rows, const TreeConfig& cfg, RngStream& rng) {
    if (cfg.min_node_size < 1) {
        throw Error("fit_tree: min_node_size must be >= 1");
    }
    if (cfg.mtry_fraction <= 0.0 || cfg.mtry_fraction > 1.0) {
        throw Error("fit_tree: mtry_fraction must be in (0, 1]");
    }
    Tree tree;
    tree.n_features_ = static_cast<int>(X.cols());
    Grower grower(X, y, cfg, rng, tree.nodes);
    std::vector<int> work = rows;
    grower.grow(std::move(work), 0);
    return tree;
}

}  // namespace aceml
