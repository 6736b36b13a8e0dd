#pragma once

#include <utility>
#include <vector>

#include "aceml/model.hpp"

namespace aceml {

// Per-observation conditional effects and their (possibly weighted) averages.
// `features` names the columns the report covers; a full report carries all p.
struct AceReport {
    Eigen::MatrixXd ce;         // n x k conditional effects
    Eigen::VectorXd ace;        // k averages
    Eigen::VectorXd h;          // k step sizes (feature units)
    std::vector<int> features;  // column indices, size k
    bool weighted = false;
    Eigen::VectorXd weights;  // n, sums to 1 when weighted
};

struct InteractionReport {
    int m = 0;
    int k = 0;
    Eigen::VectorXd ce2;  // per-observation mixed effects
    double value = 0.0;   // mean of ce2
    double h_m = 0.0;
    double h_k = 0.0;
};

// Sample (n-1) standard deviation of a column.
double column_sd(const Eigen::VectorXd& x);

// Forward difference [f(x + h e_k) - f(x)] / h with h = h_fraction * sd(x_k);
// central = true switches to [f(x+h) - f(x-h)] / 2h.
Eigen::VectorXd conditional_effects(const Model& m, const Eigen::MatrixXd& X, int k,
                                    double h_fraction = 0.1, bool central = false);

// Unweighted report over all features.
AceReport ace(const Model& m, const Eigen::MatrixXd& X, double h_fraction = 0.1,
              bool central = false);

double silverman_bandwidth(const Eigen::VectorXd& x);

// Gaussian kernel density of the sample `x` evaluated at `at`.
Eigen::VectorXd kde_density(const Eigen::VectorXd& x, double bandwidth,
                            const Eigen::VectorXd& at);

// Density at the sample points themselves; bandwidth <= 0 picks Silverman's rule.
Eigen::VectorXd kde_1d(const Eigen::VectorXd& x, double bandwidth = 0.0);

// Single-feature report with weights proportional to the inverse estimated
// density of x_k, floored at density_floor_fraction times the max density.
AceReport weighted_ace(const Model& m, const Eigen::MatrixXd& X, int k,
                       double h_fraction = 0.1, double density_floor_fraction = 1e-3);

// Averaged mixed central difference
//   [f(+h_m,+h_k) - f(-h_m,+h_k) - f(+h_m,-h_k) + f(-h_m,-h_k)] / (4 h_m h_k).
// Callers are expected to hand in centered, standardized X.
InteractionReport interaction_ace(const Model& m, const Eigen::MatrixXd& X, int m_idx, int k_idx,
                                  double h_fraction = 0.1);

// Per-column affine transform record; suffices to invert standardize().
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
    Eigen::MatrixXd invert(const Eigen::MatrixXd& Xs) const;
};

// Center and scale every column to mean 0, sample sd 1.
std::pair<Eigen::MatrixXd, Standardizer> standardize(const Eigen::MatrixXd& X);

}  // namespace aceml
