#pragma once

#include <optional>
#include <vector>

#include "aceml/dataset.hpp"
#include "aceml/model.hpp"
#include "aceml/rng.hpp"

namespace aceml {

class LinearModel final : public Model {
public:
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    bool converged = true;
    long iterations = 0;

    LinearModel() = default;
    LinearModel(double intercept, Eigen::VectorXd coef, LearnerKind tag = LearnerKind::ols)
        : intercept(intercept), coefficients(std::move(coef)), kind_tag(tag) {}

    LearnerKind kind() const override { return kind_tag; }
    int n_features() const override { return static_cast<int>(coefficients.size()); }

    LearnerKind kind_tag = LearnerKind::ols;

protected:
    Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const override {
        return (X * coefficients).array() + intercept;
    }
};

// Least squares via column-pivoted QR on [1 | X]. Throws RankDeficient when
// the design is not full column rank (including n < p + 1).
LinearModel fit_ols(const Dataset& d);

// Thrown by fit_elastic_net when coordinate descent exhausts max_iter; carries
// the coefficients reached so far.
class EnetNotConverged : public NotConverged {
public:
    EnetNotConverged(const std::string& msg, LinearModel partial)
        : NotConverged(msg), partial(std::move(partial)) {}
    LinearModel partial;
};

// Coordinate descent for
//   (1/2n)||y - b0 - X b||^2 + lambda * (alpha*||b||_1 + (1-alpha)/2*||b||_2^2)
// on internally standardized columns (1/n variance convention, unpenalized
// intercept); coefficients come back on the original scale.
LinearModel fit_elastic_net(const Dataset& d, double alpha, double lambda, double tol = 1e-7,
                            long max_iter = 100000);

// Max KKT violation of the elastic-net optimality conditions on the
// standardized scale; 0 at an exact solution.
double enet_kkt_violation(const Dataset& d, const LinearModel& m, double alpha, double lambda);

// Log-spaced grid from the smallest lambda that zeroes every coefficient down
// to min_ratio times that, glmnet style.
std::vector<double> default_lambda_grid(const Dataset& d, double alpha, int n_lambda = 50,
                                        double min_ratio = 1e-3);

// Grid value minimizing mean out-of-fold squared error. Fold assignment is a
// deterministic shuffle of the row indices; exact ties prefer the larger
// lambda.
double cv_select_lambda(const Dataset& d, double alpha, int folds,
                        const std::vector<double>& lambda_grid, RngStream& rng,
                        double tol = 1e-7, long max_iter = 100000);

// Per-step record of the componentwise booster: cumulative coefficients after
// each step, the step increments, and which feature each step updated.
struct BoosterTrace {
    Eigen::MatrixXd cumulative;  // n_steps x p
    Eigen::MatrixXd increments;  // n_steps x p (one nonzero per row)
    std::vector<int> selected;   // n_steps
};

// Componentwise least-squares boosting: each step picks the feature with the
// largest absolute residual correlation and moves its coefficient by eta times
// the one-variable least-squares update.
LinearModel fit_linear_booster(const Dataset& d, int n_steps, double eta,
                               BoosterTrace* trace = nullptr);

}  // namespace aceml
