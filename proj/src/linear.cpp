#include "aceml/linear.hpp"

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

// Column standardization with the 1/n variance convention used by the
// coordinate-descent solver. Constant columns keep scale 1 and never move.
struct EnetProblem {
    Eigen::MatrixXd Xs;       // standardized columns
    Eigen::VectorXd yc;       // centered response
    Eigen::VectorXd mean;     // p
    Eigen::VectorXd scale;    // p
    Eigen::VectorXd constant; // 1 if the column had zero variance
    double y_mean = 0.0;
    Eigen::MatrixXd gram;     // Xs^T Xs / n
    Eigen::VectorXd corr;     // Xs^T yc / n

    explicit EnetProblem(const Dataset& d) {
        const int n = d.n();
        const int p = d.p();
        mean = d.X.colwise().mean();
        Xs = d.X.rowwise() - mean.transpose();
        scale.resize(p);
        constant = Eigen::VectorXd::Zero(p);
        for (int j = 0; j < p; ++j) {
            const double v = Xs.col(j).squaredNorm() / n;
            if (v <= 0.0) {
                scale(j) = 1.0;
                constant(j) = 1.0;
            } else {
                scale(j) = std::sqrt(v);
                Xs.col(j) /= scale(j);
            }
        }
        y_mean = d.y.mean();
        yc = d.y.array() - y_mean;
        gram = (Xs.transpose() * Xs) / n;
        corr = (Xs.transpose() * yc) / n;
    }

    LinearModel to_original(const Eigen::VectorXd& beta_std, bool converged, long iters) const {
        const int p = static_cast<int>(beta_std.size());
        Eigen::VectorXd coef(p);
        for (int j = 0; j < p; ++j) {
            coef(j) = constant(j) != 0.0 ? 0.0 : beta_std(j) / scale(j);
        }
        LinearModel m(y_mean - coef.dot(mean), coef, LearnerKind::elastic_net);
        m.converged = converged;
        m.iterations = iters;
        return m;
    }
};

// Covariance-update coordinate descent on the standardized problem.
// Returns (beta, iterations, converged).
bool enet_solve(const EnetProblem& prob, double alpha, double lambda, double tol, long max_iter,
                Eigen::VectorXd& beta, long& iters) {
    const int p = static_cast<int>(beta.size());
    const double l1 = lambda * alpha;
    const double l2 = lambda * (1.0 - alpha);
    Eigen::VectorXd gram_beta = prob.gram * beta;
    for (iters = 0; iters < max_iter; ++iters) {
        double max_delta = 0.0;
        for (int j = 0; j < p; ++j) {
            if (prob.constant(j) != 0.0) continue;
            const double rho = prob.corr(j) - gram_beta(j) + prob.gram(j, j) * beta(j);
            const double next = soft_threshold(rho, l1) / (prob.gram(j, j) + l2);
            const double delta = next - beta(j);
            if (delta != 0.0) {
                gram_beta += prob.gram.col(j) * delta;
                beta(j) = next;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        if (max_delta < tol) {
            ++iters;
            return true;
        }
    }
    return false;
}

}  // namespace

LinearModel fit_ols(const Dataset& d) {
    d.validate();
    const int n = d.n();
    const int p = d.p();
    Eigen::MatrixXd A(n, p + 1);
    A.col(0).setOnes();
    A.rightCols(p) = d.X;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    const int rank = static_cast<int>(qr.rank());
    if (rank < p + 1) {
        throw RankDeficient("fit_ols: design matrix rank " + std::to_string(rank) + " < " +
                                std::to_string(p + 1),
                            rank, p + 1);
    }
    const Eigen::VectorXd sol = qr.solve(d.y);
    LinearModel m(sol(0), sol.tail(p), LearnerKind::ols);
    m.converged = true;
    m.iterations = 0;
    return m;
}

LinearModel fit_elastic_net(const Dataset& d, double alpha, double lambda, double tol,
                            long max_iter) {
    d.validate();
    if (lambda < 0.0) {
        throw Error("fit_elastic_net: lambda must be >= 0");
    }
    if (alpha < 0.0 || alpha > 1.0) {
        throw Error("fit_elastic_net: alpha must be in [0, 1]");
    }
    EnetProblem prob(d);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d.p());
    long iters = 0;
    const bool ok = enet_solve(prob, alpha, lambda, tol, max_iter, beta, iters);
    LinearModel m = prob.to_original(beta, ok, iters);
    if (!ok) {
        throw EnetNotConverged("fit_elastic_net: no convergence after " +
                                   std::to_string(max_iter) + " sweeps",
                               std::move(m));
    }
    return m;
}

double enet_kkt_violation(const Dataset& d, const LinearModel& m, double alpha, double lambda) {
    EnetProblem prob(d);
    const int p = d.p();
    Eigen::VectorXd beta_std(p);
    for (int j = 0; j < p; ++j) {
        beta_std(j) = m.coefficients(j) * prob.scale(j);
    }
    const Eigen::VectorXd grad = prob.corr - prob.gram * beta_std;
    const double l1 = lambda * alpha;
    const double l2 = lambda * (1.0 - alpha);
    double worst = 0.0;
    for (int j = 0; j < p; ++j) {
        if (prob.constant(j) != 0.0) continue;
        const double g = grad(j) - l2 * beta_std(j);
        if (beta_std(j) != 0.0) {
            worst = std::max(worst, std::abs(g - l1 * (beta_std(j) > 0 ? 1.0 : -1.0)));
        } else {
            worst = std::max(worst, std::max(0.0, std::abs(g) - l1));
        }
    }
    return worst;
}

std::vector<double> default_lambda_grid(const Dataset& d, double alpha, int n_lambda,
                                        double min_ratio) {
    EnetProblem prob(d);
    const double alpha_eff = std::max(alpha, 1e-3);
    const double lambda_max = prob.corr.cwiseAbs().maxCoeff() / alpha_eff;
    std::vector<double> grid(n_lambda);
    const double log_max = std::log(std::max(lambda_max, 1e-12));
    const double log_min = log_max + std::log(min_ratio);
    for (int i = 0; i < n_lambda; ++i) {
        const double t = n_lambda == 1 ? 0.0 : static_cast<double>(i) / (n_lambda - 1);
        grid[i] = std::exp(log_max + t * (log_min - log_max));
    }
    return grid;
}

double cv_select_lambda(const Dataset& d, double alpha, int folds,
                        const std::vector<double>& lambda_grid, RngStream& rng, double tol,
                        long max_iter) {
    d.validate();
    if (folds < 2) {
        throw Error("cv_select_lambda: folds must be >= 2");
    }
    if (lambda_grid.empty()) {
        throw Error("cv_select_lambda: empty lambda grid");
    }
    const int n = d.n();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        std::swap(order[i], order[rng.uniform_index(static_cast<std::uint64_t>(i) + 1)]);
    }

    // Lambdas sorted descending for warm starts; errors mapped back to the
    // caller's grid order afterwards.
    std::vector<double> lambdas = lambda_grid;
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
    std::vector<double> sse(lambdas.size(), 0.0);

    for (int f = 0; f < folds; ++f) {
        std::vector<int> test, train;
        for (int i = 0; i < n; ++i) {
            (i % folds == f ? test : train).push_back(order[i]);
        }
        Dataset dtr;
        dtr.X.resize(train.size(), d.p());
        dtr.y.resize(train.size());
        for (size_t i = 0; i < train.size(); ++i) {
            dtr.X.row(i) = d.X.row(train[i]);
            dtr.y(i) = d.y(train[i]);
        }
        dtr.feature_names = d.feature_names;
        EnetProblem prob(dtr);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(d.p());
        for (size_t li = 0; li < lambdas.size(); ++li) {
            long iters = 0;
            enet_solve(prob, alpha, lambdas[li], tol, max_iter, beta, iters);
            const LinearModel m = prob.to_original(beta, true, iters);
            for (int idx : test) {
                const double pred = m.intercept + d.X.row(idx).dot(m.coefficients);
                const double e = d.y(idx) - pred;
                sse[li] += e * e;
            }
        }
    }

    size_t best = 0;
    for (size_t li = 1; li < lambdas.size(); ++li) {
        // On exact ties keep the earlier (larger) lambda.
        if (sse[li] < sse[best] * (1.0 - 1e-12)) {
            best = li;
        }
    }
    return lambdas[best];
}

LinearModel fit_linear_booster(const Dataset& d, int n_steps, double eta, BoosterTrace* trace) {
    d.validate();
    if (n_steps < 1) {
        throw Error("fit_linear_booster: n_steps must be >= 1");
    }
    const int n = d.n();
    const int p = d.p();
    const Eigen::VectorXd mean = d.X.colwise().mean();
    const Eigen::MatrixXd Xc = d.X.rowwise() - mean.transpose();
    Eigen::VectorXd norm(p);
    for (int j = 0; j < p; ++j) {
        norm(j) = Xc.col(j).norm();
    }
    const double y_mean = d.y.mean();
    Eigen::VectorXd resid = d.y.array() - y_mean;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);

    if (trace) {
        trace->cumulative.resize(n_steps, p);
        trace->increments.setZero(n_steps, p);
        trace->selected.assign(n_steps, -1);
    }

    for (int step = 0; step < n_steps; ++step) {
        int pick = -1;
        double best_score = -1.0;
        for (int j = 0; j < p; ++j) {
            if (norm(j) <= 0.0) continue;
            const double score = std::abs(Xc.col(j).dot(resid)) / norm(j);
            if (score > best_score) {
                best_score = score;
                pick = j;
            }
        }
        if (pick < 0) break;
        const double slope = Xc.col(pick).dot(resid) / (norm(pick) * norm(pick));
        const double inc = eta * slope;
        beta(pick) += inc;
        resid -= inc * Xc.col(pick);
        if (trace) {
            trace->cumulative.row(step) = beta.transpose();
            trace->increments(step, pick) = inc;
            trace->selected[step] = pick;
        }
    }

    (void)n;
    LinearModel m(y_mean - beta.dot(mean), beta, LearnerKind::linear_booster);
    m.converged = true;
    m.iterations = n_steps;
    return m;
}

}  // namespace aceml
