#include <doctest.h>

#include <cmath>

#include "aceml/linear.hpp"
#include "aceml/scenarios.hpp"

using namespace aceml;

namespace {

Dataset random_dataset(int n, int p, RngStream& rng, double noise = 0.5) {
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) {
            X(i, j) = rng.normal();
        }
    }
    Eigen::VectorXd beta(p);
    for (int j = 0; j < p; ++j) {
        beta(j) = rng.uniform(-2.0, 2.0);
    }
    Eigen::VectorXd y = X * beta;
    for (int i = 0; i < n; ++i) {
        y(i) += rng.normal(0.0, noise);
    }
    return Dataset(std::move(X), std::move(y));
}

}  // namespace

TEST_CASE("ols recovers an exact line") {
    Eigen::MatrixXd X(3, 1);
    X << 1, 2, 3;
    Eigen::VectorXd y(3);
    y << 2, 4, 6;
    const LinearModel m = fit_ols(Dataset(X, y));
    CHECK(m.intercept == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(m.coefficients(0) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("ols gradient vanishes at the solution") {
    RngStream rng = split_rng(3, 0);
    const Dataset d = random_dataset(200, 6, rng);
    const LinearModel m = fit_ols(d);
    const Eigen::VectorXd resid = d.y - (d.X * m.coefficients).eval() -
                                  Eigen::VectorXd::Constant(d.n(), m.intercept);
    CHECK(std::abs(resid.sum()) < 1e-8);
    CHECK((d.X.transpose() * resid).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ols rejects a duplicated column") {
    Eigen::MatrixXd X(5, 2);
    X << 1, 1, 2, 2, 3, 3, 4, 4, 5, 5;
    Eigen::VectorXd y(5);
    y << 1, 2, 3, 4, 5;
    CHECK_THROWS_AS(fit_ols(Dataset(X, y)), RankDeficient);
}

TEST_CASE("ols rejects n < p + 1") {
    RngStream rng = split_rng(3, 1);
    Eigen::MatrixXd X(4, 6);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 6; ++j) X(i, j) = rng.normal();
    Eigen::VectorXd y = Eigen::VectorXd::Ones(4);
    CHECK_THROWS_AS(fit_ols(Dataset(X, y)), RankDeficient);
}

TEST_CASE("ols is unbiased on the collinear scenario") {
    const ScenarioSpec spec = builtin("collinear09");
    double sum1 = 0, sum2 = 0;
    const int reps = 100;
    for (int r = 0; r < reps; ++r) {
        RngStream rng = split_rng(100, r);
        const Dataset d = gen_linear(spec, 1000, rng);
        const LinearModel m = fit_ols(d);
        sum1 += m.coefficients(0);
        sum2 += m.coefficients(1);
    }
    CHECK(sum1 / reps > 0.97);
    CHECK(sum1 / reps < 1.03);
    CHECK(sum2 / reps > -0.03);
    CHECK(sum2 / reps < 0.03);
}

TEST_CASE("elastic net at lambda = 0 matches ols on 50 random instances") {
    for (int seed = 0; seed < 50; ++seed) {
        RngStream rng = split_rng(200, seed);
        const int p = 2 + static_cast<int>(rng.uniform_index(9));
        const Dataset d = random_dataset(200, p, rng);
        const LinearModel ols = fit_ols(d);
        const LinearModel en = fit_elastic_net(d, 0.2, 0.0);
        CHECK((ols.coefficients - en.coefficients).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(std::abs(ols.intercept - en.intercept) < 1e-6);
    }
}

TEST_CASE("lasso on a single standardized predictor soft-thresholds the ols slope") {
    RngStream rng = split_rng(201, 0);
    const int n = 400;
    Eigen::MatrixXd X(n, 1);
    for (int i = 0; i < n; ++i) X(i, 0) = rng.normal();
    // Population-sd standardization so the closed form is exact.
    const double mean = X.col(0).mean();
    X.col(0).array() -= mean;
    X.col(0) /= std::sqrt(X.col(0).squaredNorm() / n);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = 1.3 * X(i, 0) + rng.normal(0.0, 0.4);

    const Dataset d(X, y);
    const double beta_ols = X.col(0).dot((y.array() - y.mean()).matrix()) / n;
    for (double lambda : {0.05, 0.5, 2.0}) {
        const LinearModel m = fit_elastic_net(d, 1.0, lambda, 1e-10);
        const double expect =
            beta_ols > lambda ? beta_ols - lambda : (beta_ols < -lambda ? beta_ols + lambda : 0.0);
        CHECK(m.coefficients(0) == doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("elastic net satisfies the kkt conditions") {
    RngStream rng = split_rng(202, 0);
    const Dataset d = random_dataset(300, 8, rng);
    const LinearModel m = fit_elastic_net(d, 0.5, 0.1, 1e-9);
    CHECK(enet_kkt_violation(d, m, 0.5, 0.1) < 1e-7);
}

TEST_CASE("elastic net spills effect onto the collinear zero feature") {
    const ScenarioSpec spec = builtin("collinear09");
    double sum2 = 0;
    for (int r = 0; r < 10; ++r) {
        RngStream rng = split_rng(203, r);
        const Dataset d = gen_linear(spec, 1000, rng);
        const LinearModel m = fit_elastic_net(d, 0.2, 0.1);
        sum2 += m.coefficients(1);
    }
    CHECK(sum2 / 10 > 0.0);
}

TEST_CASE("elastic net reports the partial state when out of sweeps") {
    RngStream rng = split_rng(204, 0);
    const Dataset d = random_dataset(100, 5, rng);
    try {
        fit_elastic_net(d, 0.2, 0.01, 1e-14, 1);
        FAIL("expected EnetNotConverged");
    } catch (const EnetNotConverged& e) {
        CHECK_FALSE(e.partial.converged);
        CHECK(e.partial.coefficients.size() == 5);
    }
}

TEST_CASE("cv lambda selection behaves at the extremes and is deterministic") {
    RngStream data_rng = split_rng(205, 0);

    // Pure noise: shrinkage wins, the largest grid value is selected.
    Dataset noise = random_dataset(120, 4, data_rng);
    for (int i = 0; i < noise.n(); ++i) noise.y(i) = data_rng.normal();
    const std::vector<double> grid = {0.001, 0.01, 0.1, 1.0, 10.0};
    RngStream cv1 = split_rng(205, 1);
    const double l_noise = cv_select_lambda(noise, 0.2, 10, grid, cv1);
    CHECK(l_noise >= 1.0);

    // Noiseless linear signal: no shrinkage needed.
    Dataset clean = random_dataset(120, 4, data_rng, 0.0);
    RngStream cv2 = split_rng(205, 2);
    const double l_clean = cv_select_lambda(clean, 0.2, 10, grid, cv2);
    CHECK(l_clean == doctest::Approx(0.001));

    RngStream cv3a = split_rng(205, 3);
    RngStream cv3b = split_rng(205, 3);
    CHECK(cv_select_lambda(noise, 0.2, 10, grid, cv3a) ==
          cv_select_lambda(noise, 0.2, 10, grid, cv3b));
}

TEST_CASE("single booster step on one predictor is the ols slope") {
    RngStream rng = split_rng(206, 0);
    Eigen::MatrixXd X(50, 1);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) {
        X(i, 0) = rng.normal();
        y(i) = 1.7 * X(i, 0) + rng.normal(0.0, 0.3);
    }
    const Dataset d(X, y);
    const LinearModel ols = fit_ols(d);
    const LinearModel boost = fit_linear_booster(d, 1, 1.0);
    CHECK(boost.coefficients(0) == doctest::Approx(ols.coefficients(0)).epsilon(1e-10));
}

TEST_CASE("linear booster converges to the ols solution") {
    const ScenarioSpec spec = builtin("collinear09");
    RngStream rng = split_rng(207, 0);
    const Dataset d = gen_linear(spec, 1000, rng);
    const LinearModel ols = fit_ols(d);
    const LinearModel boost = fit_linear_booster(d, 3000, 0.1);
    CHECK((boost.coefficients - ols.coefficients).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("booster increments telescope to the final coefficients") {
    RngStream rng = split_rng(208, 0);
    const Dataset d = random_dataset(150, 4, rng);
    BoosterTrace trace;
    const LinearModel m = fit_linear_booster(d, 200, 0.3, &trace);
    const Eigen::VectorXd total = trace.increments.colwise().sum();
    CHECK((total - m.coefficients).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((trace.cumulative.row(199).transpose() - m.coefficients).cwiseAbs().maxCoeff() < 1e-12);
}
