#include <doctest.h>

#include <cmath>

#include "aceml/linear.hpp"
#include "aceml/scenarios.hpp"

using namespace aceml;

namespace {

double corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double ma = a.mean(), mb = b.mean();
    const double sab = ((a.array() - ma) * (b.array() - mb)).sum();
    const double saa = (a.array() - ma).square().sum();
    const double sbb = (b.array() - mb).square().sum();
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("builtin catalog spot checks") {
    const ScenarioSpec base = builtin("base5");
    CHECK(base.p == 5);
    CHECK(base.beta(0) == 1.0);
    CHECK(base.beta(1) == 0.0);
    CHECK(base.beta(2) == 1.0);
    CHECK(base.noise_sigma == 0.3);

    const ScenarioSpec poor = builtin("datapoor");
    CHECK(poor.p == 100);
    CHECK(poor.beta(1) == 0.0);
    CHECK(poor.beta(99) == doctest::Approx(1.0));
    CHECK(poor.beta(2) == doctest::Approx(1.0 / 98.0));
    CHECK(poor.covariance.kind == CovKind::lkj);

    const ScenarioSpec inter = builtin("interaction5");
    REQUIRE(inter.interactions.size() == 1);
    CHECK(inter.interactions[0].coef == 1.0);
    CHECK(inter.noise_sigma == 1.0);

    CHECK_THROWS_AS(builtin("bogus"), UnknownScenario);
}

TEST_CASE("noiseless linear scenarios are exactly identified by ols") {
    for (const char* name : {"base5", "collinear09", "collinear099", "confounder05",
                             "confounder05neg", "uncorr3", "mediator09", "confounder09",
                             "datapoor30"}) {
        ScenarioSpec spec = builtin(name);
        spec.noise_sigma = 0.0;
        RngStream rng = split_rng(301, 0);
        const Dataset d = gen_linear(spec, 400, rng);
        const LinearModel m = fit_ols(d);
        CHECK((m.coefficients - spec.beta).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("dataset validation rejects non-finite entries") {
    Eigen::MatrixXd X(3, 1);
    X << 1, 2, std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd y(3);
    y << 1, 2, 3;
    CHECK_THROWS_AS(Dataset(X, y).validate(), Error);
}

TEST_CASE("generation propagates a broken fixed covariance") {
    ScenarioSpec spec = builtin("collinear09");
    spec.covariance.fixed(0, 1) = spec.covariance.fixed(1, 0) = 1.5;  // not PD
    RngStream rng = split_rng(308, 0);
    CHECK_THROWS_AS(gen_linear(spec, 50, rng), NotPositiveDefinite);
}

TEST_CASE("collinear09 produces the configured correlation") {
    const ScenarioSpec spec = builtin("collinear09");
    RngStream rng = split_rng(302, 0);
    const Dataset d = gen_linear(spec, 10000, rng);
    const double r = corr(d.X.col(0), d.X.col(1));
    CHECK(r > 0.88);
    CHECK(r < 0.92);
    CHECK(std::abs(corr(d.X.col(0), d.X.col(2))) < 0.05);
}

TEST_CASE("empirical correlations converge to the configured value at n = 10^4") {
    const ScenarioSpec spec = builtin("confounder05");
    RngStream rng = split_rng(302, 1);
    const Dataset d = gen_linear(spec, 10000, rng);
    CHECK(std::abs(corr(d.X.col(0), d.X.col(1)) - 0.5) < 0.02);
}

TEST_CASE("nonuniform scenario is piecewise linear in the log-normal feature") {
    ScenarioSpec spec = builtin("nonuniform");
    spec.noise_sigma = 0.0;
    RngStream rng = split_rng(303, 0);
    const Dataset d = gen_linear(spec, 500, rng);
    CHECK(d.X.minCoeff() > 0.0);
    for (int i = 0; i < d.n(); ++i) {
        CHECK(d.y(i) == doctest::Approx(2.0 * std::min(d.X(i, 0), 2.0)).epsilon(1e-12));
    }
}

TEST_CASE("lkj covariance is redrawn per call") {
    const ScenarioSpec spec = builtin("datapoor30");
    RngStream rng = split_rng(304, 0);
    const Dataset a = gen_linear(spec, 2000, rng);
    const Dataset b = gen_linear(spec, 2000, rng);
    // Same stream, consecutive draws: correlations should differ visibly.
    const double ra = corr(a.X.col(2), a.X.col(3));
    const double rb = corr(b.X.col(2), b.X.col(3));
    CHECK(std::abs(ra - rb) > 1e-3);
}

TEST_CASE("a materialized covariance pins the draw for several datasets") {
    const ScenarioSpec spec = builtin("datapoor30");
    RngStream rng = split_rng(304, 1);
    const ScenarioSpec pinned = materialize_covariance(spec, rng);
    CHECK(pinned.covariance.kind == CovKind::fixed);
    CovMatrix(pinned.covariance.fixed, true).validate();

    const Dataset a = gen_linear(pinned, 4000, rng);
    const Dataset b = gen_linear(pinned, 4000, rng);
    const double target = pinned.covariance.fixed(2, 3);
    CHECK(std::abs(corr(a.X.col(2), a.X.col(3)) - target) < 0.05);
    CHECK(std::abs(corr(b.X.col(2), b.X.col(3)) - target) < 0.05);

    // Identity and fixed covariances pass through untouched.
    const ScenarioSpec base = builtin("base5");
    RngStream rng2 = split_rng(304, 2);
    CHECK(materialize_covariance(base, rng2).covariance.kind == CovKind::identity);
}

TEST_CASE("observational case study correlates smoking and nutrition") {
    CaseStudySpec cs;
    RngStream rng = split_rng(305, 0);
    const Dataset d = gen_case_study(cs, 10000, rng);
    CHECK(corr(d.X.col(0), d.X.col(1)) > 0.2);
    CHECK(d.feature_names[0] == "smoking");
    CHECK(d.feature_names[2] == "lung_volume");
}

TEST_CASE("rct case study decorrelates the features") {
    CaseStudySpec cs;
    cs.mode = CaseStudySpec::Mode::rct;
    RngStream rng = split_rng(305, 1);
    const Dataset d = gen_case_study(cs, 10000, rng);
    CHECK(std::abs(corr(d.X.col(0), d.X.col(1))) < 0.05);
    CHECK(std::abs(corr(d.X.col(0), d.X.col(2))) < 0.05);
}

TEST_CASE("conditioning on the collider biases the smoking coefficient") {
    CaseStudySpec cs;
    RngStream rng = split_rng(305, 2);
    const Dataset d = gen_case_study(cs, 100000, rng);
    const LinearModel full = fit_ols(d);
    // True direct effect of smoking is 1.0; the collider opens a bias path.
    CHECK(std::abs(full.coefficients(0) - cs.smoking_to_cancer) > 0.05);
    // The collider also soaks up real predictive signal.
    CHECK(std::abs(full.coefficients(2)) > 0.05);
}

TEST_CASE("the structural cancer equation is shared between modes") {
    CaseStudySpec cs;
    CHECK(cs.cancer_mean(1.0, 2.0, 0.5) ==
          doctest::Approx(cs.smoking_to_cancer * 1.0 + cs.nutrition_to_cancer * 2.0 +
                          cs.fin_to_cancer * 0.5));
}

TEST_CASE("true effects per scenario") {
    const TrueEffects base = true_effects(builtin("base5"));
    CHECK(base.beta(0) == 1.0);
    CHECK(base.beta(1) == 0.0);
    CHECK(base.beta(4) == 0.0);

    const TrueEffects inter = true_effects(builtin("interaction5"));
    CHECK(inter.beta(0) == 1.0);
    CHECK(inter.beta(4) == 1.0);
    REQUIRE(inter.interactions.size() == 1);
    CHECK(inter.interactions[0].coef == 1.0);

    CHECK_THROWS_AS(true_effects(builtin("casestudy")), NoAnalyticTruth);
}

TEST_CASE("nonuniform truth is the population least-squares slope") {
    const ScenarioSpec spec = builtin("nonuniform");
    const TrueEffects truth = true_effects(spec);
    // Monte-Carlo oracle for cov(x, y)/var(x).
    RngStream rng = split_rng(306, 0);
    const int n = 400000;
    const Eigen::VectorXd x =
        lognormal_sample(spec.lognormal_meanlog, spec.lognormal_sdlog, n, rng);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = 2.0 * std::min(x(i), 2.0);
    const double mx = x.mean(), mg = g.mean();
    const double slope =
        ((x.array() - mx) * (g.array() - mg)).sum() / (x.array() - mx).square().sum();
    CHECK(truth.beta(0) == doctest::Approx(slope).epsilon(0.05));
}

TEST_CASE("every builtin spec round-trips through json") {
    for (const auto& name : builtin_names()) {
        const ScenarioSpec spec = builtin(name);
        const ScenarioSpec back = scenario_from_json(scenario_to_json(spec));
        CHECK(back.name == spec.name);
        CHECK(back.p == spec.p);
        CHECK((back.beta - spec.beta).cwiseAbs().maxCoeff() == 0.0);
        CHECK(back.noise_sigma == spec.noise_sigma);
        CHECK(static_cast<int>(back.covariance.kind) == static_cast<int>(spec.covariance.kind));
        if (spec.covariance.kind == CovKind::fixed) {
            CHECK((back.covariance.fixed - spec.covariance.fixed).cwiseAbs().maxCoeff() == 0.0);
        }
        CHECK(back.interactions.size() == spec.interactions.size());
        CHECK(back.piecewise.size() == spec.piecewise.size());
        CHECK(back.case_study.has_value() == spec.case_study.has_value());
        if (spec.case_study) {
            CHECK(static_cast<int>(back.case_study->mode) ==
                  static_cast<int>(spec.case_study->mode));
        }
    }
}

TEST_CASE("generation is deterministic given the stream") {
    const ScenarioSpec spec = builtin("collinear09");
    RngStream a = split_rng(307, 3);
    RngStream b = split_rng(307, 3);
    const Dataset da = gen_linear(spec, 100, a);
    const Dataset db = gen_linear(spec, 100, b);
    CHECK((da.X - db.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((da.y - db.y).cwiseAbs().maxCoeff() == 0.0);
}
