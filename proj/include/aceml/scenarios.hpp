#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aceml/dataset.hpp"
#include "aceml/rng.hpp"

namespace aceml {

enum class CovKind { identity, fixed, lkj };

struct CovarianceSpec {
    CovKind kind = CovKind::identity;
    Eigen::MatrixXd fixed;  // used when kind == fixed
    double lkj_eta = 2.0;   // used when kind == lkj
};

enum class FeatureDist { gaussian, lognormal };

struct InteractionTerm {
    int i = 0;
    int j = 0;
    double coef = 0.0;
};

// Adds slope * min(x_feature, knot) to the response (continuous piecewise
// linear with slope 0 above the knot).
struct PiecewiseTerm {
    int feature = 0;
    double slope = 0.0;
    double knot = 0.0;
};

struct CaseStudySpec {
    enum class Mode { observational, rct };
    Mode mode = Mode::observational;

    // Structural coefficients; financial constraints is the latent confounder,
    // lung volume the collider.
    double fin_to_smoking = 0.8;
    double fin_to_nutrition = 0.8;
    double smoking_to_cancer = 1.0;
    double nutrition_to_cancer = -0.5;
    double fin_to_cancer = 0.5;
    double smoking_to_volume = 0.7;
    double cancer_to_volume = -0.7;
    double noise_smoking = 0.5;
    double noise_nutrition = 0.5;
    double noise_cancer = 0.5;
    double noise_volume = 0.5;

    double cancer_mean(double smoking, double nutrition, double financial) const {
        return smoking_to_cancer * smoking + nutrition_to_cancer * nutrition +
               fin_to_cancer * financial;
    }
};

struct ScenarioSpec {
    std::string name;
    int p = 1;
    Eigen::VectorXd beta;
    CovarianceSpec covariance;
    double noise_sigma = 0.3;
    std::vector<InteractionTerm> interactions;
    std::vector<PiecewiseTerm> piecewise;
    FeatureDist feature_dist = FeatureDist::gaussian;
    double lognormal_meanlog = 0.0;
    double lognormal_sdlog = 1.0;
    int n_default = 1000;
    std::optional<CaseStudySpec> case_study;  // set for the case-study pseudo-scenario

    void validate() const;
};

// X ~ MVN(0, Sigma) (or the configured marginal), y = X beta + structural
// terms + N(0, sigma). An LKJ covariance is drawn fresh on every call.
Dataset gen_linear(const ScenarioSpec& spec, int n, RngStream& rng);

// Features smoking, nutrition, lung_volume; response lung_cancer. The
// structural equation for lung_cancer is shared between modes; only the
// feature joint distribution changes.
Dataset gen_case_study(const CaseStudySpec& spec, int n, RngStream& rng);

// Dispatch over linear scenarios and the case study.
Dataset generate(const ScenarioSpec& spec, int n, RngStream& rng);

ScenarioSpec builtin(const std::string& name);  // throws UnknownScenario
std::vector<std::string> builtin_names();

// Pin a random (lkj) covariance to a concrete draw so several datasets can be
// generated from the same correlation structure. No-op for other kinds.
ScenarioSpec materialize_covariance(const ScenarioSpec& spec, RngStream& rng);

struct TrueEffects {
    Eigen::VectorXd beta;
    std::vector<InteractionTerm> interactions;
};

// Ground-truth linear effects (plus interaction coefficients where present).
// For the log-normal piecewise scenario this is the population least-squares
// slope, computed by quadrature. Throws NoAnalyticTruth for the case study.
TrueEffects true_effects(const ScenarioSpec& spec);

std::string scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const std::string& text);

// Name from the catalog, or a path to a JSON spec file.
ScenarioSpec load_scenario(const std::string& name_or_path);

}  // namespace aceml
