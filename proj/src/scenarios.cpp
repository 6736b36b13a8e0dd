#include "aceml/scenarios.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace aceml {

using nlohmann::json;

void ScenarioSpec::validate() const {
    if (case_study.has_value()) return;
    if (p < 1) throw Error("ScenarioSpec: p must be >= 1");
    if (beta.size() != p) throw Error("ScenarioSpec: beta length must equal p");
    if (noise_sigma < 0.0) throw Error("ScenarioSpec: noise_sigma must be >= 0");
    if (covariance.kind == CovKind::fixed &&
        (covariance.fixed.rows() != p || covariance.fixed.cols() != p)) {
        throw Error("ScenarioSpec: fixed covariance dim must equal p");
    }
    if (covariance.kind == CovKind::lkj && p < 2) {
        throw Error("ScenarioSpec: lkj covariance needs p >= 2");
    }
    for (const auto& t : interactions) {
        if (t.i < 0 || t.i >= p || t.j < 0 || t.j >= p) {
            throw Error("ScenarioSpec: interaction index out of range");
        }
    }
    for (const auto& t : piecewise) {
        if (t.feature < 0 || t.feature >= p) {
            throw Error("ScenarioSpec: piecewise feature out of range");
        }
    }
}

Dataset gen_linear(const ScenarioSpec& spec, int n, RngStream& rng) {
    spec.validate();
    if (spec.case_study.has_value()) {
        throw Error("gen_linear: case-study scenario requires gen_case_study");
    }
    if (n < 2) throw Error("gen_linear: n must be >= 2");

    Eigen::MatrixXd X;
    if (spec.feature_dist == FeatureDist::lognormal) {
        X.resize(n, spec.p);
        for (int j = 0; j < spec.p; ++j) {
            X.col(j) = lognormal_sample(spec.lognormal_meanlog, spec.lognormal_sdlog, n, rng);
        }
    } else {
        CovMatrix sigma;
        switch (spec.covariance.kind) {
            case CovKind::identity: sigma = CovMatrix::identity(spec.p); break;
            case CovKind::fixed: sigma = CovMatrix(spec.covariance.fixed); break;
            case CovKind::lkj: sigma = lkj_sample_corr(spec.p, spec.covariance.lkj_eta, rng); break;
        }
        X = mvn_sample(Eigen::VectorXd::Zero(spec.p), sigma, n, rng);
    }

    Eigen::VectorXd y = X * spec.beta;
    for (const auto& t : spec.interactions) {
        y += t.coef * X.col(t.i).cwiseProduct(X.col(t.j));
    }
    for (const auto& t : spec.piecewise) {
        y += t.slope * X.col(t.feature).cwiseMin(t.knot);
    }
    if (spec.noise_sigma > 0.0) {
        for (int i = 0; i < n; ++i) {
            y(i) += rng.normal(0.0, spec.noise_sigma);
        }
    }
    return Dataset(std::move(X), std::move(y));
}

namespace {

// Marginal moments of the observational joint, used to match marginal scales
// in the randomized-trial mode.
struct CaseMoments {
    double sd_smoking, sd_nutrition, sd_volume;
};

CaseMoments case_moments(const CaseStudySpec& s) {
    const double var_s = s.fin_to_smoking * s.fin_to_smoking + s.noise_smoking * s.noise_smoking;
    const double var_n =
        s.fin_to_nutrition * s.fin_to_nutrition + s.noise_nutrition * s.noise_nutrition;
    // cancer = (a bs + b bn + bf) f + bs es + bn en + ec
    const double f_load = s.fin_to_smoking * s.smoking_to_cancer +
                          s.fin_to_nutrition * s.nutrition_to_cancer + s.fin_to_cancer;
    const double var_c = f_load * f_load +
                         s.smoking_to_cancer * s.smoking_to_cancer * s.noise_smoking * s.noise_smoking +
                         s.nutrition_to_cancer * s.nutrition_to_cancer * s.noise_nutrition * s.noise_nutrition +
                         s.noise_cancer * s.noise_cancer;
    const double cov_sc = s.fin_to_smoking * f_load +
                          s.smoking_to_cancer * s.noise_smoking * s.noise_smoking;
    const double var_v = s.smoking_to_volume * s.smoking_to_volume * var_s +
                         s.cancer_to_volume * s.cancer_to_volume * var_c +
                         2.0 * s.smoking_to_volume * s.cancer_to_volume * cov_sc +
                         s.noise_volume * s.noise_volume;
    return {std::sqrt(var_s), std::sqrt(var_n), std::sqrt(var_v)};
}

}  // namespace

Dataset gen_case_study(const CaseStudySpec& spec, int n, RngStream& rng) {
    if (n < 2) throw Error("gen_case_study: n must be >= 2");
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    const CaseMoments mom = case_moments(spec);
    for (int i = 0; i < n; ++i) {
        double smoking, nutrition, financial, volume;
        if (spec.mode == CaseStudySpec::Mode::observational) {
            financial = rng.normal();
            smoking = spec.fin_to_smoking * financial + rng.normal(0.0, spec.noise_smoking);
            nutrition = spec.fin_to_nutrition * financial + rng.normal(0.0, spec.noise_nutrition);
            const double cancer = spec.cancer_mean(smoking, nutrition, financial) +
                                  rng.normal(0.0, spec.noise_cancer);
            volume = spec.smoking_to_volume * smoking + spec.cancer_to_volume * cancer +
                     rng.normal(0.0, spec.noise_volume);
            y(i) = cancer;
        } else {
            // Trial: treatment assignment breaks the confounder paths and lung
            // volume is controlled, so it decorrelates from everything.
            smoking = rng.normal(0.0, mom.sd_smoking);
            nutrition = rng.normal(0.0, mom.sd_nutrition);
            financial = rng.normal();
            const double cancer = spec.cancer_mean(smoking, nutrition, financial) +
                                  rng.normal(0.0, spec.noise_cancer);
            volume = rng.normal(0.0, mom.sd_volume);
            y(i) = cancer;
        }
        X(i, 0) = smoking;
        X(i, 1) = nutrition;
        X(i, 2) = volume;
    }
    return Dataset(std::move(X), std::move(y), {"smoking", "nutrition", "lung_volume"});
}

Dataset generate(const ScenarioSpec& spec, int n, RngStream& rng) {
    if (spec.case_study.has_value()) {
        return gen_case_study(*spec.case_study, n, rng);
    }
    return gen_linear(spec, n, rng);
}

namespace {

ScenarioSpec make_linear(const std::string& name, Eigen::VectorXd beta, double rho12,
                         double sigma) {
    ScenarioSpec spec;
    spec.name = name;
    spec.p = static_cast<int>(beta.size());
    spec.beta = std::move(beta);
    spec.noise_sigma = sigma;
    if (rho12 != 0.0) {
        Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(spec.p, spec.p);
        cov(0, 1) = cov(1, 0) = rho12;
        spec.covariance.kind = CovKind::fixed;
        spec.covariance.fixed = std::move(cov);
    }
    return spec;
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

Eigen::VectorXd datapoor_beta(int p) {
    // beta_1 = 1, beta_2 = 0, the rest equally spaced on (0, 1] ending at 1.
    Eigen::VectorXd beta(p);
    beta(0) = 1.0;
    beta(1) = 0.0;
    for (int j = 2; j < p; ++j) {
        beta(j) = static_cast<double>(j - 1) / static_cast<double>(p - 2);
    }
    return beta;
}

ScenarioSpec make_datapoor(const std::string& name, int p) {
    ScenarioSpec spec;
    spec.name = name;
    spec.p = p;
    spec.beta = datapoor_beta(p);
    spec.noise_sigma = 0.3;
    spec.covariance.kind = CovKind::lkj;
    spec.covariance.lkj_eta = 2.0;
    spec.n_default = 100;
    return spec;
}

}  // namespace

ScenarioSpec builtin(const std::string& name) {
    if (name == "base5") {
        return make_linear(name, vec({1, 0, 1, 0, 0}), 0.0, 0.3);
    }
    if (name == "collinear09") {
        return make_linear(name, vec({1, 0, 1, 0, 0}), 0.9, 0.3);
    }
    if (name == "collinear099") {
        return make_linear(name, vec({1, 0, 1, 0, 0}), 0.99, 0.3);
    }
    if (name == "confounder05") {
        return make_linear(name, vec({1, 0.5, 1}), 0.5, 0.3);
    }
    if (name == "confounder05neg") {
        return make_linear(name, vec({1, -0.5, 1}), 0.5, 0.3);
    }
    if (name == "uncorr3") {
        return make_linear(name, vec({1, 0.5, 1}), 0.0, 0.3);
    }
    if (name == "mediator09") {
        return make_linear(name, vec({1, 0, 1}), 0.9, 0.3);
    }
    if (name == "confounder09") {
        return make_linear(name, vec({1, 0.5, 1}), 0.9, 0.3);
    }
    if (name == "interaction5" || name == "interaction5_collinear") {
        ScenarioSpec spec =
            make_linear(name, vec({1, 0, 0, 0, 1}), name == "interaction5" ? 0.0 : 0.9, 1.0);
        spec.interactions.push_back({0, 1, 1.0});
        spec.n_default = 5000;
        return spec;
    }
    if (name == "datapoor") {
        return make_datapoor(name, 100);
    }
    if (name == "datapoor30") {
        return make_datapoor(name, 30);
    }
    if (name == "nonuniform") {
        ScenarioSpec spec;
        spec.name = name;
        spec.p = 1;
        spec.beta = Eigen::VectorXd::Zero(1);
        spec.noise_sigma = 0.3;
        spec.feature_dist = FeatureDist::lognormal;
        spec.lognormal_meanlog = 0.0;
        spec.lognormal_sdlog = 1.25;
        spec.piecewise.push_back({0, 2.0, 2.0});
        spec.n_default = 2000;
        return spec;
    }
    if (name == "casestudy") {
        ScenarioSpec spec;
        spec.name = name;
        spec.p = 3;
        spec.beta = Eigen::VectorXd::Zero(3);
        spec.noise_sigma = 0.0;
        spec.case_study = CaseStudySpec{};
        return spec;
    }
    if (name == "casestudy_rct") {
        ScenarioSpec spec;
        spec.name = name;
        spec.p = 3;
        spec.beta = Eigen::VectorXd::Zero(3);
        spec.noise_sigma = 0.0;
        CaseStudySpec cs;
        cs.mode = CaseStudySpec::Mode::rct;
        spec.case_study = cs;
        return spec;
    }
    std::ostringstream msg;
    msg << "unknown scenario '" << name << "'; available:";
    for (const auto& known : builtin_names()) {
        msg << " " << known;
    }
    throw UnknownScenario(msg.str());
}

std::vector<std::string> builtin_names() {
    return {"base5",        "collinear09",  "collinear099", "confounder05",
            "confounder05neg", "uncorr3",   "mediator09",   "confounder09",
            "interaction5", "interaction5_collinear",       "datapoor",
            "datapoor30",   "nonuniform",   "casestudy",    "casestudy_rct"};
}

ScenarioSpec materialize_covariance(const ScenarioSpec& spec, RngStream& rng) {
    if (spec.case_study.has_value() || spec.covariance.kind != CovKind::lkj) {
        return spec;
    }
    ScenarioSpec pinned = spec;
    pinned.covariance.kind = CovKind::fixed;
    pinned.covariance.fixed = lkj_sample_corr(spec.p, spec.covariance.lkj_eta, rng).entries;
    return pinned;
}

namespace {

// Population least-squares slope of y on x for the log-normal piecewise
// scenario, by trapezoid quadrature over the latent normal.
double piecewise_lognormal_ols_slope(const ScenarioSpec& spec) {
    const PiecewiseTerm& t = spec.piecewise.front();
    const double mu = spec.lognormal_meanlog;
    const double sd = spec.lognormal_sdlog;
    const int grid = 200001;
    const double z_lim = 12.0;
    double m_x = 0, m_xx = 0, m_g = 0, m_xg = 0, mass = 0;
    const double dz = 2.0 * z_lim / (grid - 1);
    for (int i = 0; i < grid; ++i) {
        const double z = -z_lim + i * dz;
        const double w = std::exp(-0.5 * z * z) * ((i == 0 || i == grid - 1) ? 0.5 : 1.0);
        const double x = std::exp(mu + sd * z);
        const double g = t.slope * std::min(x, t.knot);
        mass += w;
        m_x += w * x;
        m_xx += w * x * x;
        m_g += w * g;
        m_xg += w * x * g;
    }
    m_x /= mass;
    m_xx /= mass;
    m_g /= mass;
    m_xg /= mass;
    return (m_xg - m_x * m_g) / (m_xx - m_x * m_x);
}

}  // namespace

TrueEffects true_effects(const ScenarioSpec& spec) {
    if (spec.case_study.has_value()) {
        throw NoAnalyticTruth(
            "true_effects: the case-study full model has no analytic effect vector");
    }
    spec.validate();
    TrueEffects truth;
    truth.beta = spec.beta;
    truth.interactions = spec.interactions;
    if (spec.feature_dist == FeatureDist::lognormal && !spec.piecewise.empty()) {
        truth.beta(spec.piecewise.front().feature) += piecewise_lognormal_ols_slope(spec);
    }
    return truth;
}

namespace {

json cov_to_json(const CovarianceSpec& cov) {
    json j;
    switch (cov.kind) {
        case CovKind::identity: j["kind"] = "identity"; break;
        case CovKind::fixed: {
            j["kind"] = "fixed";
            std::vector<std::vector<double>> rows;
            for (Eigen::Index i = 0; i < cov.fixed.rows(); ++i) {
                std::vector<double> row(cov.fixed.cols());
                for (Eigen::Index c = 0; c < cov.fixed.cols(); ++c) row[c] = cov.fixed(i, c);
                rows.push_back(std::move(row));
            }
            j["entries"] = rows;
            break;
        }
        case CovKind::lkj:
            j["kind"] = "lkj";
            j["eta"] = cov.lkj_eta;
            break;
    }
    return j;
}

CovarianceSpec cov_from_json(const json& j) {
    CovarianceSpec cov;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "identity") {
        cov.kind = CovKind::identity;
    } else if (kind == "fixed") {
        cov.kind = CovKind::fixed;
        const auto rows = j.at("entries").get<std::vector<std::vector<double>>>();
        cov.fixed.resize(rows.size(), rows.empty() ? 0 : rows[0].size());
        for (size_t i = 0; i < rows.size(); ++i) {
            for (size_t c = 0; c < rows[i].size(); ++c) {
                cov.fixed(i, c) = rows[i][c];
            }
        }
    } else if (kind == "lkj") {
        cov.kind = CovKind::lkj;
        cov.lkj_eta = j.at("eta").get<double>();
    } else {
        throw Error("covariance kind must be identity, fixed or lkj");
    }
    return cov;
}

json case_to_json(const CaseStudySpec& cs) {
    json j;
    j["mode"] = cs.mode == CaseStudySpec::Mode::observational ? "observational" : "rct";
    j["fin_to_smoking"] = cs.fin_to_smoking;
    j["fin_to_nutrition"] = cs.fin_to_nutrition;
    j["smoking_to_cancer"] = cs.smoking_to_cancer;
    j["nutrition_to_cancer"] = cs.nutrition_to_cancer;
    j["fin_to_cancer"] = cs.fin_to_cancer;
    j["smoking_to_volume"] = cs.smoking_to_volume;
    j["cancer_to_volume"] = cs.cancer_to_volume;
    j["noise_smoking"] = cs.noise_smoking;
    j["noise_nutrition"] = cs.noise_nutrition;
    j["noise_cancer"] = cs.noise_cancer;
    j["noise_volume"] = cs.noise_volume;
    return j;
}

CaseStudySpec case_from_json(const json& j) {
    CaseStudySpec cs;
    cs.mode = j.at("mode").get<std::string>() == "rct" ? CaseStudySpec::Mode::rct
                                                       : CaseStudySpec::Mode::observational;
    cs.fin_to_smoking = j.value("fin_to_smoking", cs.fin_to_smoking);
    cs.fin_to_nutrition = j.value("fin_to_nutrition", cs.fin_to_nutrition);
    cs.smoking_to_cancer = j.value("smoking_to_cancer", cs.smoking_to_cancer);
    cs.nutrition_to_cancer = j.value("nutrition_to_cancer", cs.nutrition_to_cancer);
    cs.fin_to_cancer = j.value("fin_to_cancer", cs.fin_to_cancer);
    cs.smoking_to_volume = j.value("smoking_to_volume", cs.smoking_to_volume);
    cs.cancer_to_volume = j.value("cancer_to_volume", cs.cancer_to_volume);
    cs.noise_smoking = j.value("noise_smoking", cs.noise_smoking);
    cs.noise_nutrition = j.value("noise_nutrition", cs.noise_nutrition);
    cs.noise_cancer = j.value("noise_cancer", cs.noise_cancer);
    cs.noise_volume = j.value("noise_volume", cs.noise_volume);
    return cs;
}

}  // namespace

std::string scenario_to_json(const ScenarioSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["p"] = spec.p;
    j["beta"] = std::vector<double>(spec.beta.data(), spec.beta.data() + spec.beta.size());
    j["covariance"] = cov_to_json(spec.covariance);
    j["noise_sigma"] = spec.noise_sigma;
    if (!spec.interactions.empty()) {
        json terms = json::array();
        for (const auto& t : spec.interactions) {
            terms.push_back({{"i", t.i}, {"j", t.j}, {"coef", t.coef}});
        }
        j["interactions"] = terms;
    }
    if (!spec.piecewise.empty()) {
        json terms = json::array();
        for (const auto& t : spec.piecewise) {
            terms.push_back({{"feature", t.feature}, {"slope", t.slope}, {"knot", t.knot}});
        }
        j["piecewise"] = terms;
    }
    j["feature_dist"] = spec.feature_dist == FeatureDist::gaussian ? "gaussian" : "lognormal";
    if (spec.feature_dist == FeatureDist::lognormal) {
        j["lognormal_meanlog"] = spec.lognormal_meanlog;
        j["lognormal_sdlog"] = spec.lognormal_sdlog;
    }
    j["n_default"] = spec.n_default;
    if (spec.case_study.has_value()) {
        j["case_study"] = case_to_json(*spec.case_study);
    }
    return j.dump(2);
}

ScenarioSpec scenario_from_json(const std::string& text) {
    json j = json::parse(text);
    ScenarioSpec spec;
    spec.name = j.value("name", "custom");
    spec.p = j.at("p").get<int>();
    const auto beta = j.at("beta").get<std::vector<double>>();
    spec.beta.resize(beta.size());
    for (size_t i = 0; i < beta.size(); ++i) spec.beta(i) = beta[i];
    if (j.contains("covariance")) {
        spec.covariance = cov_from_json(j["covariance"]);
    }
    spec.noise_sigma = j.value("noise_sigma", 0.3);
    if (j.contains("interactions")) {
        for (const auto& t : j["interactions"]) {
            spec.interactions.push_back({t.at("i").get<int>(), t.at("j").get<int>(),
                                         t.at("coef").get<double>()});
        }
    }
    if (j.contains("piecewise")) {
        for (const auto& t : j["piecewise"]) {
            spec.piecewise.push_back({t.at("feature").get<int>(), t.at("slope").get<double>(),
                                      t.at("knot").get<double>()});
        }
    }
    if (j.value("feature_dist", "gaussian") == std::string("lognormal")) {
        spec.feature_dist = FeatureDist::lognormal;
        spec.lognormal_meanlog = j.value("lognormal_meanlog", 0.0);
        spec.lognormal_sdlog = j.value("lognormal_sdlog", 1.0);
    }
    spec.n_default = j.value("n_default", 1000);
    if (j.contains("case_study")) {
        spec.case_study = case_from_json(j["case_study"]);
    }
    spec.validate();
    return spec;
}

ScenarioSpec load_scenario(const std::string& name_or_path) {
    if (name_or_path.size() > 5 &&
        name_or_path.substr(name_or_path.size() - 5) == ".json") {
        std::ifstream in(name_or_path);
        if (!in) {
            throw IoError("cannot open scenario file: " + name_or_path);
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        return scenario_from_json(buf.str());
    }
    return builtin(name_or_path);
}

}  // namespace aceml
