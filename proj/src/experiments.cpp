#include "aceml/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace aceml {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + kGolden * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

void parallel_for(int n_items, int n_threads, const std::function<void(int)>& fn) {
    if (n_threads <= 1 || n_items <= 1) {
        for (int i = 0; i < n_items; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_items) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    const int count = std::min(n_threads, n_items);
    threads.reserve(count);
    for (int t = 0; t < count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<ReplicateRecord> run_replicates(const ScenarioSpec& spec, const LearnerConfig& cfg,
                                            int n, int R, std::uint64_t master_seed,
                                            const ReplicateOptions& opts) {
    if (R < 1) throw Error("run_replicates: R must be >= 1");
    std::vector<ReplicateRecord> records(R);
    parallel_for(R, opts.n_threads, [&](int r) {
        ReplicateRecord& rec = records[r];
        try {
            RngStream data_rng = split_rng(master_seed, static_cast<std::uint64_t>(r));
            // A random covariance is drawn once per replicate; the holdout has
            // to come from the same correlation structure as the training set.
            const ScenarioSpec pinned = materialize_covariance(spec, data_rng);
            Dataset train = generate(pinned, n, data_rng);
            Dataset holdout = generate(pinned, n, data_rng);

            RngStream model_rng =
                split_rng(master_seed, static_cast<std::uint64_t>(r) + static_cast<std::uint64_t>(R));

            Eigen::VectorXd sds;
            std::unique_ptr<Model> model;
            Eigen::VectorXd holdout_pred;
            if (opts.standardize_features) {
                auto [Xs, scaler] = standardize(train.X);
                Dataset train_std(Xs, train.y, train.feature_names);
                model = fit(train_std, cfg, model_rng);
                const AceReport rep = ace(*model, Xs, opts.h_fraction);
                rec.ace = rep.ace.cwiseQuotient(scaler.sd);
                holdout_pred = model->predict(scaler.apply(holdout.X));
            } else {
                model = fit(train, cfg, model_rng);
                const AceReport rep = ace(*model, train.X, opts.h_fraction);
                rec.ace = rep.ace;
                holdout_pred = model->predict(holdout.X);
            }
            rec.prediction_mse =
                (holdout.y - holdout_pred).squaredNorm() / static_cast<double>(holdout.y.size());
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
        }
    });
    return records;
}

BiasVarianceReport bias_variance(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& truth) {
    if (estimates.cols() != truth.size()) {
        throw DimensionMismatch("bias_variance: estimate columns must match truth length");
    }
    const int R = static_cast<int>(estimates.rows());
    const int p = static_cast<int>(estimates.cols());
    BiasVarianceReport report;
    report.n_replicates = R;
    report.bias.resize(p);
    report.variance.resize(p);
    report.mse.resize(p);
    if (R == 0) {
        report.bias.setConstant(std::numeric_limits<double>::quiet_NaN());
        report.variance.setConstant(std::numeric_limits<double>::quiet_NaN());
        report.mse.setConstant(std::numeric_limits<double>::quiet_NaN());
        report.degenerate_variance = true;
        return report;
    }
    for (int j = 0; j < p; ++j) {
        const double mean = estimates.col(j).mean();
        report.bias(j) = truth(j) - mean;
        double var = 0.0;
        if (R > 1) {
            var = (estimates.col(j).array() - mean).square().sum() / (R - 1);
        }
        report.variance(j) = var;
        report.mse(j) = report.bias(j) * report.bias(j) + var;
    }
    report.degenerate_variance = R < 2;
    return report;
}

BiasVarianceReport summarize_replicates(const std::vector<ReplicateRecord>& records,
                                        const Eigen::VectorXd& truth) {
    std::vector<const ReplicateRecord*> ok;
    int failures = 0;
    for (const auto& r : records) {
        if (r.failed) {
            ++failures;
        } else {
            ok.push_back(&r);
        }
    }
    Eigen::MatrixXd estimates(ok.size(), truth.size());
    double pred_mse = 0.0;
    for (size_t i = 0; i < ok.size(); ++i) {
        estimates.row(i) = ok[i]->ace.transpose();
        pred_mse += ok[i]->prediction_mse;
    }
    BiasVarianceReport report = bias_variance(estimates, truth);
    report.failures = failures;
    report.n_replicates = static_cast<int>(records.size());
    report.prediction_mse = ok.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : pred_mse / static_cast<double>(ok.size());
    return report;
}

double r2(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
    if (y.size() != y_hat.size()) {
        throw DimensionMismatch("r2: length mismatch");
    }
    const double mean = y.mean();
    const double ss_tot = (y.array() - mean).square().sum();
    if (ss_tot <= 0.0) {
        throw ZeroVariance("r2: response has zero variance", -1);
    }
    const double ss_res = (y - y_hat).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

std::vector<std::string> hyperparam_names(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::neural_net:
            return {"activation", "sgd", "depth", "width", "alpha", "lambda"};
        case LearnerKind::gbt:
            return {"alpha", "eta", "max_depth", "subsample", "lambda", "max_tree"};
        case LearnerKind::random_forest:
            return {"mtry", "min_node_size", "max_depth", "regularization_factor"};
        case LearnerKind::elastic_net:
            return {"alpha", "lambda"};
        default:
            throw Error("hyperparam_names: no tuning space for this learner");
    }
}

HyperparamSample draw_hyperparams(LearnerKind kind, int draw_index, RngStream& rng) {
    HyperparamSample s;
    s.kind = kind;
    s.draw_index = draw_index;
    switch (kind) {
        case LearnerKind::neural_net: {
            static const char* kActivations[] = {"relu", "leaky_relu", "tanh", "selu",
                                                 "elu",  "celu",       "gelu"};
            s.activation = kActivations[rng.uniform_index(7)];
            s.values["sgd"] = rng.uniform(0.01, 1.0);  // batch fraction, "in percent"
            s.values["depth"] = static_cast<double>(rng.uniform_int(1, 8));
            s.values["width"] = static_cast<double>(rng.uniform_int(2, 50));
            s.values["alpha"] = rng.uniform(0.0, 1.0);
            // Log-uniform over [2.65e-5, 0.16]; the range spans four decades.
            const double lo = std::log(2.65e-5), hi = std::log(0.16);
            s.values["lambda"] = std::exp(rng.uniform(lo, hi));
            break;
        }
        case LearnerKind::gbt: {
            s.values["alpha"] = rng.uniform(0.0, 1.0);
            s.values["eta"] = rng.uniform(0.01, 0.4);
            s.values["max_depth"] = static_cast<double>(rng.uniform_int(2, 25));
            s.values["subsample"] = rng.uniform(0.5, 1.0);
            s.values["lambda"] = rng.uniform(1.0, 20.0);
            s.values["max_tree"] = static_cast<double>(rng.uniform_int(30, 125));
            break;
        }
        case LearnerKind::random_forest: {
            s.values["mtry"] = rng.uniform(0.0, 1.0);
            s.values["min_node_size"] = static_cast<double>(rng.uniform_int(2, 70));
            s.values["max_depth"] = static_cast<double>(rng.uniform_int(2, 50));
            s.values["regularization_factor"] = rng.uniform(0.0, 1.0);
            break;
        }
        case LearnerKind::elastic_net: {
            s.values["alpha"] = rng.uniform(0.0, 1.0);
            s.values["lambda"] = rng.uniform(0.0, 1.0);
            break;
        }
        default:
            throw Error("draw_hyperparams: no tuning space for this learner");
    }
    return s;
}

LearnerConfig HyperparamSample::to_config() const {
    switch (kind) {
        case LearnerKind::neural_net: {
            NnConfig cfg;
            cfg.activation = activation_from_string(activation);
            cfg.batch_fraction = values.at("sgd");
            cfg.depth = static_cast<int>(values.at("depth"));
            cfg.width = static_cast<int>(values.at("width"));
            cfg.penalty_alpha = values.at("alpha");
            cfg.penalty_lambda = values.at("lambda");
            return cfg;
        }
        case LearnerKind::gbt: {
            GbtConfig cfg;
            cfg.alpha_l1 = values.at("alpha");
            cfg.eta = values.at("eta");
            cfg.max_depth = static_cast<int>(values.at("max_depth"));
            cfg.subsample = values.at("subsample");
            cfg.lambda_l2 = values.at("lambda");
            cfg.n_trees = static_cast<int>(values.at("max_tree"));
            return cfg;
        }
        case LearnerKind::random_forest: {
            RfConfig cfg;
            cfg.mtry_fraction = std::max(values.at("mtry"), 1e-9);  // ceil(f*p) >= 1
            cfg.min_node_size = static_cast<int>(values.at("min_node_size"));
            cfg.max_depth = static_cast<int>(values.at("max_depth"));
            cfg.regularization_factor = values.at("regularization_factor");
            return cfg;
        }
        case LearnerKind::elastic_net: {
            ElasticNetConfig cfg;
            cfg.alpha = values.at("alpha");
            cfg.lambda = values.at("lambda");
            return cfg;
        }
        default:
            throw Error("HyperparamSample: no config mapping for this learner");
    }
}

TuneResult random_search(LearnerKind kind, int n_draws, int reps, const ScenarioSpec& spec,
                         int n, std::uint64_t master_seed, int n_threads) {
    if (n_draws < 1) throw Error("random_search: n_draws must be >= 1");
    const TrueEffects truth = true_effects(spec);
    TuneResult result;
    result.kind = kind;
    result.rows.resize(n_draws);
    parallel_for(n_draws, n_threads, [&](int d) {
        RngStream param_rng = split_rng(master_seed, 1000000 + static_cast<std::uint64_t>(d));
        TuneRow row;
        row.sample = draw_hyperparams(kind, d, param_rng);
        const LearnerConfig cfg = row.sample.to_config();
        const auto records =
            run_replicates(spec, cfg, n, reps, mix_seed(master_seed, d));
        const BiasVarianceReport rep = summarize_replicates(records, truth.beta);
        row.bias1 = rep.bias(0);
        row.var1 = rep.variance(0);
        row.mse1 = rep.mse(0);
        row.bias2 = rep.bias(1);
        row.var2 = rep.variance(1);
        row.mse2 = rep.mse(1);
        row.prediction_mse = rep.prediction_mse;
        row.failures = rep.failures;
        row.reps = reps;
        result.rows[d] = std::move(row);
    });
    return result;
}

HyperparamSample surrogate_select(const TuneResult& table, const std::string& target) {
    if (table.rows.empty()) throw Error("surrogate_select: empty table");
    if (target != "effect_mse" && target != "prediction_mse") {
        throw Error("surrogate_select: target must be effect_mse or prediction_mse");
    }
    const bool effect = target == "effect_mse";

    std::vector<int> usable;
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const double t = effect ? table.rows[i].mse1 : table.rows[i].prediction_mse;
        if (std::isfinite(t)) usable.push_back(static_cast<int>(i));
    }
    if (usable.empty()) throw Error("surrogate_select: no usable rows (all replicates failed)");
    if (usable.size() == 1) return table.rows[usable[0]].sample;

    static const char* kActivations[] = {"relu", "leaky_relu", "tanh", "selu",
                                         "elu",  "celu",       "gelu"};
    const auto names = hyperparam_names(table.kind);
    const bool has_activation = !names.empty() && names.front() == std::string("activation");
    const int n_numeric = static_cast<int>(names.size()) - (has_activation ? 1 : 0);
    const int p = n_numeric + (has_activation ? 7 : 0);

    Eigen::MatrixXd X(usable.size(), p);
    Eigen::VectorXd y(usable.size());
    for (size_t i = 0; i < usable.size(); ++i) {
        const TuneRow& row = table.rows[usable[i]];
        int col = 0;
        for (const auto& name : names) {
            if (name == "activation") continue;
            X(i, col++) = row.sample.values.at(name);
        }
        if (has_activation) {
            for (int a = 0; a < 7; ++a) {
                X(i, col++) = row.sample.activation == kActivations[a] ? 1.0 : 0.0;
            }
        }
        y(i) = effect ? row.mse1 : row.prediction_mse;
    }

    RfConfig cfg;
    cfg.n_trees = 500;
    cfg.mtry_fraction = 1.0 / 3.0;
    cfg.min_node_size = 5;
    RngStream rng = split_rng(0xaceULL, 0);
    const RandomForest surrogate = fit_rf(Dataset(X, y), cfg, rng);
    const Eigen::VectorXd pred = surrogate.predict(X);

    int best = 0;
    for (int i = 1; i < pred.size(); ++i) {
        if (pred(i) < pred(best)) best = i;
    }
    return table.rows[usable[best]].sample;
}

namespace {

Dataset slice_features(const Dataset& d, int n_cols) {
    Dataset out;
    out.X = d.X.leftCols(n_cols);
    out.y = d.y;
    out.feature_names.assign(d.feature_names.begin(), d.feature_names.begin() + n_cols);
    return out;
}

}  // namespace

std::vector<CaseStudyRow> case_study_eval(const std::vector<LearnerKind>& learners,
                                          const CaseStudySpec& spec, int n_train, int n_test,
                                          std::uint64_t seed) {
    CaseStudySpec obs = spec;
    obs.mode = CaseStudySpec::Mode::observational;
    CaseStudySpec rct = spec;
    rct.mode = CaseStudySpec::Mode::rct;

    RngStream train_rng = split_rng(seed, 0);
    RngStream in_rng = split_rng(seed, 1);
    RngStream ood_rng = split_rng(seed, 2);
    const Dataset train_full = gen_case_study(obs, n_train, train_rng);
    const Dataset in_full = gen_case_study(obs, n_test, in_rng);
    const Dataset ood_full = gen_case_study(rct, n_test, ood_rng);
    const Dataset train_causal = slice_features(train_full, 2);

    std::vector<CaseStudyRow> rows;
    int model_id = 0;
    for (LearnerKind kind : learners) {
        for (const std::string feature_set : {"full", "causal"}) {
            RngStream model_rng = split_rng(seed, 100 + static_cast<std::uint64_t>(model_id++));
            const bool causal = feature_set == "causal";
            const Dataset& train = causal ? train_causal : train_full;
            const LearnerConfig cfg = default_config(kind);
            const auto model = fit(train, cfg, model_rng);
            CaseStudyRow row;
            row.learner = kind;
            row.feature_set = feature_set;
            const Eigen::MatrixXd in_X = causal ? in_full.X.leftCols(2).eval() : in_full.X;
            const Eigen::MatrixXd ood_X = causal ? ood_full.X.leftCols(2).eval() : ood_full.X;
            row.in_dist_r2 = r2(in_full.y, model->predict(in_X));
            row.ood_r2 = r2(ood_full.y, model->predict(ood_X));
            rows.push_back(row);
        }
    }
    return rows;
}

BoostTraceResult boosting_trace(const ScenarioSpec& spec, int n, int n_steps, double eta,
                                std::uint64_t seed) {
    RngStream rng = split_rng(seed, 0);
    const Dataset d = gen_linear(spec, n, rng);
    BoosterTrace trace;
    const LinearModel model = fit_linear_booster(d, n_steps, eta, &trace);
    BoostTraceResult out;
    out.cumulative = std::move(trace.cumulative);
    out.increments = std::move(trace.increments);
    out.selected = std::move(trace.selected);
    out.final_beta = model.coefficients;
    return out;
}

std::vector<NnTracePoint> nn_trace(const ScenarioSpec& spec, int n, const NnConfig& cfg,
                                   std::uint64_t seed) {
    RngStream data_rng = split_rng(seed, 0);
    const Dataset d = generate(spec, n, data_rng);
    if (d.p() < 2) throw Error("nn_trace: scenario needs at least two features");
    RngStream model_rng = split_rng(seed, 1);
    std::vector<NnTracePoint> points;
    const auto hook = [&](int step, const Mlp& net) {
        NnTracePoint pt;
        pt.step = step;
        pt.ace1 = conditional_effects(net, d.X, 0).mean();
        pt.ace2 = conditional_effects(net, d.X, 1).mean();
        points.push_back(pt);
    };
    fit_nn(d, cfg, model_rng, hook);
    return points;
}

}  // namespace aceml
