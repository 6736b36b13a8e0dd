#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "aceml/effects.hpp"
#include "aceml/learner_config.hpp"
#include "aceml/scenarios.hpp"

namespace aceml {

// Run fn(0..n_items-1), possibly on worker threads. Results must be written to
// per-index slots; aggregation order then never depends on the thread count.
void parallel_for(int n_items, int n_threads, const std::function<void(int)>& fn);

struct ReplicateRecord {
    bool failed = false;
    std::string error;
    Eigen::VectorXd ace;
    double prediction_mse = 0.0;
};

struct ReplicateOptions {
    double h_fraction = 0.1;
    int n_threads = 1;
    // Fit on centered/scaled features and map effects back to the raw scale.
    bool standardize_features = false;
};

// Replicate r draws data with stream r and fits with stream r + R; a fresh
// holdout of size n is drawn per replicate. Learner errors are recorded per
// replicate, never fatal.
std::vector<ReplicateRecord> run_replicates(const ScenarioSpec& spec, const LearnerConfig& cfg,
                                            int n, int R, std::uint64_t master_seed,
                                            const ReplicateOptions& opts = {});

struct BiasVarianceReport {
    Eigen::VectorXd bias;      // beta_k - mean(ace_k)
    Eigen::VectorXd variance;  // sample variance over replicates
    Eigen::VectorXd mse;       // bias^2 + variance
    double prediction_mse = 0.0;
    int n_replicates = 0;
    int failures = 0;
    bool degenerate_variance = false;  // fewer than 2 successful replicates
};

// estimates: R x p matrix of per-replicate effect estimates.
BiasVarianceReport bias_variance(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& truth);

// Aggregate replicate records (skipping failures) against the ground truth.
BiasVarianceReport summarize_replicates(const std::vector<ReplicateRecord>& records,
                                        const Eigen::VectorXd& truth);

double r2(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);

// One random draw from the tuning space of a learner kind.
struct HyperparamSample {
    LearnerKind kind = LearnerKind::neural_net;
    int draw_index = 0;
    std::map<std::string, double> values;
    std::string activation;  // nn only

    LearnerConfig to_config() const;
};

// Parameter names in a fixed order, for CSV headers and surrogate encoding.
std::vector<std::string> hyperparam_names(LearnerKind kind);

HyperparamSample draw_hyperparams(LearnerKind kind, int draw_index, RngStream& rng);

struct TuneRow {
    HyperparamSample sample;
    double bias1 = 0.0, var1 = 0.0, mse1 = 0.0;
    double bias2 = 0.0, var2 = 0.0, mse2 = 0.0;
    double prediction_mse = 0.0;
    int failures = 0;
    int reps = 0;
};

struct TuneResult {
    LearnerKind kind = LearnerKind::neural_net;
    std::vector<TuneRow> rows;
};

TuneResult random_search(LearnerKind kind, int n_draws, int reps, const ScenarioSpec& spec,
                         int n, std::uint64_t master_seed, int n_threads = 1);

// Fits this library's own random forest (500 trees, mtry ~ p/3, min node 5) on
// (hyperparameters -> target), predicts the target for every sampled row and
// returns the argmin row. target is "effect_mse" or "prediction_mse".
HyperparamSample surrogate_select(const TuneResult& table, const std::string& target);

struct CaseStudyRow {
    LearnerKind learner;
    std::string feature_set;  // "full" or "causal"
    double in_dist_r2 = 0.0;
    double ood_r2 = 0.0;
};

// Trains on observational data with all three features and with the causally
// constrained pair, then scores R^2 on fresh observational (in-distribution)
// and randomized-trial (out-of-distribution) data.
std::vector<CaseStudyRow> case_study_eval(const std::vector<LearnerKind>& learners,
                                          const CaseStudySpec& spec, int n_train, int n_test,
                                          std::uint64_t seed);

struct BoostTraceResult {
    Eigen::MatrixXd cumulative;  // n_steps x p
    Eigen::MatrixXd increments;
    std::vector<int> selected;
    Eigen::VectorXd final_beta;
};

BoostTraceResult boosting_trace(const ScenarioSpec& spec, int n, int n_steps, double eta,
                                std::uint64_t seed);

struct NnTracePoint {
    int step = 0;
    double ace1 = 0.0;
    double ace2 = 0.0;
};

// ACE of the first two features after every batch update.
std::vector<NnTracePoint> nn_trace(const ScenarioSpec& spec, int n, const NnConfig& cfg,
                                   std::uint64_t seed);

}  // namespace aceml
