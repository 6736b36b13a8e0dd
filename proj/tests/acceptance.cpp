// Acceptance suite: every release-gating claim about the library, one line of
// PASS/FAIL per criterion. Exit code = number of failed criteria.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aceml/csv.hpp"
#include "aceml/experiments.hpp"

namespace fs = std::filesystem;
using namespace aceml;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& label, const std::string& detail) {
    std::printf("[%2d] %s  %s  (%s)\n", id, pass ? "PASS" : "FAIL", label.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ACEML_CLI_PATH) + " " + args;
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

constexpr int kThreads = 2;

// Shared collinear09 runs for criteria 1-4 plus the identity check in 11.
struct CollinearRuns {
    BiasVarianceReport ols, nn, nn_dropout, rf, gbt;
};

CollinearRuns run_collinear(const Eigen::VectorXd& truth) {
    const ScenarioSpec spec = builtin("collinear09");
    ReplicateOptions opts;
    opts.n_threads = kThreads;
    const int n = 1000, R = 100;
    CollinearRuns runs;
    runs.ols = summarize_replicates(run_replicates(spec, OlsConfig{}, n, R, 42, opts), truth);
    runs.nn = summarize_replicates(run_replicates(spec, NnConfig{}, n, R, 42, opts), truth);
    NnConfig drop;
    drop.dropout_rate = 0.3;
    runs.nn_dropout = summarize_replicates(run_replicates(spec, drop, n, R, 42, opts), truth);
    runs.rf = summarize_replicates(run_replicates(spec, RfConfig{}, n, R, 42, opts), truth);
    runs.gbt = summarize_replicates(run_replicates(spec, GbtConfig{}, n, R, 42, opts), truth);
    return runs;
}

}  // namespace

int main() {
    const ScenarioSpec collinear = builtin("collinear09");
    const Eigen::VectorXd truth = true_effects(collinear).beta;

    std::printf("acceptance: collinear09 runs (5 learners x 100 replicates)...\n");
    const CollinearRuns runs = run_collinear(truth);

    // 1. OLS calibration.
    {
        const double b1 = std::abs(runs.ols.bias(0));
        const double b2 = std::abs(runs.ols.bias(1));
        report(1, b1 < 0.03 && b2 < 0.03, "OLS calibration on collinear09",
               "|bias b1| = " + fmt(b1) + ", |bias b2| = " + fmt(b2) + " < 0.03");
    }

    // 2. NN near-unbiasedness.
    {
        const double b1 = std::abs(runs.nn.bias(0));
        const double b2 = std::abs(runs.nn.bias(1));
        report(2, b1 < 0.1 && b2 < 0.1, "NN near-unbiasedness",
               "|bias ACE1| = " + fmt(b1) + ", |bias ACE2| = " + fmt(b2) + " < 0.1");
    }

    // 3. RF spillover, ordered above GBT's.
    const double rf_ace1 = truth(0) - runs.rf.bias(0);
    const double rf_ace2 = truth(1) - runs.rf.bias(1);
    const double gbt_ace2 = truth(1) - runs.gbt.bias(1);
    {
        const bool pass = rf_ace2 > 0.1 && rf_ace1 < 0.9 && rf_ace2 > gbt_ace2 && gbt_ace2 > 0;
        report(3, pass, "RF causal spillover exceeds GBT's",
               "RF ACE2 = " + fmt(rf_ace2) + " > 0.1, RF ACE1 = " + fmt(rf_ace1) +
                   " < 0.9, GBT ACE2 = " + fmt(gbt_ace2));
    }

    // 4. Dropout-induced spillover.
    {
        const double with_drop = truth(1) - runs.nn_dropout.bias(1);
        const double without = truth(1) - runs.nn.bias(1);
        report(4, with_drop > 0.05 && with_drop > without, "dropout-induced spillover",
               "ACE2 with dropout = " + fmt(with_drop) + " > 0.05 and > " + fmt(without));
    }

    // 5. Linear-booster recovery and absorption phase.
    {
        const auto trace = boosting_trace(collinear, 1000, 800, 1.0, 42);
        double max_b1 = -1e300;
        for (int s = 0; s < trace.cumulative.rows(); ++s) {
            max_b1 = std::max(max_b1, trace.cumulative(s, 0));
        }
        const double f1 = std::abs(trace.final_beta(0) - 1.0);
        const double f2 = std::abs(trace.final_beta(1));
        report(5, f1 < 0.05 && f2 < 0.05 && max_b1 > 1.05, "linear-booster recovery + absorption",
               "final |b1-1| = " + fmt(f1) + ", |b2| = " + fmt(f2) +
                   ", max cumulative b1 = " + fmt(max_b1) + " (needs > 1.05)");
    }

    // 6. Weighted vs unweighted ACE on the log-normal piecewise scenario.
    {
        const ScenarioSpec spec = builtin("nonuniform");
        const int reps = 20, n = 2000;
        double unweighted = 0, weighted = 0, ols_slope = 0;
        std::vector<double> unw(reps), wei(reps), ols(reps);
        parallel_for(reps, kThreads, [&](int r) {
            RngStream data_rng = split_rng(606, r);
            const Dataset d = gen_linear(spec, n, data_rng);
            ols[r] = fit_ols(d).coefficients(0);
            auto [Xs, scaler] = standardize(d.X);
            RngStream model_rng = split_rng(606, 100 + r);
            const Mlp net = fit_nn(Dataset(Xs, d.y), NnConfig{}, model_rng);
            unw[r] = ace(net, Xs).ace(0) / scaler.sd(0);
            wei[r] = weighted_ace(net, Xs, 0).ace(0) / scaler.sd(0);
        });
        for (int r = 0; r < reps; ++r) {
            unweighted += unw[r] / reps;
            weighted += wei[r] / reps;
            ols_slope += ols[r] / reps;
        }
        const bool pass =
            unweighted > weighted + 0.2 && std::abs(weighted - ols_slope) < 0.1;
        report(6, pass, "weighted ACE tracks the OLS slope",
               "unweighted = " + fmt(unweighted) + ", weighted = " + fmt(weighted) +
                   ", OLS = " + fmt(ols_slope));
    }

    // 7. Two-way interaction recovery.
    {
        const ScenarioSpec spec = builtin("interaction5");
        RngStream data_rng = split_rng(707, 0);
        const Dataset d = gen_linear(spec, 5000, data_rng);
        auto [Xs, scaler] = standardize(d.X);
        RngStream model_rng = split_rng(707, 1);
        const Mlp net = fit_nn(Dataset(Xs, d.y), NnConfig{}, model_rng);
        const double nn_inter =
            interaction_ace(net, Xs, 0, 1).value / (scaler.sd(0) * scaler.sd(1));

        Eigen::MatrixXd Xe(d.n(), 6);
        Xe.leftCols(5) = d.X;
        Xe.col(5) = d.X.col(0).cwiseProduct(d.X.col(1));
        const double ols_inter = fit_ols(Dataset(Xe, d.y)).coefficients(5);

        const bool pass = std::abs(nn_inter - 1.0) < 0.25 && std::abs(ols_inter - 1.0) < 0.05;
        report(7, pass, "interaction ACE on interaction5",
               "NN = " + fmt(nn_inter) + " (1 +/- 0.25), engineered OLS = " + fmt(ols_inter) +
                   " (1 +/- 0.05)");
    }

    // 8. Case-study ordering over 20 seeds.
    {
        CaseStudySpec cs;
        int ok[3] = {0, 0, 0};
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto rows = case_study_eval(
                {LearnerKind::random_forest, LearnerKind::gbt, LearnerKind::neural_net}, cs,
                1000, 2000, seed);
            for (int k = 0; k < 3; ++k) {
                const auto& full = rows[2 * k];
                const auto& causal = rows[2 * k + 1];
                if (causal.ood_r2 > full.ood_r2 &&
                    full.in_dist_r2 >= causal.in_dist_r2 - 0.02) {
                    ++ok[k];
                }
            }
        }
        const bool pass = ok[0] >= 18 && ok[1] >= 18 && ok[2] >= 18;
        report(8, pass, "case-study OOD ordering",
               "RF " + std::to_string(ok[0]) + "/20, GBT " + std::to_string(ok[1]) +
                   "/20, NN " + std::to_string(ok[2]) + "/20 (need >= 18)");
    }

    // 9. Effect-tuned vs prediction-tuned hyperparameters.
    {
        const ScenarioSpec spec = builtin("datapoor30");
        const Eigen::VectorXd beta = true_effects(spec).beta;
        const auto table =
            random_search(LearnerKind::neural_net, 100, 5, spec, 100, 909, kThreads);
        const auto cfg_e = surrogate_select(table, "effect_mse");
        const auto cfg_p = surrogate_select(table, "prediction_mse");
        ReplicateOptions opts;
        opts.n_threads = kThreads;
        const auto rep_e = summarize_replicates(
            run_replicates(spec, cfg_e.to_config(), 100, 50, 777, opts), beta);
        const auto rep_p = summarize_replicates(
            run_replicates(spec, cfg_p.to_config(), 100, 50, 777, opts), beta);
        report(9, rep_e.mse(0) <= rep_p.mse(0), "effect-tuned beats prediction-tuned",
               "effect mse: " + fmt(rep_e.mse(0)) + " <= " + fmt(rep_p.mse(0)));
    }

    // 10. OLS failure path through the CLI.
    {
        const fs::path dir = fs::temp_directory_path() / "aceml_accept_datapoor";
        fs::remove_all(dir);
        const int code = run_cli("--seed 10 --threads 2 benchmark --scenario datapoor "
                                 "--models ols --n 50 --replicates 100 --out-dir " +
                                 dir.string());
        const std::string text = slurp(dir / "benchmark_long.csv");
        const bool all_failed = text.find("failures,100") != std::string::npos;
        report(10, code == 0 && all_failed, "OLS failure path on datapoor n=50",
               "exit = " + std::to_string(code) + ", failures,100 recorded");
        fs::remove_all(dir);
    }

    // 11. Numerical oracles.
    {
        std::string detail;
        bool pass = true;

        // Elastic net at lambda = 0 vs OLS on 50 random instances.
        double worst_en = 0;
        for (int seed = 0; seed < 50; ++seed) {
            RngStream rng = split_rng(1100, seed);
            const int p = 2 + static_cast<int>(rng.uniform_index(9));
            Eigen::MatrixXd X(200, p);
            Eigen::VectorXd y(200);
            Eigen::VectorXd beta(p);
            for (int j = 0; j < p; ++j) beta(j) = rng.uniform(-2, 2);
            for (int i = 0; i < 200; ++i) {
                for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
                y(i) = X.row(i).dot(beta) + rng.normal(0, 0.5);
            }
            const Dataset d(X, y);
            const double diff = (fit_ols(d).coefficients -
                                 fit_elastic_net(d, 0.2, 0.0).coefficients)
                                    .cwiseAbs()
                                    .maxCoeff();
            worst_en = std::max(worst_en, diff);
        }
        pass = pass && worst_en < 1e-6;
        detail += "enet-ols " + fmt(worst_en);

        // NN gradient vs central differences.
        {
            RngStream rng = split_rng(1101, 0);
            Eigen::MatrixXd X(30, 3);
            Eigen::VectorXd y(30);
            for (int i = 0; i < 30; ++i) {
                for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
                y(i) = std::sin(X(i, 0)) + rng.normal(0, 0.1);
            }
            NnConfig cfg;
            cfg.depth = 2;
            cfg.width = 4;
            cfg.activation = Activation::tanh;
            cfg.epochs = 1;
            cfg.batch_fraction = 1.0;
            RngStream fit_rng = split_rng(1101, 1);
            Mlp net = fit_nn(Dataset(X, y), cfg, fit_rng);
            std::vector<Eigen::MatrixXd> dW;
            std::vector<Eigen::VectorXd> db;
            net.backprop(X, y, 0.3, 0.05, dW, db);
            double worst = 0;
            RngStream pick = split_rng(1101, 2);
            for (int t = 0; t < 5; ++t) {
                const auto l = pick.uniform_index(net.W.size());
                const auto r = pick.uniform_index(net.W[l].rows());
                const auto c = pick.uniform_index(net.W[l].cols());
                const double eps = 1e-5, saved = net.W[l](r, c);
                net.W[l](r, c) = saved + eps;
                const double up = net.training_loss(X, y, 0.3, 0.05);
                net.W[l](r, c) = saved - eps;
                const double down = net.training_loss(X, y, 0.3, 0.05);
                net.W[l](r, c) = saved;
                const double fd = (up - down) / (2 * eps);
                worst = std::max(worst,
                                 std::abs(dW[l](r, c) - fd) / std::max(1.0, std::abs(fd)));
            }
            pass = pass && worst < 1e-4;
            detail += ", nn-grad " + fmt(worst);
        }

        // Mixed-difference bilinear oracle.
        {
            class Bilinear final : public Model {
            public:
                LearnerKind kind() const override { return LearnerKind::ols; }
                int n_features() const override { return 2; }

            protected:
                Eigen::VectorXd predict_impl(const Eigen::MatrixXd& X) const override {
                    return X.col(0).cwiseProduct(X.col(1));
                }
            } bilinear;
            RngStream rng = split_rng(1102, 0);
            Eigen::MatrixXd X(60, 2);
            for (int i = 0; i < 60; ++i) {
                X(i, 0) = rng.normal();
                X(i, 1) = rng.normal();
            }
            const double err = std::abs(interaction_ace(bilinear, X, 0, 1).value - 1.0);
            pass = pass && err < 1e-10;
            detail += ", bilinear " + fmt(err);
        }

        // LKJ(2, eta=2) off-diagonal variance = 0.2 within 5%.
        {
            RngStream rng = split_rng(1103, 0);
            double mean = 0, m2 = 0;
            const int n = 100000;
            for (int i = 0; i < n; ++i) {
                const double r = lkj_sample_corr(2, 2.0, rng).entries(0, 1);
                mean += r;
                m2 += r * r;
            }
            mean /= n;
            const double var = m2 / n - mean * mean;
            pass = pass && std::abs(var - 0.2) < 0.01;
            detail += ", lkj-var " + fmt(var);
        }

        // MVN empirical covariance within 0.02 entrywise at n = 1e5.
        {
            Eigen::MatrixXd S(3, 3);
            S << 1.0, 0.9, 0.2, 0.9, 1.0, 0.1, 0.2, 0.1, 1.0;
            RngStream rng = split_rng(1104, 0);
            const auto X = mvn_sample(Eigen::VectorXd::Zero(3), CovMatrix(S), 100000, rng);
            Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
            Eigen::MatrixXd emp = centered.transpose() * centered / (X.rows() - 1.0);
            const double err = (emp - S).cwiseAbs().maxCoeff();
            pass = pass && err < 0.02;
            detail += ", mvn-cov " + fmt(err);
        }

        // Bias^2 + var = mse identity on every report produced above.
        {
            double worst = 0;
            for (const auto* rep : {&runs.ols, &runs.nn, &runs.nn_dropout, &runs.rf, &runs.gbt}) {
                for (int j = 0; j < rep->bias.size(); ++j) {
                    worst = std::max(worst, std::abs(rep->mse(j) - (rep->bias(j) * rep->bias(j) +
                                                                    rep->variance(j))));
                }
            }
            pass = pass && worst < 1e-12;
            detail += ", mse-identity " + fmt(worst);
        }

        report(11, pass, "numerical oracles", detail);
    }

    // 12. Byte-identical CLI output across reruns and thread counts.
    {
        bool pass = true;
        std::string detail = "benchmark+tune+generate+casestudy+trace reruns";
        const fs::path base = fs::temp_directory_path() / "aceml_accept_det";
        fs::remove_all(base);
        fs::create_directories(base);

        const std::string bench_args =
            "--seed 12 benchmark --scenario collinear09 --models ols,rf,gbt "
            "--n 200 --replicates 8 --out-dir ";
        pass = pass && run_cli("--threads 1 " + bench_args + (base / "b1").string()) == 0;
        pass = pass && run_cli("--threads 8 " + bench_args + (base / "b8").string()) == 0;
        pass = pass && run_cli("--threads 1 " + bench_args + (base / "b1b").string()) == 0;
        for (const char* name : {"benchmark_long.csv", "ols_replicates.csv",
                                 "rf_replicates.csv", "gbt_replicates.csv"}) {
            pass = pass && slurp(base / "b1" / name) == slurp(base / "b8" / name);
            pass = pass && slurp(base / "b1" / name) == slurp(base / "b1b" / name);
        }

        const std::string tune_args =
            "--seed 13 tune --model rf --scenario datapoor30 --n 80 --draws 6 --reps 2 "
            "--out-dir ";
        pass = pass && run_cli("--threads 1 " + tune_args + (base / "t1").string()) == 0;
        pass = pass && run_cli("--threads 8 " + tune_args + (base / "t8").string()) == 0;
        pass = pass && slurp(base / "t1" / "search_table.csv") ==
                           slurp(base / "t8" / "search_table.csv");
        pass = pass && slurp(base / "t1" / "optima.json") == slurp(base / "t8" / "optima.json");

        pass = pass && run_cli("--seed 14 generate --scenario interaction5 --n 400 --out " +
                               (base / "g1.csv").string()) == 0;
        pass = pass && run_cli("--seed 14 generate --scenario interaction5 --n 400 --out " +
                               (base / "g2.csv").string()) == 0;
        pass = pass && slurp(base / "g1.csv") == slurp(base / "g2.csv");

        const std::string case_args = "--seed 15 casestudy --n-train 300 --n-test 300 --out ";
        pass = pass && run_cli(case_args + (base / "c1.csv").string()) == 0;
        pass = pass && run_cli(case_args + (base / "c2.csv").string()) == 0;
        pass = pass && slurp(base / "c1.csv") == slurp(base / "c2.csv");

        const std::string trace_args =
            "--seed 16 trace --kind nn --scenario collinear09 --n 200 --out ";
        pass = pass && run_cli(trace_args + (base / "tr1.csv").string()) == 0;
        pass = pass && run_cli(trace_args + (base / "tr2.csv").string()) == 0;
        pass = pass && slurp(base / "tr1.csv") == slurp(base / "tr2.csv");

        fs::remove_all(base);
        report(12, pass, "byte-identical CLI reruns at 1 and 8 threads", detail);
    }

    std::printf("acceptance: %d of 12 criteria failed\n", g_failures);
    return g_failures;
}
