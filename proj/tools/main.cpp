// aceml command line: generate scenario data, extract conditional effects
// from fitted models, and run the simulation benchmarks. Every command writes
// CSV output plus a JSON run manifest that `aceml replay` can re-execute.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aceml/csv.hpp"
#include "aceml/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aceml;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct GlobalOpts {
    std::uint64_t seed = 42;
    int threads = 1;
    std::vector<std::string> argv;  // original command line, for the manifest
};

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_manifest(const std::string& path, const GlobalOpts& g, const std::string& command,
                    const json& config, const std::vector<std::string>& outputs) {
    json m;
    m["command"] = command;
    m["argv"] = g.argv;
    m["master_seed"] = g.seed;
    m["threads"] = g.threads;
    m["config"] = config;
    m["library_version"] = kVersion;
    m["created_utc"] = timestamp_utc();
    m["outputs"] = outputs;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest: " + path);
    out << m.dump(2) << "\n";
}

std::string manifest_path_for(const std::string& out_path) {
    return out_path + ".manifest.json";
}

// ---------------------------------------------------------------- generate

int cmd_generate(const GlobalOpts& g, const std::string& scenario, int n,
                 const std::string& out_path) {
    const ScenarioSpec spec = load_scenario(scenario);
    const int rows = n > 0 ? n : spec.n_default;
    RngStream rng = split_rng(g.seed, 0);
    const Dataset d = generate(spec, rows, rng);

    CsvWriter csv(out_path);
    std::vector<std::string> header = d.feature_names;
    header.push_back("y");
    csv.row(header);
    std::vector<std::string> cells(d.p() + 1);
    for (int i = 0; i < d.n(); ++i) {
        for (int j = 0; j < d.p(); ++j) cells[j] = format_double(d.X(i, j));
        cells[d.p()] = format_double(d.y(i));
        csv.row(cells);
    }
    csv.close();

    json cfg;
    cfg["scenario"] = json::parse(scenario_to_json(spec));
    cfg["n"] = rows;
    write_manifest(manifest_path_for(out_path), g, "generate", cfg, {out_path});
    return kExitOk;
}

// --------------------------------------------------------------------- ace

std::vector<std::pair<int, int>> parse_pairs(const std::string& text) {
    std::vector<std::pair<int, int>> pairs;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.empty()) continue;
        const auto comma = item.find(',');
        if (comma == std::string::npos) {
            throw Error("interaction pair must look like '1,2': " + item);
        }
        const int a = std::stoi(item.substr(0, comma));
        const int b = std::stoi(item.substr(comma + 1));
        pairs.emplace_back(a - 1, b - 1);  // 1-based on the command line
    }
    return pairs;
}

int cmd_ace(const GlobalOpts& g, const std::string& data_path, const std::string& model_name,
            const std::string& config_path, double h_fraction, bool weighted,
            const std::string& interactions, const std::string& out_path) {
    const CsvTable table = read_csv(data_path);
    const int y_col = table.column("y") >= 0 ? table.column("y")
                                             : static_cast<int>(table.header.size()) - 1;
    std::vector<int> x_cols;
    std::vector<std::string> names;
    for (size_t j = 0; j < table.header.size(); ++j) {
        if (static_cast<int>(j) != y_col) {
            x_cols.push_back(static_cast<int>(j));
            names.push_back(table.header[j]);
        }
    }
    Dataset d;
    d.X = csv_to_matrix(table, x_cols);
    d.y = csv_to_matrix(table, {y_col}).col(0);
    d.feature_names = names;

    LearnerConfig cfg = default_config(learner_kind_from_string(model_name));
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw IoError("cannot open learner config: " + config_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        cfg = learner_config_from_json(buf.str());
    }

    const auto pairs = parse_pairs(interactions);
    // Interactions follow the convention that predictors are centered and
    // standardized first; effects are mapped back to the raw feature scale.
    const bool standardized = !pairs.empty();

    CsvWriter csv(out_path);
    csv.row({"name", "ace", "h", "h2", "coef", "failed"});

    bool failed = false;
    std::string error;
    try {
        Eigen::MatrixXd Xfit = d.X;
        Standardizer scaler;
        if (standardized) {
            auto [Xs, s] = standardize(d.X);
            Xfit = Xs;
            scaler = s;
        }
        RngStream rng = split_rng(g.seed, 1);
        const auto model = fit(Dataset(Xfit, d.y, d.feature_names), cfg, rng);
        const auto* linear = dynamic_cast<const LinearModel*>(model.get());

        for (int k = 0; k < d.p(); ++k) {
            double value, h;
            if (weighted) {
                const AceReport rep = weighted_ace(*model, Xfit, k, h_fraction);
                value = rep.ace(0);
                h = rep.h(0);
            } else {
                const Eigen::VectorXd ce = conditional_effects(*model, Xfit, k, h_fraction);
                value = ce.mean();
                h = h_fraction * column_sd(Xfit.col(k));
            }
            double coef = std::numeric_limits<double>::quiet_NaN();
            if (linear) coef = linear->coefficients(k);
            if (standardized) {
                value /= scaler.sd(k);
                h *= scaler.sd(k);
                if (linear) coef /= scaler.sd(k);
            }
            csv.row({d.feature_names[k], format_double(value), format_double(h), "",
                     format_double(coef), "0"});
        }
        for (const auto& [a, b] : pairs) {
            const InteractionReport rep = interaction_ace(*model, Xfit, a, b, h_fraction);
            double value = rep.value;
            double hm = rep.h_m, hk = rep.h_k;
            if (standardized) {
                value /= scaler.sd(a) * scaler.sd(b);
                hm *= scaler.sd(a);
                hk *= scaler.sd(b);
            }
            csv.row({d.feature_names[a] + ":" + d.feature_names[b], format_double(value),
                     format_double(hm), format_double(hk), "NA", "0"});
        }
    } catch (const RankDeficient& e) {
        failed = true;
        error = e.what();
        for (int k = 0; k < d.p(); ++k) {
            csv.row({d.feature_names[k], "NA", "NA", "", "NA", "1"});
        }
    }
    csv.close();

    json cfg_json;
    cfg_json["data"] = data_path;
    cfg_json["model"] = model_name;
    cfg_json["learner"] = json::parse(learner_config_to_json(cfg));
    cfg_json["h_fraction"] = h_fraction;
    cfg_json["weighted"] = weighted;
    cfg_json["interactions"] = interactions;
    if (failed) cfg_json["failure"] = error;
    write_manifest(manifest_path_for(out_path), g, "ace", cfg_json, {out_path});
    if (failed) {
        std::cerr << "fit failed (reported as NA rows): " << error << "\n";
    }
    return kExitOk;  // partial results are a valid outcome
}

// --------------------------------------------------------------- benchmark

int cmd_benchmark(const GlobalOpts& g, const std::string& scenario,
                  const std::string& models_arg, int n, int replicates,
                  const std::string& out_dir) {
    const ScenarioSpec spec = load_scenario(scenario);
    const int rows = n > 0 ? n : spec.n_default;
    fs::create_directories(out_dir);

    std::vector<std::string> models;
    {
        std::stringstream ss(models_arg);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) models.push_back(item);
        }
    }
    if (models.empty()) throw Error("no models given");

    Eigen::VectorXd truth;
    bool have_truth = true;
    try {
        truth = true_effects(spec).beta;
    } catch (const NoAnalyticTruth&) {
        have_truth = false;
    }

    std::vector<std::string> outputs;
    const std::string long_path = (fs::path(out_dir) / "benchmark_long.csv").string();
    CsvWriter long_csv(long_path);
    long_csv.row({"scenario", "model", "feature", "metric", "value"});

    ReplicateOptions opts;
    opts.n_threads = g.threads;
    for (const auto& model_name : models) {
        const LearnerKind kind = learner_kind_from_string(model_name);
        const LearnerConfig cfg = default_config(kind);
        const auto records = run_replicates(spec, cfg, rows, replicates, g.seed, opts);

        const std::string rep_path =
            (fs::path(out_dir) / (std::string(to_string(kind)) + "_replicates.csv")).string();
        CsvWriter rep_csv(rep_path);
        std::vector<std::string> header = {"replicate", "failed", "prediction_mse"};
        for (int j = 0; j < spec.p; ++j) header.push_back("ace_" + std::to_string(j + 1));
        rep_csv.row(header);
        for (size_t r = 0; r < records.size(); ++r) {
            std::vector<std::string> cells = {std::to_string(r),
                                              records[r].failed ? "1" : "0",
                                              records[r].failed
                                                  ? "NA"
                                                  : format_double(records[r].prediction_mse)};
            for (int j = 0; j < spec.p; ++j) {
                cells.push_back(records[r].failed ? "NA" : format_double(records[r].ace(j)));
            }
            rep_csv.row(cells);
        }
        rep_csv.close();
        outputs.push_back(rep_path);

        if (have_truth) {
            const BiasVarianceReport rep = summarize_replicates(records, truth);
            for (int j = 0; j < spec.p; ++j) {
                const std::string feature = "x" + std::to_string(j + 1);
                long_csv.row({spec.name, model_name, feature, "true_beta",
                              format_double(truth(j))});
                long_csv.row({spec.name, model_name, feature, "mean_ace",
                              format_double(truth(j) - rep.bias(j))});
                long_csv.row({spec.name, model_name, feature, "bias", format_double(rep.bias(j))});
                long_csv.row({spec.name, model_name, feature, "variance",
                              format_double(rep.variance(j))});
                long_csv.row({spec.name, model_name, feature, "mse", format_double(rep.mse(j))});
            }
            long_csv.row({spec.name, model_name, "", "prediction_mse",
                          format_double(rep.prediction_mse)});
            long_csv.row({spec.name, model_name, "", "failures",
                          std::to_string(rep.failures)});
            long_csv.row({spec.name, model_name, "", "n_replicates",
                          std::to_string(rep.n_replicates)});
            long_csv.row({spec.name, model_name, "", "degenerate_variance",
                          rep.degenerate_variance ? "1" : "0"});
        }
    }
    long_csv.close();
    outputs.push_back(long_path);

    json cfg;
    cfg["scenario"] = json::parse(scenario_to_json(spec));
    cfg["models"] = models;
    cfg["n"] = rows;
    cfg["replicates"] = replicates;
    const std::string manifest = (fs::path(out_dir) / "manifest.json").string();
    write_manifest(manifest, g, "benchmark", cfg, outputs);
    return kExitOk;
}

// -------------------------------------------------------------------- tune

json sample_to_json(const HyperparamSample& s) {
    json j;
    j["learner"] = to_string(s.kind);
    j["draw_index"] = s.draw_index;
    if (!s.activation.empty()) j["activation"] = s.activation;
    for (const auto& [name, value] : s.values) j[name] = value;
    return j;
}

int cmd_tune(const GlobalOpts& g, const std::string& model_name, const std::string& scenario,
             int n, int draws, int reps, const std::string& out_dir) {
    const ScenarioSpec spec = load_scenario(scenario);
    const int rows = n > 0 ? n : spec.n_default;
    const LearnerKind kind = learner_kind_from_string(model_name);
    fs::create_directories(out_dir);

    const TuneResult table = random_search(kind, draws, reps, spec, rows, g.seed, g.threads);

    const std::string table_path = (fs::path(out_dir) / "search_table.csv").string();
    CsvWriter csv(table_path);
    const auto names = hyperparam_names(kind);
    std::vector<std::string> header = {"draw"};
    header.insert(header.end(), names.begin(), names.end());
    for (const char* m : {"bias1", "var1", "mse1", "bias2", "var2", "mse2", "prediction_mse"}) {
        header.push_back(m);
    }
    header.push_back("failures");
    csv.row(header);
    for (const auto& row : table.rows) {
        std::vector<std::string> cells = {std::to_string(row.sample.draw_index)};
        for (const auto& name : names) {
            cells.push_back(name == "activation" ? row.sample.activation
                                                 : format_double(row.sample.values.at(name)));
        }
        for (double v : {row.bias1, row.var1, row.mse1, row.bias2, row.var2, row.mse2,
                         row.prediction_mse}) {
            cells.push_back(format_double(v));
        }
        cells.push_back(std::to_string(row.failures));
        csv.row(cells);
    }
    csv.close();

    json optima;
    optima["effect_mse"] = sample_to_json(surrogate_select(table, "effect_mse"));
    optima["prediction_mse"] = sample_to_json(surrogate_select(table, "prediction_mse"));
    const std::string optima_path = (fs::path(out_dir) / "optima.json").string();
    {
        std::ofstream out(optima_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + optima_path);
        out << optima.dump(2) << "\n";
    }

    json cfg;
    cfg["scenario"] = json::parse(scenario_to_json(spec));
    cfg["model"] = model_name;
    cfg["n"] = rows;
    cfg["draws"] = draws;
    cfg["reps"] = reps;
    const std::string manifest = (fs::path(out_dir) / "manifest.json").string();
    write_manifest(manifest, g, "tune", cfg, {table_path, optima_path});
    return kExitOk;
}

// --------------------------------------------------------------- casestudy

int cmd_casestudy(const GlobalOpts& g, int n_train, int n_test, const std::string& out_path) {
    CaseStudySpec cs;
    const auto rows = case_study_eval(
        {LearnerKind::random_forest, LearnerKind::gbt, LearnerKind::neural_net}, cs, n_train,
        n_test, g.seed);

    CsvWriter csv(out_path);
    csv.row({"learner", "feature_set", "distribution", "r2"});
    for (const auto& row : rows) {
        csv.row({to_string(row.learner), row.feature_set, "in_dist",
                 format_double(row.in_dist_r2)});
        csv.row({to_string(row.learner), row.feature_set, "ood", format_double(row.ood_r2)});
    }
    csv.close();

    json cfg;
    cfg["n_train"] = n_train;
    cfg["n_test"] = n_test;
    write_manifest(manifest_path_for(out_path), g, "casestudy", cfg, {out_path});
    return kExitOk;
}

// ------------------------------------------------------------------- trace

int cmd_trace(const GlobalOpts& g, const std::string& kind, const std::string& scenario, int n,
              int steps, double eta, const std::string& out_path) {
    const ScenarioSpec spec = load_scenario(scenario);
    const int rows = n > 0 ? n : spec.n_default;

    CsvWriter csv(out_path);
    if (kind == "boost") {
        const auto trace = boosting_trace(spec, rows, steps, eta, g.seed);
        std::vector<std::string> header = {"step", "selected"};
        for (int j = 0; j < spec.p; ++j) header.push_back("cum_beta_" + std::to_string(j + 1));
        for (int j = 0; j < spec.p; ++j) header.push_back("inc_beta_" + std::to_string(j + 1));
        csv.row(header);
        for (int s = 0; s < trace.cumulative.rows(); ++s) {
            std::vector<std::string> cells = {std::to_string(s + 1),
                                              std::to_string(trace.selected[s] + 1)};
            for (int j = 0; j < spec.p; ++j) cells.push_back(format_double(trace.cumulative(s, j)));
            for (int j = 0; j < spec.p; ++j) cells.push_back(format_double(trace.increments(s, j)));
            csv.row(cells);
        }
    } else if (kind == "nn") {
        NnConfig cfg;
        const auto points = nn_trace(spec, rows, cfg, g.seed);
        csv.row({"step", "ace1", "ace2"});
        for (const auto& pt : points) {
            csv.row({std::to_string(pt.step), format_double(pt.ace1), format_double(pt.ace2)});
        }
    } else {
        throw Error("trace kind must be 'boost' or 'nn'");
    }
    csv.close();

    json cfg;
    cfg["kind"] = kind;
    cfg["scenario"] = json::parse(scenario_to_json(spec));
    cfg["n"] = rows;
    cfg["steps"] = steps;
    cfg["eta"] = eta;
    write_manifest(manifest_path_for(out_path), g, "trace", cfg, {out_path});
    return kExitOk;
}

int run(const std::vector<std::string>& args);

// ------------------------------------------------------------------ replay

int cmd_replay(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest: " + manifest_path);
    json m = json::parse(in);
    std::vector<std::string> argv = m.at("argv").get<std::vector<std::string>>();
    if (argv.empty()) throw Error("manifest has an empty argv");
    return run(argv);
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"average conditional effects from trained predictive models"};
    app.require_subcommand(1);

    GlobalOpts g;
    g.argv = args;
    if (const char* env = std::getenv("ACEML_THREADS")) {
        g.threads = std::max(1, std::atoi(env));
    }
    // Global options may be given before or after the subcommand.
    app.fallthrough();
    app.add_option("--seed", g.seed, "master seed for every stream");
    app.add_option("--threads", g.threads, "worker threads for replicates and search draws");

    // generate
    auto* gen = app.add_subcommand("generate", "write a scenario dataset as CSV");
    std::string gen_scenario, gen_out;
    int gen_n = 0;
    gen->add_option("--scenario", gen_scenario, "catalog name or spec .json path")->required();
    gen->add_option("--n", gen_n, "rows (default: scenario default)");
    gen->add_option("--out", gen_out, "output CSV path")->required();

    // ace
    auto* acec = app.add_subcommand("ace", "fit a model to a CSV and extract effects");
    std::string ace_data, ace_model, ace_config, ace_inter, ace_out;
    double ace_h = 0.1;
    bool ace_weighted = false;
    acec->add_option("--data", ace_data, "input CSV (features + response column 'y')")->required();
    acec->add_option("--model", ace_model, "ols|elastic_net|tree|rf|gbt|linear_booster|nn")
        ->required();
    acec->add_option("--config", ace_config, "learner config JSON path");
    acec->add_option("--h-fraction", ace_h, "finite-difference step as a fraction of sd");
    acec->add_flag("--weighted", ace_weighted, "inverse-density weighted averages");
    acec->add_option("--interactions", ace_inter, "1-based pairs, e.g. '1,2;1,3'");
    acec->add_option("--out", ace_out, "output CSV path")->required();

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "bias/variance of effects over replicates");
    std::string bench_scenario, bench_models = "ols,elastic_net,rf,gbt,nn", bench_dir;
    int bench_n = 0, bench_reps = 100;
    bench->add_option("--scenario", bench_scenario, "catalog name or spec .json path")->required();
    bench->add_option("--models", bench_models, "comma-separated learner kinds");
    bench->add_option("--n", bench_n, "rows per replicate (default: scenario default)");
    bench->add_option("--replicates", bench_reps, "replicate count");
    bench->add_option("--out-dir", bench_dir, "output directory")->required();

    // tune
    auto* tune = app.add_subcommand("tune", "hyperparameter random search + surrogate optima");
    std::string tune_model, tune_scenario, tune_dir;
    int tune_n = 0, tune_draws = 100, tune_reps = 5;
    tune->add_option("--model", tune_model, "nn|gbt|rf|elastic_net")->required();
    tune->add_option("--scenario", tune_scenario, "catalog name or spec .json path")->required();
    tune->add_option("--n", tune_n, "rows per replicate");
    tune->add_option("--draws", tune_draws, "random parameter draws");
    tune->add_option("--reps", tune_reps, "replicates per draw");
    tune->add_option("--out-dir", tune_dir, "output directory")->required();

    // casestudy
    auto* cases = app.add_subcommand("casestudy", "in- vs out-of-distribution R^2 table");
    int case_train = 1000, case_test = 2000;
    std::string case_out;
    cases->add_option("--n-train", case_train, "training rows");
    cases->add_option("--n-test", case_test, "test rows per distribution");
    cases->add_option("--out", case_out, "output CSV path")->required();

    // trace
    auto* trace = app.add_subcommand("trace", "per-step effect trajectories");
    std::string trace_kind, trace_scenario = "collinear09", trace_out;
    int trace_n = 0, trace_steps = 400;
    double trace_eta = 1.0;
    trace->add_option("--kind", trace_kind, "boost|nn")->required();
    trace->add_option("--scenario", trace_scenario, "catalog name or spec .json path");
    trace->add_option("--n", trace_n, "rows");
    trace->add_option("--steps", trace_steps, "boosting steps");
    trace->add_option("--eta", trace_eta, "boosting learning rate");
    trace->add_option("--out", trace_out, "output CSV path")->required();

    // replay
    auto* replay = app.add_subcommand("replay", "re-run a command from its manifest");
    std::string replay_manifest;
    replay->add_option("manifest", replay_manifest, "manifest JSON path")->required();

    // list-scenarios
    auto* list = app.add_subcommand("list-scenarios", "print the scenario catalog");

    std::vector<std::string> cli_args(args.begin() + 1, args.end());
    std::reverse(cli_args.begin(), cli_args.end());  // CLI11 parses reversed
    try {
        app.parse(cli_args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            app.exit(e);
            return kExitOk;
        }
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    if (gen->parsed()) return cmd_generate(g, gen_scenario, gen_n, gen_out);
    if (acec->parsed())
        return cmd_ace(g, ace_data, ace_model, ace_config, ace_h, ace_weighted, ace_inter,
                       ace_out);
    if (bench->parsed())
        return cmd_benchmark(g, bench_scenario, bench_models, bench_n, bench_reps, bench_dir);
    if (tune->parsed())
        return cmd_tune(g, tune_model, tune_scenario, tune_n, tune_draws, tune_reps, tune_dir);
    if (cases->parsed()) return cmd_casestudy(g, case_train, case_test, case_out);
    if (trace->parsed())
        return cmd_trace(g, trace_kind, trace_scenario, trace_n, trace_steps, trace_eta,
                         trace_out);
    if (replay->parsed()) return cmd_replay(replay_manifest);
    if (list->parsed()) {
        for (const auto& name : builtin_names()) std::cout << name << "\n";
        return kExitOk;
    }
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    try {
        return run(args);
    } catch (const UnknownScenario& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
