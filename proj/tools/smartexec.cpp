// smartexec: analyze loop specs, generate training data, train the models,
// predict loop parameters, and benchmark adaptive vs. fixed settings.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "smartexec/bench.hpp"
#include "smartexec/executor.hpp"
#include "smartexec/learning.hpp"
#include "smartexec/loop_ir.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace smartexec;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string render_vector(const loop_ir::FeatureVector& x) {
    std::string out = "[";
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (j) out += ", ";
        out += format_value(x[j]);
    }
    return out + "]";
}

std::vector<std::string> split_csv_list(const std::string& arg) {
    std::vector<std::string> out;
    std::istringstream in(arg);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(const std::string& spec_path, unsigned threads, std::uint64_t iterations,
                bool as_json) {
    loop_ir::LoopAst ast = loop_ir::parse_loop_spec(read_file(spec_path));
    loop_ir::StaticFeatures s = loop_ir::analyze_statement(ast);
    loop_ir::DynamicFeatures d{threads, iterations};
    loop_ir::FeatureVector x = loop_ir::make_feature_vector(s, d);

    if (as_json) {
        json out = {
            {"spec", spec_path},
            {"static_features",
             {{"total_ops", s.total_ops},
              {"float_ops", s.float_ops},
              {"comparison_ops", s.comparison_ops},
              {"deepest_loop_level", s.deepest_loop_level},
              {"num_int_vars", s.num_int_vars},
              {"num_float_vars", s.num_float_vars},
              {"num_if", s.num_if},
              {"num_if_inner", s.num_if_inner},
              {"num_calls", s.num_calls},
              {"num_calls_inner", s.num_calls_inner}}},
            {"dynamic_features",
             {{"num_threads", d.num_threads}, {"num_iterations", d.num_iterations}}},
            {"feature_vector", x},
        };
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    std::printf("static features of %s:\n", spec_path.c_str());
    std::printf("  total_ops          %llu\n", (unsigned long long)s.total_ops);
    std::printf("  float_ops          %llu\n", (unsigned long long)s.float_ops);
    std::printf("  comparison_ops     %llu\n", (unsigned long long)s.comparison_ops);
    std::printf("  deepest_loop_level %llu\n", (unsigned long long)s.deepest_loop_level);
    std::printf("  num_int_vars       %llu\n", (unsigned long long)s.num_int_vars);
    std::printf("  num_float_vars     %llu\n", (unsigned long long)s.num_float_vars);
    std::printf("  num_if             %llu (inner %llu)\n", (unsigned long long)s.num_if,
                (unsigned long long)s.num_if_inner);
    std::printf("  num_calls          %llu (inner %llu)\n", (unsigned long long)s.num_calls,
                (unsigned long long)s.num_calls_inner);
    std::printf("dynamic features: threads=%llu iterations=%llu\n",
                (unsigned long long)d.num_threads, (unsigned long long)d.num_iterations);
    std::printf("feature vector: %s\n", render_vector(x).c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// gen-data

int cmd_gen_data(const std::string& out_dir, const std::string& kernels_arg,
                 const std::string& threads_arg, int reps, std::uint64_t seed,
                 const std::string& fake_clock_path, bool quick) {
    bench::SweepGrid grid;
    if (!kernels_arg.empty()) grid.kernels = split_csv_list(kernels_arg);
    if (grid.kernels.empty()) throw std::invalid_argument("no kernels selected");
    if (!threads_arg.empty()) {
        grid.threads.clear();
        for (const std::string& t : split_csv_list(threads_arg))
            grid.threads.push_back(static_cast<unsigned>(std::stoul(t)));
    }
    grid.reps = reps;
    grid.quick = quick;

    fs::create_directories(out_dir);

    bench::SteadyClock steady;
    bench::FakeClock fake;
    bench::MeasurementClock* clock = &steady;
    if (!fake_clock_path.empty()) {
        fake = bench::FakeClock::from_file(fake_clock_path);
        clock = &fake;
    }

    bench::GenDataSummary summary =
        bench::generate_training_data(grid, *clock, out_dir, seed);
    std::printf("wrote %zu rows per file to %s\n", summary.cells, out_dir.c_str());
    const char* names[3] = {"policy", "chunk", "prefetch"};
    for (std::size_t d = 0; d < 3; ++d) {
        std::printf("  %s: %zu distinct labels\n", names[d], summary.distinct_labels[d]);
        if (summary.distinct_labels[d] < 2)
            std::fprintf(stderr,
                         "warning: %s dataset has fewer than 2 distinct labels; "
                         "the model will not be trainable\n",
                         names[d]);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct SplitData {
    learning::Dataset train;
    learning::Dataset held;
};

SplitData shuffle_split(learning::Dataset data, double split, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::shuffle(data.samples.begin(), data.samples.end(), rng);
    auto cut = static_cast<std::size_t>(
        std::llround(split * static_cast<double>(data.samples.size())));
    cut = std::min(cut, data.samples.size());
    SplitData out;
    out.train.class_names = data.class_names;
    out.held.class_names = data.class_names;
    out.train.samples.assign(data.samples.begin(),
                             data.samples.begin() + static_cast<std::ptrdiff_t>(cut));
    out.held.samples.assign(data.samples.begin() + static_cast<std::ptrdiff_t>(cut),
                            data.samples.end());
    return out;
}

double binary_accuracy(const learning::BinaryModel& model, const learning::Dataset& data) {
    std::size_t hits = 0;
    for (const auto& s : data.samples)
        if (learning::predict_binary(model, s.x).label == s.label) ++hits;
    return static_cast<double>(hits) / static_cast<double>(data.samples.size());
}

double multinomial_accuracy(const learning::MultinomialModel& model,
                            const learning::Dataset& data) {
    std::size_t hits = 0;
    for (const auto& s : data.samples)
        if (learning::predict_class(model, s.x).label == s.label) ++hits;
    return static_cast<double>(hits) / static_cast<double>(data.samples.size());
}

int cmd_train(const std::string& data_dir, const std::string& out_path, double split,
              std::uint64_t seed) {
    if (split <= 0.0 || split > 1.0)
        throw std::invalid_argument("--split must be in (0, 1]");

    SplitData policy = shuffle_split(
        learning::load_dataset_csv(data_dir + "/policy.csv", learning::kBinaryClassNames),
        split, seed);
    SplitData chunk = shuffle_split(
        learning::load_dataset_csv(data_dir + "/chunk.csv", learning::kChunkClassNames),
        split, seed);
    SplitData prefetch = shuffle_split(
        learning::load_dataset_csv(data_dir + "/prefetch.csv", learning::kPrefetchClassNames),
        split, seed);

    // One normalizer, fit on the union of the training splits, shared by all
    // three models (the bundle stores a single normalizer block).
    std::vector<learning::Sample> pool = policy.train.samples;
    pool.insert(pool.end(), chunk.train.samples.begin(), chunk.train.samples.end());
    pool.insert(pool.end(), prefetch.train.samples.begin(), prefetch.train.samples.end());
    learning::Normalizer norm = learning::fit_normalizer(pool);

    learning::TrainConfig cfg;
    learning::BinaryFit policy_fit = learning::train_binary_irls(policy.train, cfg, &norm);
    learning::MultinomialFit chunk_fit =
        learning::train_multinomial_newton(chunk.train, cfg, &norm);
    learning::MultinomialFit prefetch_fit =
        learning::train_multinomial_newton(prefetch.train, cfg, &norm);

    auto report = [&](const char* name, const learning::FitInfo& info, double train_acc,
                      const learning::Dataset& held, double held_acc) {
        if (!info.converged)
            std::fprintf(stderr, "warning: %s model did not converge in %d iterations\n",
                         name, info.iterations);
        if (held.samples.empty())
            std::printf("%s model: train accuracy %.4f, no held-out\n", name, train_acc);
        else
            std::printf("%s model: train accuracy %.4f, held-out accuracy %.4f (%zu rows)\n",
                        name, train_acc, held_acc, held.samples.size());
    };
    report("policy", policy_fit.info, binary_accuracy(policy_fit.model, policy.train),
           policy.held,
           policy.held.samples.empty() ? 0.0 : binary_accuracy(policy_fit.model, policy.held));
    report("chunk", chunk_fit.info, multinomial_accuracy(chunk_fit.model, chunk.train),
           chunk.held,
           chunk.held.samples.empty() ? 0.0
                                      : multinomial_accuracy(chunk_fit.model, chunk.held));
    report("prefetch", prefetch_fit.info,
           multinomial_accuracy(prefetch_fit.model, prefetch.train), prefetch.held,
           prefetch.held.samples.empty()
               ? 0.0
               : multinomial_accuracy(prefetch_fit.model, prefetch.held));

    learning::WeightsBundle bundle;
    bundle.policy_model = policy_fit.model;
    bundle.chunk_model = chunk_fit.model;
    bundle.prefetch_model = prefetch_fit.model;
    learning::save_weights(bundle, out_path);
    std::printf("wrote weights to %s\n", out_path.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// predict

int cmd_predict(const std::string& weights_path, const std::string& spec_path,
                unsigned threads, std::uint64_t iterations, bool as_json) {
    learning::WeightsBundle bundle = learning::load_weights(weights_path);
    loop_ir::LoopAst ast = loop_ir::parse_loop_spec(read_file(spec_path));
    loop_ir::StaticFeatures s = loop_ir::analyze_statement(ast);
    loop_ir::FeatureVector x = loop_ir::make_feature_vector(s, {threads, iterations});

    learning::BinaryPrediction policy = learning::predict_binary(bundle.policy_model, x);
    const char* policy_name = policy.label == 1 ? "par" : "seq";
    learning::ClassPrediction chunk = learning::predict_class(bundle.chunk_model, x);
    std::int64_t chunk_size = exec::chunk_size_determination(bundle.chunk_model, x);
    learning::ClassPrediction prefetch = learning::predict_class(bundle.prefetch_model, x);
    int distance = exec::prefetching_distance_determination(bundle.prefetch_model, x);

    if (as_json) {
        auto probs_of = [](const learning::ClassPrediction& p,
                           const std::vector<std::string>& names) {
            json out = json::object();
            for (std::size_t i = 0; i < names.size(); ++i)
                out[names[i]] = p.probs(static_cast<Eigen::Index>(i));
            return out;
        };
        json out = {
            {"spec", spec_path},
            {"feature_vector", x},
            {"policy", {{"choice", policy_name}, {"p_par", policy.p}}},
            {"chunk",
             {{"class", learning::kChunkClassNames[static_cast<std::size_t>(chunk.label)]},
              {"size", chunk_size},
              {"probs", probs_of(chunk, learning::kChunkClassNames)}}},
            {"prefetch",
             {{"distance", distance},
              {"probs", probs_of(prefetch, learning::kPrefetchClassNames)}}},
        };
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    std::printf("feature vector: %s\n", render_vector(x).c_str());
    std::printf("policy: %s (p_par=%.6f)\n", policy_name, policy.p);
    std::printf("chunk: class %s -> %lld iterations (probs",
                learning::kChunkClassNames[static_cast<std::size_t>(chunk.label)].c_str(),
                (long long)chunk_size);
    for (Eigen::Index i = 0; i < chunk.probs.size(); ++i)
        std::printf(" %s=%.4f", learning::kChunkClassNames[static_cast<std::size_t>(i)].c_str(),
                    chunk.probs(i));
    std::printf(")\n");
    std::printf("prefetch: %d cache lines (probs", distance);
    for (Eigen::Index i = 0; i < prefetch.probs.size(); ++i)
        std::printf(" %s=%.4f",
                    learning::kPrefetchClassNames[static_cast<std::size_t>(i)].c_str(),
                    prefetch.probs(i));
    std::printf(")\n");
    return 0;
}

// ---------------------------------------------------------------------------
// bench

int cmd_bench(const std::vector<std::string>& kernels, const std::string& weights_path,
              unsigned threads, int reps, std::uint64_t seed,
              const std::string& fake_clock_path, const std::string& dimension,
              const std::string& out_path, bool quick) {
    for (const std::string& k : kernels) {
        if (std::find(bench::kernel_names().begin(), bench::kernel_names().end(), k) ==
            bench::kernel_names().end()) {
            std::string known;
            for (const std::string& n : bench::kernel_names()) known += " " + n;
            throw std::invalid_argument("unknown kernel '" + k + "'; known kernels:" + known);
        }
    }
    learning::WeightsBundle bundle = learning::load_weights(weights_path);

    bench::SteadyClock steady;
    bench::FakeClock fake;
    bench::MeasurementClock* clock = &steady;
    if (!fake_clock_path.empty()) {
        fake = bench::FakeClock::from_file(fake_clock_path);
        clock = &fake;
    }

    bench::EvalReport report =
        bench::evaluate(bundle, kernels, threads, dimension, *clock, reps, seed, quick);
    std::cout << bench::render_report_table(report);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
        out << bench::render_report_csv(report);
        std::printf("\nwrote report CSV to %s\n", out_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"smart loop executors: analyze, train, predict, benchmark"};
    app.require_subcommand(1);

    // analyze
    std::string spec_path;
    unsigned threads = 1;
    std::uint64_t iterations = 1;
    bool as_json = false;
    auto* analyze = app.add_subcommand("analyze", "extract loop features from a spec");
    analyze->add_option("spec", spec_path, "loop spec file")->required();
    analyze->add_option("--threads", threads, "worker thread count");
    analyze->add_option("--iterations", iterations, "loop iteration count");
    analyze->add_flag("--json", as_json, "machine-readable output");

    // gen-data
    std::string out_dir = "data";
    std::string kernels_arg;
    std::string threads_arg;
    int reps = 5;
    std::uint64_t seed = 42;
    std::string fake_clock_path;
    bool quick = false;
    auto* gen = app.add_subcommand("gen-data", "run the training sweep and write CSVs");
    gen->add_option("--out", out_dir, "output directory")->required();
    gen->add_option("--kernels", kernels_arg, "comma-separated kernel list (default: all)");
    gen->add_option("--threads-grid", threads_arg, "comma-separated thread counts");
    gen->add_option("--reps", reps, "timed repetitions per configuration");
    gen->add_option("--seed", seed, "seed for data initialization");
    gen->add_option("--fake-clock", fake_clock_path, "deterministic clock table");
    gen->add_flag("--quick", quick, "tiny size grid for smoke testing");

    // train
    std::string data_dir;
    std::string weights_out = "weights.dat";
    double split = 0.8;
    auto* train = app.add_subcommand("train", "fit the three models from dataset CSVs");
    train->add_option("--data", data_dir, "directory with policy/chunk/prefetch CSVs")
        ->required();
    train->add_option("--out", weights_out, "weights bundle output path");
    train->add_option("--split", split, "training fraction (remainder is held out)");
    train->add_option("--seed", seed, "shuffle seed");

    // predict
    std::string weights_path;
    auto* predict = app.add_subcommand("predict", "predict loop parameters for a spec");
    predict->add_option("spec", spec_path, "loop spec file")->required();
    predict->add_option("--weights", weights_path, "weights bundle")->required();
    predict->add_option("--threads", threads, "worker thread count");
    predict->add_option("--iterations", iterations, "loop iteration count");
    predict->add_flag("--json", as_json, "machine-readable output");

    // bench
    std::vector<std::string> bench_kernels;
    std::string dimension = "all";
    std::string report_out;
    auto* bench_cmd = app.add_subcommand("bench", "compare adaptive vs fixed settings");
    bench_cmd->add_option("kernels", bench_kernels, "kernel names")->required();
    bench_cmd->add_option("--weights", weights_path, "weights bundle")->required();
    bench_cmd->add_option("--threads", threads, "worker thread count");
    bench_cmd->add_option("--reps", reps, "timed repetitions per configuration");
    bench_cmd->add_option("--seed", seed, "seed for data initialization");
    bench_cmd->add_option("--fake-clock", fake_clock_path, "deterministic clock table");
    bench_cmd->add_option("--dimension", dimension, "policy, chunk, prefetch or all");
    bench_cmd->add_option("--out", report_out, "write the report CSV here");
    bench_cmd->add_flag("--quick", quick, "small kernel instances for smoke testing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*analyze) return cmd_analyze(spec_path, threads, iterations, as_json);
        if (*gen)
            return cmd_gen_data(out_dir, kernels_arg, threads_arg, reps, seed,
                                fake_clock_path, quick);
        if (*train) return cmd_train(data_dir, weights_out, split, seed);
        if (*predict)
            return cmd_predict(weights_path, spec_path, threads, iterations, as_json);
        if (*bench_cmd)
            return cmd_bench(bench_kernels, weights_path, threads, reps, seed,
                             fake_clock_path, dimension, report_out, quick);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return 1;
}
