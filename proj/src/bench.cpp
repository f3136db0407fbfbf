#include "smartexec/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace smartexec::bench {

std::uint64_t fnv1a(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t checksum_doubles(const std::vector<double>& values) {
    return fnv1a(values.data(), values.size() * sizeof(double));
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty sample");
    std::sort(values.begin(), values.end());
    std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

// ---------------------------------------------------------------------------
// clocks

double SteadyClock::measure(const std::string&, const std::function<void()>& setup,
                            const std::function<void()>& run, int reps) {
    if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    setup();
    run();  // warmup, discarded
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        setup();
        auto t0 = std::chrono::steady_clock::now();
        run();
        auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    return median(std::move(times));
}

FakeClock FakeClock::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fake-clock table '" + path + "'");
    FakeClock clock;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        double seconds;
        if (!(ls >> key)) continue;
        if (!(ls >> seconds) || seconds <= 0.0)
            throw std::runtime_error("fake-clock table '" + path + "' line " +
                                     std::to_string(line_no) + ": expected '<key> <seconds>'");
        clock.set(key, seconds);
    }
    return clock;
}

double FakeClock::lookup(const std::string& key) const {
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
    // Deterministic pseudo-time for keys the table does not pin.
    std::uint64_t h = fnv1a(key.data(), key.size());
    return 1e-4 * (1.0 + static_cast<double>(h % 9001));
}

double FakeClock::measure(const std::string& key, const std::function<void()>& setup,
                          const std::function<void()>& run, int) {
    setup();
    run();  // once, so output checksums stay real
    return lookup(key);
}

// ---------------------------------------------------------------------------
// kernels

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

void fill_random(std::vector<double>& v, std::uint64_t seed) {
    std::uint64_t state = seed;
    for (double& x : v) x = uniform01(state);
}

}  // namespace

const loop_ir::StaticFeatures& Kernel::static_features() const {
    if (!features_cached_) {
        features_ = loop_ir::analyze_statement(loop_ir::parse_loop_spec(loop_spec_text()));
        features_cached_ = true;
    }
    return features_;
}

exec::LoopContext Kernel::make_context(unsigned threads, exec::PrefetchSink* sink) const {
    exec::LoopContext ctx;
    ctx.static_features = static_features();
    ctx.range_len = range_len();
    ctx.threads = threads;
    ctx.containers = containers();
    ctx.sink = sink;
    return ctx;
}

// ----- stream

StreamKernel::StreamKernel(std::int64_t n, double k) : scale(k), n_(n) {
    if (n < 1) throw std::invalid_argument("stream needs n >= 1");
    a.resize(static_cast<std::size_t>(n));
    b.resize(static_cast<std::size_t>(n));
    c.resize(static_cast<std::size_t>(n));
}

std::string StreamKernel::size_key() const { return "n" + std::to_string(n_); }

std::string StreamKernel::loop_spec_text() const { return stream_loop_spec(); }

void StreamKernel::prepare(std::uint64_t seed) {
    fill_random(a, seed ^ 0x73747265616dULL);
    std::fill(b.begin(), b.end(), 0.0);
    std::fill(c.begin(), c.end(), 0.0);
}

void StreamKernel::run(const exec::ExecutionPolicy& policy, const exec::ChunkParameter& chunk,
                       unsigned threads, exec::PrefetchSink* sink) {
    exec::LoopContext ctx = make_context(threads, sink);
    double* pa = a.data();
    double* pb = b.data();
    double* pc = c.data();
    const double k = scale;
    exec::for_each_range(
        policy, chunk, n_,
        [=](std::int64_t i) {
            pc[i] = pa[i];
            pb[i] = k * pc[i];
            pc[i] = pa[i] + pb[i];
            pa[i] = pb[i] + k * pc[i];
        },
        ctx);
}

std::uint64_t StreamKernel::checksum() const {
    std::uint64_t h = checksum_doubles(a);
    h ^= checksum_doubles(b) * 0x9E3779B97F4A7C15ULL;
    h ^= checksum_doubles(c) * 0xC2B2AE3D27D4EB4FULL;
    return h;
}

std::vector<exec::ContainerRef> StreamKernel::containers() const {
    return {exec::container_ref(a), exec::container_ref(b), exec::container_ref(c)};
}

// ----- stencil

StencilKernel::StencilKernel(std::int64_t width, std::int64_t height, int sweeps)
    : width_(width), height_(height), sweeps_(sweeps) {
    if (width < 3 || height < 3) throw std::invalid_argument("stencil needs at least 3x3");
    if (sweeps < 1) throw std::invalid_argument("stencil needs at least 1 sweep");
    cur_.resize(static_cast<std::size_t>(width * height));
    next_.resize(static_cast<std::size_t>(width * height));
}

std::string StencilKernel::size_key() const {
    return "w" + std::to_string(width_) + "h" + std::to_string(height_) + "s" +
           std::to_string(sweeps_);
}

std::string StencilKernel::loop_spec_text() const { return stencil_loop_spec(width_ - 2); }

void StencilKernel::prepare(std::uint64_t seed) {
    fill_random(cur_, seed ^ 0x7374656e63696cULL);
    next_ = cur_;
}

void StencilKernel::run(const exec::ExecutionPolicy& policy, const exec::ChunkParameter& chunk,
                        unsigned threads, exec::PrefetchSink* sink) {
    const std::int64_t w = width_;
    const std::int64_t rows = height_ - 2;
    for (int s = 0; s < sweeps_; ++s) {
        exec::LoopContext ctx = make_context(threads, sink);
        const double* src = cur_.data();
        double* dst = next_.data();
        exec::for_each_range(
            policy, chunk, rows,
            [=](std::int64_t r) {
                const std::int64_t y = r + 1;
                for (std::int64_t x = 1; x < w - 1; ++x) {
                    dst[y * w + x] = (src[y * w + x] + src[y * w + x - 1] + src[y * w + x + 1] +
                                      src[(y - 1) * w + x] + src[(y + 1) * w + x]) /
                                     5.0;
                }
            },
            ctx);
        std::swap(cur_, next_);
    }
}

std::uint64_t StencilKernel::checksum() const { return checksum_doubles(cur_); }

std::vector<exec::ContainerRef> StencilKernel::containers() const {
    return {exec::container_ref(cur_), exec::container_ref(next_)};
}

// ----- matmul

MatmulKernel::MatmulKernel(std::int64_t m, std::int64_t k, std::int64_t p)
    : m_(m), k_(k), p_(p) {
    if (m < 1 || k < 1 || p < 1) throw std::invalid_argument("matmul needs positive sizes");
    a.resize(static_cast<std::size_t>(m * k));
    b.resize(static_cast<std::size_t>(k * p));
    c.resize(static_cast<std::size_t>(m * p));
}

std::string MatmulKernel::size_key() const {
    return "m" + std::to_string(m_) + "k" + std::to_string(k_) + "p" + std::to_string(p_);
}

std::string MatmulKernel::loop_spec_text() const { return matmul_loop_spec(k_, p_); }

void MatmulKernel::prepare(std::uint64_t seed) {
    fill_random(a, seed ^ 0x6d61746d756c41ULL);
    fill_random(b, seed ^ 0x6d61746d756c42ULL);
    std::fill(c.begin(), c.end(), 0.0);
}

void MatmulKernel::run(const exec::ExecutionPolicy& policy, const exec::ChunkParameter& chunk,
                       unsigned threads, exec::PrefetchSink* sink) {
    exec::LoopContext ctx = make_context(threads, sink);
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    const std::int64_t k = k_;
    const std::int64_t p = p_;
    exec::for_each_range(
        policy, chunk, m_,
        [=](std::int64_t i) {
            for (std::int64_t j = 0; j < p; ++j) {
                double acc = 0.0;
                for (std::int64_t l = 0; l < k; ++l) acc += pa[i * k + l] * pb[l * p + j];
                pc[i * p + j] = acc;
            }
        },
        ctx);
}

std::uint64_t MatmulKernel::checksum() const { return checksum_doubles(c); }

std::vector<exec::ContainerRef> MatmulKernel::containers() const {
    return {exec::container_ref(a), exec::container_ref(b), exec::container_ref(c)};
}

// ----- loop spec texts

std::string stream_loop_spec() {
    return
        "# Four steps per index over three equally sized arrays: copy,\n"
        "# scale, add, triad.\n"
        "loop N {\n"
        "    fvar k;\n"
        "    fassign c = a[i];\n"
        "    fassign b = k * c[i];\n"
        "    fassign c = a[i] + b[i];\n"
        "    fassign a = b[i] + k * c[i];\n"
        "}\n";
}

std::string stencil_loop_spec(std::int64_t interior_cols) {
    std::ostringstream out;
    out << "# One interior row of a smoothed five-point sweep; columns are\n"
           "# index-clamped and the result is blended over three passes.\n"
           "loop N {\n"
           "    fvar up; fvar down; fvar left; fvar right; fvar mid;\n"
           "    fvar w0; fvar w1; fvar bias0;\n"
           "    iassign base = r;\n"
           "    if (r == 0) { call fix_boundary; }\n"
           "    loop "
        << interior_cols
        << " {\n"
           "        iassign idx = base + i;\n"
           "        iassign col = idx * stride;\n"
           "        iassign rem = col - base;\n"
           "        iassign t = rem;\n"
           "        if (i < lo) { call clamp_low; }\n"
           "        if (i > hi) { call clamp_high; }\n"
           "        if (steps == 0) { call init_row; }\n"
           "        fassign sum = up[i] + left[i] + mid[i] + right[i] + down[i];\n"
           "        fassign avg = sum / 5.0;\n"
           "        fassign sm1 = w0 * avg + w1 * mid[i] + bias0;\n"
           "        fassign sm2 = w0 * sm1 + w1 * avg + bias0;\n"
           "        fassign sm3 = w0 * sm2 + w1 * sm1 + bias0;\n"
           "        fassign outv = sm3 + avg * bias0;\n"
           "    }\n"
           "}\n";
    return out.str();
}

std::string matmul_loop_spec(std::int64_t k, std::int64_t p) {
    std::ostringstream out;
    out << "# One row of the product: a dot product over the shared extent\n"
           "# for each output column.\n"
           "loop N {\n"
           "    fvar a; fvar b;\n"
           "    loop "
        << p
        << " {\n"
           "        fassign acc = 0.0;\n"
           "        loop "
        << k
        << " {\n"
           "            fassign acc = acc + a[l] * b[l];\n"
           "        }\n"
           "        fassign c = acc;\n"
           "    }\n"
           "}\n";
    return out.str();
}

const std::vector<std::string>& kernel_names() {
    static const std::vector<std::string> names = {"stream", "stencil", "matmul"};
    return names;
}

std::vector<std::unique_ptr<Kernel>> make_kernel_instances(const std::string& name,
                                                           bool quick) {
    std::vector<std::unique_ptr<Kernel>> out;
    if (name == "stream") {
        std::vector<std::int64_t> sizes =
            quick ? std::vector<std::int64_t>{1000}
                  : std::vector<std::int64_t>{10000, 30000, 100000, 300000, 1000000, 3000000};
        for (std::int64_t n : sizes) out.push_back(std::make_unique<StreamKernel>(n));
    } else if (name == "stencil") {
        if (quick) {
            out.push_back(std::make_unique<StencilKernel>(10, 10, 2));
        } else {
            for (std::int64_t s : {16, 24, 32, 48, 64, 96, 128, 192, 256})
                out.push_back(std::make_unique<StencilKernel>(s, s, 4));
        }
    } else if (name == "matmul") {
        if (quick) {
            out.push_back(std::make_unique<MatmulKernel>(6, 6, 6));
            out.push_back(std::make_unique<MatmulKernel>(8, 6, 6));
        } else {
            for (std::int64_t m : {8, 16, 32, 48, 64, 96, 128, 192})
                for (std::int64_t k : {8, 32, 128})
                    for (std::int64_t p : {8, 32, 128})
                        out.push_back(std::make_unique<MatmulKernel>(m, k, p));
        }
    } else {
        throw std::invalid_argument("unknown kernel '" + name + "'");
    }
    return out;
}

std::unique_ptr<Kernel> make_eval_kernel(const std::string& name, bool quick) {
    if (name == "stream")
        return std::make_unique<StreamKernel>(quick ? 10000 : 1000000);
    if (name == "stencil")
        return quick ? std::make_unique<StencilKernel>(18, 18, 2)
                     : std::make_unique<StencilKernel>(102, 47, 10);
    if (name == "matmul")
        return quick ? std::make_unique<MatmulKernel>(16, 16, 16)
                     : std::make_unique<MatmulKernel>(128, 128, 128);
    throw std::invalid_argument("unknown kernel '" + name + "'");
}

std::string measurement_key(const std::string& kernel, const std::string& size_key,
                            unsigned threads, const std::string& policy,
                            const std::string& chunk, const std::string& prefetch) {
    return kernel + "|" + size_key + "|t" + std::to_string(threads) + "|" + policy +
           "|chunk:" + chunk + "|pf:" + prefetch;
}

std::int64_t chunk_size_for_fraction(double fraction, std::int64_t n) {
    if (n < 1) return 1;
    return std::clamp<std::int64_t>(std::llround(fraction * static_cast<double>(n)), 1, n);
}

// ---------------------------------------------------------------------------
// shared measurement plumbing

namespace {

struct ConfigRun {
    std::string policy_name;  // "seq" or "par"
    std::string chunk_name;   // "default" or a chunk fraction class
    std::string pf_name;      // "off" or a distance class
    exec::ExecutionPolicy policy;
    exec::ChunkParameter chunk;
};

double measure_config(Kernel& kernel, const ConfigRun& cfg, unsigned threads,
                      MeasurementClock& clock, int reps, std::uint64_t seed,
                      std::uint64_t* expected_checksum) {
    std::string key = measurement_key(kernel.name(), kernel.size_key(), threads,
                                      cfg.policy_name, cfg.chunk_name, cfg.pf_name);
    double t = clock.measure(
        key, [&] { kernel.prepare(seed); },
        [&] { kernel.run(cfg.policy, cfg.chunk, threads, nullptr); }, reps);
    std::uint64_t sum = kernel.checksum();
    if (*expected_checksum == 0) {
        *expected_checksum = sum;
    } else if (sum != *expected_checksum) {
        throw std::runtime_error("checksum mismatch for " + key);
    }
    return t;
}

void validate_reps(const MeasurementClock& clock, int reps) {
    if (clock.is_fake()) {
        if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    } else if (reps < 5) {
        throw std::invalid_argument("timed measurements need reps >= 5");
    }
}

std::vector<ConfigRun> policy_candidates(unsigned threads) {
    return {{"seq", "default", "off", exec::SeqPolicy{}, exec::DefaultChunk{}},
            {"par", "default", "off", exec::ParPolicy{threads}, exec::DefaultChunk{}}};
}

std::vector<ConfigRun> chunk_candidates(unsigned threads, std::int64_t n) {
    std::vector<ConfigRun> out;
    for (std::size_t i = 0; i < learning::kChunkFractions.size(); ++i) {
        out.push_back({"par", learning::kChunkClassNames[i], "off",
                       exec::ParPolicy{threads},
                       exec::StaticChunk{chunk_size_for_fraction(learning::kChunkFractions[i], n)}});
    }
    return out;
}

std::vector<ConfigRun> prefetch_candidates(unsigned threads, std::size_t element_bytes) {
    std::vector<ConfigRun> out;
    for (std::size_t i = 0; i < learning::kPrefetchDistances.size(); ++i) {
        out.push_back({"par", "default", learning::kPrefetchClassNames[i],
                       exec::PrefetcherPolicy{exec::ParPolicy{threads},
                                              exec::FixedLines{learning::kPrefetchDistances[i]},
                                              element_bytes},
                       exec::DefaultChunk{}});
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// training-data generation

GenDataSummary generate_training_data(const SweepGrid& grid, MeasurementClock& clock,
                                      const std::string& out_dir, std::uint64_t seed) {
    if (grid.kernels.empty()) throw std::invalid_argument("no kernels selected");
    for (const std::string& name : grid.kernels)
        if (std::find(kernel_names().begin(), kernel_names().end(), name) ==
            kernel_names().end())
            throw std::invalid_argument("unknown kernel '" + name + "'");
    if (grid.threads.empty()) throw std::invalid_argument("no thread counts selected");
    validate_reps(clock, grid.reps);

    GenDataSummary summary;
    summary.files = {out_dir + "/policy.csv", out_dir + "/chunk.csv",
                     out_dir + "/prefetch.csv"};
    for (const std::string& f : summary.files) learning::write_dataset_csv_header(f);

    std::array<std::set<std::string>, 3> seen_labels;
    const std::array<const std::vector<std::string>*, 3> class_lists = {
        &learning::kBinaryClassNames, &learning::kChunkClassNames,
        &learning::kPrefetchClassNames};

    for (const std::string& name : grid.kernels) {
        for (const auto& kernel : make_kernel_instances(name, grid.quick)) {
            for (unsigned threads : grid.threads) {
                const std::int64_t n = kernel->range_len();
                loop_ir::FeatureVector x = loop_ir::make_feature_vector(
                    kernel->static_features(), {threads, static_cast<std::uint64_t>(n)});
                std::uint64_t expected = 0;

                auto best_label = [&](const std::vector<ConfigRun>& configs,
                                      const std::vector<std::string>& classes) {
                    double best_time = 0.0;
                    std::size_t best = 0;
                    for (std::size_t i = 0; i < configs.size(); ++i) {
                        double t = measure_config(*kernel, configs[i], threads, clock,
                                                  grid.reps, seed, &expected);
                        if (i == 0 || t < best_time) {
                            best_time = t;
                            best = i;
                        }
                    }
                    // Candidate order matches the class list for the dimension.
                    return classes.at(best);
                };

                std::array<std::string, 3> labels = {
                    best_label(policy_candidates(threads), learning::kBinaryClassNames),
                    best_label(chunk_candidates(threads, n), learning::kChunkClassNames),
                    best_label(prefetch_candidates(threads, kernel->element_bytes()),
                               learning::kPrefetchClassNames)};

                for (std::size_t d = 0; d < 3; ++d) {
                    learning::Sample sample;
                    sample.x = x;
                    auto it = std::find(class_lists[d]->begin(), class_lists[d]->end(),
                                        labels[d]);
                    sample.label = static_cast<int>(it - class_lists[d]->begin());
                    learning::append_dataset_csv(summary.files[d], sample, *class_lists[d]);
                    seen_labels[d].insert(labels[d]);
                }
                ++summary.cells;
            }
        }
    }
    for (std::size_t d = 0; d < 3; ++d) summary.distinct_labels[d] = seen_labels[d].size();
    return summary;
}

// ---------------------------------------------------------------------------
// evaluation

EvalReport evaluate(const learning::WeightsBundle& bundle,
                    const std::vector<std::string>& kernels, unsigned threads,
                    const std::string& dimension, MeasurementClock& clock, int reps,
                    std::uint64_t seed, bool quick) {
    if (kernels.empty()) throw std::invalid_argument("no kernels selected");
    if (dimension != "all" && dimension != "policy" && dimension != "chunk" &&
        dimension != "prefetch")
        throw std::invalid_argument("dimension must be policy, chunk, prefetch or all");
    if (bundle.chunk_model.class_names != learning::kChunkClassNames ||
        bundle.prefetch_model.class_names != learning::kPrefetchClassNames)
        throw std::invalid_argument("weights bundle is missing expected model classes");
    validate_reps(clock, reps);

    EvalReport report;
    for (const std::string& name : kernels) {
        auto kernel = make_eval_kernel(name, quick);
        const std::int64_t n = kernel->range_len();
        loop_ir::FeatureVector x = loop_ir::make_feature_vector(
            kernel->static_features(), {threads, static_cast<std::uint64_t>(n)});
        std::uint64_t expected = 0;

        auto run_dimension = [&](const std::string& dim,
                                 const std::vector<ConfigRun>& candidates,
                                 const ConfigRun& adaptive_cfg,
                                 const std::string& prediction) {
            for (const ConfigRun& cfg : candidates) {
                std::string label = dim == "policy"   ? cfg.policy_name
                                    : dim == "chunk"  ? cfg.chunk_name
                                                      : cfg.pf_name;
                report.entries.push_back(
                    {name, dim,
                     label,
                     measure_config(*kernel, cfg, threads, clock, reps, seed, &expected),
                     false});
            }
            report.entries.push_back(
                {name, dim, "adaptive",
                 measure_config(*kernel, adaptive_cfg, threads, clock, reps, seed, &expected),
                 true});
            report.predictions.push_back(name + " " + dim + " -> " + prediction);
        };

        if (dimension == "all" || dimension == "policy") {
            exec::PolicyChoice choice = exec::seq_par(bundle.policy_model, x);
            std::string resolved =
                choice == exec::PolicyChoice::Parallel ? "par" : "seq";
            ConfigRun adaptive{resolved, "default", "off",
                               exec::par_if(bundle.policy_model), exec::DefaultChunk{}};
            run_dimension("policy", policy_candidates(threads), adaptive, resolved);
        }
        if (dimension == "all" || dimension == "chunk") {
            learning::ClassPrediction pred = learning::predict_class(bundle.chunk_model, x);
            std::string cls = learning::kChunkClassNames[static_cast<std::size_t>(pred.label)];
            std::int64_t size = exec::chunk_size_determination(bundle.chunk_model, x);
            ConfigRun adaptive{"par", cls, "off", exec::ParPolicy{threads},
                               exec::adaptive_chunk_size(bundle.chunk_model)};
            run_dimension("chunk", chunk_candidates(threads, n), adaptive,
                          cls + " (chunk size " + std::to_string(size) + ")");
        }
        if (dimension == "all" || dimension == "prefetch") {
            int dist = exec::prefetching_distance_determination(bundle.prefetch_model, x);
            ConfigRun adaptive{"par", "default", std::to_string(dist),
                               exec::PrefetcherPolicy{
                                   exec::ParPolicy{threads},
                                   exec::adaptive_prefetch_distance(bundle.prefetch_model),
                                   kernel->element_bytes()},
                               exec::DefaultChunk{}};
            run_dimension("prefetch", prefetch_candidates(threads, kernel->element_bytes()),
                          adaptive, std::to_string(dist) + " cache lines");
        }
    }
    return report;
}

namespace {

std::string format_seconds(double s) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", s);
    return buf;
}

double adaptive_median(const EvalReport& report, const std::string& kernel,
                       const std::string& dimension) {
    for (const EvalEntry& e : report.entries)
        if (e.adaptive && e.kernel == kernel && e.dimension == dimension) return e.median_s;
    throw std::logic_error("report has no adaptive entry for " + kernel + "/" + dimension);
}

}  // namespace

std::string render_report_table(const EvalReport& report) {
    std::ostringstream out;
    out << "predicted settings:\n";
    for (const std::string& p : report.predictions) out << "  " << p << "\n";
    out << "\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %-10s %-10s %14s %14s\n", "kernel", "dimension",
                  "config", "median_s", "vs_adaptive");
    out << line;
    for (const EvalEntry& e : report.entries) {
        double ratio = e.median_s / adaptive_median(report, e.kernel, e.dimension);
        std::snprintf(line, sizeof(line), "%-10s %-10s %-10s %14.6g %14.3f\n",
                      e.kernel.c_str(), e.dimension.c_str(), e.config.c_str(), e.median_s,
                      ratio);
        out << line;
    }
    return out.str();
}

std::string render_report_csv(const EvalReport& report) {
    std::string out = "kernel,dimension,config,median_s,speedup_vs_adaptive\n";
    for (const EvalEntry& e : report.entries) {
        double ratio = e.median_s / adaptive_median(report, e.kernel, e.dimension);
        out += e.kernel + "," + e.dimension + "," + e.config + "," +
               format_seconds(e.median_s) + "," + format_seconds(ratio) + "\n";
    }
    return out;
}

}  // namespace smartexec::bench
