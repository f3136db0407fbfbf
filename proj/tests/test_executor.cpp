#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "smartexec/executor.hpp"

using namespace smartexec;
using namespace smartexec::exec;
using smartexec::loop_ir::FeatureVector;

namespace {

learning::BinaryModel bias_only_binary(double bias_weight) {
    learning::BinaryModel model;
    for (auto& t : model.normalizer.transforms) t = {false, 0.0, 1.0};
    model.w(0) = bias_weight;
    return model;
}

learning::MultinomialModel forced_class_model(const std::vector<std::string>& classes,
                                              int winner) {
    learning::MultinomialModel model;
    model.class_names = classes;
    for (auto& t : model.normalizer.transforms) t = {false, 0.0, 1.0};
    model.weights = learning::Matrix::Zero(static_cast<Eigen::Index>(classes.size()),
                                           loop_ir::kFeatureCount);
    if (winner < 0) return model;  // uniform
    if (winner + 1 < static_cast<int>(classes.size()))
        model.weights(winner, 0) = 25.0;
    else
        for (Eigen::Index r = 0; r + 1 < model.weights.rows(); ++r)
            model.weights(r, 0) = -25.0;
    return model;
}

FeatureVector features_with_iterations(double n) {
    return FeatureVector{1, 4, n, 10, 5, 1, 1};
}

LoopContext plain_context(std::int64_t n, unsigned threads) {
    LoopContext ctx;
    ctx.range_len = n;
    ctx.threads = threads;
    return ctx;
}

struct RecordingSink final : PrefetchSink {
    std::mutex m;
    std::vector<std::pair<const void*, std::int64_t>> hints;
    void touch(const ContainerRef& c, std::int64_t index) override {
        std::lock_guard lock(m);
        hints.emplace_back(c.data, index);
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// chunk planning

TEST_CASE("plan_chunks splits ranges into uniform intervals") {
    CHECK(plan_chunks(10, 3) ==
          ChunkPlan{{0, 3}, {3, 6}, {6, 9}, {9, 10}});
    CHECK(plan_chunks(10, 10) == ChunkPlan{{0, 10}});
    CHECK(plan_chunks(0, 5).empty());
    CHECK(plan_chunks(1, 100) == ChunkPlan{{0, 1}});
}

TEST_CASE("plan_chunks invariants over random inputs") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        std::int64_t n = static_cast<std::int64_t>(rng() % 5000);
        std::int64_t chunk = 1 + static_cast<std::int64_t>(rng() % 600);
        ChunkPlan plan = plan_chunks(n, chunk);
        std::int64_t covered = 0;
        for (std::size_t i = 0; i < plan.size(); ++i) {
            CHECK(plan[i].lo == covered);
            CHECK(plan[i].size() >= 1);
            CHECK(plan[i].size() <= chunk);
            if (i + 1 < plan.size()) CHECK(plan[i].size() == chunk);
            covered = plan[i].hi;
        }
        CHECK(covered == n);
    }
}

// ---------------------------------------------------------------------------
// thread pool

TEST_CASE("pool_execute with one thread runs the plan in order") {
    ChunkPlan plan = plan_chunks(20, 3);
    std::vector<IndexInterval> seen;
    pool_execute(plan, 1, [&](IndexInterval iv) { seen.push_back(iv); });
    CHECK(seen == plan);
}

TEST_CASE("pool_execute runs every interval exactly once") {
    const int k = 16;
    ChunkPlan plan = plan_chunks(k, 1);
    std::atomic<int> done{0};
    pool_execute(plan, static_cast<unsigned>(k), [&](IndexInterval) { ++done; });
    CHECK(done.load() == k);
}

TEST_CASE("pool_execute sum reduction matches the sequential oracle") {
    const std::int64_t n = 100000;
    ChunkPlan plan = plan_chunks(n, 100);  // 1000 intervals
    CHECK(plan.size() == 1000);
    std::atomic<long long> sum{0};
    pool_execute(plan, 8, [&](IndexInterval iv) {
        long long local = 0;
        for (std::int64_t i = iv.lo; i < iv.hi; ++i) local += i;
        sum += local;
    });
    long long expected = 0;
    for (std::int64_t i = 0; i < n; ++i) expected += i;
    CHECK(sum.load() == expected);
}

TEST_CASE("pool propagates the first task exception after joining") {
    ChunkPlan plan = plan_chunks(100, 10);
    std::atomic<int> started{0};
    try {
        pool_execute(plan, 2, [&](IndexInterval iv) {
            ++started;
            if (iv.lo == 30) throw std::runtime_error("boom at 30");
        });
        FAIL("expected exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "boom at 30");
    }
    CHECK(started.load() >= 1);
}

TEST_CASE("concurrent run_plan calls on one pool interleave safely") {
    ThreadPool& pool = shared_pool(3);
    std::atomic<int> total{0};
    auto submit = [&] {
        pool.run_plan(plan_chunks(200, 7), [&](IndexInterval iv) {
            total += static_cast<int>(iv.size());
        });
    };
    std::thread a(submit), b(submit);
    a.join();
    b.join();
    CHECK(total.load() == 400);
}

// ---------------------------------------------------------------------------
// decision functions

TEST_CASE("seq_par maps class 1 to parallel and ties to sequential") {
    FeatureVector x = features_with_iterations(1000);
    CHECK(seq_par(bias_only_binary(0.0), x) == PolicyChoice::Sequential);  // p = 0.5 tie
    CHECK(seq_par(bias_only_binary(5.0), x) == PolicyChoice::Parallel);
    CHECK(seq_par(bias_only_binary(-5.0), x) == PolicyChoice::Sequential);
}

TEST_CASE("chunk_size_determination resolves fractions against the range") {
    auto model_001 = forced_class_model(learning::kChunkClassNames, 0);
    auto model_010 = forced_class_model(learning::kChunkClassNames, 2);
    auto model_050 = forced_class_model(learning::kChunkClassNames, 3);

    CHECK(chunk_size_determination(model_001, features_with_iterations(10000)) == 10);
    CHECK(chunk_size_determination(model_001, features_with_iterations(45)) == 1);  // clamp
    CHECK(chunk_size_determination(model_010, features_with_iterations(500)) == 50);
    CHECK(chunk_size_determination(model_050, features_with_iterations(45)) == 23);
    CHECK(chunk_size_determination(model_050, features_with_iterations(1)) == 1);
}

TEST_CASE("chunk size stays within [1, n] for every model output") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        int winner = static_cast<int>(rng() % 4);
        auto model = forced_class_model(learning::kChunkClassNames, winner);
        auto n = static_cast<std::int64_t>(1 + rng() % 1000000);
        std::int64_t size =
            chunk_size_determination(model, features_with_iterations(static_cast<double>(n)));
        CHECK(size >= 1);
        CHECK(size <= n);
    }
}

TEST_CASE("prefetching_distance_determination returns a candidate distance") {
    FeatureVector x = features_with_iterations(1000);
    auto uniform = forced_class_model(learning::kPrefetchClassNames, -1);
    CHECK(prefetching_distance_determination(uniform, x) == 1);  // tie breaks to class 0
    CHECK(prefetching_distance_determination(
              forced_class_model(learning::kPrefetchClassNames, 2), x) == 10);
    CHECK(prefetching_distance_determination(
              forced_class_model(learning::kPrefetchClassNames, 4), x) == 500);
}

TEST_CASE("make_prefetcher_policy validates element size") {
    CHECK_THROWS_AS(make_prefetcher_policy(SeqPolicy{}, FixedLines{1}, 0),
                    std::invalid_argument);
}

// ---------------------------------------------------------------------------
// dispatch resolution

TEST_CASE("default chunk is ceil(n / threads)") {
    LoopContext ctx = plain_context(10, 4);
    ResolvedDispatch d = resolve_dispatch(ParPolicy{4}, DefaultChunk{}, 10, ctx);
    CHECK(d.parallel);
    CHECK(d.threads == 4);
    CHECK(d.chunk_size == 3);

    ResolvedDispatch seq = resolve_dispatch(SeqPolicy{}, DefaultChunk{}, 10, ctx);
    CHECK(!seq.parallel);
    CHECK(seq.chunk_size == 10);
}

TEST_CASE("static chunks are clamped into [1, n]") {
    LoopContext ctx = plain_context(10, 2);
    CHECK(resolve_dispatch(SeqPolicy{}, StaticChunk{999}, 10, ctx).chunk_size == 10);
    CHECK(resolve_dispatch(SeqPolicy{}, StaticChunk{0}, 10, ctx).chunk_size == 1);
}

TEST_CASE("par_if resolution uses the context thread count") {
    LoopContext ctx = plain_context(100, 8);
    ParIfPolicy go_par{[](const FeatureVector&) { return PolicyChoice::Parallel; }};
    ParIfPolicy go_seq{[](const FeatureVector&) { return PolicyChoice::Sequential; }};
    CHECK(resolve_dispatch(go_par, DefaultChunk{}, 100, ctx).threads == 8);
    CHECK(resolve_dispatch(go_par, DefaultChunk{}, 100, ctx).parallel);
    CHECK(!resolve_dispatch(go_seq, DefaultChunk{}, 100, ctx).parallel);
}

TEST_CASE("prefetch distance converts lines to elements with a floor of one") {
    LoopContext ctx = plain_context(100, 2);
    auto resolved = [&](int lines, std::size_t element_bytes) {
        PrefetcherPolicy p{SeqPolicy{}, FixedLines{lines}, element_bytes};
        return resolve_dispatch(p, DefaultChunk{}, 100, ctx);
    };
    CHECK(resolved(1, 8).prefetch_elems == 8);     // 64 bytes / 8 bytes
    CHECK(resolved(5, 8).prefetch_elems == 40);
    CHECK(resolved(1, 64).prefetch_elems == 1);
    CHECK(resolved(1, 128).prefetch_elems == 1);   // floor guard
    CHECK(resolved(2, 8).prefetch_lines == 2);
}

// ---------------------------------------------------------------------------
// for_each_range

TEST_CASE("sequential execution visits indices in ascending order") {
    std::vector<std::int64_t> log;
    for_each_range(SeqPolicy{}, DefaultChunk{}, 5,
                   [&](std::int64_t i) { log.push_back(i); }, plain_context(5, 1));
    CHECK(log == std::vector<std::int64_t>{0, 1, 2, 3, 4});
}

TEST_CASE("parallel output equals the sequential result element-wise") {
    const std::int64_t n = 8;
    std::vector<std::int64_t> seq_out(n), par_out(n);
    for_each_range(SeqPolicy{}, DefaultChunk{}, n,
                   [&](std::int64_t i) { seq_out[static_cast<std::size_t>(i)] = i * i; },
                   plain_context(n, 1));
    for_each_range(ParPolicy{4}, StaticChunk{2}, n,
                   [&](std::int64_t i) { par_out[static_cast<std::size_t>(i)] = i * i; },
                   plain_context(n, 4));
    CHECK(par_out == seq_out);
}

TEST_CASE("par_if with an always-sequential model traces identically to seq") {
    std::vector<std::int64_t> seq_trace, parif_trace;
    for_each_range(SeqPolicy{}, StaticChunk{3}, 11,
                   [&](std::int64_t i) { seq_trace.push_back(i); }, plain_context(11, 4));
    ParIfPolicy policy{[](const FeatureVector&) { return PolicyChoice::Sequential; }};
    for_each_range(policy, StaticChunk{3}, 11,
                   [&](std::int64_t i) { parif_trace.push_back(i); }, plain_context(11, 4));
    CHECK(parif_trace == seq_trace);
}

TEST_CASE("par_if consults its model exactly once per dispatch") {
    std::atomic<int> evals{0};
    ParIfPolicy policy{[&](const FeatureVector&) {
        ++evals;
        return PolicyChoice::Parallel;
    }};
    for_each_range(policy, StaticChunk{1}, 64, [](std::int64_t) {}, plain_context(64, 4));
    CHECK(evals.load() == 1);
}

TEST_CASE("adaptive chunk consults its model exactly once per dispatch") {
    std::atomic<int> evals{0};
    AdaptiveChunk chunk{[&](const FeatureVector&) -> std::int64_t {
        ++evals;
        return 5;
    }};
    for_each_range(ParPolicy{2}, chunk, 64, [](std::int64_t) {}, plain_context(64, 2));
    CHECK(evals.load() == 1);

    evals = 0;
    PrefetcherPolicy pf{ParPolicy{2}, AdaptiveLines{[&](const FeatureVector&) {
                            ++evals;
                            return 5;
                        }},
                        8};
    for_each_range(pf, DefaultChunk{}, 64, [](std::int64_t) {}, plain_context(64, 2));
    CHECK(evals.load() == 1);
}

TEST_CASE("every policy/chunk combination executes each index exactly once") {
    learning::BinaryModel always_par = bias_only_binary(9.0);
    learning::BinaryModel always_seq = bias_only_binary(-9.0);
    learning::MultinomialModel chunk_model = forced_class_model(learning::kChunkClassNames, 1);

    std::vector<ExecutionPolicy> policies = {
        SeqPolicy{},
        ParPolicy{2},
        ParPolicy{4},
        ParPolicy{8},
        par_if(always_par),
        par_if(always_seq),
        PrefetcherPolicy{ParPolicy{4}, FixedLines{5}, 8},
    };

    for (std::int64_t n : {INT64_C(0), INT64_C(1), INT64_C(7), INT64_C(1000)}) {
        std::vector<ChunkParameter> chunks = {
            StaticChunk{1}, StaticChunk{3}, StaticChunk{std::max<std::int64_t>(n, 1)},
            adaptive_chunk_size(chunk_model)};
        for (std::size_t pi = 0; pi < policies.size(); ++pi) {
            for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
                std::vector<std::atomic<int>> counters(static_cast<std::size_t>(n) + 1);
                LoopContext ctx = plain_context(n, 4);
                std::vector<double> data(static_cast<std::size_t>(n), 0.0);
                if (n > 0) ctx.containers = {container_ref(data)};
                for_each_range(policies[pi], chunks[ci], n,
                               [&](std::int64_t i) { ++counters[static_cast<std::size_t>(i)]; },
                               ctx);
                INFO("policy ", pi, " chunk ", ci, " n ", n);
                for (std::int64_t i = 0; i < n; ++i)
                    CHECK(counters[static_cast<std::size_t>(i)].load() == 1);
            }
        }
    }
}

TEST_CASE("prefetch hints stay inside the range and the containers") {
    const std::int64_t n = 100;
    std::vector<double> full(static_cast<std::size_t>(n), 0.0);
    std::vector<double> shorter(40, 0.0);

    RecordingSink sink;
    LoopContext ctx = plain_context(n, 2);
    ctx.containers = {container_ref(full), container_ref(shorter)};
    ctx.sink = &sink;

    PrefetcherPolicy policy{SeqPolicy{}, FixedLines{1}, sizeof(double)};  // 8 elements ahead
    for_each_range(policy, DefaultChunk{}, n, [](std::int64_t) {}, ctx);

    std::size_t full_hints = 0, short_hints = 0;
    for (const auto& [ptr, index] : sink.hints) {
        CHECK(index < n);
        CHECK(index >= 0);
        if (ptr == full.data()) {
            ++full_hints;
        } else {
            CHECK(index < 40);
            ++short_hints;
        }
    }
    CHECK(full_hints == static_cast<std::size_t>(n - 8));  // i + 8 < 100
    CHECK(short_hints == 32);                              // i + 8 < 40
}

TEST_CASE("prefetcher wrapping par_if still executes correctly") {
    learning::BinaryModel always_par = bias_only_binary(9.0);
    RecordingSink sink;
    const std::int64_t n = 50;
    std::vector<double> data(static_cast<std::size_t>(n), 0.0);
    LoopContext ctx = plain_context(n, 2);
    ctx.containers = {container_ref(data)};
    ctx.sink = &sink;

    PrefetcherPolicy policy{par_if(always_par), FixedLines{1}, sizeof(double)};
    std::vector<std::atomic<int>> counters(static_cast<std::size_t>(n));
    for_each_range(policy, StaticChunk{7}, n,
                   [&](std::int64_t i) { ++counters[static_cast<std::size_t>(i)]; }, ctx);
    for (auto& c : counters) CHECK(c.load() == 1);
    CHECK(!sink.hints.empty());
}

TEST_CASE("body exceptions propagate out of parallel dispatch") {
    CHECK_THROWS_WITH(
        for_each_range(ParPolicy{2}, StaticChunk{10}, 100,
                       [](std::int64_t i) {
                           if (i == 35) throw std::runtime_error("body failed");
                       },
                       plain_context(100, 2)),
        "body failed");
    CHECK_THROWS_WITH(
        for_each_range(SeqPolicy{}, DefaultChunk{}, 10,
                       [](std::int64_t i) {
                           if (i == 3) throw std::runtime_error("body failed");
                       },
                       plain_context(10, 1)),
        "body failed");
}

TEST_CASE("empty ranges dispatch nothing and consult no model") {
    std::atomic<int> evals{0};
    ParIfPolicy policy{[&](const FeatureVector&) {
        ++evals;
        return PolicyChoice::Parallel;
    }};
    int calls = 0;
    for_each_range(policy, DefaultChunk{}, 0, [&](std::int64_t) { ++calls; },
                   plain_context(0, 4));
    CHECK(calls == 0);
    CHECK(evals.load() == 0);
}
