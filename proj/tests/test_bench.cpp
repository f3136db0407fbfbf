#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "smartexec/bench.hpp"
#include "support/fake_tables.hpp"
#include "support/run_cli.hpp"

using namespace smartexec;
using namespace smartexec::bench;

namespace {

learning::MultinomialModel forced_class_model(const std::vector<std::string>& classes,
                                              int winner) {
    learning::MultinomialModel model;
    model.class_names = classes;
    for (auto& t : model.normalizer.transforms) t = {false, 0.0, 1.0};
    model.weights = learning::Matrix::Zero(static_cast<Eigen::Index>(classes.size()),
                                           loop_ir::kFeatureCount);
    if (winner + 1 < static_cast<int>(classes.size()))
        model.weights(winner, 0) = 25.0;
    else
        for (Eigen::Index r = 0; r + 1 < model.weights.rows(); ++r)
            model.weights(r, 0) = -25.0;
    return model;
}

learning::WeightsBundle forced_bundle(double policy_bias, int chunk_winner,
                                      int prefetch_winner) {
    learning::WeightsBundle b;
    for (auto& t : b.policy_model.normalizer.transforms) t = {false, 0.0, 1.0};
    b.policy_model.w(0) = policy_bias;
    b.chunk_model = forced_class_model(learning::kChunkClassNames, chunk_winner);
    b.prefetch_model = forced_class_model(learning::kPrefetchClassNames, prefetch_winner);
    return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// plumbing

TEST_CASE("median is order-invariant") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({1.0, 2.0, 3.0, 4.0}) == 2.5);
    std::vector<double> v = {5, 1, 4, 1, 5, 9, 2, 6};
    std::vector<double> shuffled = v;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i) {
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(median(shuffled) == median(v));
    }
    CHECK_THROWS(median({}));
}

TEST_CASE("checksums discriminate different outputs") {
    std::vector<double> a = {1.0, 2.0, 3.0};
    std::vector<double> b = {1.0, 2.0, 3.0000000001};
    CHECK(checksum_doubles(a) == checksum_doubles(a));
    CHECK(checksum_doubles(a) != checksum_doubles(b));
}

TEST_CASE("fake clock: table lookups, fallback and file parsing") {
    FakeClock clock;
    clock.set("some|key", 0.25);
    CHECK(clock.lookup("some|key") == 0.25);
    CHECK(clock.lookup("unknown") == clock.lookup("unknown"));  // deterministic fallback
    CHECK(clock.lookup("unknown") > 0.0);

    testsupport::TempDir dir("fake");
    testsupport::write_file(dir.path("t.tbl"), "# comment\nk1 0.5\nk2 1.5 # trailing\n\n");
    FakeClock from_file = FakeClock::from_file(dir.path("t.tbl"));
    CHECK(from_file.lookup("k1") == 0.5);
    CHECK(from_file.lookup("k2") == 1.5);
    testsupport::write_file(dir.path("bad.tbl"), "key_without_value\n");
    CHECK_THROWS(FakeClock::from_file(dir.path("bad.tbl")));

    int runs = 0;
    double t = clock.measure("some|key", [] {}, [&] { ++runs; }, 5);
    CHECK(runs == 1);  // fake mode executes once
    CHECK(t == 0.25);
}

// ---------------------------------------------------------------------------
// kernels

TEST_CASE("stream kernel: hand-traced single element") {
    StreamKernel s(1, 2.0);
    s.prepare(0);
    s.a[0] = 1.0;
    s.run(exec::SeqPolicy{}, exec::DefaultChunk{}, 1, nullptr);
    CHECK(s.c[0] == 3.0);  // copy then add: c = a + k*a... traced: c=1, b=2, c=3
    CHECK(s.b[0] == 2.0);
    CHECK(s.a[0] == 8.0);  // b + k*c = 2 + 2*3
}

TEST_CASE("stream kernel: zero input stays zero") {
    StreamKernel s(64, 7.5);
    s.prepare(1);
    std::fill(s.a.begin(), s.a.end(), 0.0);
    s.run(exec::SeqPolicy{}, exec::DefaultChunk{}, 1, nullptr);
    for (double v : s.a) CHECK(v == 0.0);
    for (double v : s.b) CHECK(v == 0.0);
    for (double v : s.c) CHECK(v == 0.0);
}

TEST_CASE("stream kernel: parallel checksum equals sequential") {
    StreamKernel seq(100000);
    seq.prepare(42);
    seq.run(exec::SeqPolicy{}, exec::DefaultChunk{}, 1, nullptr);
    std::uint64_t want = seq.checksum();

    StreamKernel par(100000);
    par.prepare(42);
    par.run(exec::ParPolicy{4}, exec::StaticChunk{1000}, 4, nullptr);
    CHECK(par.checksum() == want);
}

TEST_CASE("stencil kernel: uniform grids are a fixed point") {
    StencilKernel k(8, 8, 3);
    k.prepare(0);
    std::fill(k.grid().begin(), k.grid().end(), 4.25);
    k.run(exec::SeqPolicy{}, exec::DefaultChunk{}, 1, nullptr);
    // A uniform interior surrounded by the same boundary stays unchanged.
    StencilKernel ref(8, 8, 3);
    ref.prepare(0);
    std::fill(ref.grid().begin(), ref.grid().end(), 4.25);
    for (double v : k.grid()) CHECK(v == 4.25);
    (void)ref;
}

TEST_CASE("stencil kernel: 3x3 center averages its neighborhood") {
    StencilKernel k(3, 3, 1);
    k.prepare(0);
    std::fill(k.grid().begin(), k.grid().end(), 0.0);
    k.grid()[4] = 5.0;  // center of the 3x3 grid
    k.run(exec::SeqPolicy{}, exec::DefaultChunk{}, 1, nullptr);
    CHECK(k.grid()[4] == doctest::Approx(1.0));  // (5+0+0+0+0)/5
}

TEST_CASE("stencil kernel: parallel grids are bit-identical to sequential") {
    StencilKernel seq(64, 64, 10);
    seq.prepare(7);
    seq.run(exec::SeqPolicy{}, exec::DefaultChunk{}, 1, nullptr);

    StencilKernel par(64, 64, 10);
    par.prepare(7);
    par.run(exec::ParPolicy{4}, exec::StaticChunk{3}, 4, nullptr);
    CHECK(par.checksum() == seq.checksum());
}

TEST_CASE("stencil kernel rejects degenerate grids") {
    CHECK_THROWS_AS(StencilKernel(2, 8, 1), std::invalid_argument);
    CHECK_THROWS_AS(StencilKernel(8, 2, 1), std::invalid_argument);
}

TEST_CASE("matmul kernel: identity times A returns A") {
    MatmulKernel k(3, 3, 3);
    k.prepare(5);
    std::fill(k.a.begin(), k.a.end(), 0.0);
    for (int i = 0; i < 3; ++i) k.a[static_cast<std::size_t>(i * 3 + i)] = 1.0;
    k.run(exec::SeqPolicy{}, exec::DefaultChunk{}, 1, nullptr);
    CHECK(k.c == k.b);
}

TEST_CASE("matmul kernel: two-by-two hand example") {
    MatmulKernel k(2, 2, 2);
    k.prepare(0);
    k.a = {1, 2, 3, 4};
    k.b = {5, 6, 7, 8};
    k.run(exec::SeqPolicy{}, exec::DefaultChunk{}, 1, nullptr);
    CHECK(k.c == std::vector<double>{19, 22, 43, 50});
}

TEST_CASE("matmul kernel: parallel checksum equals sequential") {
    MatmulKernel seq(64, 64, 64);
    seq.prepare(3);
    seq.run(exec::SeqPolicy{}, exec::DefaultChunk{}, 1, nullptr);

    MatmulKernel par(64, 64, 64);
    par.prepare(3);
    par.run(exec::ParPolicy{8}, exec::StaticChunk{5}, 8, nullptr);
    CHECK(par.checksum() == seq.checksum());
}

TEST_CASE("kernel loop specs follow the documented count formulas") {
    for (auto [m, k, p] : {std::tuple<int, int, int>{6, 6, 6}, {8, 6, 6}, {16, 16, 16}}) {
        MatmulKernel kern(m, k, p);
        const auto& f = kern.static_features();
        CHECK(f.total_ops == static_cast<std::uint64_t>(p) * (3 * static_cast<std::uint64_t>(k) + 2));
        CHECK(f.float_ops == f.total_ops);
        CHECK(f.comparison_ops == 0);
        CHECK(f.deepest_loop_level == 2);
        CHECK(kern.range_len() == m);
    }
    for (std::int64_t w : {10, 18, 102}) {
        StencilKernel kern(w, 47, 2);
        const auto& f = kern.static_features();
        std::uint64_t cols = static_cast<std::uint64_t>(w) - 2;
        CHECK(f.total_ops == 35 * cols + 2);
        CHECK(f.float_ops == 25 * cols);
        CHECK(f.comparison_ops == 3 * cols + 1);
        CHECK(f.deepest_loop_level == 1);
        CHECK(kern.range_len() == 45);
    }
}

TEST_CASE("chunk_size_for_fraction arithmetic") {
    CHECK(chunk_size_for_fraction(0.001, 10000) == 10);
    CHECK(chunk_size_for_fraction(0.001, 45) == 1);
    CHECK(chunk_size_for_fraction(0.10, 500) == 50);
    CHECK(chunk_size_for_fraction(0.50, 45) == 23);
    CHECK(chunk_size_for_fraction(0.50, 1) == 1);
}

// ---------------------------------------------------------------------------
// training-data generation

TEST_CASE("fake-clock sweep labels match the injected argmin") {
    testsupport::TempDir dir("gen");
    FakeClock clock;
    auto key = [](const std::string& policy, const std::string& chunk, const std::string& pf,
                  const std::string& size) {
        return measurement_key("matmul", size, 2, policy, chunk, pf);
    };
    for (const std::string& size : {"m6k6p6", "m8k6p6"}) {
        clock.set(key("seq", "default", "off", size), 0.5);
        clock.set(key("par", "default", "off", size), 0.2);  // par wins
        for (std::size_t i = 0; i < learning::kChunkClassNames.size(); ++i)
            clock.set(key("par", learning::kChunkClassNames[i], "off", size),
                      i == 1 ? 0.1 : 0.4);  // 0.01 wins
        for (std::size_t i = 0; i < learning::kPrefetchClassNames.size(); ++i)
            clock.set(key("par", "default", learning::kPrefetchClassNames[i], size),
                      i == 3 ? 0.1 : 0.4);  // 100 wins
    }

    SweepGrid grid;
    grid.kernels = {"matmul"};
    grid.threads = {2};
    grid.quick = true;
    GenDataSummary summary = generate_training_data(grid, clock, dir.path(), 42);
    CHECK(summary.cells == 2);

    std::string policy_csv = testsupport::slurp(dir.path("policy.csv"));
    std::string chunk_csv = testsupport::slurp(dir.path("chunk.csv"));
    std::string prefetch_csv = testsupport::slurp(dir.path("prefetch.csv"));
    // matmul 6x6x6: n=6, total=float=6*(3*6+2)=120, level 2
    CHECK(policy_csv.find("2,6,120,120,0,2,par\n") != std::string::npos);
    CHECK(chunk_csv.find("2,6,120,120,0,2,0.01\n") != std::string::npos);
    CHECK(prefetch_csv.find("2,6,120,120,0,2,100\n") != std::string::npos);
}

TEST_CASE("fake-clock sweep is byte-deterministic across runs") {
    testsupport::TempDir dir_a("gen_a");
    testsupport::TempDir dir_b("gen_b");
    FakeClock clock;  // pure hash-fallback times
    SweepGrid grid;
    grid.threads = {1, 2};
    grid.quick = true;
    generate_training_data(grid, clock, dir_a.path(), 42);
    generate_training_data(grid, clock, dir_b.path(), 42);
    for (const char* name : {"policy.csv", "chunk.csv", "prefetch.csv"})
        CHECK(testsupport::slurp(dir_a.path(name)) == testsupport::slurp(dir_b.path(name)));
}

TEST_CASE("sweep summary counts cells and distinct labels") {
    testsupport::TempDir dir("gen_sum");
    testsupport::TempDir tab("tab");
    testsupport::write_file(tab.path("t.tbl"), testsupport::quick_pipeline_table({1, 2}));
    FakeClock table_clock = FakeClock::from_file(tab.path("t.tbl"));

    SweepGrid grid;
    grid.threads = {1, 2};
    grid.quick = true;
    GenDataSummary summary = generate_training_data(grid, table_clock, dir.path(), 42);
    CHECK(summary.cells == 8);  // 4 quick instances x 2 thread counts
    CHECK(summary.distinct_labels[0] == 2);
    CHECK(summary.distinct_labels[1] == 4);
    CHECK(summary.distinct_labels[2] == 5);
}

TEST_CASE("sweep validates its grid") {
    FakeClock clock;
    SweepGrid grid;
    grid.kernels = {};
    CHECK_THROWS_AS(generate_training_data(grid, clock, "/tmp", 1), std::invalid_argument);
    grid.kernels = {"bogus"};
    CHECK_THROWS_AS(generate_training_data(grid, clock, "/tmp", 1), std::invalid_argument);

    SweepGrid real_grid;
    real_grid.quick = true;
    real_grid.reps = 2;
    SteadyClock steady;
    CHECK_THROWS_AS(generate_training_data(real_grid, steady, "/tmp", 1),
                    std::invalid_argument);  // timed runs need reps >= 5
}

// ---------------------------------------------------------------------------
// evaluation

TEST_CASE("evaluate: adaptive equals the best fixed candidate under the fake clock") {
    FakeClock clock;
    // stream quick instance is n=10000; make chunk class 0.10 and distance 5 the winners
    auto key = [](const std::string& policy, const std::string& chunk, const std::string& pf) {
        return measurement_key("stream", "n10000", 2, policy, chunk, pf);
    };
    clock.set(key("seq", "default", "off"), 0.30);
    clock.set(key("par", "default", "off"), 0.10);
    for (std::size_t i = 0; i < learning::kChunkClassNames.size(); ++i)
        clock.set(key("par", learning::kChunkClassNames[i], "off"), i == 2 ? 0.05 : 0.20);
    for (std::size_t i = 0; i < learning::kPrefetchClassNames.size(); ++i)
        clock.set(key("par", "default", learning::kPrefetchClassNames[i]),
                  i == 1 ? 0.07 : 0.25);

    // Models that predict exactly those winners.
    learning::WeightsBundle bundle = forced_bundle(9.0, 2, 1);
    EvalReport report = evaluate(bundle, {"stream"}, 2, "all", clock, 1, 42, true);

    auto best_fixed = [&](const std::string& dim) {
        double best = 1e300;
        for (const EvalEntry& e : report.entries)
            if (e.dimension == dim && !e.adaptive) best = std::min(best, e.median_s);
        return best;
    };
    auto adaptive = [&](const std::string& dim) {
        for (const EvalEntry& e : report.entries)
            if (e.dimension == dim && e.adaptive) return e.median_s;
        FAIL("missing adaptive row");
        return 0.0;
    };
    CHECK(adaptive("policy") == best_fixed("policy"));
    CHECK(adaptive("chunk") == best_fixed("chunk"));
    CHECK(adaptive("prefetch") == best_fixed("prefetch"));
}

TEST_CASE("evaluate: row counts per dimension are candidates plus adaptive") {
    FakeClock clock;
    learning::WeightsBundle bundle = forced_bundle(0.0, 0, 0);
    EvalReport report = evaluate(bundle, {"matmul"}, 2, "all", clock, 1, 42, true);
    auto count = [&](const std::string& dim) {
        std::size_t n = 0;
        for (const EvalEntry& e : report.entries) n += e.dimension == dim;
        return n;
    };
    CHECK(count("policy") == 3);    // seq, par, adaptive
    CHECK(count("chunk") == 5);     // 4 fractions + adaptive
    CHECK(count("prefetch") == 6);  // 5 distances + adaptive
    CHECK(report.predictions.size() == 3);

    EvalReport only_chunk = evaluate(bundle, {"matmul"}, 2, "chunk", clock, 1, 42, true);
    CHECK(only_chunk.entries.size() == 5);
    for (const EvalEntry& e : only_chunk.entries) CHECK(e.dimension == "chunk");
}

TEST_CASE("evaluate validates inputs") {
    FakeClock clock;
    learning::WeightsBundle bundle = forced_bundle(0.0, 0, 0);
    CHECK_THROWS_AS(evaluate(bundle, {}, 2, "all", clock, 1, 42, true),
                    std::invalid_argument);
    CHECK_THROWS_AS(evaluate(bundle, {"stream"}, 2, "bogus", clock, 1, 42, true),
                    std::invalid_argument);
    learning::WeightsBundle broken = bundle;
    broken.chunk_model.class_names = {"a", "b"};
    CHECK_THROWS_AS(evaluate(broken, {"stream"}, 2, "all", clock, 1, 42, true),
                    std::invalid_argument);
}

TEST_CASE("report rendering: CSV shape and adaptive speedup of one") {
    FakeClock clock;
    learning::WeightsBundle bundle = forced_bundle(0.0, 1, 2);
    EvalReport report = evaluate(bundle, {"stencil"}, 2, "chunk", clock, 1, 42, true);
    std::string csv = render_report_csv(report);
    CHECK(csv.rfind("kernel,dimension,config,median_s,speedup_vs_adaptive\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header + 5 rows
    CHECK(csv.find("stencil,chunk,adaptive,") != std::string::npos);

    // The adaptive row's speedup column is exactly 1.
    std::istringstream lines(csv);
    std::string line;
    bool saw_adaptive = false;
    while (std::getline(lines, line)) {
        if (line.find(",adaptive,") == std::string::npos) continue;
        saw_adaptive = true;
        CHECK(line.substr(line.rfind(',') + 1) == "1");
    }
    CHECK(saw_adaptive);

    std::string table = render_report_table(report);
    CHECK(table.find("predicted settings:") != std::string::npos);
    CHECK(table.find("stencil") != std::string::npos);
}
