#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "smartexec/executor.hpp"
#include "smartexec/learning.hpp"
#include "smartexec/loop_ir.hpp"

// Benchmark kernels (stream, 2D stencil, matrix multiply), the sweep that
// turns measured timings into labeled training rows, and the evaluation
// harness comparing the adaptive executors against fixed settings.

namespace smartexec::bench {

std::uint64_t fnv1a(const void* data, std::size_t bytes);
std::uint64_t checksum_doubles(const std::vector<double>& values);

// Median of the sample values (mean of the middle two for even counts);
// invariant under reordering of the input.
double median(std::vector<double> values);

// ---------------------------------------------------------------------------
// measurement clock

// Timing seam.  The real clock runs one untimed warmup and `reps` timed
// executions, returning the median; the fake clock executes the
// configuration once (checksums stay verifiable) and returns a constant
// keyed by the configuration, making the whole labeling pipeline
// deterministic.
class MeasurementClock {
public:
    virtual ~MeasurementClock() = default;
    virtual bool is_fake() const = 0;
    virtual double measure(const std::string& key, const std::function<void()>& setup,
                           const std::function<void()>& run, int reps) = 0;
};

class SteadyClock final : public MeasurementClock {
public:
    bool is_fake() const override { return false; }
    double measure(const std::string& key, const std::function<void()>& setup,
                   const std::function<void()>& run, int reps) override;
};

// Table entries are `<key> <seconds>` lines ('#' starts a comment).  Keys
// missing from the table fall back to a hash-derived constant so any grid
// stays fully deterministic.
class FakeClock final : public MeasurementClock {
public:
    FakeClock() = default;
    static FakeClock from_file(const std::string& path);

    void set(const std::string& key, double seconds) { table_[key] = seconds; }
    double lookup(const std::string& key) const;

    bool is_fake() const override { return true; }
    double measure(const std::string& key, const std::function<void()>& setup,
                   const std::function<void()>& run, int reps) override;

private:
    std::map<std::string, double> table_;
};

// ---------------------------------------------------------------------------
// kernels

// One runnable benchmark loop.  `loop_spec_text()` is the kernel's
// description in the analyzer mini-language; its static features are what
// the models see for this kernel.
class Kernel {
public:
    virtual ~Kernel() = default;

    virtual std::string name() const = 0;
    virtual std::string size_key() const = 0;
    virtual std::string loop_spec_text() const = 0;
    virtual std::int64_t range_len() const = 0;
    virtual std::size_t element_bytes() const { return sizeof(double); }

    // Re-initializes all inputs/outputs; every measured run starts from the
    // same state so checksums are comparable across configurations.
    virtual void prepare(std::uint64_t seed) = 0;
    virtual void run(const exec::ExecutionPolicy& policy, const exec::ChunkParameter& chunk,
                     unsigned threads, exec::PrefetchSink* sink = nullptr) = 0;
    virtual std::uint64_t checksum() const = 0;

    const loop_ir::StaticFeatures& static_features() const;
    exec::LoopContext make_context(unsigned threads, exec::PrefetchSink* sink) const;

protected:
    virtual std::vector<exec::ContainerRef> containers() const = 0;

private:
    mutable bool features_cached_ = false;
    mutable loop_ir::StaticFeatures features_{};
};

// Four steps per index: c[i]=a[i]; b[i]=k*c[i]; c[i]=a[i]+b[i];
// a[i]=b[i]+k*c[i].
class StreamKernel final : public Kernel {
public:
    explicit StreamKernel(std::int64_t n, double k = 3.0);

    std::string name() const override { return "stream"; }
    std::string size_key() const override;
    std::string loop_spec_text() const override;
    std::int64_t range_len() const override { return n_; }
    void prepare(std::uint64_t seed) override;
    void run(const exec::ExecutionPolicy& policy, const exec::ChunkParameter& chunk,
             unsigned threads, exec::PrefetchSink* sink) override;
    std::uint64_t checksum() const override;

    std::vector<double> a, b, c;
    double scale;

protected:
    std::vector<exec::ContainerRef> containers() const override;

private:
    std::int64_t n_;
};

// Jacobi five-point sweep over a W x H grid with fixed boundary, double
// buffered; the parallel loop runs over the H-2 interior rows.
class StencilKernel final : public Kernel {
public:
    StencilKernel(std::int64_t width, std::int64_t height, int sweeps);

    std::string name() const override { return "stencil"; }
    std::string size_key() const override;
    std::string loop_spec_text() const override;
    std::int64_t range_len() const override { return height_ - 2; }
    void prepare(std::uint64_t seed) override;
    void run(const exec::ExecutionPolicy& policy, const exec::ChunkParameter& chunk,
             unsigned threads, exec::PrefetchSink* sink) override;
    std::uint64_t checksum() const override;

    const std::vector<double>& grid() const { return cur_; }
    std::vector<double>& grid() { return cur_; }
    std::int64_t width() const { return width_; }
    std::int64_t height() const { return height_; }

protected:
    std::vector<exec::ContainerRef> containers() const override;

private:
    std::int64_t width_, height_;
    int sweeps_;
    std::vector<double> cur_, next_;
};

// C = A * B with the parallel loop over the rows of C.
class MatmulKernel final : public Kernel {
public:
    MatmulKernel(std::int64_t m, std::int64_t k, std::int64_t p);

    std::string name() const override { return "matmul"; }
    std::string size_key() const override;
    std::string loop_spec_text() const override;
    std::int64_t range_len() const override { return m_; }
    void prepare(std::uint64_t seed) override;
    void run(const exec::ExecutionPolicy& policy, const exec::ChunkParameter& chunk,
             unsigned threads, exec::PrefetchSink* sink) override;
    std::uint64_t checksum() const override;

    std::vector<double> a, b, c;

protected:
    std::vector<exec::ContainerRef> containers() const override;

private:
    std::int64_t m_, k_, p_;
};

// Canonical loop-spec texts (the shipped `.loop` files carry the same bytes).
std::string stream_loop_spec();
std::string stencil_loop_spec(std::int64_t interior_cols);
std::string matmul_loop_spec(std::int64_t k, std::int64_t p);

const std::vector<std::string>& kernel_names();

// Instances for the training sweep; `quick` selects a tiny grid for tests.
std::vector<std::unique_ptr<Kernel>> make_kernel_instances(const std::string& name, bool quick);

// Single representative instance per kernel for the evaluation harness.
std::unique_ptr<Kernel> make_eval_kernel(const std::string& name, bool quick);

// Measurement key: kernel|size|tN|<seq|par>|chunk:<c>|pf:<p>.  Adaptive
// settings are keyed by what they resolved to, so under the fake clock an
// adaptive run and the fixed candidate it picked cost the same.
std::string measurement_key(const std::string& kernel, const std::string& size_key,
                            unsigned threads, const std::string& policy,
                            const std::string& chunk, const std::string& prefetch);

std::int64_t chunk_size_for_fraction(double fraction, std::int64_t n);

// ---------------------------------------------------------------------------
// training-data generation

struct SweepGrid {
    std::vector<std::string> kernels = kernel_names();
    std::vector<unsigned> threads = {1, 2, 4, 8};
    int reps = 5;
    bool quick = false;
};

struct GenDataSummary {
    std::size_t cells = 0;
    std::array<std::string, 3> files;           // policy, chunk, prefetch CSV paths
    std::array<std::size_t, 3> distinct_labels{};
};

// For every (kernel instance, thread count) cell: measures seq vs par, the
// four chunk fractions, and the five prefetch distances, labels each
// dimension with the argmin of the median times (ties to the earlier
// candidate), and appends one row per dimension CSV.  A checksum mismatch
// between configurations aborts the sweep.
GenDataSummary generate_training_data(const SweepGrid& grid, MeasurementClock& clock,
                                      const std::string& out_dir, std::uint64_t seed);

// ---------------------------------------------------------------------------
// evaluation

struct EvalEntry {
    std::string kernel;
    std::string dimension;  // policy | chunk | prefetch
    std::string config;     // candidate name or "adaptive"
    double median_s = 0.0;
    bool adaptive = false;
};

struct EvalReport {
    std::vector<EvalEntry> entries;
    std::vector<std::string> predictions;  // one human-readable line per decision
};

// Measures every fixed candidate plus the adaptive setting for each
// requested dimension ("policy", "chunk", "prefetch" or "all").
EvalReport evaluate(const learning::WeightsBundle& bundle,
                    const std::vector<std::string>& kernels, unsigned threads,
                    const std::string& dimension, MeasurementClock& clock, int reps,
                    std::uint64_t seed, bool quick);

std::string render_report_table(const EvalReport& report);

// CSV columns: kernel,dimension,config,median_s,speedup_vs_adaptive.
std::string render_report_csv(const EvalReport& report);

}  // namespace smartexec::bench
