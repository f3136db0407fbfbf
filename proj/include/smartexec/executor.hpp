#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <variant>
#include <vector>

#include "smartexec/learning.hpp"
#include "smartexec/loop_ir.hpp"

// Parallel for-each over integer ranges with the three smart policies:
// model-driven seq/par selection (par_if), adaptive chunk size, and adaptive
// software-prefetch distance.  Models are consulted exactly once per
// dispatch; the loop body must be safe to invoke concurrently for distinct
// indices (caller contract, not checked).

namespace smartexec::exec {

using loop_ir::FeatureVector;

inline constexpr std::size_t kCacheLineBytes = 64;

struct IndexInterval {
    std::int64_t lo = 0;
    std::int64_t hi = 0;  // half-open [lo, hi)

    std::int64_t size() const { return hi - lo; }
    bool operator==(const IndexInterval&) const = default;
};

using ChunkPlan = std::vector<IndexInterval>;

// Splits [0, n) into consecutive intervals of `chunk_size` (the last one may
// be shorter).  n = 0 yields an empty plan.
ChunkPlan plan_chunks(std::int64_t n, std::int64_t chunk_size);

// ---------------------------------------------------------------------------
// thread pool

// Fixed set of workers pulling tasks from one shared queue (first-come).
// Concurrent run_plan calls are permitted and interleave their chunks.
class ThreadPool {
public:
    explicit ThreadPool(unsigned thread_count);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    unsigned thread_count() const { return static_cast<unsigned>(workers_.size()); }

    // Blocks until every interval has run.  If a task throws, the remaining
    // queued intervals of this call are discarded and the first exception is
    // rethrown after all in-flight work completes.
    void run_plan(const ChunkPlan& plan, const std::function<void(IndexInterval)>& task);

private:
    void worker_loop();

    std::mutex mutex_;
    std::condition_variable wake_;
    std::deque<std::function<void()>> queue_;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

// Lazily created process-wide pool per distinct worker count; pools persist
// for the lifetime of the process, mirroring a runtime system that owns its
// OS threads.
ThreadPool& shared_pool(unsigned thread_count);

// Runs `task` over every interval of `plan` on the shared pool of
// `thread_count` workers.
void pool_execute(const ChunkPlan& plan, unsigned thread_count,
                  const std::function<void(IndexInterval)>& task);

// ---------------------------------------------------------------------------
// prefetch hints

struct ContainerRef {
    const void* data = nullptr;
    std::int64_t length = 0;        // in elements
    std::size_t element_size = 0;   // in bytes
};

template <typename T>
ContainerRef container_ref(const std::vector<T>& v) {
    return {v.data(), static_cast<std::int64_t>(v.size()), sizeof(T)};
}

// Hint delivery seam: the default sink issues a non-binding touch read;
// tests substitute a recording sink to observe hint targets.
class PrefetchSink {
public:
    virtual ~PrefetchSink() = default;
    virtual void touch(const ContainerRef& container, std::int64_t element_index) = 0;
};

PrefetchSink& default_touch_sink();

// ---------------------------------------------------------------------------
// policies

enum class PolicyChoice { Sequential, Parallel };

struct SeqPolicy {};

struct ParPolicy {
    unsigned threads = 1;
};

// The decision callable lets tests wrap a model with instrumentation; use
// par_if() to bind a trained binary model.
struct ParIfPolicy {
    std::function<PolicyChoice(const FeatureVector&)> decide;
};

using BasePolicy = std::variant<SeqPolicy, ParPolicy, ParIfPolicy>;

struct FixedLines {
    int lines = 1;
};

struct AdaptiveLines {
    std::function<int(const FeatureVector&)> decide;
};

// Issues a memory-touch hint `distance` cache lines ahead of the current
// index for every registered container.  Prefetchers do not nest.
struct PrefetcherPolicy {
    BasePolicy base;
    std::variant<FixedLines, AdaptiveLines> distance;
    std::size_t element_bytes = sizeof(double);
};

using ExecutionPolicy = std::variant<SeqPolicy, ParPolicy, ParIfPolicy, PrefetcherPolicy>;

struct StaticChunk {
    std::int64_t size = 1;
};

struct AdaptiveChunk {
    std::function<std::int64_t(const FeatureVector&)> decide;
};

// ceil(n / threads): one chunk per worker when no smart parameter is given.
struct DefaultChunk {};

using ChunkParameter = std::variant<StaticChunk, AdaptiveChunk, DefaultChunk>;

// Dispatch-time state of one loop: analyzer output, range length, resolved
// worker count, and the containers the body touches (for prefetch hints).
struct LoopContext {
    loop_ir::StaticFeatures static_features;
    std::int64_t range_len = 0;
    unsigned threads = 1;
    std::vector<ContainerRef> containers;
    PrefetchSink* sink = nullptr;  // null -> default touch sink

    FeatureVector features_for(std::int64_t n) const {
        return loop_ir::make_feature_vector(
            static_features, {threads, static_cast<std::uint64_t>(n < 1 ? 1 : n)});
    }
};

// ---------------------------------------------------------------------------
// model-driven decisions

// Class "par" (index 1) selects parallel execution; the exact 0.5 tie lands
// on "seq".
PolicyChoice seq_par(const learning::BinaryModel& model, const FeatureVector& features);

// Returns max(1, round(fraction * n)) clamped to [1, n], where fraction is
// the predicted chunk class and n the iterations entry of the features.
std::int64_t chunk_size_determination(const learning::MultinomialModel& model,
                                      const FeatureVector& features);

// Returns the predicted prefetch distance in cache lines (one of the class
// labels 1, 5, 10, 100, 500).
int prefetching_distance_determination(const learning::MultinomialModel& model,
                                       const FeatureVector& features);

ParIfPolicy par_if(const learning::BinaryModel& model);
AdaptiveChunk adaptive_chunk_size(const learning::MultinomialModel& model);
AdaptiveLines adaptive_prefetch_distance(const learning::MultinomialModel& model);

PrefetcherPolicy make_prefetcher_policy(BasePolicy base,
                                        std::variant<FixedLines, AdaptiveLines> distance,
                                        std::size_t element_bytes);

// ---------------------------------------------------------------------------
// dispatch

// Everything decided once per for_each_range call.
struct ResolvedDispatch {
    bool parallel = false;
    unsigned threads = 1;
    std::int64_t chunk_size = 1;
    std::optional<int> prefetch_lines;
    std::int64_t prefetch_elems = 0;  // distance converted to elements
};

ResolvedDispatch resolve_dispatch(const ExecutionPolicy& policy, const ChunkParameter& chunk,
                                  std::int64_t n, const LoopContext& ctx);

namespace detail {

template <typename Body>
void run_interval_with_hints(IndexInterval iv, std::int64_t n, std::int64_t ahead,
                             const std::vector<ContainerRef>& containers,
                             PrefetchSink& sink, Body& body) {
    for (std::int64_t i = iv.lo; i < iv.hi; ++i) {
        std::int64_t target = i + ahead;
        if (target < n) {
            for (const ContainerRef& c : containers)
                if (target < c.length) sink.touch(c, target);
        }
        body(i);
    }
}

}  // namespace detail

// Invokes `body` exactly once per index in [0, n).  Sequential execution
// visits indices in ascending order; parallel execution distributes chunks
// to the pool, each chunk ascending.
template <typename Body>
void for_each_range(const ExecutionPolicy& policy, const ChunkParameter& chunk,
                    std::int64_t n, Body&& body, const LoopContext& ctx) {
    if (n <= 0) return;
    const ResolvedDispatch d = resolve_dispatch(policy, chunk, n, ctx);
    const ChunkPlan plan = plan_chunks(n, d.chunk_size);

    PrefetchSink& sink = ctx.sink ? *ctx.sink : default_touch_sink();
    auto run_interval = [&](IndexInterval iv) {
        if (d.prefetch_lines) {
            detail::run_interval_with_hints(iv, n, d.prefetch_elems, ctx.containers, sink,
                                            body);
        } else {
            for (std::int64_t i = iv.lo; i < iv.hi; ++i) body(i);
        }
    };

    if (!d.parallel) {
        for (IndexInterval iv : plan) run_interval(iv);
    } else {
        shared_pool(d.threads).run_plan(plan, run_interval);
    }
}

}  // namespace smartexec::exec
