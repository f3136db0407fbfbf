#include "smartexec/executor.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>

namespace smartexec::exec {

ChunkPlan plan_chunks(std::int64_t n, std::int64_t chunk_size) {
    if (n < 0) throw std::invalid_argument("range length must be non-negative");
    ChunkPlan plan;
    if (n == 0) return plan;
    if (chunk_size < 1) throw std::invalid_argument("chunk size must be >= 1");
    plan.reserve(static_cast<std::size_t>((n + chunk_size - 1) / chunk_size));
    for (std::int64_t lo = 0; lo < n; lo += chunk_size)
        plan.push_back({lo, std::min(lo + chunk_size, n)});
    return plan;
}

ThreadPool::ThreadPool(unsigned thread_count) {
    if (thread_count < 1) throw std::invalid_argument("thread count must be >= 1");
    workers_.reserve(thread_count);
    for (unsigned i = 0; i < thread_count; ++i)
        workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    for (std::thread& t : workers_) t.join();
}

void ThreadPool::worker_loop() {
    for (;;) {
        std::function<void()> job;
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) return;  // stopping
            job = std::move(queue_.front());
            queue_.pop_front();
        }
        job();
    }
}

void ThreadPool::run_plan(const ChunkPlan& plan,
                          const std::function<void(IndexInterval)>& task) {
    if (plan.empty()) return;

    struct RunState {
        std::mutex m;
        std::condition_variable done;
        std::size_t remaining;
        std::atomic<bool> failed{false};
        std::exception_ptr error;
    };
    auto state = std::make_shared<RunState>();
    state->remaining = plan.size();

    {
        std::lock_guard lock(mutex_);
        for (IndexInterval iv : plan) {
            queue_.emplace_back([state, iv, &task] {
                if (!state->failed.load(std::memory_order_acquire)) {
                    try {
                        task(iv);
                    } catch (...) {
                        bool expected = false;
                        if (state->failed.compare_exchange_strong(expected, true)) {
                            std::lock_guard g(state->m);
                            state->error = std::current_exception();
                        }
                    }
                }
                std::lock_guard g(state->m);
                if (--state->remaining == 0) state->done.notify_all();
            });
        }
    }
    wake_.notify_all();

    std::unique_lock lock(state->m);
    state->done.wait(lock, [&] { return state->remaining == 0; });
    if (state->error) std::rethrow_exception(state->error);
}

ThreadPool& shared_pool(unsigned thread_count) {
    static std::mutex registry_mutex;
    static std::map<unsigned, std::unique_ptr<ThreadPool>> registry;
    std::lock_guard lock(registry_mutex);
    auto& slot = registry[thread_count];
    if (!slot) slot = std::make_unique<ThreadPool>(thread_count);
    return *slot;
}

void pool_execute(const ChunkPlan& plan, unsigned thread_count,
                  const std::function<void(IndexInterval)>& task) {
    shared_pool(thread_count).run_plan(plan, task);
}

namespace {

class TouchReadSink : public PrefetchSink {
public:
    void touch(const ContainerRef& container, std::int64_t element_index) override {
        const auto* base = static_cast<const volatile char*>(container.data);
        sink_ = base[static_cast<std::size_t>(element_index) * container.element_size];
    }

private:
    // Written solely so the load cannot be elided.
    volatile char sink_ = 0;
};

}  // namespace

PrefetchSink& default_touch_sink() {
    static TouchReadSink sink;
    return sink;
}

PolicyChoice seq_par(const learning::BinaryModel& model, const FeatureVector& features) {
    return learning::predict_binary(model, features).label == 1 ? PolicyChoice::Parallel
                                                                : PolicyChoice::Sequential;
}

std::int64_t chunk_size_determination(const learning::MultinomialModel& model,
                                      const FeatureVector& features) {
    auto n = static_cast<std::int64_t>(features[loop_ir::kIterationsIndex]);
    if (n < 1) return 1;
    learning::ClassPrediction pred = learning::predict_class(model, features);
    double fraction = std::stod(model.class_names.at(static_cast<std::size_t>(pred.label)));
    auto size = std::llround(fraction * static_cast<double>(n));
    return std::clamp<std::int64_t>(size, 1, n);
}

int prefetching_distance_determination(const learning::MultinomialModel& model,
                                       const FeatureVector& features) {
    learning::ClassPrediction pred = learning::predict_class(model, features);
    return std::stoi(model.class_names.at(static_cast<std::size_t>(pred.label)));
}

ParIfPolicy par_if(const learning::BinaryModel& model) {
    return {[&model](const FeatureVector& f) { return seq_par(model, f); }};
}

AdaptiveChunk adaptive_chunk_size(const learning::MultinomialModel& model) {
    return {[&model](const FeatureVector& f) { return chunk_size_determination(model, f); }};
}

AdaptiveLines adaptive_prefetch_distance(const learning::MultinomialModel& model) {
    return {
        [&model](const FeatureVector& f) { return prefetching_distance_determination(model, f); }};
}

PrefetcherPolicy make_prefetcher_policy(BasePolicy base,
                                        std::variant<FixedLines, AdaptiveLines> distance,
                                        std::size_t element_bytes) {
    if (element_bytes == 0) throw std::invalid_argument("element_bytes must be >= 1");
    return {std::move(base), std::move(distance), element_bytes};
}

namespace {

struct BaseResolution {
    bool parallel = false;
    unsigned threads = 1;
};

BaseResolution resolve_base(const BasePolicy& base, const FeatureVector& features,
                            unsigned ctx_threads) {
    return std::visit(
        [&](const auto& p) -> BaseResolution {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SeqPolicy>) {
                return {false, 1};
            } else if constexpr (std::is_same_v<T, ParPolicy>) {
                if (p.threads < 1) throw std::invalid_argument("par needs threads >= 1");
                return {true, p.threads};
            } else {
                if (!p.decide) throw std::invalid_argument("par_if has no decision function");
                bool par = p.decide(features) == PolicyChoice::Parallel;
                return {par, par ? std::max(1u, ctx_threads) : 1};
            }
        },
        base);
}

}  // namespace

ResolvedDispatch resolve_dispatch(const ExecutionPolicy& policy, const ChunkParameter& chunk,
                                  std::int64_t n, const LoopContext& ctx) {
    ResolvedDispatch d;
    const FeatureVector features = ctx.features_for(n);

    if (const auto* pf = std::get_if<PrefetcherPolicy>(&policy)) {
        if (pf->element_bytes == 0) throw std::invalid_argument("element_bytes must be >= 1");
        BaseResolution base = resolve_base(pf->base, features, ctx.threads);
        d.parallel = base.parallel;
        d.threads = base.threads;
        int lines = std::visit(
            [&](const auto& dist) -> int {
                using T = std::decay_t<decltype(dist)>;
                if constexpr (std::is_same_v<T, FixedLines>) {
                    return dist.lines;
                } else {
                    if (!dist.decide)
                        throw std::invalid_argument("adaptive distance has no decision function");
                    return dist.decide(features);
                }
            },
            pf->distance);
        if (lines < 1) throw std::invalid_argument("prefetch distance must be >= 1 line");
        d.prefetch_lines = lines;
        d.prefetch_elems = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(lines) * static_cast<std::int64_t>(kCacheLineBytes) /
                   static_cast<std::int64_t>(pf->element_bytes));
    } else {
        BaseResolution base = std::visit(
            [&](const auto& p) -> BaseResolution {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, PrefetcherPolicy>) {
                    return {};  // unreachable
                } else {
                    return resolve_base(BasePolicy{p}, features, ctx.threads);
                }
            },
            policy);
        d.parallel = base.parallel;
        d.threads = base.threads;
    }

    d.chunk_size = std::visit(
        [&](const auto& c) -> std::int64_t {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, StaticChunk>) {
                return c.size;
            } else if constexpr (std::is_same_v<T, AdaptiveChunk>) {
                if (!c.decide) throw std::invalid_argument("adaptive chunk has no decision function");
                return c.decide(features);
            } else {
                unsigned workers = d.parallel ? d.threads : 1;
                return (n + workers - 1) / workers;
            }
        },
        chunk);
    d.chunk_size = std::clamp<std::int64_t>(d.chunk_size, 1, std::max<std::int64_t>(n, 1));
    return d;
}

}  // namespace smartexec::exec
