#include "hisq/autotune.hpp"

#include <algorithm>
#include <limits>

#include "hisq/error.hpp"

namespace hisq {

AutotuneResult Autotuner::tune(const AutotuneKey& key, std::span<const DslashConfig> candidates,
                               double budget_seconds, const Timer& timer) {
    if (const auto it = cache_.find(key); it != cache_.end()) {
        AutotuneResult hit = it->second;
        hit.from_cache = true;
        return hit;
    }
    if (candidates.empty()) throw InvalidArgument("autotune: empty candidate set");

    std::vector<AutotuneTiming> timings;
    timings.reserve(candidates.size());
    for (const auto& c : candidates) timings.push_back({c, std::numeric_limits<double>::infinity(), 0});

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    do {
        for (auto& t : timings) {
            const double s = timer(t.config);
            ++timing_calls_;
            ++t.repetitions;
            t.best_seconds = std::min(t.best_seconds, s);
        }
    } while (elapsed() < budget_seconds);

    const auto best = std::min_element(timings.begin(), timings.end(),
                                       [](const auto& a, const auto& b) { return a.best_seconds < b.best_seconds; });
    AutotuneResult r;
    r.best = best->config;
    r.best_seconds = best->best_seconds;
    r.timings = std::move(timings);
    cache_[key] = r;
    return r;
}

std::vector<DslashConfig> Autotuner::default_candidates(const LatticeGeometry& geom, int n_rhs) {
    if (n_rhs < 1) throw InvalidArgument("autotune: n_rhs must be >= 1");
    std::vector<int> chunks;
    for (int k : {1, 2, 4, n_rhs}) {
        if (k <= n_rhs && std::find(chunks.begin(), chunks.end(), k) == chunks.end()) chunks.push_back(k);
    }
    std::vector<int> tiles;
    for (std::int64_t s = 16; s <= geom.volume() && s <= (1 << 16); s *= 4) tiles.push_back(static_cast<int>(s));
    if (tiles.empty()) tiles.push_back(static_cast<int>(geom.volume()));

    std::vector<DslashStrategy> strategies;
    for (int k : chunks) strategies.push_back(DslashStrategy::register_block(k));
    for (int s : tiles) strategies.push_back(DslashStrategy::cache_block(s));
    for (int k : chunks)
        for (int s : tiles) strategies.push_back(DslashStrategy::combined(k, s));

    std::vector<DslashConfig> out;
    for (bool split : {false, true})
        for (const auto& st : strategies) out.push_back({st, split, true});
    return out;
}

Autotuner& Autotuner::global() {
    static Autotuner instance;
    return instance;
}

} // namespace hisq
