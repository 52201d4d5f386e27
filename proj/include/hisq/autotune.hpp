#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "hisq/dslash.hpp"

namespace hisq {

struct AutotuneKey {
    std::array<int, 4> dims{};
    int n_rhs = 0;
    LinkStorage storage = LinkStorage::full18;
    int fusion_width = 0;
    Precision precision = Precision::f32;

    friend auto operator<=>(const AutotuneKey&, const AutotuneKey&) = default;
};

struct AutotuneTiming {
    DslashConfig config;
    double best_seconds = 0.0;
    int repetitions = 0;
};

struct AutotuneResult {
    DslashConfig best;
    double best_seconds = 0.0;
    std::vector<AutotuneTiming> timings;
    bool from_cache = false;
};

/// Exhaustive timing search over Dslash configurations, cached per key.
class Autotuner {
public:
    /// Runs one application under `config` and returns its wall time in seconds.
    using Timer = std::function<double(const DslashConfig& config)>;

    /// Every candidate is timed at least once; further rounds over the whole
    /// set run until `budget_seconds` of wall time is spent. Each candidate is
    /// scored by its fastest repetition.
    AutotuneResult tune(const AutotuneKey& key, std::span<const DslashConfig> candidates, double budget_seconds,
                        const Timer& timer);

    template <typename T>
    AutotuneResult tune(Dslash<T>& op, const VectorBundle<T>& in, VectorBundle<T>& out, double budget_seconds,
                        std::span<const DslashConfig> candidates = {});

    [[nodiscard]] std::int64_t timing_calls() const noexcept { return timing_calls_; }
    [[nodiscard]] std::size_t cache_size() const noexcept { return cache_.size(); }
    void clear() { cache_.clear(); }

    /// strategies x rhs_chunk {1,2,4,n} x tiles {16,64,256,...} x split {off,on}
    [[nodiscard]] static std::vector<DslashConfig> default_candidates(const LatticeGeometry& geom, int n_rhs);

    /// Process-wide instance used by the CLI's `--strategy auto`.
    static Autotuner& global();

private:
    std::map<AutotuneKey, AutotuneResult> cache_;
    std::int64_t timing_calls_ = 0;
};

template <typename T>
[[nodiscard]] AutotuneKey autotune_key(const Dslash<T>& op, const VectorBundle<T>& in) {
    return {op.geometry().dims(), in.n_rhs(), op.naik_storage(), in.layout().fusion_width, precision_of<T>};
}

template <typename T>
AutotuneResult Autotuner::tune(Dslash<T>& op, const VectorBundle<T>& in, VectorBundle<T>& out, double budget_seconds,
                               std::span<const DslashConfig> candidates) {
    std::vector<DslashConfig> defaults;
    if (candidates.empty()) {
        defaults = default_candidates(op.geometry(), in.n_rhs());
        candidates = defaults;
    }
    const DslashConfig saved = op.config();
    auto timer = [&](const DslashConfig& c) {
        op.set_config(c);
        const auto t0 = std::chrono::steady_clock::now();
        (void)op.apply(in, out);
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    AutotuneResult r;
    try {
        r = tune(autotune_key(op, in), candidates, budget_seconds, timer);
    } catch (...) {
        op.set_config(saved);
        throw;
    }
    op.set_config(r.best);
    return r;
}

} // namespace hisq
