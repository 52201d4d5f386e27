#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "hisq/fields.hpp"
#include "hisq/lattice.hpp"

namespace hisq {

/// Loop-nest shape of a Dslash application.
///
///   register_block(k): per site, the links of each hop are loaded once and
///                      applied to k right-hand sides held in registers.
///   cache_block(s):    tiles of s consecutive sites; every rhs sweeps the tile
///                      before the next rhs, so links are re-read from cache.
///   combined(k, s):    tiles of s sites, k rhs per link load.
enum class BlockingKind : std::uint8_t { register_block, cache_block, combined };

struct DslashStrategy {
    BlockingKind kind = BlockingKind::register_block;
    int rhs_chunk = 1;
    int tile_sites = 1;

    [[nodiscard]] static DslashStrategy register_block(int rhs_chunk);
    [[nodiscard]] static DslashStrategy cache_block(int tile_sites);
    [[nodiscard]] static DslashStrategy combined(int rhs_chunk, int tile_sites);

    [[nodiscard]] std::string describe() const;
    friend auto operator<=>(const DslashStrategy&, const DslashStrategy&) = default;
};

struct DslashConfig {
    DslashStrategy strategy{};
    /// Two passes: smeared hops write the output, Naik hops accumulate onto it.
    bool split_kernels = false;
    bool count_transfers = true;

    [[nodiscard]] std::string describe() const;
    friend auto operator<=>(const DslashConfig&, const DslashConfig&) = default;
};

/// Memory traffic and flops of one application under the idealized cache
/// model: each link is read once per site regardless of n, each neighbor
/// vector once per rhs, one output store per site and rhs.
struct TransferStats {
    std::int64_t flops = 0;
    std::int64_t bytes_links = 0;
    std::int64_t bytes_vectors_in = 0;
    std::int64_t bytes_vectors_out = 0;
    /// Work outside the model: r14 reconstruction and sign flips.
    std::int64_t aux_flops = 0;
    /// Second output pass of split kernels (kept out of bytes_vectors_out).
    std::int64_t split_extra_bytes = 0;

    [[nodiscard]] std::int64_t model_bytes() const noexcept {
        return bytes_links + bytes_vectors_in + bytes_vectors_out;
    }
    [[nodiscard]] double intensity() const noexcept {
        return static_cast<double>(flops) / static_cast<double>(model_bytes());
    }
    TransferStats& operator+=(const TransferStats& o) noexcept;
    friend bool operator==(const TransferStats&, const TransferStats&) = default;
};

inline constexpr std::int64_t kDslashFlopsPerSite = 1146;

/// Closed-form stats for the full 16-term operator.
[[nodiscard]] TransferStats model_transfer_stats(std::int64_t volume, int n_rhs, LinkStorage naik_storage,
                                                 Precision precision);

/// Real weight per (direction, hop); disabled hops are skipped entirely.
struct HopWeights {
    std::array<std::array<double, kNumHops>, kNumDirections> weight{};
    std::array<std::array<bool, kNumHops>, kNumDirections> enabled{};

    /// All hops enabled with weight 1: the plain operator.
    [[nodiscard]] static HopWeights unit();
    /// k-th derivative in the temporal chemical potential at mu_hat. Temporal
    /// hops of signed length d get d^k e^{d mu_hat}; spatial hops survive only for k = 0.
    [[nodiscard]] static HopWeights chemical_potential(double mu_hat, int derivative_order);

    [[nodiscard]] int enabled_count() const noexcept;
};

/// HISQ staggered Dslash
///   w_x = sum_mu [ X_{x,mu} v_{x+mu} - X^dag_{x-mu,mu} v_{x-mu}
///                + N_{x,mu} v_{x+3mu} - N^dag_{x-3mu,mu} v_{x-3mu} ]
/// with temporal boundary phases folded into the hops. Smeared and Naik terms
/// are summed in separate accumulators, each in ascending mu with the forward
/// hop first, and added once at the end; every strategy, layout and the split
/// mode reproduce that order exactly, so their outputs are bit-identical.
template <typename T>
class Dslash {
public:
    Dslash(std::shared_ptr<const LinkField<T>> smeared, std::shared_ptr<const LinkField<T>> naik,
           DslashConfig config = {});

    [[nodiscard]] const LatticeGeometry& geometry() const noexcept { return smeared_->geometry(); }
    [[nodiscard]] const DslashConfig& config() const noexcept { return config_; }
    void set_config(const DslashConfig& config);
    [[nodiscard]] LinkStorage naik_storage() const noexcept { return naik_->storage(); }
    [[nodiscard]] const LinkField<T>& smeared_links() const noexcept { return *smeared_; }
    [[nodiscard]] const LinkField<T>& naik_links() const noexcept { return *naik_; }

    TransferStats apply(const VectorBundle<T>& in, VectorBundle<T>& out) const;
    /// D^dagger = -D: apply followed by a sign flip of the output.
    TransferStats apply_daggered(const VectorBundle<T>& in, VectorBundle<T>& out) const;
    TransferStats apply_weighted(const HopWeights& weights, const VectorBundle<T>& in, VectorBundle<T>& out) const;

    /// Field-set form used by the solvers to run on a subset of a bundle.
    /// `weights == nullptr` selects the plain operator.
    TransferStats apply(std::span<const ColorField<T>* const> in, std::span<ColorField<T>* const> out,
                        const HopWeights* weights = nullptr) const;

private:
    void validate(std::span<const ColorField<T>* const> in, std::span<ColorField<T>* const> out) const;
    TransferStats stats_for(int n_rhs, const HopWeights& weights) const;

    std::shared_ptr<const LinkField<T>> smeared_;
    std::shared_ptr<const LinkField<T>> naik_;
    std::shared_ptr<const NeighborTable> neighbors_;
    DslashConfig config_;
};

namespace testing_hooks {

/// Mutation hook for the verification suite: flips the sign of the backward
/// smeared hop in every subsequent Dslash application.
void set_flip_backward_smeared(bool on) noexcept;
[[nodiscard]] bool flip_backward_smeared() noexcept;

} // namespace testing_hooks

} // namespace hisq
