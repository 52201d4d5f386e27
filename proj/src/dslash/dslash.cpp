#include "hisq/dslash.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

#include "hisq/error.hpp"

namespace hisq {

// ---------------------------------------------------------------------------
// Strategy / config

DslashStrategy DslashStrategy::register_block(int rhs_chunk) {
    if (rhs_chunk < 1) throw InvalidArgument("rhs_chunk must be >= 1");
    return {BlockingKind::register_block, rhs_chunk, 1};
}

DslashStrategy DslashStrategy::cache_block(int tile_sites) {
    if (tile_sites < 1) throw InvalidArgument("tile_sites must be >= 1");
    return {BlockingKind::cache_block, 1, tile_sites};
}

DslashStrategy DslashStrategy::combined(int rhs_chunk, int tile_sites) {
    if (rhs_chunk < 1) throw InvalidArgument("rhs_chunk must be >= 1");
    if (tile_sites < 1) throw InvalidArgument("tile_sites must be >= 1");
    return {BlockingKind::combined, rhs_chunk, tile_sites};
}

std::string DslashStrategy::describe() const {
    switch (kind) {
    case BlockingKind::register_block: return "register(k=" + std::to_string(rhs_chunk) + ")";
    case BlockingKind::cache_block: return "cache(s=" + std::to_string(tile_sites) + ")";
    case BlockingKind::combined:
        return "combined(k=" + std::to_string(rhs_chunk) + ",s=" + std::to_string(tile_sites) + ")";
    }
    return "?";
}

std::string DslashConfig::describe() const { return strategy.describe() + (split_kernels ? "+split" : ""); }

TransferStats& TransferStats::operator+=(const TransferStats& o) noexcept {
    flops += o.flops;
    bytes_links += o.bytes_links;
    bytes_vectors_in += o.bytes_vectors_in;
    bytes_vectors_out += o.bytes_vectors_out;
    aux_flops += o.aux_flops;
    split_extra_bytes += o.split_extra_bytes;
    return *this;
}

TransferStats model_transfer_stats(std::int64_t volume, int n_rhs, LinkStorage naik_storage, Precision precision) {
    const std::int64_t p = bytes_per_real(precision);
    const std::int64_t n = n_rhs;
    TransferStats s;
    s.flops = volume * n * kDslashFlopsPerSite;
    s.bytes_links = volume * (8 * 18 + 8 * reals_per_link(naik_storage)) * p;
    s.bytes_vectors_in = volume * n * 16 * 6 * p;
    s.bytes_vectors_out = volume * n * 6 * p;
    return s;
}

HopWeights HopWeights::unit() {
    HopWeights w;
    for (auto& row : w.weight) row.fill(1.0);
    for (auto& row : w.enabled) row.fill(true);
    return w;
}

HopWeights HopWeights::chemical_potential(double mu_hat, int derivative_order) {
    if (derivative_order < 0) throw InvalidArgument("derivative order must be >= 0");
    HopWeights w = unit();
    if (derivative_order > 0) {
        for (int mu = 0; mu < 3; ++mu) w.enabled[static_cast<std::size_t>(mu)].fill(false);
    }
    for (int h = 0; h < kNumHops; ++h) {
        const double d = hop_displacement(static_cast<Hop>(h));
        w.weight[3][static_cast<std::size_t>(h)] = std::pow(d, derivative_order) * std::exp(d * mu_hat);
    }
    return w;
}

int HopWeights::enabled_count() const noexcept {
    int n = 0;
    for (const auto& row : enabled)
        for (bool e : row) n += e ? 1 : 0;
    return n;
}

namespace testing_hooks {

namespace {
std::atomic<bool> g_flip_backward_smeared{false};
}

void set_flip_backward_smeared(bool on) noexcept { g_flip_backward_smeared.store(on); }
bool flip_backward_smeared() noexcept { return g_flip_backward_smeared.load(); }

} // namespace testing_hooks

// ---------------------------------------------------------------------------
// Kernels

namespace {

enum class Pass { both, smeared_only, naik_accumulate };

template <typename T>
struct KernelContext {
    const std::int32_t* nb;
    const std::int8_t* phase;
    const T* x_links;
    const T* n_links;
    int naik_reals;
    std::int64_t volume;
    const std::int64_t* base;
    std::int64_t stride;
    const ColorField<T>* const* in;
    ColorField<T>* const* out;
    // hop sign (+1 forward, -1 backward) times hop weight
    std::array<std::array<T, kNumHops>, kNumDirections> coef;
    std::array<std::array<bool, kNumHops>, kNumDirections> enabled;
};

// Per-thread scratch in lane-major order: component c of rhs r sits at
// [c * k + r], so the loops over the rhs of a chunk vectorize.
template <typename T>
struct Lanes {
    int k;
    std::vector<T> acc_x;
    std::vector<T> acc_n;
    std::vector<T> v;
    std::vector<const T*> in;
    std::vector<T*> out;

    explicit Lanes(int chunk)
        : k(chunk), acc_x(6 * static_cast<std::size_t>(chunk)), acc_n(6 * static_cast<std::size_t>(chunk)),
          v(6 * static_cast<std::size_t>(chunk)), in(static_cast<std::size_t>(chunk)),
          out(static_cast<std::size_t>(chunk)) {}
};

template <typename T, bool R14>
inline void load_link(const T* p, T* m) noexcept {
    if constexpr (R14) {
        Complex3x3<T> l;
        reconstruct_r14_into(p, l);
        for (int i = 0; i < 9; ++i) {
            m[2 * i] = l.e[static_cast<std::size_t>(i)].real();
            m[2 * i + 1] = l.e[static_cast<std::size_t>(i)].imag();
        }
    } else {
        for (int i = 0; i < 18; ++i) m[i] = p[i];
    }
}

enum class Acc { add, sub, scaled };

template <typename T, Acc A>
inline void row_product(int nr, int k, const T* ar, const T* ai, const T* __restrict v, T coef, T* __restrict accr,
                        T* __restrict acci) noexcept {
    const T* v0r = v;
    const T* v0i = v + k;
    const T* v1r = v + 2 * k;
    const T* v1i = v + 3 * k;
    const T* v2r = v + 4 * k;
    const T* v2i = v + 5 * k;
    for (int r = 0; r < nr; ++r) {
        T re = ar[0] * v0r[r] - ai[0] * v0i[r];
        T im = ar[0] * v0i[r] + ai[0] * v0r[r];
        re += ar[1] * v1r[r] - ai[1] * v1i[r];
        im += ar[1] * v1i[r] + ai[1] * v1r[r];
        re += ar[2] * v2r[r] - ai[2] * v2i[r];
        im += ar[2] * v2i[r] + ai[2] * v2r[r];
        if constexpr (A == Acc::add) {
            accr[r] += re;
            acci[r] += im;
        } else if constexpr (A == Acc::sub) {
            accr[r] -= re;
            acci[r] -= im;
        } else {
            accr[r] += coef * re;
            acci[r] += coef * im;
        }
    }
}

// One hop for the rhs of the current chunk. Backward hops apply the daggered
// link stored at the neighbor.
template <typename T, int K, bool Weighted, bool Daggered>
inline void hop_term(const Lanes<T>& lanes, int nr, const T* m, std::int64_t b, std::int64_t st, T coef,
                     T* __restrict v, T* acc) noexcept {
    const int k = K > 0 ? K : lanes.k;
    const int lanes_used = K > 0 ? K : nr;
    for (int r = 0; r < nr; ++r) {
        const T* d = lanes.in[static_cast<std::size_t>(r)];
        for (int comp = 0; comp < 6; ++comp) v[comp * k + r] = d[b + comp * st];
    }
    for (int row = 0; row < 3; ++row) {
        T ar[3];
        T ai[3];
        for (int j = 0; j < 3; ++j) {
            if constexpr (Daggered) {
                ar[j] = m[2 * (3 * j + row)];
                ai[j] = -m[2 * (3 * j + row) + 1];
            } else {
                ar[j] = m[2 * (3 * row + j)];
                ai[j] = m[2 * (3 * row + j) + 1];
            }
        }
        T* accr = acc + 2 * row * k;
        T* acci = acc + (2 * row + 1) * k;
        if constexpr (Weighted) {
            row_product<T, Acc::scaled>(lanes_used, k, ar, ai, v, coef, accr, acci);
        } else if (coef > T{0}) {
            row_product<T, Acc::add>(lanes_used, k, ar, ai, v, coef, accr, acci);
        } else {
            row_product<T, Acc::sub>(lanes_used, k, ar, ai, v, coef, accr, acci);
        }
    }
}

template <typename T, int K, bool Weighted, bool NaikR14, Pass P>
void site_kernel(const KernelContext<T>& c, std::int64_t site, int nr, Lanes<T>& lanes) noexcept {
    constexpr bool do_smeared = P != Pass::naik_accumulate;
    constexpr bool do_naik = P != Pass::smeared_only;
    const int k = K > 0 ? K : lanes.k;
    // fixed-width chunks keep their scratch on the stack where it can live in registers
    constexpr int kLocal = K > 0 ? 6 * K : 1;
    alignas(64) T local_x[kLocal];
    alignas(64) T local_n[kLocal];
    alignas(64) T local_v[kLocal];
    T* acc_x = K > 0 ? local_x : lanes.acc_x.data();
    T* acc_n = K > 0 ? local_n : lanes.acc_n.data();
    T* v = K > 0 ? local_v : lanes.v.data();
    // padding lanes of a short chunk still go through the arithmetic; keep them finite
    if (K > 0 && nr < K)
        for (int i = 0; i < kLocal; ++i) local_v[i] = T{0};
    for (int comp = 0; comp < 6; ++comp)
        for (int r = 0; r < (K > 0 ? K : nr); ++r) {
            acc_x[comp * k + r] = T{0};
            acc_n[comp * k + r] = T{0};
        }
    const std::int64_t st = c.stride;
    T m[18];
    for (int mu = 0; mu < kNumDirections; ++mu) {
        const auto slot = (site * kNumDirections + mu) * kNumHops;
        const auto& coef = c.coef[static_cast<std::size_t>(mu)];
        const auto& on = c.enabled[static_cast<std::size_t>(mu)];
        if constexpr (do_smeared) {
            if (on[0]) {
                const auto nb = c.nb[slot + 0];
                load_link<T, false>(c.x_links + (mu * c.volume + site) * 18, m);
                hop_term<T, K, Weighted, false>(lanes, nr, m, c.base[nb], st, coef[0] * c.phase[slot + 0], v, acc_x);
            }
            if (on[1]) {
                const auto nb = c.nb[slot + 1];
                load_link<T, false>(c.x_links + (mu * c.volume + nb) * 18, m);
                hop_term<T, K, Weighted, true>(lanes, nr, m, c.base[nb], st, coef[1] * c.phase[slot + 1], v, acc_x);
            }
        }
        if constexpr (do_naik) {
            constexpr int nreals = NaikR14 ? 14 : 18;
            if (on[2]) {
                const auto nb = c.nb[slot + 2];
                load_link<T, NaikR14>(c.n_links + (mu * c.volume + site) * nreals, m);
                hop_term<T, K, Weighted, false>(lanes, nr, m, c.base[nb], st, coef[2] * c.phase[slot + 2], v, acc_n);
            }
            if (on[3]) {
                const auto nb = c.nb[slot + 3];
                load_link<T, NaikR14>(c.n_links + (mu * c.volume + nb) * nreals, m);
                hop_term<T, K, Weighted, true>(lanes, nr, m, c.base[nb], st, coef[3] * c.phase[slot + 3], v, acc_n);
            }
        }
    }
    const std::int64_t b = c.base[site];
    for (int r = 0; r < nr; ++r) {
        T* d = lanes.out[static_cast<std::size_t>(r)];
        for (int comp = 0; comp < 6; ++comp) {
            const std::int64_t o = b + comp * st;
            if constexpr (P == Pass::both) {
                d[o] = acc_x[comp * k + r] + acc_n[comp * k + r];
            } else if constexpr (P == Pass::smeared_only) {
                d[o] = acc_x[comp * k + r];
            } else {
                d[o] = d[o] + acc_n[comp * k + r];
            }
        }
    }
}

template <typename T, int K, bool Weighted, bool NaikR14, Pass P>
void run_lanes(const KernelContext<T>& c, int n_rhs, int rhs_chunk, std::int64_t tile_sites) {
    const std::int64_t n_tiles = (c.volume + tile_sites - 1) / tile_sites;
    const int chunk = std::min(rhs_chunk, n_rhs);
#pragma omp parallel
    {
        Lanes<T> lanes(chunk);
#pragma omp for schedule(static)
        for (std::int64_t tile = 0; tile < n_tiles; ++tile) {
            const std::int64_t s0 = tile * tile_sites;
            const std::int64_t s1 = std::min(c.volume, s0 + tile_sites);
            for (int r0 = 0; r0 < n_rhs; r0 += chunk) {
                const int nr = std::min(n_rhs, r0 + chunk) - r0;
                for (int r = 0; r < nr; ++r) {
                    lanes.in[static_cast<std::size_t>(r)] = c.in[r0 + r]->data().data();
                    lanes.out[static_cast<std::size_t>(r)] = c.out[r0 + r]->data().data();
                }
                for (std::int64_t s = s0; s < s1; ++s) site_kernel<T, K, Weighted, NaikR14, P>(c, s, nr, lanes);
            }
        }
    }
}

// Chunks up to 8 run with a compile-time lane count rounded up to a power of
// two; odd widths vectorize poorly, and the extra lanes are never stored.
template <typename T, bool Weighted, bool NaikR14, Pass P>
void run_pass(const KernelContext<T>& c, int n_rhs, int rhs_chunk, std::int64_t tile_sites) {
    const int chunk = std::min(rhs_chunk, n_rhs);
    if (chunk == 1) run_lanes<T, 1, Weighted, NaikR14, P>(c, n_rhs, rhs_chunk, tile_sites);
    else if (chunk == 2) run_lanes<T, 2, Weighted, NaikR14, P>(c, n_rhs, rhs_chunk, tile_sites);
    else if (chunk <= 4) run_lanes<T, 4, Weighted, NaikR14, P>(c, n_rhs, rhs_chunk, tile_sites);
    else if (chunk <= 8) run_lanes<T, 8, Weighted, NaikR14, P>(c, n_rhs, rhs_chunk, tile_sites);
    else run_lanes<T, 0, Weighted, NaikR14, P>(c, n_rhs, rhs_chunk, tile_sites);
}

template <typename T, bool Weighted, bool NaikR14>
void dispatch_passes(const KernelContext<T>& c, int n_rhs, int chunk, std::int64_t tile, bool split) {
    if (split) {
        run_pass<T, Weighted, NaikR14, Pass::smeared_only>(c, n_rhs, chunk, tile);
        run_pass<T, Weighted, NaikR14, Pass::naik_accumulate>(c, n_rhs, chunk, tile);
    } else {
        run_pass<T, Weighted, NaikR14, Pass::both>(c, n_rhs, chunk, tile);
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Dslash

template <typename T>
Dslash<T>::Dslash(std::shared_ptr<const LinkField<T>> smeared, std::shared_ptr<const LinkField<T>> naik,
                  DslashConfig config)
    : smeared_(std::move(smeared)), naik_(std::move(naik)) {
    if (!smeared_ || !naik_) throw InvalidArgument("Dslash needs both link fields");
    if (smeared_->role() != LinkRole::smeared_x || smeared_->storage() != LinkStorage::full18) {
        throw InvalidArgument("first link field must be the smeared field in full18 storage");
    }
    if (naik_->role() != LinkRole::naik_n) throw InvalidArgument("second link field must be the Naik field");
    if (!(smeared_->geometry() == naik_->geometry())) throw ShapeMismatch("smeared and Naik fields differ in geometry");
    neighbors_ = std::make_shared<const NeighborTable>(smeared_->geometry());
    set_config(config);
}

template <typename T>
void Dslash<T>::set_config(const DslashConfig& config) {
    if (config.strategy.rhs_chunk < 1) throw InvalidArgument("rhs_chunk must be >= 1");
    if (config.strategy.tile_sites < 1) throw InvalidArgument("tile_sites must be >= 1");
    config_ = config;
}

template <typename T>
void Dslash<T>::validate(std::span<const ColorField<T>* const> in, std::span<ColorField<T>* const> out) const {
    if (in.empty()) throw InvalidArgument("Dslash needs at least one right-hand side");
    if (in.size() != out.size()) {
        throw ShapeMismatch("input has " + std::to_string(in.size()) + " rhs, output has " + std::to_string(out.size()));
    }
    const auto layout = in[0]->layout();
    for (std::size_t i = 0; i < in.size(); ++i) {
        for (const ColorField<T>* f : {in[i], static_cast<const ColorField<T>*>(out[i])}) {
            if (!(f->geometry() == geometry())) throw ShapeMismatch("vector geometry differs from link geometry");
            if (!(f->layout() == layout)) throw ShapeMismatch("all vectors must share one layout");
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t j = 0; j < in.size(); ++j) {
            if (out[i]->data().data() == in[j]->data().data()) throw InvalidArgument("output aliases input");
        }
        for (std::size_t j = i + 1; j < out.size(); ++j) {
            if (out[i]->data().data() == out[j]->data().data()) throw InvalidArgument("output rhs alias each other");
        }
    }
}

template <typename T>
TransferStats Dslash<T>::stats_for(int n_rhs, const HopWeights& weights) const {
    if (!config_.count_transfers) return {};
    std::int64_t tx = 0;
    std::int64_t tn = 0;
    for (int mu = 0; mu < kNumDirections; ++mu) {
        const auto& on = weights.enabled[static_cast<std::size_t>(mu)];
        tx += (on[0] ? 1 : 0) + (on[1] ? 1 : 0);
        tn += (on[2] ? 1 : 0) + (on[3] ? 1 : 0);
    }
    const std::int64_t terms = tx + tn;
    const std::int64_t v = geometry().volume();
    const std::int64_t n = n_rhs;
    const std::int64_t p = sizeof(T);
    TransferStats s;
    if (terms > 0) s.flops = v * n * (terms * kFlopsMatVec + (terms - 1) * kFlopsColorAdd);
    s.bytes_links = v * (tx * 18 + tn * reals_per_link(naik_->storage())) * p;
    s.bytes_vectors_in = v * n * terms * 6 * p;
    s.bytes_vectors_out = v * n * 6 * p;
    if (naik_->storage() == LinkStorage::r14) {
        const std::int64_t chunk = std::min(config_.strategy.rhs_chunk, n_rhs);
        s.aux_flops += v * tn * ((n + chunk - 1) / chunk) * kFlopsR14Reconstruct;
    }
    if (config_.split_kernels) s.split_extra_bytes = v * n * 6 * p;
    return s;
}

template <typename T>
TransferStats Dslash<T>::apply(std::span<const ColorField<T>* const> in, std::span<ColorField<T>* const> out,
                               const HopWeights* weights) const {
    validate(in, out);
    const HopWeights unit = HopWeights::unit();
    const HopWeights& w = weights ? *weights : unit;

    KernelContext<T> c{};
    c.nb = neighbors_->index_data();
    c.phase = neighbors_->phase_data();
    c.x_links = smeared_->data().data();
    c.n_links = naik_->data().data();
    c.naik_reals = naik_->reals_per_link();
    c.volume = geometry().volume();
    c.base = in[0]->index()->base_data();
    c.stride = in[0]->index()->stride();
    c.in = in.data();
    c.out = out.data();
    const bool flip = testing_hooks::flip_backward_smeared();
    for (int mu = 0; mu < kNumDirections; ++mu) {
        for (int h = 0; h < kNumHops; ++h) {
            const double sign = (h % 2 == 0) ? 1.0 : -1.0;
            const double hook = (h == 1 && flip) ? -1.0 : 1.0;
            const auto m = static_cast<std::size_t>(mu);
            const auto hh = static_cast<std::size_t>(h);
            c.coef[m][hh] = static_cast<T>(sign * hook * w.weight[m][hh]);
            c.enabled[m][hh] = w.enabled[m][hh];
        }
    }

    const int n = static_cast<int>(in.size());
    const auto& st = config_.strategy;
    const int chunk = st.kind == BlockingKind::cache_block ? 1 : st.rhs_chunk;
    const std::int64_t tile = st.kind == BlockingKind::register_block ? 1 : st.tile_sites;
    const bool r14 = naik_->storage() == LinkStorage::r14;
    const bool weighted = weights != nullptr;
    if (weighted) {
        if (r14) dispatch_passes<T, true, true>(c, n, chunk, tile, config_.split_kernels);
        else dispatch_passes<T, true, false>(c, n, chunk, tile, config_.split_kernels);
    } else {
        if (r14) dispatch_passes<T, false, true>(c, n, chunk, tile, config_.split_kernels);
        else dispatch_passes<T, false, false>(c, n, chunk, tile, config_.split_kernels);
    }

    TransferStats s = stats_for(n, w);
    if (weighted && config_.count_transfers) {
        s.aux_flops += geometry().volume() * n * w.enabled_count() * 6;
    }
    return s;
}

template <typename T>
TransferStats Dslash<T>::apply(const VectorBundle<T>& in, VectorBundle<T>& out) const {
    if (in.n_rhs() != out.n_rhs()) throw ShapeMismatch("input and output bundles differ in n_rhs");
    const auto pin = in.pointers();
    const auto pout = out.pointers();
    return apply(std::span<const ColorField<T>* const>(pin), std::span<ColorField<T>* const>(pout));
}

template <typename T>
TransferStats Dslash<T>::apply_weighted(const HopWeights& weights, const VectorBundle<T>& in,
                                        VectorBundle<T>& out) const {
    if (in.n_rhs() != out.n_rhs()) throw ShapeMismatch("input and output bundles differ in n_rhs");
    const auto pin = in.pointers();
    const auto pout = out.pointers();
    return apply(std::span<const ColorField<T>* const>(pin), std::span<ColorField<T>* const>(pout), &weights);
}

template <typename T>
TransferStats Dslash<T>::apply_daggered(const VectorBundle<T>& in, VectorBundle<T>& out) const {
    TransferStats s = apply(in, out);
    for (int i = 0; i < out.n_rhs(); ++i) {
        for (T& x : out[i].data()) x = -x;
    }
    if (config_.count_transfers) s.aux_flops += geometry().volume() * out.n_rhs() * 6;
    return s;
}

template class Dslash<float>;
template class Dslash<double>;

} // namespace hisq
