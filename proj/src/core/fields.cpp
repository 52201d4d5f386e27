#include "hisq/fields.hpp"

#include <algorithm>

#include "hisq/error.hpp"

namespace hisq {

std::string_view to_string(Precision p) noexcept { return p == Precision::f32 ? "f32" : "f64"; }

Precision parse_precision(std::string_view text) {
    if (text == "f32" || text == "single") return Precision::f32;
    if (text == "f64" || text == "double") return Precision::f64;
    throw InvalidArgument("unknown precision '" + std::string(text) + "' (expected f32|f64)");
}

std::string_view to_string(LinkStorage s) noexcept { return s == LinkStorage::full18 ? "full" : "r14"; }

LinkStorage parse_storage(std::string_view text) {
    if (text == "full" || text == "full18") return LinkStorage::full18;
    if (text == "r14") return LinkStorage::r14;
    throw InvalidArgument("unknown link storage '" + std::string(text) + "' (expected full|r14)");
}

NoiseKind parse_noise(std::string_view text) {
    if (text == "z2") return NoiseKind::z2;
    if (text == "gaussian") return NoiseKind::gaussian;
    throw InvalidArgument("unknown noise '" + std::string(text) + "' (expected z2|gaussian)");
}

// ---------------------------------------------------------------------------
// LinkField

template <typename T>
LinkField<T>::LinkField(const LatticeGeometry& geom, LinkRole role, LinkStorage storage)
    : geom_(geom), role_(role), storage_(storage) {
    if (role == LinkRole::smeared_x && storage != LinkStorage::full18) {
        throw InvalidArgument("smeared links are not unitary and must use full18 storage");
    }
    const auto n_links = static_cast<std::size_t>(kNumDirections * geom.volume());
    data_.assign(n_links * static_cast<std::size_t>(reals_per_link()), T{0});
    if (storage == LinkStorage::r14) {
        const auto id = compress_r14(Complex3x3<T>::identity());
        for (std::size_t l = 0; l < n_links; ++l) std::copy(id.v.begin(), id.v.end(), data_.begin() + l * 14);
    }
}

template <typename T>
Complex3x3<T> LinkField<T>::link(int mu, std::int64_t site) const {
    const T* p = raw(mu, site);
    Complex3x3<T> m;
    if (storage_ == LinkStorage::full18) {
        for (int i = 0; i < 9; ++i) m.e[static_cast<std::size_t>(i)] = {p[2 * i], p[2 * i + 1]};
    } else {
        reconstruct_r14_into(p, m);
    }
    return m;
}

template <typename T>
void LinkField<T>::set_link(int mu, std::int64_t site, const Complex3x3<T>& m) {
    T* p = data_.data() + (mu * geom_.volume() + site) * reals_per_link();
    if (storage_ == LinkStorage::full18) {
        for (int i = 0; i < 9; ++i) {
            p[2 * i] = m.e[static_cast<std::size_t>(i)].real();
            p[2 * i + 1] = m.e[static_cast<std::size_t>(i)].imag();
        }
    } else {
        const auto c = compress_r14(m);
        std::copy(c.v.begin(), c.v.end(), p);
    }
}

template <typename T>
LinkField<T> LinkField<T>::with_storage(LinkStorage target) const {
    LinkField<T> out(geom_, role_, target);
    for (int mu = 0; mu < kNumDirections; ++mu)
        for (std::int64_t s = 0; s < geom_.volume(); ++s) out.set_link(mu, s, link(mu, s));
    return out;
}

// ---------------------------------------------------------------------------
// Layouts

VectorLayout VectorLayout::fused(int width) {
    if (width != 4 && width != 8 && width != 16) {
        throw InvalidArgument("fusion width must be 4, 8 or 16, got " + std::to_string(width));
    }
    return {width};
}

std::string VectorLayout::name() const { return is_fused() ? "fused" + std::to_string(fusion_width) : "soa"; }

VectorLayout VectorLayout::parse(std::string_view text) {
    if (text == "soa") return soa();
    if (text == "fused4") return fused(4);
    if (text == "fused8") return fused(8);
    if (text == "fused16") return fused(16);
    throw InvalidArgument("unknown layout '" + std::string(text) + "' (expected soa|fused4|fused8|fused16)");
}

LayoutIndex::LayoutIndex(const LatticeGeometry& geom, VectorLayout layout)
    : geom_(geom), layout_(layout), stride_(0), base_(static_cast<std::size_t>(geom.volume())) {
    if (!layout.is_fused()) {
        stride_ = geom.volume();
        for (std::int64_t s = 0; s < geom.volume(); ++s) base_[static_cast<std::size_t>(s)] = s;
        return;
    }
    const int w = layout.fusion_width;
    const int half_x = geom.extent(0) / 2;
    if (half_x % w != 0) {
        throw InvalidArgument("fusion width " + std::to_string(w) + " does not divide Nx/2 = " +
                              std::to_string(half_x));
    }
    const int runs = half_x / w;
    stride_ = w;
    const auto& d = geom.dims();
    for (std::int64_t s = 0; s < geom.volume(); ++s) {
        const SiteCoords c = geom.coords(s);
        const int p = static_cast<int>(parity(c));
        // Sites of one parity on an x-row have x = 2k or 2k+1, so x/2 = k numbers them.
        const int k = c[0] / 2;
        const std::int64_t row = ((static_cast<std::int64_t>(p) * d[3] + c[3]) * d[2] + c[2]) * d[1] + c[1];
        const std::int64_t block = row * runs + k / w;
        base_[static_cast<std::size_t>(s)] = block * 6 * w + k % w;
    }
}

std::shared_ptr<const LayoutIndex> make_layout_index(const LatticeGeometry& geom, VectorLayout layout) {
    return std::make_shared<const LayoutIndex>(geom, layout);
}

// ---------------------------------------------------------------------------
// ColorField / VectorBundle

template <typename T>
ColorField<T>::ColorField(const LatticeGeometry& geom, VectorLayout layout)
    : ColorField(make_layout_index(geom, layout)) {}

template <typename T>
ColorField<T>::ColorField(std::shared_ptr<const LayoutIndex> index)
    : index_(std::move(index)), data_(static_cast<std::size_t>(6 * index_->geometry().volume()), T{0}) {}

template <typename T>
void ColorField<T>::set_zero() noexcept {
    std::fill(data_.begin(), data_.end(), T{0});
}

template <typename T>
VectorBundle<T>::VectorBundle(const LatticeGeometry& geom, int n_rhs, VectorLayout layout)
    : VectorBundle(make_layout_index(geom, layout), n_rhs) {}

template <typename T>
VectorBundle<T>::VectorBundle(std::shared_ptr<const LayoutIndex> index, int n_rhs) : index_(std::move(index)) {
    if (n_rhs < 1) throw InvalidArgument("a vector bundle needs at least one right-hand side");
    rhs_.reserve(static_cast<std::size_t>(n_rhs));
    for (int i = 0; i < n_rhs; ++i) rhs_.emplace_back(index_);
}

template <typename T>
std::vector<ColorField<T>*> VectorBundle<T>::pointers() {
    std::vector<ColorField<T>*> p;
    for (auto& f : rhs_) p.push_back(&f);
    return p;
}

template <typename T>
std::vector<const ColorField<T>*> VectorBundle<T>::pointers() const {
    std::vector<const ColorField<T>*> p;
    for (const auto& f : rhs_) p.push_back(&f);
    return p;
}

// ---------------------------------------------------------------------------
// Random fills and conversion

template <typename T>
void fill_random_links(LinkField<T>& field, std::uint64_t seed, double scale) {
    if (!(scale > 0.0)) throw InvalidArgument("link scale must be positive");
    const bool naik = field.role() == LinkRole::naik_n;
    Rng rng(seed, naik ? 1 : 0);
    const auto& g = field.geometry();
    for (int mu = 0; mu < kNumDirections; ++mu) {
        for (std::int64_t s = 0; s < g.volume(); ++s) {
            auto u = random_su3<double>(rng);
            if (naik) {
                for (auto& z : u.e) z *= scale;
            }
            field.set_link(mu, s, convert<T>(u));
        }
    }
}

template <typename T>
void fill_random_field(ColorField<T>& field, std::uint64_t seed, std::uint64_t stream, NoiseKind kind) {
    Rng rng(seed, stream);
    for (std::int64_t s = 0; s < field.volume(); ++s) {
        ColorVector<T> v;
        for (int c = 0; c < 3; ++c) {
            if (kind == NoiseKind::z2) {
                v[c] = {static_cast<T>(rng.sign()), T{0}};
            } else {
                const double re = rng.normal();
                const double im = rng.normal();
                v[c] = {static_cast<T>(re), static_cast<T>(im)};
            }
        }
        field.set_site(s, v);
    }
}

template <typename T>
void fill_random_rhs(VectorBundle<T>& bundle, std::uint64_t seed, NoiseKind kind) {
    for (int i = 0; i < bundle.n_rhs(); ++i) fill_random_field(bundle[i], seed, static_cast<std::uint64_t>(i), kind);
}

template <typename T>
ColorField<T> convert_layout(const ColorField<T>& field, VectorLayout target) {
    ColorField<T> out(field.geometry(), target);
    for (std::int64_t s = 0; s < field.volume(); ++s) out.set_site(s, field.site(s));
    return out;
}

template <typename T>
VectorBundle<T> convert_layout(const VectorBundle<T>& bundle, VectorLayout target) {
    VectorBundle<T> out(bundle.geometry(), bundle.n_rhs(), target);
    for (int i = 0; i < bundle.n_rhs(); ++i)
        for (std::int64_t s = 0; s < bundle.geometry().volume(); ++s) out[i].set_site(s, bundle[i].site(s));
    return out;
}

#define HISQ_INSTANTIATE_FIELDS(T)                                                                  \
    template class LinkField<T>;                                                                    \
    template class ColorField<T>;                                                                   \
    template class VectorBundle<T>;                                                                 \
    template void fill_random_links<T>(LinkField<T>&, std::uint64_t, double);                       \
    template void fill_random_field<T>(ColorField<T>&, std::uint64_t, std::uint64_t, NoiseKind);    \
    template void fill_random_rhs<T>(VectorBundle<T>&, std::uint64_t, NoiseKind);                   \
    template ColorField<T> convert_layout<T>(const ColorField<T>&, VectorLayout);                   \
    template VectorBundle<T> convert_layout<T>(const VectorBundle<T>&, VectorLayout);

HISQ_INSTANTIATE_FIELDS(float)
HISQ_INSTANTIATE_FIELDS(double)

} // namespace hisq
