#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hisq/algebra.hpp"
#include "hisq/lattice.hpp"

namespace hisq {

enum class Precision : std::uint8_t { f32 = 0, f64 = 1 };

template <typename T>
inline constexpr Precision precision_of = sizeof(T) == 4 ? Precision::f32 : Precision::f64;

[[nodiscard]] constexpr int bytes_per_real(Precision p) noexcept { return p == Precision::f32 ? 4 : 8; }
[[nodiscard]] std::string_view to_string(Precision p) noexcept;
[[nodiscard]] Precision parse_precision(std::string_view text);

enum class LinkStorage : std::uint8_t { full18 = 0, r14 = 1 };
enum class LinkRole : std::uint8_t { smeared_x = 0, naik_n = 1 };

[[nodiscard]] constexpr int reals_per_link(LinkStorage s) noexcept { return s == LinkStorage::full18 ? 18 : 14; }
[[nodiscard]] std::string_view to_string(LinkStorage s) noexcept;
/// Accepts "full", "full18" and "r14".
[[nodiscard]] LinkStorage parse_storage(std::string_view text);

/// Per-direction, per-site 3x3 links stored direction-major:
/// reals of link (mu, site) start at (mu * V + site) * reals_per_link.
///
/// Smeared links must be stored in full. A fresh full18 field is all zero; a
/// fresh r14 field holds identity links, because the zero matrix has no r14
/// representation.
template <typename T>
class LinkField {
public:
    LinkField(const LatticeGeometry& geom, LinkRole role, LinkStorage storage = LinkStorage::full18);

    [[nodiscard]] const LatticeGeometry& geometry() const noexcept { return geom_; }
    [[nodiscard]] LinkRole role() const noexcept { return role_; }
    [[nodiscard]] LinkStorage storage() const noexcept { return storage_; }
    [[nodiscard]] int reals_per_link() const noexcept { return hisq::reals_per_link(storage_); }

    /// Decompresses r14 links.
    [[nodiscard]] Complex3x3<T> link(int mu, std::int64_t site) const;
    /// Compresses for r14 storage; throws if the matrix is not a scaled unitary.
    void set_link(int mu, std::int64_t site, const Complex3x3<T>& m);

    [[nodiscard]] const T* raw(int mu, std::int64_t site) const noexcept {
        return data_.data() + (mu * geom_.volume() + site) * reals_per_link();
    }
    [[nodiscard]] std::span<const T> data() const noexcept { return data_; }
    [[nodiscard]] std::span<T> data() noexcept { return data_; }

    /// Same links in another storage scheme (r14 only for Naik fields).
    [[nodiscard]] LinkField with_storage(LinkStorage target) const;

private:
    LatticeGeometry geom_;
    LinkRole role_;
    LinkStorage storage_;
    std::vector<T> data_;
};

/// soa: component-major, all sites of one real component contiguous.
/// fused(W): sites of one parity along an x-row are cut into runs of W, and the
/// 6 real components of a run are stored as 6 consecutive W-lane blocks.
struct VectorLayout {
    int fusion_width = 0; // 0 means plain soa

    [[nodiscard]] static constexpr VectorLayout soa() noexcept { return {0}; }
    [[nodiscard]] static VectorLayout fused(int width);
    [[nodiscard]] bool is_fused() const noexcept { return fusion_width != 0; }
    [[nodiscard]] std::string name() const;
    /// "soa", "fused4", "fused8" or "fused16".
    [[nodiscard]] static VectorLayout parse(std::string_view text);

    friend bool operator==(const VectorLayout&, const VectorLayout&) = default;
};

/// Offset of real component `comp` (0..5, re/im interleaved per color) of
/// `site` is base(site) + comp * stride().
class LayoutIndex {
public:
    /// Throws InvalidArgument unless the fusion width divides Nx / 2.
    LayoutIndex(const LatticeGeometry& geom, VectorLayout layout);

    [[nodiscard]] const LatticeGeometry& geometry() const noexcept { return geom_; }
    [[nodiscard]] VectorLayout layout() const noexcept { return layout_; }
    [[nodiscard]] std::int64_t base(std::int64_t site) const noexcept {
        return base_[static_cast<std::size_t>(site)];
    }
    [[nodiscard]] std::int64_t stride() const noexcept { return stride_; }
    [[nodiscard]] const std::int64_t* base_data() const noexcept { return base_.data(); }

private:
    LatticeGeometry geom_;
    VectorLayout layout_;
    std::int64_t stride_;
    std::vector<std::int64_t> base_;
};

[[nodiscard]] std::shared_ptr<const LayoutIndex> make_layout_index(const LatticeGeometry& geom, VectorLayout layout);

/// One right-hand side: a color vector per site.
template <typename T>
class ColorField {
public:
    explicit ColorField(const LatticeGeometry& geom, VectorLayout layout = VectorLayout::soa());
    explicit ColorField(std::shared_ptr<const LayoutIndex> index);

    [[nodiscard]] const LatticeGeometry& geometry() const noexcept { return index_->geometry(); }
    [[nodiscard]] VectorLayout layout() const noexcept { return index_->layout(); }
    [[nodiscard]] const std::shared_ptr<const LayoutIndex>& index() const noexcept { return index_; }
    [[nodiscard]] std::int64_t volume() const noexcept { return index_->geometry().volume(); }

    [[nodiscard]] ColorVector<T> site(std::int64_t s) const noexcept {
        const auto b = index_->base(s);
        const auto st = index_->stride();
        ColorVector<T> v;
        for (int c = 0; c < 3; ++c) v[c] = {data_[b + (2 * c) * st], data_[b + (2 * c + 1) * st]};
        return v;
    }
    void set_site(std::int64_t s, const ColorVector<T>& v) noexcept {
        const auto b = index_->base(s);
        const auto st = index_->stride();
        for (int c = 0; c < 3; ++c) {
            data_[b + (2 * c) * st] = v[c].real();
            data_[b + (2 * c + 1) * st] = v[c].imag();
        }
    }

    [[nodiscard]] std::span<const T> data() const noexcept { return data_; }
    [[nodiscard]] std::span<T> data() noexcept { return data_; }

    void set_zero() noexcept;

private:
    std::shared_ptr<const LayoutIndex> index_;
    std::vector<T> data_;
};

/// n right-hand sides sharing geometry and layout.
template <typename T>
class VectorBundle {
public:
    VectorBundle(const LatticeGeometry& geom, int n_rhs, VectorLayout layout = VectorLayout::soa());
    VectorBundle(std::shared_ptr<const LayoutIndex> index, int n_rhs);

    [[nodiscard]] int n_rhs() const noexcept { return static_cast<int>(rhs_.size()); }
    [[nodiscard]] const LatticeGeometry& geometry() const noexcept { return index_->geometry(); }
    [[nodiscard]] VectorLayout layout() const noexcept { return index_->layout(); }
    [[nodiscard]] const std::shared_ptr<const LayoutIndex>& index() const noexcept { return index_; }

    [[nodiscard]] ColorField<T>& operator[](int i) { return rhs_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] const ColorField<T>& operator[](int i) const { return rhs_[static_cast<std::size_t>(i)]; }

    [[nodiscard]] std::vector<ColorField<T>*> pointers();
    [[nodiscard]] std::vector<const ColorField<T>*> pointers() const;

private:
    std::shared_ptr<const LayoutIndex> index_;
    std::vector<ColorField<T>> rhs_;
};

enum class NoiseKind : std::uint8_t { gaussian, z2 };
[[nodiscard]] NoiseKind parse_noise(std::string_view text);

/// Smeared fields get random SU(3) links, Naik fields scale * SU(3).
/// Deterministic for a given seed.
template <typename T>
void fill_random_links(LinkField<T>& field, std::uint64_t seed, double scale = 1.0);

/// Fills one field from random stream (seed, stream). Values are drawn in
/// lexicographic site order, so the content does not depend on the layout.
/// gaussian: every real component standard normal. z2: real parts +-1, imaginary 0.
template <typename T>
void fill_random_field(ColorField<T>& field, std::uint64_t seed, std::uint64_t stream, NoiseKind kind);

/// rhs i uses stream i.
template <typename T>
void fill_random_rhs(VectorBundle<T>& bundle, std::uint64_t seed, NoiseKind kind);

template <typename T>
[[nodiscard]] ColorField<T> convert_layout(const ColorField<T>& field, VectorLayout target);

template <typename T>
[[nodiscard]] VectorBundle<T> convert_layout(const VectorBundle<T>& bundle, VectorLayout target);

} // namespace hisq
