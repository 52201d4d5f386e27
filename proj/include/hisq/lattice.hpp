#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hisq {

enum class BoundaryCondition : std::uint8_t { periodic, antiperiodic };

enum class Parity : std::uint8_t { even = 0, odd = 1 };

inline constexpr int kNumDirections = 4;

/// Hops used by the staggered stencil, in the pinned accumulation order.
enum class Hop : std::uint8_t { forward1 = 0, backward1 = 1, forward3 = 2, backward3 = 3 };
inline constexpr int kNumHops = 4;

struct SiteCoords {
    std::array<int, 4> x{}; // (x, y, z, t)

    constexpr int operator[](int mu) const { return x[static_cast<std::size_t>(mu)]; }
    constexpr int& operator[](int mu) { return x[static_cast<std::size_t>(mu)]; }
    friend constexpr bool operator==(const SiteCoords&, const SiteCoords&) = default;
};

/// 4D hypercubic lattice. Every extent must be even and at least 4 so that a
/// distance-3 hop never folds back onto the opposite distance-1 hop through the
/// same link and the even/odd decomposition is exact. With an extent of exactly
/// 4 the +3 hop lands on the same site as the -1 hop, but through a Naik link,
/// which is still a distinct matrix element contribution.
class LatticeGeometry {
public:
    LatticeGeometry(std::array<int, 4> dims,
                    BoundaryCondition temporal_bc = BoundaryCondition::antiperiodic);

    /// Parses "NXxNYxNZxNT", e.g. "32x32x32x8".
    static LatticeGeometry parse(std::string_view text,
                                 BoundaryCondition temporal_bc = BoundaryCondition::antiperiodic);

    [[nodiscard]] const std::array<int, 4>& dims() const noexcept { return dims_; }
    [[nodiscard]] int extent(int mu) const noexcept { return dims_[static_cast<std::size_t>(mu)]; }
    [[nodiscard]] std::int64_t volume() const noexcept { return volume_; }
    [[nodiscard]] BoundaryCondition temporal_bc() const noexcept { return temporal_bc_; }

    [[nodiscard]] std::int64_t site_index(const SiteCoords& c) const;
    [[nodiscard]] SiteCoords coords(std::int64_t index) const;

    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const LatticeGeometry&, const LatticeGeometry&) = default;

private:
    std::array<int, 4> dims_;
    std::int64_t volume_;
    BoundaryCondition temporal_bc_;
};

[[nodiscard]] constexpr Parity parity(const SiteCoords& c) noexcept {
    return ((c.x[0] + c.x[1] + c.x[2] + c.x[3]) % 2 == 0) ? Parity::even : Parity::odd;
}

/// Distance of a hop along its direction (+1, -1, +3 or -3).
[[nodiscard]] constexpr int hop_displacement(Hop h) noexcept {
    switch (h) {
    case Hop::forward1: return 1;
    case Hop::backward1: return -1;
    case Hop::forward3: return 3;
    case Hop::backward3: return -3;
    }
    return 0;
}

/// Neighbor indices and boundary phases for all four hops in all four
/// directions. Entry layout is [site][mu][hop].
class NeighborTable {
public:
    explicit NeighborTable(const LatticeGeometry& geom);

    [[nodiscard]] const LatticeGeometry& geometry() const noexcept { return geom_; }

    [[nodiscard]] std::int32_t neighbor(std::int64_t site, int mu, Hop h) const noexcept {
        return index_[slot(site, mu, h)];
    }
    /// +1 or -1; -1 only for antiperiodic time when the hop crosses t = Nt-1 -> 0.
    [[nodiscard]] int phase(std::int64_t site, int mu, Hop h) const noexcept {
        return phase_[slot(site, mu, h)];
    }

    /// Raw [site][mu][hop] arrays for kernels.
    [[nodiscard]] const std::int32_t* index_data() const noexcept { return index_.data(); }
    [[nodiscard]] const std::int8_t* phase_data() const noexcept { return phase_.data(); }

private:
    [[nodiscard]] static std::size_t slot(std::int64_t site, int mu, Hop h) noexcept {
        return static_cast<std::size_t>((site * kNumDirections + mu) * kNumHops + static_cast<int>(h));
    }

    LatticeGeometry geom_;
    std::vector<std::int32_t> index_;
    std::vector<std::int8_t> phase_;
};

[[nodiscard]] NeighborTable build_neighbor_table(const LatticeGeometry& geom);

} // namespace hisq
