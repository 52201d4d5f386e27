#include "hisq/lattice.hpp"

#include <charconv>
#include <limits>

#include "hisq/error.hpp"

namespace hisq {

LatticeGeometry::LatticeGeometry(std::array<int, 4> dims, BoundaryCondition temporal_bc)
    : dims_(dims), volume_(1), temporal_bc_(temporal_bc) {
    for (int mu = 0; mu < kNumDirections; ++mu) {
        const int n = dims_[static_cast<std::size_t>(mu)];
        if (n < 4 || n % 2 != 0) {
            throw InvalidArgument("lattice extent " + std::to_string(n) + " in direction " +
                                  std::to_string(mu) + " must be even and >= 4");
        }
        volume_ *= n;
    }
    if (volume_ > std::numeric_limits<std::int32_t>::max()) {
        throw InvalidArgument("lattice volume exceeds 32-bit site indexing");
    }
}

LatticeGeometry LatticeGeometry::parse(std::string_view text, BoundaryCondition temporal_bc) {
    std::array<int, 4> dims{};
    std::size_t pos = 0;
    for (int mu = 0; mu < 4; ++mu) {
        const std::size_t end = (mu < 3) ? text.find('x', pos) : text.size();
        if (end == std::string_view::npos) {
            throw InvalidArgument("lattice must be given as NXxNYxNZxNT, got '" + std::string(text) + "'");
        }
        const auto token = text.substr(pos, end - pos);
        int value = 0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || ptr != token.data() + token.size()) {
            throw InvalidArgument("bad lattice extent '" + std::string(token) + "'");
        }
        dims[static_cast<std::size_t>(mu)] = value;
        pos = end + 1;
    }
    return LatticeGeometry(dims, temporal_bc);
}

std::int64_t LatticeGeometry::site_index(const SiteCoords& c) const {
    for (int mu = 0; mu < 4; ++mu) {
        if (c[mu] < 0 || c[mu] >= extent(mu)) {
            throw InvalidArgument("coordinate " + std::to_string(c[mu]) + " out of range in direction " +
                                  std::to_string(mu));
        }
    }
    return c[0] + std::int64_t{dims_[0]} * (c[1] + std::int64_t{dims_[1]} * (c[2] + std::int64_t{dims_[2]} * c[3]));
}

SiteCoords LatticeGeometry::coords(std::int64_t index) const {
    if (index < 0 || index >= volume_) {
        throw InvalidArgument("site index " + std::to_string(index) + " out of range");
    }
    SiteCoords c;
    for (int mu = 0; mu < 4; ++mu) {
        c[mu] = static_cast<int>(index % dims_[static_cast<std::size_t>(mu)]);
        index /= dims_[static_cast<std::size_t>(mu)];
    }
    return c;
}

std::string LatticeGeometry::to_string() const {
    return std::to_string(dims_[0]) + "x" + std::to_string(dims_[1]) + "x" + std::to_string(dims_[2]) + "x" +
           std::to_string(dims_[3]);
}

NeighborTable::NeighborTable(const LatticeGeometry& geom)
    : geom_(geom),
      index_(static_cast<std::size_t>(geom.volume()) * kNumDirections * kNumHops),
      phase_(index_.size()) {
    const bool antiperiodic = geom.temporal_bc() == BoundaryCondition::antiperiodic;
    for (std::int64_t site = 0; site < geom.volume(); ++site) {
        const SiteCoords c = geom.coords(site);
        for (int mu = 0; mu < kNumDirections; ++mu) {
            const int n = geom.extent(mu);
            for (int h = 0; h < kNumHops; ++h) {
                const Hop hop = static_cast<Hop>(h);
                const int moved = c[mu] + hop_displacement(hop);
                // |displacement| <= 3 < n, so the path wraps at most once.
                const bool wraps = moved < 0 || moved >= n;
                SiteCoords nb = c;
                nb[mu] = (moved + n) % n;
                const auto s = slot(site, mu, hop);
                index_[s] = static_cast<std::int32_t>(geom.site_index(nb));
                phase_[s] = (antiperiodic && mu == 3 && wraps) ? std::int8_t{-1} : std::int8_t{1};
            }
        }
    }
}

NeighborTable build_neighbor_table(const LatticeGeometry& geom) { return NeighborTable(geom); }

} // namespace hisq
