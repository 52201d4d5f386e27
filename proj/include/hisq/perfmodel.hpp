#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hisq/fields.hpp"

namespace hisq {

/// Idealized traffic model of one Dslash site update for n rhs: links are
/// read once, 16 neighbor vectors and one output vector move per rhs.
struct CostModel {
    std::int64_t flops_per_site_per_rhs = 1146;
    int smeared_reals = 18;
    int naik_reals_full = 18;
    int naik_reals_r14 = 14;
    int links_per_kind = 8;
    int vectors_per_rhs = 16 + 1;

    [[nodiscard]] int naik_reals(LinkStorage s) const noexcept {
        return s == LinkStorage::full18 ? naik_reals_full : naik_reals_r14;
    }
    [[nodiscard]] double link_bytes(LinkStorage s, Precision p) const noexcept;
    [[nodiscard]] double vector_bytes_per_rhs(Precision p) const noexcept;
    [[nodiscard]] double arithmetic_intensity(int n_rhs, LinkStorage s, Precision p = Precision::f32) const;
    /// n -> infinity; the link term drops out.
    [[nodiscard]] double asymptotic_intensity(Precision p = Precision::f32) const noexcept;

    [[nodiscard]] static const CostModel& standard() noexcept;
};

[[nodiscard]] double arithmetic_intensity(int n_rhs, LinkStorage s, Precision p = Precision::f32);
[[nodiscard]] double asymptotic_intensity(LinkStorage s = LinkStorage::full18);

struct DeviceSpec {
    std::string name;
    double peak_fp32 = 0.0; ///< GFlop/s
    double peak_fp64 = 0.0; ///< GFlop/s
    double bandwidth = 0.0; ///< GB/s, theoretical
    std::optional<double> measured_bandwidth; ///< GB/s, stream benchmark
    double tdp = 0.0; ///< W

    [[nodiscard]] double peak(Precision p) const noexcept { return p == Precision::f32 ? peak_fp32 : peak_fp64; }
    void validate() const;
};

[[nodiscard]] const std::vector<DeviceSpec>& device_catalog();

/// Case-insensitive match on the full name or any word of it ("k40", "5110p").
[[nodiscard]] const DeviceSpec& find_device(std::string_view name, const std::vector<DeviceSpec>& catalog);
[[nodiscard]] const DeviceSpec& find_device(std::string_view name);

/// `name key=value ...` per line, keys peak_fp32 peak_fp64 bandwidth
/// measured_bandwidth tdp; `#` starts a comment. Entries extend `base`,
/// replacing devices of the same name.
[[nodiscard]] std::vector<DeviceSpec> parse_device_config(std::istream& in, std::vector<DeviceSpec> base = {});
[[nodiscard]] std::vector<DeviceSpec> load_device_config(const std::filesystem::path& path,
                                                         std::vector<DeviceSpec> base = {});

/// min(AI x bandwidth, peak) in GFlop/s.
[[nodiscard]] double roofline_predict(const DeviceSpec& device, int n_rhs, LinkStorage s, bool use_measured_bw,
                                      Precision p = Precision::f32,
                                      const CostModel& model = CostModel::standard());

/// (GFlop/s) / W
[[nodiscard]] double efficiency(double gflops, double watts);

} // namespace hisq
