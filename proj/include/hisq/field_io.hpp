#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>

#include "hisq/error.hpp"
#include "hisq/fields.hpp"

namespace hisq {

// On-disk layout, little endian, no padding (39 bytes):
//   0  magic "HQFD"        4
//   4  version u32         4
//   8  kind u8             1   0 = link field, 1 = vector bundle
//   9  storage u8          1   links: 0 full18, 1 r14; vectors: fusion width (0 = soa)
//  10  precision u8        1   0 = f32, 1 = f64
//  11  dims 4 x u32       16
//  27  n_rhs u32           4   0 for link fields
//  31  checksum u64        8   FNV-1a 64 over the payload bytes
// Payload follows: links direction-major, vectors rhs-major in storage order.

inline constexpr std::uint32_t kFieldFormatVersion = 1;
inline constexpr std::size_t kFieldHeaderSize = 39;

enum class FieldKind : std::uint8_t { link = 0, vector = 1 };

struct FieldFileHeader {
    std::uint32_t version = kFieldFormatVersion;
    FieldKind kind = FieldKind::link;
    std::uint8_t storage = 0;
    Precision precision = Precision::f32;
    std::array<std::uint32_t, 4> dims{};
    std::uint32_t n_rhs = 0;
    std::uint64_t checksum = 0;

    [[nodiscard]] std::array<std::byte, kFieldHeaderSize> encode() const;
    /// Validates magic and version only.
    [[nodiscard]] static FieldFileHeader decode(std::span<const std::byte, kFieldHeaderSize> bytes);

    friend bool operator==(const FieldFileHeader&, const FieldFileHeader&) = default;
};

enum class FieldFileErrorKind {
    io,
    truncated,
    bad_magic,
    bad_version,
    checksum_mismatch,
    dimension_mismatch,
    kind_mismatch,
    format_mismatch,
};

class FieldFileError : public Error {
public:
    FieldFileError(FieldFileErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
    [[nodiscard]] FieldFileErrorKind kind() const noexcept { return kind_; }

private:
    FieldFileErrorKind kind_;
};

[[nodiscard]] std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);

template <typename T>
void write_field(const std::filesystem::path& path, const LinkField<T>& field);

template <typename T>
void write_field(const std::filesystem::path& path, const VectorBundle<T>& bundle);

/// The expected geometry supplies the temporal boundary condition, which the
/// file does not record.
template <typename T>
[[nodiscard]] LinkField<T> read_link_field(const std::filesystem::path& path, const LatticeGeometry& expected,
                                           LinkRole role);

template <typename T>
[[nodiscard]] VectorBundle<T> read_vector_bundle(const std::filesystem::path& path, const LatticeGeometry& expected);

/// Checksum of a bundle's payload bytes as they would be written; used as an
/// output fingerprint in benchmark reports.
template <typename T>
[[nodiscard]] std::uint64_t payload_checksum(const VectorBundle<T>& bundle);

} // namespace hisq
