#include "hisq/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace hisq {

namespace {

constexpr std::array<std::byte, 4> kMagic{std::byte{'H'}, std::byte{'Q'}, std::byte{'F'}, std::byte{'D'}};

template <typename U>
void put_le(std::byte* out, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out[i] = static_cast<std::byte>((value >> (8 * i)) & 0xff);
}

template <typename U>
U get_le(const std::byte* in) {
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(std::to_integer<U>(in[i]) << (8 * i));
    return value;
}

template <typename T>
void append_reals(std::vector<std::byte>& out, std::span<const T> reals) {
    const auto offset = out.size();
    out.resize(offset + reals.size_bytes());
    std::memcpy(out.data() + offset, reals.data(), reals.size_bytes());
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < reals.size(); ++i) {
            auto* p = out.data() + offset + i * sizeof(T);
            std::reverse(p, p + sizeof(T));
        }
    }
}

template <typename T>
void extract_reals(std::span<const std::byte> in, std::span<T> reals) {
    std::memcpy(reals.data(), in.data(), reals.size_bytes());
    if constexpr (std::endian::native == std::endian::big) {
        auto* bytes = reinterpret_cast<std::byte*>(reals.data());
        for (std::size_t i = 0; i < reals.size(); ++i) std::reverse(bytes + i * sizeof(T), bytes + (i + 1) * sizeof(T));
    }
}

std::array<std::uint32_t, 4> dims_u32(const LatticeGeometry& g) {
    return {static_cast<std::uint32_t>(g.extent(0)), static_cast<std::uint32_t>(g.extent(1)),
            static_cast<std::uint32_t>(g.extent(2)), static_cast<std::uint32_t>(g.extent(3))};
}

void write_file(const std::filesystem::path& path, FieldFileHeader header, const std::vector<std::byte>& payload) {
    header.checksum = fnv1a64(payload);
    const auto head = header.encode();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FieldFileError(FieldFileErrorKind::io, "cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (!out) throw FieldFileError(FieldFileErrorKind::io, "write to '" + path.string() + "' failed");
}

struct LoadedFile {
    FieldFileHeader header;
    std::vector<std::byte> payload;
};

LoadedFile load_file(const std::filesystem::path& path, FieldKind kind, Precision precision,
                     const LatticeGeometry& expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FieldFileError(FieldFileErrorKind::io, "cannot open '" + path.string() + "'");
    std::array<std::byte, kFieldHeaderSize> head{};
    in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
    if (in.gcount() != static_cast<std::streamsize>(head.size())) {
        throw FieldFileError(FieldFileErrorKind::truncated, "'" + path.string() + "' is shorter than a header");
    }
    LoadedFile f{FieldFileHeader::decode(head), {}};
    if (f.header.kind != kind) {
        throw FieldFileError(FieldFileErrorKind::kind_mismatch, "'" + path.string() + "' holds a different field kind");
    }
    if (f.header.precision != precision) {
        throw FieldFileError(FieldFileErrorKind::format_mismatch,
                             "'" + path.string() + "' is stored in " + std::string(to_string(f.header.precision)));
    }
    if (f.header.dims != dims_u32(expected)) {
        throw FieldFileError(FieldFileErrorKind::dimension_mismatch,
                             "'" + path.string() + "' lattice does not match " + expected.to_string());
    }
    in.seekg(0, std::ios::end);
    const auto total = static_cast<std::size_t>(in.tellg());
    in.seekg(static_cast<std::streamoff>(kFieldHeaderSize));
    f.payload.resize(total - kFieldHeaderSize);
    in.read(reinterpret_cast<char*>(f.payload.data()), static_cast<std::streamsize>(f.payload.size()));
    if (fnv1a64(f.payload) != f.header.checksum) {
        throw FieldFileError(FieldFileErrorKind::checksum_mismatch, "checksum mismatch in '" + path.string() + "'");
    }
    return f;
}

void require_payload_size(const LoadedFile& f, std::size_t expected, const std::filesystem::path& path) {
    if (f.payload.size() != expected) {
        throw FieldFileError(FieldFileErrorKind::truncated, "'" + path.string() + "' payload has " +
                                                                std::to_string(f.payload.size()) + " bytes, expected " +
                                                                std::to_string(expected));
    }
}

} // namespace

std::array<std::byte, kFieldHeaderSize> FieldFileHeader::encode() const {
    std::array<std::byte, kFieldHeaderSize> b{};
    std::copy(kMagic.begin(), kMagic.end(), b.begin());
    put_le<std::uint32_t>(&b[4], version);
    b[8] = static_cast<std::byte>(kind);
    b[9] = static_cast<std::byte>(storage);
    b[10] = static_cast<std::byte>(precision);
    for (std::size_t mu = 0; mu < 4; ++mu) put_le<std::uint32_t>(&b[11 + 4 * mu], dims[mu]);
    put_le<std::uint32_t>(&b[27], n_rhs);
    put_le<std::uint64_t>(&b[31], checksum);
    return b;
}

FieldFileHeader FieldFileHeader::decode(std::span<const std::byte, kFieldHeaderSize> b) {
    if (!std::equal(kMagic.begin(), kMagic.end(), b.begin())) {
        throw FieldFileError(FieldFileErrorKind::bad_magic, "not a field file (bad magic)");
    }
    FieldFileHeader h;
    h.version = get_le<std::uint32_t>(&b[4]);
    if (h.version != kFieldFormatVersion) {
        throw FieldFileError(FieldFileErrorKind::bad_version, "unsupported field file version " + std::to_string(h.version));
    }
    h.kind = static_cast<FieldKind>(b[8]);
    h.storage = std::to_integer<std::uint8_t>(b[9]);
    h.precision = static_cast<Precision>(b[10]);
    for (std::size_t mu = 0; mu < 4; ++mu) h.dims[mu] = get_le<std::uint32_t>(&b[11 + 4 * mu]);
    h.n_rhs = get_le<std::uint32_t>(&b[27]);
    h.checksum = get_le<std::uint64_t>(&b[31]);
    return h;
}

std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t hash) {
    for (const std::byte b : bytes) {
        hash ^= std::to_integer<std::uint64_t>(b);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

template <typename T>
void write_field(const std::filesystem::path& path, const LinkField<T>& field) {
    FieldFileHeader h;
    h.kind = FieldKind::link;
    h.storage = static_cast<std::uint8_t>(field.storage());
    h.precision = precision_of<T>;
    h.dims = dims_u32(field.geometry());
    std::vector<std::byte> payload;
    append_reals<T>(payload, field.data());
    write_file(path, h, payload);
}

namespace {

template <typename T>
std::vector<std::byte> bundle_payload(const VectorBundle<T>& bundle) {
    std::vector<std::byte> payload;
    payload.reserve(static_cast<std::size_t>(bundle.n_rhs()) * 6 * sizeof(T) *
                    static_cast<std::size_t>(bundle.geometry().volume()));
    for (int i = 0; i < bundle.n_rhs(); ++i) append_reals<T>(payload, bundle[i].data());
    return payload;
}

} // namespace

template <typename T>
void write_field(const std::filesystem::path& path, const VectorBundle<T>& bundle) {
    FieldFileHeader h;
    h.kind = FieldKind::vector;
    h.storage = static_cast<std::uint8_t>(bundle.layout().fusion_width);
    h.precision = precision_of<T>;
    h.dims = dims_u32(bundle.geometry());
    h.n_rhs = static_cast<std::uint32_t>(bundle.n_rhs());
    write_file(path, h, bundle_payload(bundle));
}

template <typename T>
LinkField<T> read_link_field(const std::filesystem::path& path, const LatticeGeometry& expected, LinkRole role) {
    const auto f = load_file(path, FieldKind::link, precision_of<T>, expected);
    if (f.header.storage > 1) {
        throw FieldFileError(FieldFileErrorKind::format_mismatch, "unknown link storage code in '" + path.string() + "'");
    }
    const auto storage = static_cast<LinkStorage>(f.header.storage);
    if (role == LinkRole::smeared_x && storage != LinkStorage::full18) {
        throw FieldFileError(FieldFileErrorKind::format_mismatch, "smeared links cannot be read from r14 storage");
    }
    LinkField<T> field(expected, role, storage);
    require_payload_size(f, field.data().size_bytes(), path);
    extract_reals<T>(f.payload, field.data());
    return field;
}

template <typename T>
VectorBundle<T> read_vector_bundle(const std::filesystem::path& path, const LatticeGeometry& expected) {
    const auto f = load_file(path, FieldKind::vector, precision_of<T>, expected);
    VectorLayout layout;
    try {
        layout = f.header.storage == 0 ? VectorLayout::soa() : VectorLayout::fused(f.header.storage);
    } catch (const InvalidArgument&) {
        throw FieldFileError(FieldFileErrorKind::format_mismatch, "unknown vector layout code in '" + path.string() + "'");
    }
    if (f.header.n_rhs < 1) throw FieldFileError(FieldFileErrorKind::format_mismatch, "vector file with zero rhs");
    VectorBundle<T> bundle(expected, static_cast<int>(f.header.n_rhs), layout);
    const std::size_t per_rhs = bundle[0].data().size_bytes();
    require_payload_size(f, per_rhs * f.header.n_rhs, path);
    for (int i = 0; i < bundle.n_rhs(); ++i) {
        extract_reals<T>(std::span(f.payload).subspan(per_rhs * static_cast<std::size_t>(i), per_rhs), bundle[i].data());
    }
    return bundle;
}

template <typename T>
std::uint64_t payload_checksum(const VectorBundle<T>& bundle) {
    return fnv1a64(bundle_payload(bundle));
}

#define HISQ_INSTANTIATE_IO(T)                                                                          \
    template void write_field<T>(const std::filesystem::path&, const LinkField<T>&);                    \
    template void write_field<T>(const std::filesystem::path&, const VectorBundle<T>&);                 \
    template LinkField<T> read_link_field<T>(const std::filesystem::path&, const LatticeGeometry&, LinkRole); \
    template VectorBundle<T> read_vector_bundle<T>(const std::filesystem::path&, const LatticeGeometry&); \
    template std::uint64_t payload_checksum<T>(const VectorBundle<T>&);

HISQ_INSTANTIATE_IO(float)
HISQ_INSTANTIATE_IO(double)

} // namespace hisq
