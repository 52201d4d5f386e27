#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "hisq/error.hpp"
#include "hisq/field_io.hpp"
#include "hisq/fields.hpp"

using namespace hisq;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("hisq_test_" + name);
}

template <typename T>
bool bit_identical(std::span<const T> a, std::span<const T> b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size_bytes()) == 0;
}

} // namespace

TEST_CASE("link field storage rules") {
    const LatticeGeometry g({4, 4, 4, 4});
    CHECK_THROWS_AS(LinkField<float>(g, LinkRole::smeared_x, LinkStorage::r14), InvalidArgument);
    LinkField<float> n(g, LinkRole::naik_n, LinkStorage::r14);
    CHECK(n.data().size() == 4u * 256u * 14u);
    CHECK(n.link(2, 17) == Complex3x3<float>::identity());
    LinkField<float> x(g, LinkRole::smeared_x);
    CHECK(x.data().size() == 4u * 256u * 18u);
    CHECK(x.link(0, 0) == Complex3x3<float>::zero());
}

TEST_CASE("fill_random_links is deterministic and respects the Naik scale") {
    const LatticeGeometry g({4, 4, 4, 4});
    LinkField<float> a(g, LinkRole::naik_n);
    LinkField<float> b(g, LinkRole::naik_n);
    fill_random_links(a, 7, 0.25);
    fill_random_links(b, 7, 0.25);
    CHECK(bit_identical<float>(a.data(), b.data()));

    double worst = 0.0;
    for (int mu = 0; mu < 4; ++mu)
        for (std::int64_t s = 0; s < g.volume(); ++s) {
            const auto n = a.link(mu, s);
            const auto gram = mat_mul(dagger(n), n);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    worst = std::max(worst, static_cast<double>(std::abs(gram(r, c) - (r == c ? 0.0625f : 0.0f))));
        }
    CHECK(worst <= 1e-5);

    // every Naik link compresses: fill an r14 field directly
    LinkField<float> c(g, LinkRole::naik_n, LinkStorage::r14);
    CHECK_NOTHROW(fill_random_links(c, 7, 0.25));
    for (int mu = 0; mu < 4; ++mu)
        for (std::int64_t s = 0; s < g.volume(); ++s) REQUIRE_NOTHROW((void)compress_r14(a.link(mu, s)));

    LinkField<double> x(g, LinkRole::smeared_x);
    fill_random_links(x, 7);
    CHECK(std::abs(determinant(x.link(3, 100)) - 1.0) < 1e-12);
}

TEST_CASE("z2 noise") {
    const LatticeGeometry g({4, 4, 4, 8});
    VectorBundle<double> b(g, 2);
    fill_random_rhs(b, 11, NoiseKind::z2);
    for (int i = 0; i < 2; ++i) {
        double norm2 = 0.0;
        for (std::int64_t s = 0; s < g.volume(); ++s) {
            const auto v = b[i].site(s);
            for (int c = 0; c < 3; ++c) {
                REQUIRE(std::abs(v[c].real()) == 1.0);
                REQUIRE(v[c].imag() == 0.0);
                norm2 += std::norm(v[c]);
            }
        }
        CHECK(norm2 == 3.0 * static_cast<double>(g.volume()));
    }
    CHECK_FALSE(bit_identical<double>(b[0].data(), b[1].data()));
}

TEST_CASE("gaussian noise has zero mean") {
    const LatticeGeometry g({64, 64, 64, 16});
    ColorField<float> f(g);
    fill_random_field(f, 2024, 0, NoiseKind::gaussian);
    double sum = 0.0;
    double sum2 = 0.0;
    for (float x : f.data()) {
        sum += x;
        sum2 += static_cast<double>(x) * x;
    }
    const auto n = static_cast<double>(f.data().size());
    CHECK(n == 64.0 * 64 * 64 * 16 * 3 * 2);
    const double mean = sum / n;
    CHECK(std::abs(mean) <= 3.0 / std::sqrt(n));
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("layout parsing and validation") {
    CHECK(VectorLayout::parse("fused8") == VectorLayout::fused(8));
    CHECK(VectorLayout::parse("soa").name() == "soa");
    CHECK_THROWS_AS((void)VectorLayout::parse("fused3"), InvalidArgument);
    CHECK_THROWS_AS((void)VectorLayout::fused(2), InvalidArgument);
    // Nx/2 = 4 is not divisible by 8
    CHECK_THROWS_AS(LayoutIndex(LatticeGeometry({8, 4, 4, 4}), VectorLayout::fused(8)), InvalidArgument);
    CHECK_NOTHROW(LayoutIndex(LatticeGeometry({16, 4, 4, 4}), VectorLayout::fused(8)));
}

TEST_CASE("fused index map") {
    for (int w : {4, 8, 16}) {
        const LatticeGeometry g({32, 4, 6, 4});
        const LayoutIndex idx(g, VectorLayout::fused(w));
        CHECK(idx.stride() == w);
        std::set<std::int64_t> offsets;
        for (std::int64_t s = 0; s < g.volume(); ++s) {
            const auto c = g.coords(s);
            const auto base = idx.base(s);
            // lane is (x/2) mod W
            REQUIRE(base % (6 * w) == (c[0] / 2) % w);
            for (int comp = 0; comp < 6; ++comp) offsets.insert(base + comp * w);
            // every lane of a block belongs to one parity on one x-row
            const auto block = base / (6 * w);
            for (std::int64_t s2 : {s + 2, s - 2}) {
                if (s2 < 0 || s2 >= g.volume()) continue;
                const auto c2 = g.coords(s2);
                if (c2[1] != c[1] || c2[2] != c[2] || c2[3] != c[3]) continue;
                const bool same_run = (c2[0] / 2) / w == (c[0] / 2) / w;
                REQUIRE((idx.base(s2) / (6 * w) == block) == same_run);
            }
        }
        // a permutation of [0, 6V)
        CHECK(offsets.size() == static_cast<std::size_t>(6 * g.volume()));
        CHECK(*offsets.rbegin() == 6 * g.volume() - 1);
    }
}

TEST_CASE("layout conversion") {
    const LatticeGeometry g({16, 4, 4, 6});
    VectorBundle<float> soa(g, 3);
    fill_random_rhs(soa, 5, NoiseKind::gaussian);
    for (int w : {4, 8}) {
        const auto fused = convert_layout(soa, VectorLayout::fused(w));
        CHECK(fused.layout() == VectorLayout::fused(w));
        for (std::int64_t s = 0; s < g.volume(); s += 7) CHECK(fused[1].site(s) == soa[1].site(s));
        const auto back = convert_layout(fused, VectorLayout::soa());
        for (int i = 0; i < 3; ++i) CHECK(bit_identical<float>(back[i].data(), soa[i].data()));
    }
    CHECK_THROWS_AS((void)convert_layout(soa, VectorLayout::fused(16)), InvalidArgument);

    // constant field: identical constants in all lanes
    ColorField<double> c(g);
    ColorVector<double> k;
    k[0] = {1.5, -2.0};
    k[1] = {0.25, 3.0};
    k[2] = {-7.0, 0.5};
    for (std::int64_t s = 0; s < g.volume(); ++s) c.set_site(s, k);
    const auto f8 = convert_layout(c, VectorLayout::fused(8));
    const auto data = f8.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto comp = (i / 8) % 6;
        const double expected = comp % 2 == 0 ? k[static_cast<int>(comp / 2)].real() : k[static_cast<int>(comp / 2)].imag();
        REQUIRE(data[i] == expected);
    }

    // fills are layout independent
    VectorBundle<float> direct(g, 3, VectorLayout::fused(4));
    fill_random_rhs(direct, 5, NoiseKind::gaussian);
    const auto via = convert_layout(soa, VectorLayout::fused(4));
    CHECK(bit_identical<float>(direct[2].data(), via[2].data()));
}

TEST_CASE("field file header golden bytes") {
    FieldFileHeader h;
    h.kind = FieldKind::vector;
    h.storage = 8;
    h.precision = Precision::f64;
    h.dims = {16, 4, 4, 8};
    h.n_rhs = 3;
    h.checksum = 0x0123456789abcdefULL;
    const auto b = h.encode();
    const std::array<unsigned, kFieldHeaderSize> golden{
        'H', 'Q', 'F', 'D', 1, 0, 0, 0,                   // magic, version
        1, 8, 1,                                          // kind, storage, precision
        16, 0, 0, 0, 4, 0, 0, 0, 4, 0, 0, 0, 8, 0, 0, 0,  // dims
        3, 0, 0, 0,                                       // n_rhs
        0xef, 0xcd, 0xab, 0x89, 0x67, 0x45, 0x23, 0x01};  // checksum
    for (std::size_t i = 0; i < kFieldHeaderSize; ++i) CHECK(std::to_integer<unsigned>(b[i]) == golden[i]);
    CHECK(FieldFileHeader::decode(b) == h);
}

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64({}) == 0xcbf29ce484222325ULL);
    const std::array<std::byte, 1> a{std::byte{'a'}};
    CHECK(fnv1a64(a) == 0xaf63dc4c8601ec8cULL);
    const std::string foobar = "foobar";
    CHECK(fnv1a64(std::as_bytes(std::span(foobar.data(), foobar.size()))) == 0x85944171f73967e8ULL);
}

TEST_CASE("field file roundtrip and error kinds") {
    const LatticeGeometry g({4, 4, 4, 4});
    LinkField<double> x(g, LinkRole::smeared_x);
    fill_random_links(x, 3);
    const auto path = temp_path("links.bin");
    write_field(path, x);
    const auto back = read_link_field<double>(path, g, LinkRole::smeared_x);
    CHECK(bit_identical<double>(back.data(), x.data()));

    LinkField<float> n(g, LinkRole::naik_n, LinkStorage::r14);
    fill_random_links(n, 3, 0.4);
    const auto npath = temp_path("naik.bin");
    write_field(npath, n);
    const auto nback = read_link_field<float>(npath, g, LinkRole::naik_n);
    CHECK(nback.storage() == LinkStorage::r14);
    CHECK(bit_identical<float>(nback.data(), n.data()));

    VectorBundle<float> v(LatticeGeometry({8, 4, 4, 4}), 2, VectorLayout::fused(4));
    fill_random_rhs(v, 9, NoiseKind::gaussian);
    const auto vpath = temp_path("vec.bin");
    write_field(vpath, v);
    const auto vback = read_vector_bundle<float>(vpath, v.geometry());
    CHECK(vback.layout() == VectorLayout::fused(4));
    CHECK(vback.n_rhs() == 2);
    CHECK(bit_identical<float>(vback[1].data(), v[1].data()));
    CHECK(payload_checksum(vback) == payload_checksum(v));

    auto expect_kind = [](auto&& fn, FieldFileErrorKind kind) {
        try {
            fn();
            FAIL("no error raised");
        } catch (const FieldFileError& e) {
            CHECK(e.kind() == kind);
        }
    };
    expect_kind([&] { (void)read_link_field<double>(path, LatticeGeometry({4, 4, 4, 6}), LinkRole::smeared_x); },
                FieldFileErrorKind::dimension_mismatch);
    expect_kind([&] { (void)read_link_field<float>(path, g, LinkRole::smeared_x); }, FieldFileErrorKind::format_mismatch);
    expect_kind([&] { (void)read_vector_bundle<double>(path, g); }, FieldFileErrorKind::kind_mismatch);
    expect_kind([&] { (void)read_link_field<double>(temp_path("missing.bin"), g, LinkRole::smeared_x); },
                FieldFileErrorKind::io);

    // corrupt one payload byte
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(static_cast<std::streamoff>(kFieldHeaderSize + 1000));
        char c = 0;
        f.seekg(static_cast<std::streamoff>(kFieldHeaderSize + 1000));
        f.read(&c, 1);
        c = static_cast<char>(c ^ 0x10);
        f.seekp(static_cast<std::streamoff>(kFieldHeaderSize + 1000));
        f.write(&c, 1);
    }
    expect_kind([&] { (void)read_link_field<double>(path, g, LinkRole::smeared_x); },
                FieldFileErrorKind::checksum_mismatch);
    // corrupt magic
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("XXXX", 4);
    }
    expect_kind([&] { (void)read_link_field<double>(path, g, LinkRole::smeared_x); }, FieldFileErrorKind::bad_magic);
    // future version
    {
        std::fstream f(npath, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(4);
        const char v2[4] = {2, 0, 0, 0};
        f.write(v2, 4);
    }
    expect_kind([&] { (void)read_link_field<float>(npath, g, LinkRole::naik_n); }, FieldFileErrorKind::bad_version);

    std::filesystem::remove(path);
    std::filesystem::remove(npath);
    std::filesystem::remove(vpath);
}
