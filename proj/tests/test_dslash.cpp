#include <doctest.h>

#include <cmath>
#include <cstring>

#include "hisq/dslash.hpp"
#include "hisq/error.hpp"

using namespace hisq;

namespace {

template <typename T>
struct Links {
    std::shared_ptr<LinkField<T>> x;
    std::shared_ptr<LinkField<T>> n;
};

template <typename T>
Links<T> random_links(const LatticeGeometry& g, std::uint64_t seed, LinkStorage naik = LinkStorage::full18) {
    Links<T> l{std::make_shared<LinkField<T>>(g, LinkRole::smeared_x),
               std::make_shared<LinkField<T>>(g, LinkRole::naik_n, naik)};
    fill_random_links(*l.x, seed);
    fill_random_links(*l.n, seed, 0.4);
    return l;
}

template <typename T>
bool same_bits(const ColorField<T>& a, const ColorField<T>& b) {
    if (a.layout() == b.layout()) {
        return std::memcmp(a.data().data(), b.data().data(), a.data().size_bytes()) == 0;
    }
    for (std::int64_t s = 0; s < a.volume(); ++s) {
        const auto va = a.site(s);
        const auto vb = b.site(s);
        if (std::memcmp(&va, &vb, sizeof(va)) != 0) return false;
    }
    return true;
}

template <typename T>
std::complex<double> inner(const ColorField<T>& a, const ColorField<T>& b) {
    std::complex<double> s{};
    for (std::int64_t i = 0; i < a.volume(); ++i) {
        const auto va = a.site(i);
        const auto vb = b.site(i);
        for (int c = 0; c < 3; ++c) {
            s += std::conj(std::complex<double>(va[c])) * std::complex<double>(vb[c]);
        }
    }
    return s;
}

} // namespace

TEST_CASE("zero links give zero output") {
    const LatticeGeometry g({4, 4, 4, 4});
    auto x = std::make_shared<LinkField<float>>(g, LinkRole::smeared_x);
    auto n = std::make_shared<LinkField<float>>(g, LinkRole::naik_n);
    Dslash<float> d(x, n);
    VectorBundle<float> in(g, 2);
    VectorBundle<float> out(g, 2);
    fill_random_rhs(in, 1, NoiseKind::gaussian);
    for (float& v : out[0].data()) v = 9.0f;
    d.apply(in, out);
    for (int i = 0; i < 2; ++i)
        for (float v : out[i].data()) REQUIRE(v == 0.0f);
}

TEST_CASE("transfer stats on 4^4") {
    const LatticeGeometry g({4, 4, 4, 4});
    auto l = random_links<float>(g, 3);
    Dslash<float> d(l.x, l.n);
    VectorBundle<float> in(g, 1);
    VectorBundle<float> out(g, 1);
    const auto s = d.apply(in, out);
    CHECK(s.flops == 293376);
    CHECK(s.bytes_links == 294912);
    CHECK(s.bytes_vectors_in == 98304);
    CHECK(s.bytes_vectors_out == 6144);
    CHECK(s.aux_flops == 0);
    CHECK(s == model_transfer_stats(256, 1, LinkStorage::full18, Precision::f32));

    VectorBundle<float> in8(g, 8);
    VectorBundle<float> out8(g, 8);
    const auto s8 = d.apply(in8, out8);
    CHECK(s8.bytes_links == s.bytes_links);
    CHECK(s8.flops == 8 * s.flops);

    auto r = random_links<float>(g, 3, LinkStorage::r14);
    Dslash<float> dr(r.x, r.n, {DslashStrategy::register_block(4)});
    const auto sr = dr.apply(in8, out8);
    CHECK(sr.bytes_links == 256 * (8 * 18 + 8 * 14) * 4);
    CHECK(sr.aux_flops == 256 * 8 * 2 * kFlopsR14Reconstruct);

    d.set_config({DslashStrategy{}, false, false});
    CHECK(d.apply(in, out) == TransferStats{});
}

TEST_CASE("linearity") {
    const LatticeGeometry g({4, 4, 4, 6});
    auto l = random_links<double>(g, 5);
    Dslash<double> d(l.x, l.n);
    VectorBundle<double> in(g, 3);
    fill_random_rhs(in, 8, NoiseKind::gaussian);
    const std::complex<double> a(0.7, -1.3);
    const std::complex<double> b(-0.2, 0.4);
    for (std::int64_t s = 0; s < g.volume(); ++s) {
        auto u = in[0].site(s);
        const auto v = in[1].site(s);
        for (int c = 0; c < 3; ++c) u[c] = a * u[c] + b * v[c];
        in[2].set_site(s, u);
    }
    VectorBundle<double> out(g, 3);
    d.apply(in, out);
    double worst = 0.0;
    for (std::int64_t s = 0; s < g.volume(); ++s) {
        const auto w0 = out[0].site(s);
        const auto w1 = out[1].site(s);
        const auto w2 = out[2].site(s);
        for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(w2[c] - (a * w0[c] + b * w1[c])));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("even sources map to odd sites") {
    const LatticeGeometry g({4, 6, 4, 4});
    auto l = random_links<double>(g, 6);
    Dslash<double> d(l.x, l.n);
    VectorBundle<double> in(g, 1);
    fill_random_rhs(in, 2, NoiseKind::gaussian);
    for (std::int64_t s = 0; s < g.volume(); ++s) {
        if (parity(g.coords(s)) == Parity::odd) in[0].set_site(s, {});
    }
    VectorBundle<double> out(g, 1);
    d.apply(in, out);
    double odd_norm = 0.0;
    for (std::int64_t s = 0; s < g.volume(); ++s) {
        const auto w = out[0].site(s);
        for (int c = 0; c < 3; ++c) {
            if (parity(g.coords(s)) == Parity::even) REQUIRE(w[c] == std::complex<double>{});
            else odd_norm += std::norm(w[c]);
        }
    }
    CHECK(odd_norm > 0.0);
}

TEST_CASE("operator is anti-hermitian") {
    for (auto bc : {BoundaryCondition::antiperiodic, BoundaryCondition::periodic}) {
        const LatticeGeometry g({4, 4, 6, 4}, bc);
        auto l = random_links<double>(g, 11);
        Dslash<double> d(l.x, l.n);
        VectorBundle<double> in(g, 2);
        fill_random_rhs(in, 4, NoiseKind::gaussian);
        VectorBundle<double> out(g, 2);
        d.apply(in, out);
        const auto lhs = inner(in[0], out[1]);
        const auto rhs = inner(out[0], in[1]);
        CHECK(std::abs(lhs + rhs) <= 1e-12 * std::abs(lhs));

        VectorBundle<double> dag(g, 2);
        d.apply_daggered(in, dag);
        for (std::int64_t s = 0; s < g.volume(); s += 5) {
            const auto a = out[1].site(s);
            const auto b = dag[1].site(s);
            for (int c = 0; c < 3; ++c) REQUIRE(a[c] == -b[c]);
        }
    }
}

TEST_CASE("flip hook breaks anti-hermiticity") {
    const LatticeGeometry g({4, 4, 4, 4});
    auto l = random_links<double>(g, 12);
    Dslash<double> d(l.x, l.n);
    VectorBundle<double> in(g, 2);
    fill_random_rhs(in, 4, NoiseKind::gaussian);
    VectorBundle<double> out(g, 2);
    testing_hooks::set_flip_backward_smeared(true);
    d.apply(in, out);
    testing_hooks::set_flip_backward_smeared(false);
    const auto lhs = inner(in[0], out[1]);
    const auto rhs = inner(out[0], in[1]);
    CHECK(std::abs(lhs + rhs) > 1e-3 * std::abs(lhs));
}

TEST_CASE("strategies, layouts and split mode are bit-identical") {
    const LatticeGeometry g({16, 4, 4, 6});
    for (auto storage : {LinkStorage::full18, LinkStorage::r14}) {
        auto l = random_links<float>(g, 21, storage);
        const int n = 5;
        VectorBundle<float> in(g, n);
        fill_random_rhs(in, 13, NoiseKind::gaussian);
        Dslash<float> ref_op(l.x, l.n);
        VectorBundle<float> ref(g, n);
        ref_op.apply(in, ref);

        const std::vector<DslashStrategy> strategies{
            DslashStrategy::register_block(1), DslashStrategy::register_block(2), DslashStrategy::register_block(5),
            DslashStrategy::register_block(8), DslashStrategy::cache_block(7),    DslashStrategy::cache_block(64),
            DslashStrategy::combined(3, 13),   DslashStrategy::combined(5, 384)};
        for (const auto layout : {VectorLayout::soa(), VectorLayout::fused(4), VectorLayout::fused(8)}) {
            const auto lin = convert_layout(in, layout);
            for (const auto& st : strategies) {
                for (bool split : {false, true}) {
                    Dslash<float> d(l.x, l.n, {st, split});
                    VectorBundle<float> out(g, n, layout);
                    const auto s = d.apply(lin, out);
                    CHECK(s.split_extra_bytes == (split ? g.volume() * n * 24 : 0));
                    for (int i = 0; i < n; ++i) {
                        INFO(st.describe(), " ", layout.name(), " split=", split, " rhs=", i);
                        REQUIRE(same_bits(out[i], ref[i]));
                    }
                }
            }
        }
    }
}

TEST_CASE("bundle equals independent single-rhs applications") {
    const LatticeGeometry g({4, 4, 4, 8});
    auto l = random_links<float>(g, 31);
    Dslash<float> d(l.x, l.n, {DslashStrategy::combined(4, 16)});
    VectorBundle<float> in(g, 6);
    fill_random_rhs(in, 3, NoiseKind::z2);
    VectorBundle<float> out(g, 6);
    d.apply(in, out);
    for (int i = 0; i < 6; ++i) {
        VectorBundle<float> one(g, 1);
        std::copy(in[i].data().begin(), in[i].data().end(), one[0].data().begin());
        VectorBundle<float> res(g, 1);
        d.apply(one, res);
        REQUIRE(same_bits(res[0], out[i]));
    }
}

TEST_CASE("unit weights reproduce the plain operator") {
    const LatticeGeometry g({4, 4, 4, 4});
    auto l = random_links<double>(g, 41);
    Dslash<double> d(l.x, l.n);
    VectorBundle<double> in(g, 2);
    fill_random_rhs(in, 3, NoiseKind::gaussian);
    VectorBundle<double> a(g, 2);
    VectorBundle<double> b(g, 2);
    d.apply(in, a);
    d.apply_weighted(HopWeights::chemical_potential(0.0, 0), in, b);
    for (int i = 0; i < 2; ++i) CHECK(same_bits(a[i], b[i]));

    const auto w1 = HopWeights::chemical_potential(0.0, 1);
    CHECK(w1.enabled_count() == 4);
    CHECK(w1.weight[3][0] == 1.0);
    CHECK(w1.weight[3][1] == -1.0);
    CHECK(w1.weight[3][2] == 3.0);
    CHECK(w1.weight[3][3] == -3.0);
    const auto s = d.apply_weighted(w1, in, b);
    CHECK(s.flops == 256 * 2 * (4 * 66 + 3 * 6));
}

TEST_CASE("argument validation") {
    const LatticeGeometry g({4, 4, 4, 4});
    auto l = random_links<float>(g, 1);
    Dslash<float> d(l.x, l.n);
    VectorBundle<float> in(g, 2);
    VectorBundle<float> out3(g, 3);
    CHECK_THROWS_AS(d.apply(in, out3), ShapeMismatch);
    VectorBundle<float> other(LatticeGeometry({4, 4, 4, 6}), 2);
    CHECK_THROWS_AS(d.apply(in, other), ShapeMismatch);
    CHECK_THROWS_AS(d.apply(in, in), InvalidArgument);
    CHECK_THROWS_AS((void)DslashStrategy::register_block(0), InvalidArgument);
    CHECK_THROWS_AS(Dslash<float>(l.n, l.x), InvalidArgument);
}
