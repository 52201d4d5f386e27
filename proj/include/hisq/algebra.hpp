#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

#include "hisq/rng.hpp"

namespace hisq {

// Cost model constants. One complex multiply is 6 flops, one complex add 2.
inline constexpr std::int64_t kFlopsComplexMul = 6;
inline constexpr std::int64_t kFlopsComplexAdd = 2;
inline constexpr std::int64_t kFlopsMatVec = 9 * kFlopsComplexMul + 6 * kFlopsComplexAdd; // 66
inline constexpr std::int64_t kFlopsColorAdd = 3 * kFlopsComplexAdd;                        // 6
inline constexpr std::int64_t kFlopsColorAxpy = 3 * (kFlopsComplexMul + kFlopsComplexAdd);  // 24
/// Cross product (42) plus the complex scale of the rebuilt row (18).
inline constexpr std::int64_t kFlopsR14Reconstruct = 3 * (2 * kFlopsComplexMul + kFlopsComplexAdd) + 3 * kFlopsComplexMul;

template <typename T>
struct ColorVector {
    std::array<std::complex<T>, 3> c{};

    constexpr std::complex<T>& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    constexpr const std::complex<T>& operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    friend bool operator==(const ColorVector&, const ColorVector&) = default;
};

/// Row-major 3x3 complex matrix.
template <typename T>
struct Complex3x3 {
    std::array<std::complex<T>, 9> e{};

    constexpr std::complex<T>& operator()(int r, int c) { return e[static_cast<std::size_t>(3 * r + c)]; }
    constexpr const std::complex<T>& operator()(int r, int c) const {
        return e[static_cast<std::size_t>(3 * r + c)];
    }

    static constexpr Complex3x3 identity() {
        Complex3x3 m;
        m(0, 0) = m(1, 1) = m(2, 2) = T{1};
        return m;
    }
    static constexpr Complex3x3 zero() { return Complex3x3{}; }

    friend bool operator==(const Complex3x3&, const Complex3x3&) = default;
};

// Real arithmetic is spelled out below; std::complex operator* takes the
// Annex G NaN-recovery path.

/// w = M v (66 flops).
template <typename T>
[[nodiscard]] inline ColorVector<T> mat_vec(const Complex3x3<T>& m, const ColorVector<T>& v) noexcept {
    ColorVector<T> w;
    for (int r = 0; r < 3; ++r) {
        T re = m(r, 0).real() * v[0].real() - m(r, 0).imag() * v[0].imag();
        T im = m(r, 0).real() * v[0].imag() + m(r, 0).imag() * v[0].real();
        re += m(r, 1).real() * v[1].real() - m(r, 1).imag() * v[1].imag();
        im += m(r, 1).real() * v[1].imag() + m(r, 1).imag() * v[1].real();
        re += m(r, 2).real() * v[2].real() - m(r, 2).imag() * v[2].imag();
        im += m(r, 2).real() * v[2].imag() + m(r, 2).imag() * v[2].real();
        w[r] = {re, im};
    }
    return w;
}

/// w = M^dagger v without forming M^dagger (66 flops).
template <typename T>
[[nodiscard]] inline ColorVector<T> mat_dagger_vec(const Complex3x3<T>& m, const ColorVector<T>& v) noexcept {
    ColorVector<T> w;
    for (int r = 0; r < 3; ++r) {
        // row r of M^dagger is conj(column r of M)
        T re = m(0, r).real() * v[0].real() + m(0, r).imag() * v[0].imag();
        T im = m(0, r).real() * v[0].imag() - m(0, r).imag() * v[0].real();
        re += m(1, r).real() * v[1].real() + m(1, r).imag() * v[1].imag();
        im += m(1, r).real() * v[1].imag() - m(1, r).imag() * v[1].real();
        re += m(2, r).real() * v[2].real() + m(2, r).imag() * v[2].imag();
        im += m(2, r).real() * v[2].imag() - m(2, r).imag() * v[2].real();
        w[r] = {re, im};
    }
    return w;
}

template <typename T>
inline void add_to(ColorVector<T>& acc, const ColorVector<T>& v) noexcept {
    for (int i = 0; i < 3; ++i) acc[i] = {acc[i].real() + v[i].real(), acc[i].imag() + v[i].imag()};
}

template <typename T>
inline void sub_from(ColorVector<T>& acc, const ColorVector<T>& v) noexcept {
    for (int i = 0; i < 3; ++i) acc[i] = {acc[i].real() - v[i].real(), acc[i].imag() - v[i].imag()};
}

template <typename T>
[[nodiscard]] inline ColorVector<T> scaled(const ColorVector<T>& v, T a) noexcept {
    ColorVector<T> w;
    for (int i = 0; i < 3; ++i) w[i] = {a * v[i].real(), a * v[i].imag()};
    return w;
}

template <typename T>
[[nodiscard]] Complex3x3<T> dagger(const Complex3x3<T>& m) {
    Complex3x3<T> d;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) d(r, c) = std::conj(m(c, r));
    return d;
}

template <typename T>
[[nodiscard]] Complex3x3<T> mat_mul(const Complex3x3<T>& a, const Complex3x3<T>& b) {
    Complex3x3<T> p;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            std::complex<T> s{};
            for (int k = 0; k < 3; ++k) s += a(r, k) * b(k, c);
            p(r, c) = s;
        }
    return p;
}

template <typename T>
[[nodiscard]] std::complex<T> determinant(const Complex3x3<T>& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

template <typename To, typename From>
[[nodiscard]] Complex3x3<To> convert(const Complex3x3<From>& m) {
    Complex3x3<To> r;
    for (std::size_t i = 0; i < 9; ++i) r.e[i] = {static_cast<To>(m.e[i].real()), static_cast<To>(m.e[i].imag())};
    return r;
}

/// Gram-Schmidt on three gaussian complex rows, then the last row is rotated
/// by conj(det) so that det U = 1. Computed in double, rounded to T.
template <typename T>
[[nodiscard]] Complex3x3<T> random_su3(Rng& rng);

/// Compressed Naik link: [row0 (6 reals)][row1 (6 reals)][scale][det phase].
template <typename T>
struct R14Link {
    std::array<T, 14> v{};

    [[nodiscard]] T scale() const noexcept { return v[12]; }
    [[nodiscard]] T phase() const noexcept { return v[13]; }
    friend bool operator==(const R14Link&, const R14Link&) = default;
};

inline constexpr double kR14UnitarityTolerance = 1e-4;

/// Requires N = s W with s > 0 and W unitary: ||N^dagger N - s^2 I||_max <= tol * s^2.
/// Throws InvalidArgument naming the violation otherwise.
template <typename T>
[[nodiscard]] R14Link<T> compress_r14(const Complex3x3<T>& n, double rel_tol = kR14UnitarityTolerance);

/// Throws InvalidArgument if the stored scale is not positive.
template <typename T>
[[nodiscard]] Complex3x3<T> reconstruct_r14(const R14Link<T>& c);

/// Kernel variant: reads the 14 reals from raw storage, no validation.
/// Third row = (e^{i phi} / s) conj(row0 x row1).
template <typename T>
inline void reconstruct_r14_into(const T* r14, Complex3x3<T>& m) noexcept {
    for (int k = 0; k < 3; ++k) {
        m(0, k) = {r14[2 * k], r14[2 * k + 1]};
        m(1, k) = {r14[6 + 2 * k], r14[6 + 2 * k + 1]};
    }
    const T inv_s = T{1} / r14[12];
    const T fr = std::cos(r14[13]) * inv_s;
    const T fi = std::sin(r14[13]) * inv_s;
    for (int k = 0; k < 3; ++k) {
        const int i = (k + 1) % 3;
        const int j = (k + 2) % 3;
        const auto& a = m(0, i);
        const auto& b = m(1, j);
        const auto& c = m(0, j);
        const auto& d = m(1, i);
        // cross_k = a_i b_j - a_j b_i
        const T cr = (a.real() * b.real() - a.imag() * b.imag()) - (c.real() * d.real() - c.imag() * d.imag());
        const T ci = (a.real() * b.imag() + a.imag() * b.real()) - (c.real() * d.imag() + c.imag() * d.real());
        // factor * conj(cross)
        m(2, k) = {fr * cr + fi * ci, fi * cr - fr * ci};
    }
}

} // namespace hisq
