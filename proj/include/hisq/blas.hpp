#pragma once

#include <complex>

#include "hisq/fields.hpp"

namespace hisq {

// Single-rhs linear algebra. Reductions accumulate in double over fixed
// blocks and combine the partials pairwise, so results do not depend on the
// thread count.

inline constexpr std::int64_t kReductionBlock = 4096;

/// y += a x
template <typename T>
void axpy(double a, const ColorField<T>& x, ColorField<T>& y);
/// y = a x + b y
template <typename T>
void axpby(double a, const ColorField<T>& x, double b, ColorField<T>& y);
/// y = x + b y
template <typename T>
void xpay(const ColorField<T>& x, double b, ColorField<T>& y);
/// x *= a
template <typename T>
void scale(double a, ColorField<T>& x);
template <typename T>
void copy(const ColorField<T>& x, ColorField<T>& y);
/// y = x - y, returns |y|^2
template <typename T>
double xmy_norm(const ColorField<T>& x, ColorField<T>& y);
/// x^dagger y
template <typename T>
[[nodiscard]] std::complex<double> dot(const ColorField<T>& x, const ColorField<T>& y);
template <typename T>
[[nodiscard]] double norm2(const ColorField<T>& x);

} // namespace hisq
