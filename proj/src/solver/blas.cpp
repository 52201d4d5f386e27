#include "hisq/blas.hpp"

#include <vector>

#include "hisq/error.hpp"

namespace hisq {

namespace {

template <typename T>
void check_pair(const ColorField<T>& x, const ColorField<T>& y) {
    if (!(x.geometry() == y.geometry()) || !(x.layout() == y.layout())) {
        throw ShapeMismatch("linear algebra on fields of different geometry or layout");
    }
}

// Pairwise sum of the block partials; the tree depends only on their count.
template <typename V>
V tree_sum(std::vector<V>& p) {
    if (p.empty()) return V{};
    for (std::size_t width = 1; width < p.size(); width *= 2) {
        for (std::size_t i = 0; i + width < p.size(); i += 2 * width) p[i] += p[i + width];
    }
    return p[0];
}

// Block b covers reals [b*B, min((b+1)*B, size)); `f(lo, hi)` returns its partial.
template <typename V, typename F>
V blocked_reduce(std::int64_t size, F&& f) {
    const std::int64_t nb = (size + kReductionBlock - 1) / kReductionBlock;
    std::vector<V> partial(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < nb; ++b) {
        partial[static_cast<std::size_t>(b)] = f(b * kReductionBlock, std::min(size, (b + 1) * kReductionBlock));
    }
    return tree_sum(partial);
}

} // namespace

template <typename T>
void axpy(double a, const ColorField<T>& x, ColorField<T>& y) {
    check_pair(x, y);
    const T* xp = x.data().data();
    T* yp = y.data().data();
    const auto n = static_cast<std::int64_t>(y.data().size());
    const T ta = static_cast<T>(a);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) yp[i] += ta * xp[i];
}

template <typename T>
void axpby(double a, const ColorField<T>& x, double b, ColorField<T>& y) {
    check_pair(x, y);
    const T* xp = x.data().data();
    T* yp = y.data().data();
    const auto n = static_cast<std::int64_t>(y.data().size());
    const T ta = static_cast<T>(a);
    const T tb = static_cast<T>(b);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) yp[i] = ta * xp[i] + tb * yp[i];
}

template <typename T>
void xpay(const ColorField<T>& x, double b, ColorField<T>& y) {
    check_pair(x, y);
    const T* xp = x.data().data();
    T* yp = y.data().data();
    const auto n = static_cast<std::int64_t>(y.data().size());
    const T tb = static_cast<T>(b);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) yp[i] = xp[i] + tb * yp[i];
}

template <typename T>
void scale(double a, ColorField<T>& x) {
    T* xp = x.data().data();
    const auto n = static_cast<std::int64_t>(x.data().size());
    const T ta = static_cast<T>(a);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) xp[i] *= ta;
}

template <typename T>
void copy(const ColorField<T>& x, ColorField<T>& y) {
    check_pair(x, y);
    std::copy(x.data().begin(), x.data().end(), y.data().begin());
}

template <typename T>
double xmy_norm(const ColorField<T>& x, ColorField<T>& y) {
    check_pair(x, y);
    const T* xp = x.data().data();
    T* yp = y.data().data();
    return blocked_reduce<double>(static_cast<std::int64_t>(y.data().size()), [&](std::int64_t lo, std::int64_t hi) {
        double s = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) {
            yp[i] = xp[i] - yp[i];
            s += static_cast<double>(yp[i]) * static_cast<double>(yp[i]);
        }
        return s;
    });
}

template <typename T>
std::complex<double> dot(const ColorField<T>& x, const ColorField<T>& y) {
    check_pair(x, y);
    // Any layout keeps re/im of one component at offsets base and base+stride,
    // so walk complex components by site.
    const T* xp = x.data().data();
    const T* yp = y.data().data();
    const auto& idx = *x.index();
    const std::int64_t st = idx.stride();
    const std::int64_t* base = idx.base_data();
    struct Pair {
        double re = 0.0;
        double im = 0.0;
        Pair& operator+=(const Pair& o) {
            re += o.re;
            im += o.im;
            return *this;
        }
    };
    const Pair p = blocked_reduce<Pair>(x.volume(), [&](std::int64_t lo, std::int64_t hi) {
        Pair s;
        for (std::int64_t site = lo; site < hi; ++site) {
            const std::int64_t b = base[site];
            for (int c = 0; c < 3; ++c) {
                const double xr = xp[b + 2 * c * st];
                const double xi = xp[b + (2 * c + 1) * st];
                const double yr = yp[b + 2 * c * st];
                const double yi = yp[b + (2 * c + 1) * st];
                s.re += xr * yr + xi * yi;
                s.im += xr * yi - xi * yr;
            }
        }
        return s;
    });
    return {p.re, p.im};
}

template <typename T>
double norm2(const ColorField<T>& x) {
    const T* xp = x.data().data();
    return blocked_reduce<double>(static_cast<std::int64_t>(x.data().size()), [&](std::int64_t lo, std::int64_t hi) {
        double s = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) s += static_cast<double>(xp[i]) * static_cast<double>(xp[i]);
        return s;
    });
}

#define HISQ_INSTANTIATE_BLAS(T)                                                \
    template void axpy<T>(double, const ColorField<T>&, ColorField<T>&);        \
    template void axpby<T>(double, const ColorField<T>&, double, ColorField<T>&); \
    template void xpay<T>(const ColorField<T>&, double, ColorField<T>&);        \
    template void scale<T>(double, ColorField<T>&);                             \
    template void copy<T>(const ColorField<T>&, ColorField<T>&);                \
    template double xmy_norm<T>(const ColorField<T>&, ColorField<T>&);          \
    template std::complex<double> dot<T>(const ColorField<T>&, const ColorField<T>&); \
    template double norm2<T>(const ColorField<T>&);

HISQ_INSTANTIATE_BLAS(float)
HISQ_INSTANTIATE_BLAS(double)

} // namespace hisq
