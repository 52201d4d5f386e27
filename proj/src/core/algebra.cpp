#include "hisq/algebra.hpp"

#include <algorithm>
#include <sstream>

#include "hisq/error.hpp"

namespace hisq {

namespace {

using cd = std::complex<double>;

void normalize(std::array<cd, 3>& row) {
    double n2 = 0.0;
    for (const auto& z : row) n2 += std::norm(z);
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& z : row) z *= inv;
}

// row -= (basis^dagger row) basis
void project_out(std::array<cd, 3>& row, const std::array<cd, 3>& basis) {
    cd overlap{};
    for (int k = 0; k < 3; ++k) overlap += std::conj(basis[k]) * row[k];
    for (int k = 0; k < 3; ++k) row[k] -= overlap * basis[k];
}

} // namespace

template <typename T>
Complex3x3<T> random_su3(Rng& rng) {
    std::array<std::array<cd, 3>, 3> rows;
    for (auto& row : rows)
        for (auto& z : row) {
            const double re = rng.normal();
            const double im = rng.normal();
            z = {re, im};
        }
    // Each projection runs twice; one classical Gram-Schmidt pass loses
    // orthogonality when the gaussian rows are nearly dependent.
    normalize(rows[0]);
    for (int pass = 0; pass < 2; ++pass) project_out(rows[1], rows[0]);
    normalize(rows[1]);
    for (int pass = 0; pass < 2; ++pass) {
        project_out(rows[2], rows[0]);
        project_out(rows[2], rows[1]);
    }
    normalize(rows[2]);

    Complex3x3<double> u;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) u(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    const cd det = determinant(u);
    const cd fix = std::conj(det) / std::abs(det);
    for (int c = 0; c < 3; ++c) u(2, c) *= fix;
    return convert<T>(u);
}

template <typename T>
R14Link<T> compress_r14(const Complex3x3<T>& n, double rel_tol) {
    const auto nd = convert<double>(n);
    const auto gram = mat_mul(dagger(nd), nd);
    const double s2 = (gram(0, 0).real() + gram(1, 1).real() + gram(2, 2).real()) / 3.0;
    if (!(s2 > 0.0) || !std::isfinite(s2)) {
        throw InvalidArgument("compress_r14: matrix has zero or non-finite norm");
    }
    double worst = 0.0;
    int wr = 0;
    int wc = 0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            const double dev = std::abs(gram(r, c) - (r == c ? cd{s2} : cd{}));
            if (dev > worst) {
                worst = dev;
                wr = r;
                wc = c;
            }
        }
    if (worst > rel_tol * s2) {
        std::ostringstream os;
        os << "compress_r14: matrix is not a scaled unitary; (N^dagger N)(" << wr << "," << wc
           << ") deviates from s^2 delta by " << worst << " (s^2 = " << s2 << ", tolerance " << rel_tol * s2 << ")";
        throw InvalidArgument(os.str());
    }
    const double s = std::sqrt(s2);
    // det(N/s) = det(N)/s^3 and s > 0, so the phase is that of det(N).
    const double phi = std::arg(determinant(nd));

    R14Link<T> out;
    for (int k = 0; k < 3; ++k) {
        out.v[static_cast<std::size_t>(2 * k)] = n(0, k).real();
        out.v[static_cast<std::size_t>(2 * k + 1)] = n(0, k).imag();
        out.v[static_cast<std::size_t>(6 + 2 * k)] = n(1, k).real();
        out.v[static_cast<std::size_t>(6 + 2 * k + 1)] = n(1, k).imag();
    }
    out.v[12] = static_cast<T>(s);
    out.v[13] = static_cast<T>(phi);
    return out;
}

template <typename T>
Complex3x3<T> reconstruct_r14(const R14Link<T>& c) {
    if (!(c.scale() > T{0})) {
        throw InvalidArgument("reconstruct_r14: scale must be positive");
    }
    Complex3x3<T> m;
    reconstruct_r14_into(c.v.data(), m);
    return m;
}

template Complex3x3<float> random_su3<float>(Rng&);
template Complex3x3<double> random_su3<double>(Rng&);
template R14Link<float> compress_r14<float>(const Complex3x3<float>&, double);
template R14Link<double> compress_r14<double>(const Complex3x3<double>&, double);
template Complex3x3<float> reconstruct_r14<float>(const R14Link<float>&);
template Complex3x3<double> reconstruct_r14<double>(const R14Link<double>&);

} // namespace hisq
