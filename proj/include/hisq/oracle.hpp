#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "hisq/fields.hpp"

/// Dense-matrix reference implementations for tiny lattices. Nothing here
/// touches the production stencil; the operator is assembled by placing links
/// directly into a 3V x 3V matrix.
namespace hisq::oracle {

inline constexpr std::int64_t kMaxVolume = 4096;

using cplx = std::complex<double>;
using DenseVector = std::vector<cplx>;

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(int rows, int cols);

    [[nodiscard]] static DenseMatrix identity(int n);

    [[nodiscard]] int rows() const noexcept { return rows_; }
    [[nodiscard]] int cols() const noexcept { return cols_; }
    cplx& operator()(int r, int c) noexcept { return a_[static_cast<std::size_t>(r) * cols_ + c]; }
    const cplx& operator()(int r, int c) const noexcept { return a_[static_cast<std::size_t>(r) * cols_ + c]; }

    [[nodiscard]] DenseVector operator*(const DenseVector& v) const;
    [[nodiscard]] DenseMatrix operator*(const DenseMatrix& b) const;
    [[nodiscard]] DenseMatrix operator+(const DenseMatrix& b) const;
    [[nodiscard]] DenseMatrix operator-(const DenseMatrix& b) const;
    [[nodiscard]] DenseMatrix scaled(cplx s) const;
    [[nodiscard]] DenseMatrix dagger() const;
    [[nodiscard]] double max_abs() const noexcept;
    [[nodiscard]] double norm1() const noexcept;
    [[nodiscard]] cplx trace() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<cplx> a_;
};

/// Dslash with temporal chemical potential: temporal hops of signed length d
/// carry e^{d mu_hat}.
template <typename T>
[[nodiscard]] DenseMatrix build_dense_dslash(const LinkField<T>& smeared, const LinkField<T>& naik,
                                             double mu_hat = 0.0);

/// M = m + D(mu_hat)
template <typename T>
[[nodiscard]] DenseMatrix build_dense_fermion(const LinkField<T>& smeared, const LinkField<T>& naik, double mass,
                                              double mu_hat = 0.0);

/// Central finite difference of D(mu_hat) in mu_hat, order 1 (step 1e-6) or 2 (step 1e-4).
template <typename T>
[[nodiscard]] DenseMatrix finite_difference_mu_derivative(const LinkField<T>& smeared, const LinkField<T>& naik,
                                                          double mu_hat, int order);

/// Partial-pivoting LU of a square matrix.
class LuFactorization {
public:
    explicit LuFactorization(DenseMatrix a);

    [[nodiscard]] DenseVector solve(const DenseVector& b) const;
    /// Solves A^dagger x = b with the same factors.
    [[nodiscard]] DenseVector solve_adjoint(const DenseVector& b) const;
    /// 1-norm condition number, inverse norm estimated with Hager's method.
    [[nodiscard]] double condition_estimate() const noexcept { return cond_; }
    [[nodiscard]] int size() const noexcept { return lu_.rows(); }

private:
    DenseMatrix lu_;
    std::vector<int> piv_;
    double cond_ = 0.0;
};

[[nodiscard]] DenseVector dense_solve(const DenseMatrix& a, const DenseVector& b);

/// Cholesky of A - shift I succeeds: A hermitian with every eigenvalue > shift.
[[nodiscard]] bool eigenvalues_above(const DenseMatrix& a, double shift);

struct DenseInsertion {
    bool inverse = false;
    /// derivative order for non-inverse insertions
    int order = 0;
};

/// Tr of the product of the insertions, leftmost first. `derivatives[k-1]`
/// holds the k-th mu derivative of M; an order-0 insertion is M itself.
[[nodiscard]] cplx dense_trace_chain(std::span<const DenseInsertion> chain, const DenseMatrix& m,
                                     std::span<const DenseMatrix> derivatives);

/// Site-major (3 site + color) flattening.
template <typename T>
[[nodiscard]] DenseVector to_dense(const ColorField<T>& f);
template <typename T>
void from_dense(const DenseVector& v, ColorField<T>& f);

} // namespace hisq::oracle
