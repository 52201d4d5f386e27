#include "hisq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "hisq/error.hpp"

namespace hisq::oracle {

namespace {

// std::complex operator* goes through the Annex G slow path; spell it out.
inline cplx mul(cplx a, cplx b) noexcept {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

void check_square(const DenseMatrix& a) {
    if (a.rows() != a.cols()) throw ShapeMismatch("dense matrix is not square");
}

double norm1(const DenseVector& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::abs(z);
    return s;
}

} // namespace

DenseMatrix::DenseMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    if (rows < 0 || cols < 0) throw InvalidArgument("negative matrix dimension");
}

DenseMatrix DenseMatrix::identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseVector DenseMatrix::operator*(const DenseVector& v) const {
    if (static_cast<int>(v.size()) != cols_) throw ShapeMismatch("matrix-vector dimension mismatch");
    DenseVector w(static_cast<std::size_t>(rows_));
    for (int r = 0; r < rows_; ++r) {
        const cplx* row = &a_[static_cast<std::size_t>(r) * cols_];
        cplx s{};
        for (int c = 0; c < cols_; ++c) s += mul(row[c], v[static_cast<std::size_t>(c)]);
        w[static_cast<std::size_t>(r)] = s;
    }
    return w;
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& b) const {
    if (cols_ != b.rows_) throw ShapeMismatch("matrix-matrix dimension mismatch");
    DenseMatrix c(rows_, b.cols_);
    for (int i = 0; i < rows_; ++i) {
        cplx* ci = &c.a_[static_cast<std::size_t>(i) * c.cols_];
        for (int k = 0; k < cols_; ++k) {
            const cplx aik = (*this)(i, k);
            if (aik == cplx{}) continue;
            const cplx* bk = &b.a_[static_cast<std::size_t>(k) * b.cols_];
            for (int j = 0; j < b.cols_; ++j) ci[j] += mul(aik, bk[j]);
        }
    }
    return c;
}

DenseMatrix DenseMatrix::operator+(const DenseMatrix& b) const {
    if (rows_ != b.rows_ || cols_ != b.cols_) throw ShapeMismatch("matrix sum dimension mismatch");
    DenseMatrix c = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) c.a_[i] += b.a_[i];
    return c;
}

DenseMatrix DenseMatrix::operator-(const DenseMatrix& b) const {
    if (rows_ != b.rows_ || cols_ != b.cols_) throw ShapeMismatch("matrix difference dimension mismatch");
    DenseMatrix c = *this;
    for (std::size_t i = 0; i < a_.size(); ++i) c.a_[i] -= b.a_[i];
    return c;
}

DenseMatrix DenseMatrix::scaled(cplx s) const {
    DenseMatrix c = *this;
    for (auto& z : c.a_) z = mul(z, s);
    return c;
}

DenseMatrix DenseMatrix::dagger() const {
    DenseMatrix c(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
        for (int k = 0; k < cols_; ++k) c(k, r) = std::conj((*this)(r, k));
    return c;
}

double DenseMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (const auto& z : a_) m = std::max(m, std::abs(z));
    return m;
}

double DenseMatrix::norm1() const noexcept {
    double m = 0.0;
    for (int c = 0; c < cols_; ++c) {
        double s = 0.0;
        for (int r = 0; r < rows_; ++r) s += std::abs((*this)(r, c));
        m = std::max(m, s);
    }
    return m;
}

cplx DenseMatrix::trace() const {
    check_square(*this);
    cplx t{};
    for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

// ---------------------------------------------------------------------------

template <typename T>
DenseMatrix build_dense_dslash(const LinkField<T>& smeared, const LinkField<T>& naik, double mu_hat) {
    const auto& g = smeared.geometry();
    if (!(naik.geometry() == g)) throw ShapeMismatch("link fields differ in geometry");
    if (g.volume() > kMaxVolume) {
        throw InvalidArgument("dense oracle limited to " + std::to_string(kMaxVolume) + " sites, got " +
                              std::to_string(g.volume()));
    }
    const auto dims = g.dims();
    const auto index = [&](const std::array<int, 4>& c) {
        return c[0] + dims[0] * (c[1] + dims[1] * (c[2] + dims[2] * c[3]));
    };
    const bool antiperiodic = g.temporal_bc() == BoundaryCondition::antiperiodic;
    const int n = static_cast<int>(3 * g.volume());
    DenseMatrix d(n, n);

    std::array<int, 4> c{};
    for (c[3] = 0; c[3] < dims[3]; ++c[3])
        for (c[2] = 0; c[2] < dims[2]; ++c[2])
            for (c[1] = 0; c[1] < dims[1]; ++c[1])
                for (c[0] = 0; c[0] < dims[0]; ++c[0]) {
                    const int x = index(c);
                    for (int mu = 0; mu < 4; ++mu) {
                        for (int hop : {1, -1, 3, -3}) {
                            auto y = c;
                            const int raw = c[mu] + hop;
                            const bool wrapped = raw < 0 || raw >= dims[mu];
                            y[mu] = ((raw % dims[mu]) + dims[mu]) % dims[mu];
                            const int ys = index(y);
                            double coef = hop > 0 ? 1.0 : -1.0;
                            if (mu == 3) {
                                if (antiperiodic && wrapped) coef = -coef;
                                coef *= std::exp(hop * mu_hat);
                            }
                            const auto& field = std::abs(hop) == 1 ? smeared : naik;
                            const auto u = convert<double>(hop > 0 ? field.link(mu, x) : dagger(field.link(mu, ys)));
                            for (int a = 0; a < 3; ++a)
                                for (int b = 0; b < 3; ++b) d(3 * x + a, 3 * ys + b) += coef * u(a, b);
                        }
                    }
                }
    return d;
}

template <typename T>
DenseMatrix build_dense_fermion(const LinkField<T>& smeared, const LinkField<T>& naik, double mass, double mu_hat) {
    auto m = build_dense_dslash(smeared, naik, mu_hat);
    for (int i = 0; i < m.rows(); ++i) m(i, i) += mass;
    return m;
}

template <typename T>
DenseMatrix finite_difference_mu_derivative(const LinkField<T>& smeared, const LinkField<T>& naik, double mu_hat,
                                            int order) {
    if (order == 1) {
        const double h = 1e-6;
        const auto plus = build_dense_dslash(smeared, naik, mu_hat + h);
        const auto minus = build_dense_dslash(smeared, naik, mu_hat - h);
        return (plus - minus).scaled(1.0 / (2.0 * h));
    }
    if (order == 2) {
        const double h = 1e-4;
        const auto plus = build_dense_dslash(smeared, naik, mu_hat + h);
        const auto mid = build_dense_dslash(smeared, naik, mu_hat);
        const auto minus = build_dense_dslash(smeared, naik, mu_hat - h);
        return (plus - mid.scaled(2.0) + minus).scaled(1.0 / (h * h));
    }
    throw InvalidArgument("finite differences implemented for orders 1 and 2");
}

// ---------------------------------------------------------------------------

LuFactorization::LuFactorization(DenseMatrix a) : lu_(std::move(a)) {
    check_square(lu_);
    const int n = lu_.rows();
    const double anorm = lu_.norm1();
    piv_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) piv_[static_cast<std::size_t>(i)] = i;
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(lu_(k, k));
        for (int r = k + 1; r < n; ++r) {
            const double v = std::abs(lu_(r, k));
            if (v > best) {
                best = v;
                p = r;
            }
        }
        if (!(best > 1e-300) || best <= 1e-15 * anorm) {
            throw NumericalError("dense LU: matrix is singular to working precision at column " + std::to_string(k));
        }
        if (p != k) {
            for (int c = 0; c < n; ++c) std::swap(lu_(k, c), lu_(p, c));
            std::swap(piv_[static_cast<std::size_t>(k)], piv_[static_cast<std::size_t>(p)]);
        }
        const cplx inv = 1.0 / lu_(k, k);
        for (int r = k + 1; r < n; ++r) {
            const cplx l = mul(lu_(r, k), inv);
            lu_(r, k) = l;
            if (l == cplx{}) continue;
            cplx* rr = &lu_(r, 0);
            const cplx* kr = &lu_(k, 0);
            for (int c = k + 1; c < n; ++c) rr[c] -= mul(l, kr[c]);
        }
    }

    // Hager: estimate |A^{-1}|_1 by maximizing |A^{-1} x|_1 over the unit ball
    DenseVector x(static_cast<std::size_t>(n), cplx(1.0 / n));
    double est = 0.0;
    int last = -1;
    for (int it = 0; it < 5; ++it) {
        const auto y = solve(x);
        est = std::max(est, oracle::norm1(y));
        DenseVector xi(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) xi[i] = std::abs(y[i]) > 0 ? y[i] / std::abs(y[i]) : cplx(1.0);
        const auto z = solve_adjoint(xi);
        int j = 0;
        double zmax = 0.0;
        cplx ztx{};
        for (int i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            ztx += std::conj(z[u]) * x[u];
            if (std::abs(z[u]) > zmax) {
                zmax = std::abs(z[u]);
                j = i;
            }
        }
        if (zmax <= ztx.real() || j == last) break;
        std::fill(x.begin(), x.end(), cplx{});
        x[static_cast<std::size_t>(j)] = 1.0;
        last = j;
    }
    cond_ = anorm * est;
}

DenseVector LuFactorization::solve(const DenseVector& b) const {
    const int n = lu_.rows();
    if (static_cast<int>(b.size()) != n) throw ShapeMismatch("right-hand side has the wrong length");
    DenseVector x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(piv_[static_cast<std::size_t>(i)])];
    for (int i = 0; i < n; ++i) {
        cplx s = x[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) s -= mul(lu_(i, k), x[static_cast<std::size_t>(k)]);
        x[static_cast<std::size_t>(i)] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        cplx s = x[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) s -= mul(lu_(i, k), x[static_cast<std::size_t>(k)]);
        x[static_cast<std::size_t>(i)] = s / lu_(i, i);
    }
    return x;
}

DenseVector LuFactorization::solve_adjoint(const DenseVector& b) const {
    // A = P^T L U, so A^dagger = U^dagger L^dagger P
    const int n = lu_.rows();
    if (static_cast<int>(b.size()) != n) throw ShapeMismatch("right-hand side has the wrong length");
    DenseVector w = b;
    for (int i = 0; i < n; ++i) {
        cplx s = w[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) s -= mul(std::conj(lu_(k, i)), w[static_cast<std::size_t>(k)]);
        w[static_cast<std::size_t>(i)] = s / std::conj(lu_(i, i));
    }
    for (int i = n - 1; i >= 0; --i) {
        cplx s = w[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) s -= mul(std::conj(lu_(k, i)), w[static_cast<std::size_t>(k)]);
        w[static_cast<std::size_t>(i)] = s;
    }
    DenseVector x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(piv_[static_cast<std::size_t>(i)])] = w[static_cast<std::size_t>(i)];
    return x;
}

DenseVector dense_solve(const DenseMatrix& a, const DenseVector& b) { return LuFactorization(a).solve(b); }

bool eigenvalues_above(const DenseMatrix& a, double shift) {
    check_square(a);
    const int n = a.rows();
    // lower-triangular Cholesky in place on a copy
    DenseMatrix l = a;
    for (int j = 0; j < n; ++j) {
        double d = l(j, j).real() - shift;
        for (int k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            cplx s = l(i, j);
            for (int k = 0; k < j; ++k) s -= mul(l(i, k), std::conj(l(j, k)));
            l(i, j) = s / ljj;
        }
    }
    return true;
}

cplx dense_trace_chain(std::span<const DenseInsertion> chain, const DenseMatrix& m,
                       std::span<const DenseMatrix> derivatives) {
    check_square(m);
    if (chain.empty()) throw InvalidArgument("empty trace chain");
    if (m.rows() > 3 * kMaxVolume) throw InvalidArgument("dense trace exceeds the volume guard");
    std::unique_ptr<LuFactorization> lu;
    for (const auto& ins : chain) {
        if (ins.inverse) {
            if (!lu) lu = std::make_unique<LuFactorization>(m);
        } else if (ins.order < 0 || ins.order > static_cast<int>(derivatives.size())) {
            throw InvalidArgument("no derivative matrix of order " + std::to_string(ins.order));
        }
    }
    const int n = m.rows();
    cplx tr{};
    DenseVector col(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        std::fill(col.begin(), col.end(), cplx{});
        col[static_cast<std::size_t>(j)] = 1.0;
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            if (it->inverse) col = lu->solve(col);
            else if (it->order == 0) col = m * col;
            else col = derivatives[static_cast<std::size_t>(it->order - 1)] * col;
        }
        tr += col[static_cast<std::size_t>(j)];
    }
    return tr;
}

template <typename T>
DenseVector to_dense(const ColorField<T>& f) {
    DenseVector v(static_cast<std::size_t>(3 * f.volume()));
    for (std::int64_t s = 0; s < f.volume(); ++s) {
        const auto c = f.site(s);
        for (int a = 0; a < 3; ++a) v[static_cast<std::size_t>(3 * s + a)] = {c[a].real(), c[a].imag()};
    }
    return v;
}

template <typename T>
void from_dense(const DenseVector& v, ColorField<T>& f) {
    if (static_cast<std::int64_t>(v.size()) != 3 * f.volume()) throw ShapeMismatch("dense vector length mismatch");
    for (std::int64_t s = 0; s < f.volume(); ++s) {
        ColorVector<T> c;
        for (int a = 0; a < 3; ++a) {
            const auto z = v[static_cast<std::size_t>(3 * s + a)];
            c[a] = {static_cast<T>(z.real()), static_cast<T>(z.imag())};
        }
        f.set_site(s, c);
    }
}

#define HISQ_INSTANTIATE_ORACLE(T)                                                                         \
    template DenseMatrix build_dense_dslash<T>(const LinkField<T>&, const LinkField<T>&, double);           \
    template DenseMatrix build_dense_fermion<T>(const LinkField<T>&, const LinkField<T>&, double, double);  \
    template DenseMatrix finite_difference_mu_derivative<T>(const LinkField<T>&, const LinkField<T>&, double, int); \
    template DenseVector to_dense<T>(const ColorField<T>&);                                                 \
    template void from_dense<T>(const DenseVector&, ColorField<T>&);

HISQ_INSTANTIATE_ORACLE(float)
HISQ_INSTANTIATE_ORACLE(double)

} // namespace hisq::oracle
