#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hisq/dslash.hpp"

namespace hisq {

/// M = m + D(mu_hat). The normal operator M^dagger M is hermitian positive
/// definite with smallest eigenvalue >= m^2 at mu_hat = 0.
template <typename T>
class FermionOperator {
public:
    FermionOperator(std::shared_ptr<const Dslash<T>> dslash, double mass, double mu_hat = 0.0);

    [[nodiscard]] const Dslash<T>& dslash() const noexcept { return *dslash_; }
    [[nodiscard]] const std::shared_ptr<const Dslash<T>>& dslash_ptr() const noexcept { return dslash_; }
    [[nodiscard]] const LatticeGeometry& geometry() const noexcept { return dslash_->geometry(); }
    [[nodiscard]] double mass() const noexcept { return mass_; }
    [[nodiscard]] double mu_hat() const noexcept { return mu_hat_; }

    /// out = M in
    TransferStats apply_M(std::span<const ColorField<T>* const> in, std::span<ColorField<T>* const> out) const;
    /// out = M^dagger in = m in - D(-mu_hat) in
    TransferStats apply_Mdag(std::span<const ColorField<T>* const> in, std::span<ColorField<T>* const> out) const;
    /// out = M^dagger M in; at mu_hat = 0 this is m^2 in - D(D in). `tmp` is scratch.
    TransferStats apply_normal(std::span<const ColorField<T>* const> in, std::span<ColorField<T>* const> out,
                               std::span<ColorField<T>* const> tmp) const;

    TransferStats apply_M(const VectorBundle<T>& in, VectorBundle<T>& out) const;
    TransferStats apply_Mdag(const VectorBundle<T>& in, VectorBundle<T>& out) const;
    TransferStats apply_normal(const VectorBundle<T>& in, VectorBundle<T>& out) const;

    /// Single-rhs Dslash applications issued so far.
    [[nodiscard]] std::int64_t dslash_applications() const noexcept { return applications_.load(); }

private:
    TransferStats hop(std::span<const ColorField<T>* const> in, std::span<ColorField<T>* const> out,
                      double mu) const;

    std::shared_ptr<const Dslash<T>> dslash_;
    double mass_;
    double mu_hat_;
    mutable std::atomic<std::int64_t> applications_{0};
};

struct CgConfig {
    double tol = 1e-10;
    int max_iter = 10000;
    Precision precision = Precision::f64;

    void validate() const;
};

[[nodiscard]] constexpr double default_tolerance(Precision p) noexcept { return p == Precision::f32 ? 1e-6 : 1e-10; }

struct CgRhsReport {
    int iterations = 0;
    /// |r|/|b| from the recursion at exit
    double residual = 0.0;
    /// |b - A x|/|b| recomputed at exit
    double true_residual = 0.0;
    bool converged = false;
    bool breakdown = false;
};

struct CgReport {
    std::vector<CgRhsReport> rhs;
    /// history[it][i]: residual of rhs i after iteration it+1, NaN once frozen
    std::vector<std::vector<double>> history;
    /// single-rhs Dslash applications inside the iteration loop
    std::int64_t dslash_applications = 0;
    /// applications spent on the exit true-residual check
    std::int64_t check_dslash_applications = 0;
    TransferStats stats;
    double wall_seconds = 0.0;

    [[nodiscard]] int max_iterations() const noexcept;
    [[nodiscard]] bool all_converged() const noexcept;
    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] std::string summary() const;
};

inline constexpr const char* kCgCsvHeader = "rhs,iterations,residual,true_residual,converged,breakdown";

/// Independent CG on A = M^dagger M for every rhs of `b`, starting from x = 0.
/// Each iteration applies A to the bundle of still-active rhs only.
template <typename T>
CgReport cg_solve(const FermionOperator<T>& op, const VectorBundle<T>& b, VectorBundle<T>& x, const CgConfig& cfg);

} // namespace hisq
