#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hisq/solver.hpp"

namespace hisq {

struct ChainInsertion {
    enum class Kind : std::uint8_t { inverse, derivative };
    Kind kind = Kind::inverse;
    /// derivative order in mu_hat, >= 1 for derivative insertions
    int order = 0;

    [[nodiscard]] static ChainInsertion inverse() { return {Kind::inverse, 0}; }
    [[nodiscard]] static ChainInsertion derivative(int k) { return {Kind::derivative, k}; }
    friend bool operator==(const ChainInsertion&, const ChainInsertion&) = default;
};

/// Operator chain, leftmost insertion first: "d1,inv" is dM/dmu M^{-1}.
struct ChainSpec {
    std::vector<ChainInsertion> insertions;
    double mu_hat = 0.0;

    /// Comma separated tokens `inv` and `dK`.
    [[nodiscard]] static ChainSpec parse(std::string_view text, double mu_hat = 0.0);
    /// At least one inverse and no two adjacent derivatives.
    void validate() const;
    [[nodiscard]] std::string describe() const;
};

struct TraceEstimate {
    std::complex<double> mean;
    double std_error = 0.0;
    int n_vectors = 0;
    std::vector<std::complex<double>> samples;
    std::int64_t cg_iterations = 0;
};

/// Mean and standard error of a sample set, summed in order.
[[nodiscard]] TraceEstimate summarize_samples(std::span<const std::complex<double>> samples);

struct TraceConfig {
    NoiseKind noise = NoiseKind::z2;
    int n_vectors = 500;
    /// noise vectors solved together in one multi-rhs CG
    int batch = 4;
    CgConfig cg{};
    std::uint64_t seed = 0;
    bool keep_samples = true;
};

/// out = d^k D / d mu_hat^k (mu_hat) in; k = 0 is D(mu_hat) itself.
template <typename T>
TransferStats mu_weighted_dslash(const Dslash<T>& d, double mu_hat, int order, const VectorBundle<T>& in,
                                 VectorBundle<T>& out);

/// Noise vector k is drawn from stream k of `seed`, so samples do not depend
/// on the batch width. Inverses are applied as (M^dagger M)^{-1} M^dagger.
template <typename T>
TraceEstimate estimate_chain(const ChainSpec& chain, const FermionOperator<T>& op, const TraceConfig& cfg);

} // namespace hisq
