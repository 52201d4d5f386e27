#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hisq/lattice.hpp"

namespace hisq::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitVerification = 2, kExitRuntime = 3 };

/// Entry point of the `hisq` tool; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

inline constexpr const char* kBenchDslashHeader =
    "timestamp,lattice,n_rhs,precision,storage,layout,strategy,repetitions,median_s,min_s,gflops,model_ai,"
    "device,predicted_gflops,checksum";
inline constexpr const char* kBenchCgHeader =
    "timestamp,lattice,n_rhs,precision,storage,layout,strategy,repetitions,median_s,min_s,gflops,model_ai,"
    "iterations,iterations_per_rhs,converged,dslash_applications";
inline constexpr const char* kIntensityHeader = "n_rhs,storage,precision,intensity";
inline constexpr const char* kRooflineHeader = "device,n_rhs,storage,bandwidth_source,bandwidth_gbs,intensity,predicted_gflops";
inline constexpr const char* kDevicesHeader = "name,peak_fp32,peak_fp64,bandwidth,measured_bandwidth,tdp";
inline constexpr const char* kTraceHeader = "chain,mu,mass,n_vectors,mean_re,mean_im,stderr,cg_iterations";
inline constexpr const char* kTraceSamplesHeader = "vector,re,im";

/// One row of a `bench dslash` or `bench cg` sweep.
struct BenchRecord {
    std::string timestamp;
    std::string lattice;
    int n_rhs = 0;
    std::string precision;
    std::string storage;
    std::string layout;
    std::string strategy;
    int repetitions = 0;
    double median_s = 0.0;
    double min_s = 0.0;
    double gflops = 0.0;
    double model_ai = 0.0;
    std::string device;
    std::optional<double> predicted_gflops;
    std::uint64_t checksum = 0;
    // CG runs
    int iterations = 0;
    std::vector<int> iterations_per_rhs;
    bool converged = true;
    std::int64_t dslash_applications = 0;

    [[nodiscard]] std::string dslash_csv() const;
    [[nodiscard]] std::string cg_csv() const;
};

struct VerifyCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    std::array<int, 4> dims{4, 4, 4, 4};
    std::uint64_t seed = 1;
    /// mutation hooks
    bool flip_backward_smeared = false;
    bool naik_reals_16 = false;
};

/// The oracle suite behind `verify`; every check reports instead of throwing.
[[nodiscard]] std::vector<VerifyCheck> run_verify_suite(const VerifyOptions& opts);

} // namespace hisq::cli
