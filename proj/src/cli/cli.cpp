#include "hisq/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <new>
#include <sstream>

#include "hisq/autotune.hpp"
#include "hisq/dslash.hpp"
#include "hisq/error.hpp"
#include "hisq/field_io.hpp"
#include "hisq/perfmodel.hpp"
#include "hisq/solver.hpp"
#include "hisq/traces.hpp"

namespace hisq::cli {

namespace {

constexpr int kWarmup = 5;
constexpr int kCgWarmup = 1;
constexpr int kCgDefaultRepetitions = 3;

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::string sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(6) << v;
    return os.str();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string dims_text(const std::array<int, 4>& d) {
    return std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" + std::to_string(d[2]) + "x" + std::to_string(d[3]);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// "1,2,4" or "1..8", mixed freely: "1..4,8".
std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    auto to_int = [&](const std::string& s) {
        std::size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(s, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (pos != s.size() || v < 1) throw InvalidArgument(std::string(what) + ": bad entry '" + s + "'");
        return v;
    };
    while (std::getline(ss, tok, ',')) {
        const auto dots = tok.find("..");
        if (dots == std::string::npos) {
            out.push_back(to_int(tok));
            continue;
        }
        const int lo = to_int(tok.substr(0, dots));
        const int hi = to_int(tok.substr(dots + 2));
        if (hi < lo) throw InvalidArgument(std::string(what) + ": empty range '" + tok + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
    }
    if (out.empty()) throw InvalidArgument(std::string(what) + ": empty list");
    return out;
}

std::vector<LinkStorage> parse_storages(const std::string& text) {
    if (text == "both") return {LinkStorage::full18, LinkStorage::r14};
    return {parse_storage(text)};
}

/// Parsed and validated flags. Everything that can be rejected is rejected
/// here, before any field is allocated.
struct RunConfig {
    std::vector<LatticeGeometry> lattices;
    std::vector<int> rhs;
    Precision precision = Precision::f32;
    VectorLayout layout = VectorLayout::soa();
    std::string strategy = "register";
    int rhs_chunk = 0; // 0: n
    int tile = 64;
    bool split = false;
    std::vector<LinkStorage> storages{LinkStorage::full18};
    std::uint64_t seed = 1;
    int repetitions = 50;
    double tune_budget = 2.0;
    std::optional<DeviceSpec> device;
    bool measured_bw = false;
    double mass = 0.1;
    double tol = 0.0;
    int max_iter = 10000;
    bool zero_rhs = false;
    ChainSpec chain;
    int nvec = 100;
    int batch = 4;
    NoiseKind noise = NoiseKind::z2;
    bool zero_links = false;
    std::string samples_path;
    int digits = 2;
    std::vector<DeviceSpec> catalog;
};

/// Raw flag values as CLI11 fills them in.
struct Flags {
    std::string lattice;
    std::string rhs;
    std::string precision;
    std::string layout = "soa";
    std::string strategy = "register";
    int rhs_chunk = 0;
    int tile = 64;
    bool split = false;
    std::string reconstruct = "full";
    std::uint64_t seed = 1;
    int threads = 0;
    std::string output;
    int repetitions = 0;
    double tune_budget = 2.0;
    std::string device;
    bool measured_bw = false;
    std::string device_config;
    double mass = 0.1;
    double tol = 0.0;
    int max_iter = 10000;
    bool zero_rhs = false;
    std::string chain = "inv";
    double mu = 0.0;
    int nvec = 100;
    int batch = 4;
    std::string noise = "z2";
    bool zero_links = false;
    std::string samples;
    std::string inject = "none";
    int digits = -1;
};

RunConfig resolve(const Flags& f, const std::string& default_lattice, Precision default_precision,
                  const std::string& default_rhs, int default_digits, int default_reps) {
    RunConfig c;
    std::stringstream ls(f.lattice.empty() ? default_lattice : f.lattice);
    std::string tok;
    while (std::getline(ls, tok, ',')) c.lattices.push_back(LatticeGeometry::parse(tok));
    if (c.lattices.empty()) throw InvalidArgument("--lattice: empty list");
    c.rhs = parse_int_list(f.rhs.empty() ? default_rhs : f.rhs, "--rhs");
    c.precision = f.precision.empty() ? default_precision : parse_precision(f.precision);
    c.layout = VectorLayout::parse(f.layout);
    if (c.layout.is_fused()) {
        for (const auto& g : c.lattices)
            if ((g.extent(0) / 2) % c.layout.fusion_width != 0)
                throw InvalidArgument("--layout " + c.layout.name() + ": fusion width does not divide Nx/2 = " +
                                      std::to_string(g.extent(0) / 2));
    }
    c.strategy = f.strategy;
    if (c.strategy != "register" && c.strategy != "cache" && c.strategy != "combined" && c.strategy != "auto")
        throw InvalidArgument("--strategy must be register, cache, combined or auto");
    if (f.rhs_chunk < 0) throw InvalidArgument("--rhs-chunk must be >= 1");
    if (f.tile < 1) throw InvalidArgument("--tile must be >= 1");
    c.rhs_chunk = f.rhs_chunk;
    c.tile = f.tile;
    c.split = f.split;
    c.storages = parse_storages(f.reconstruct);
    c.seed = f.seed;
    c.repetitions = f.repetitions > 0 ? f.repetitions : default_reps;
    if (f.repetitions < 0) throw InvalidArgument("--repetitions must be >= 1");
    if (!(f.tune_budget >= 0.0)) throw InvalidArgument("--tune-budget must be >= 0");
    c.tune_budget = f.tune_budget;
    c.catalog = device_catalog();
    if (!f.device_config.empty()) c.catalog = load_device_config(f.device_config, c.catalog);
    if (!f.device.empty()) c.device = find_device(f.device, c.catalog);
    c.measured_bw = f.measured_bw;
    if (c.measured_bw && c.device && !c.device->measured_bandwidth)
        throw InvalidArgument("device '" + c.device->name + "' has no measured bandwidth");
    if (!(f.mass > 0.0)) throw InvalidArgument("--mass must be > 0");
    c.mass = f.mass;
    c.tol = f.tol > 0.0 ? f.tol : default_tolerance(c.precision);
    if (f.tol < 0.0) throw InvalidArgument("--tol must be > 0");
    CgConfig{c.tol, f.max_iter, c.precision}.validate();
    c.max_iter = f.max_iter;
    c.zero_rhs = f.zero_rhs;
    c.chain = ChainSpec::parse(f.chain, f.mu);
    c.chain.validate();
    if (f.nvec < 1) throw InvalidArgument("--nvec must be >= 1");
    if (f.batch < 1) throw InvalidArgument("--batch must be >= 1");
    c.nvec = f.nvec;
    c.batch = f.batch;
    c.noise = parse_noise(f.noise);
    c.zero_links = f.zero_links;
    if (c.zero_links && c.storages.size() == 1 && c.storages[0] == LinkStorage::r14)
        throw InvalidArgument("--zero-links needs full link storage; the zero matrix has no r14 form");
    c.samples_path = f.samples;
    c.digits = f.digits >= 0 ? f.digits : default_digits;
    return c;
}

std::int64_t required_bytes(const LatticeGeometry& g, int n, LinkStorage s, Precision p, int bundles) {
    const std::int64_t real = bytes_per_real(p);
    const std::int64_t links = 4 * g.volume() * (18 + reals_per_link(s)) * real;
    return links + static_cast<std::int64_t>(bundles) * n * g.volume() * 6 * real;
}

std::string mib(std::int64_t bytes) { return fixed(static_cast<double>(bytes) / (1024.0 * 1024.0), 1) + " MiB"; }

template <typename T>
struct Links {
    std::shared_ptr<LinkField<T>> x;
    std::shared_ptr<LinkField<T>> n;
};

template <typename T>
Links<T> make_links(const LatticeGeometry& g, LinkStorage s, std::uint64_t seed, bool zero) {
    Links<T> l{std::make_shared<LinkField<T>>(g, LinkRole::smeared_x),
               std::make_shared<LinkField<T>>(g, LinkRole::naik_n, s)};
    if (!zero) {
        fill_random_links(*l.x, seed);
        fill_random_links(*l.n, seed, 0.4);
    }
    return l;
}

DslashConfig fixed_config(const RunConfig& c, int n) {
    const int k = c.rhs_chunk > 0 ? c.rhs_chunk : n;
    DslashConfig cfg;
    cfg.split_kernels = c.split;
    if (c.strategy == "cache") cfg.strategy = DslashStrategy::cache_block(c.tile);
    else if (c.strategy == "combined") cfg.strategy = DslashStrategy::combined(k, c.tile);
    else cfg.strategy = DslashStrategy::register_block(k);
    return cfg;
}

class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw Error("cannot open output file '" + path + "'");
            os_ = &file_;
        }
    }
    std::ostream& operator*() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

template <typename T>
void bench_dslash(const RunConfig& c, std::ostream& os) {
    const std::string stamp = utc_timestamp();
    for (const auto& g : c.lattices)
        for (const auto s : c.storages)
            for (const int n : c.rhs) {
                const auto need = required_bytes(g, n, s, c.precision, 2);
                try {
                    const auto links = make_links<T>(g, s, c.seed, c.zero_links);
                    Dslash<T> op(links.x, links.n, fixed_config(c, n));
                    VectorBundle<T> in(g, n, c.layout);
                    VectorBundle<T> out(g, n, c.layout);
                    fill_random_rhs(in, c.seed + 1, NoiseKind::gaussian);
                    if (c.strategy == "auto") (void)Autotuner::global().tune(op, in, out, c.tune_budget);

                    TransferStats stats;
                    for (int w = 0; w < kWarmup; ++w) stats = op.apply(in, out);
                    std::vector<double> times;
                    times.reserve(static_cast<std::size_t>(c.repetitions));
                    for (int r = 0; r < c.repetitions; ++r) {
                        const auto t0 = std::chrono::steady_clock::now();
                        (void)op.apply(in, out);
                        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
                    }

                    BenchRecord rec;
                    rec.timestamp = stamp;
                    rec.lattice = dims_text(g.dims());
                    rec.n_rhs = n;
                    rec.precision = std::string(to_string(c.precision));
                    rec.storage = std::string(to_string(s));
                    rec.layout = c.layout.name();
                    rec.strategy = op.config().describe();
                    rec.repetitions = c.repetitions;
                    rec.median_s = median(times);
                    rec.min_s = *std::min_element(times.begin(), times.end());
                    rec.gflops = static_cast<double>(stats.flops) / rec.median_s * 1e-9;
                    rec.model_ai = CostModel::standard().arithmetic_intensity(n, s, c.precision);
                    if (c.device) {
                        rec.device = c.device->name;
                        rec.predicted_gflops = roofline_predict(*c.device, n, s, c.measured_bw, c.precision);
                    }
                    // hashed in soa order so the value identifies the field, not its layout
                    rec.checksum = payload_checksum(c.layout.is_fused() ? convert_layout(out, VectorLayout::soa()) : out);
                    os << rec.dslash_csv() << '\n' << std::flush;
                } catch (const std::bad_alloc&) {
                    throw Error("out of memory on " + g.to_string() + " with " + std::to_string(n) + " rhs: needs about " +
                                mib(need));
                }
            }
}

template <typename T>
void bench_cg(const RunConfig& c, std::ostream& os) {
    const std::string stamp = utc_timestamp();
    for (const auto& g : c.lattices)
        for (const auto s : c.storages)
            for (const int n : c.rhs) {
                // links, b, x and the solver's r, p, Ap, tmp
                const auto need = required_bytes(g, n, s, c.precision, 6);
                try {
                    const auto links = make_links<T>(g, s, c.seed, c.zero_links);
                    auto d = std::make_shared<Dslash<T>>(links.x, links.n, fixed_config(c, n));
                    VectorBundle<T> b(g, n, c.layout);
                    VectorBundle<T> x(g, n, c.layout);
                    if (!c.zero_rhs) fill_random_rhs(b, c.seed + 1, NoiseKind::gaussian);
                    if (c.strategy == "auto") (void)Autotuner::global().tune(*d, b, x, c.tune_budget);
                    const FermionOperator<T> op(d, c.mass);
                    const CgConfig cfg{c.tol, c.max_iter, c.precision};

                    CgReport rep;
                    for (int w = 0; w < kCgWarmup; ++w) rep = cg_solve(op, b, x, cfg);
                    std::vector<double> times;
                    for (int r = 0; r < c.repetitions; ++r) {
                        rep = cg_solve(op, b, x, cfg);
                        times.push_back(rep.wall_seconds);
                    }

                    BenchRecord rec;
                    rec.timestamp = stamp;
                    rec.lattice = dims_text(g.dims());
                    rec.n_rhs = n;
                    rec.precision = std::string(to_string(c.precision));
                    rec.storage = std::string(to_string(s));
                    rec.layout = c.layout.name();
                    rec.strategy = d->config().describe();
                    rec.repetitions = c.repetitions;
                    rec.iterations = rep.max_iterations();
                    const double per_iter = rec.iterations > 0 ? 1.0 / rec.iterations : 0.0;
                    const double solve_median = median(times);
                    rec.median_s = solve_median * per_iter;
                    rec.min_s = *std::min_element(times.begin(), times.end()) * per_iter;
                    rec.gflops = solve_median > 0 && rep.stats.flops > 0
                                     ? static_cast<double>(rep.stats.flops) / solve_median * 1e-9
                                     : 0.0;
                    rec.model_ai = CostModel::standard().arithmetic_intensity(n, s, c.precision);
                    for (const auto& r : rep.rhs) rec.iterations_per_rhs.push_back(r.iterations);
                    rec.converged = rep.all_converged();
                    rec.dslash_applications = rep.dslash_applications;
                    os << rec.cg_csv() << '\n' << std::flush;
                } catch (const std::bad_alloc&) {
                    throw Error("out of memory on " + g.to_string() + " with " + std::to_string(n) + " rhs: needs about " +
                                mib(need));
                }
            }
}

template <typename T>
void trace(const RunConfig& c, std::ostream& os, std::ostream& log) {
    const auto& g = c.lattices.front();
    const auto s = c.storages.front();
    const auto links = make_links<T>(g, s, c.seed, c.zero_links);
    const FermionOperator<T> op(std::make_shared<Dslash<T>>(links.x, links.n), c.mass, c.chain.mu_hat);
    TraceConfig cfg;
    cfg.noise = c.noise;
    cfg.n_vectors = c.nvec;
    cfg.batch = c.batch;
    cfg.cg = {c.tol, c.max_iter, c.precision};
    cfg.seed = c.seed;
    cfg.keep_samples = !c.samples_path.empty();
    const auto e = estimate_chain(c.chain, op, cfg);

    os << kTraceHeader << '\n'
       << csv_field(c.chain.describe()) << ',' << c.chain.mu_hat << ',' << c.mass << ',' << e.n_vectors << ','
       << std::setprecision(17) << e.mean.real() << ',' << e.mean.imag() << ',' << e.std_error << ','
       << e.cg_iterations << '\n';
    log << c.chain.describe() << " = " << fixed(e.mean.real(), c.digits) << " ± " << std::setprecision(3)
        << e.std_error << '\n';

    if (!c.samples_path.empty()) {
        std::ofstream f(c.samples_path);
        if (!f) throw Error("cannot open samples file '" + c.samples_path + "'");
        f << kTraceSamplesHeader << '\n' << std::setprecision(17);
        for (std::size_t i = 0; i < e.samples.size(); ++i)
            f << i << ',' << e.samples[i].real() << ',' << e.samples[i].imag() << '\n';
    }
}

} // namespace

std::string BenchRecord::dslash_csv() const {
    std::ostringstream os;
    os << timestamp << ',' << lattice << ',' << n_rhs << ',' << precision << ',' << storage << ',' << layout << ','
       << csv_field(strategy) << ',' << repetitions << ',' << sci(median_s) << ',' << sci(min_s) << ','
       << fixed(gflops, 3) << ',' << fixed(model_ai, 4) << ',' << csv_field(device) << ','
       << (predicted_gflops ? fixed(*predicted_gflops, 1) : std::string()) << ',' << std::hex << std::setw(16)
       << std::setfill('0') << checksum;
    return os.str();
}

std::string BenchRecord::cg_csv() const {
    std::string iters;
    for (std::size_t i = 0; i < iterations_per_rhs.size(); ++i)
        iters += (i ? ";" : "") + std::to_string(iterations_per_rhs[i]);
    std::ostringstream os;
    os << timestamp << ',' << lattice << ',' << n_rhs << ',' << precision << ',' << storage << ',' << layout << ','
       << csv_field(strategy) << ',' << repetitions << ',' << sci(median_s) << ',' << sci(min_s) << ','
       << fixed(gflops, 3) << ',' << fixed(model_ai, 4) << ',' << iterations << ',' << iters << ','
       << (converged ? 1 : 0) << ',' << dslash_applications;
    return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"HISQ multi-rhs Dslash: benchmarks, verification, performance model, traces", "hisq"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;

    app.add_option("--lattice", f.lattice, "NXxNYxNZxNT, comma-separated for sweeps");
    app.add_option("--rhs", f.rhs, "rhs counts, e.g. 4 or 1,2,4 or 1..8");
    app.add_option("--precision", f.precision, "f32 or f64");
    app.add_option("--layout", f.layout, "soa, fused4, fused8, fused16");
    app.add_option("--strategy", f.strategy, "register, cache, combined or auto");
    app.add_option("--rhs-chunk", f.rhs_chunk, "rhs per link load (default: all)");
    app.add_option("--tile", f.tile, "sites per cache tile");
    app.add_flag("--split-kernels", f.split, "separate smeared and Naik passes");
    app.add_option("--reconstruct", f.reconstruct, "Naik storage: full, r14 or both");
    app.add_option("--seed", f.seed, "seed for every random field");
    app.add_option("--threads", f.threads, "kernel threads (default: all cores)");
    app.add_option("--output", f.output, "write CSV here instead of stdout");
    app.add_option("--repetitions", f.repetitions, "timed repetitions (dslash 50, cg 3)");
    app.add_option("--tune-budget", f.tune_budget, "autotuning budget in seconds");
    app.add_option("--device", f.device, "device for roofline predictions");
    app.add_flag("--measured-bw", f.measured_bw, "use the measured instead of the nominal bandwidth");
    app.add_option("--device-config", f.device_config, "extra devices, one 'name key=value ...' per line");
    app.add_option("--digits", f.digits, "decimals of printed results");
    app.add_option("--mass", f.mass, "quark mass");
    app.add_option("--tol", f.tol, "relative CG tolerance (default 1e-6 f32, 1e-10 f64)");
    app.add_option("--max-iter", f.max_iter, "CG iteration cap");

    auto* bench = app.add_subcommand("bench", "timing runs");
    bench->require_subcommand(1);
    auto* bench_dslash_cmd = bench->add_subcommand("dslash", "time Dslash applications");
    auto* bench_cg_cmd = bench->add_subcommand("cg", "time CG solves");
    bench_cg_cmd->add_flag("--zero-rhs", f.zero_rhs, "solve with b = 0");
    for (auto* cmd : {bench_dslash_cmd, bench_cg_cmd})
        cmd->add_flag("--zero-links", f.zero_links, "all links zero");

    auto* verify = app.add_subcommand("verify", "oracle suite; exit 2 on any failure");
    verify->add_option("--inject", f.inject, "mutation: none, flip-backward, naik16")
        ->check(CLI::IsMember({"none", "flip-backward", "naik16"}));

    auto* model = app.add_subcommand("model", "arithmetic intensity and roofline");
    model->require_subcommand(1);
    auto* intensity = model->add_subcommand("intensity", "flops per byte");
    auto* roofline = model->add_subcommand("roofline", "bandwidth-bound predictions");
    auto* devices = model->add_subcommand("devices", "device catalog");

    auto* trace_cmd = app.add_subcommand("trace", "stochastic trace of an insertion chain");
    trace_cmd->add_option("--chain", f.chain, "e.g. inv or d1,inv,d1,inv");
    trace_cmd->add_option("--mu", f.mu, "chemical potential mu_hat");
    trace_cmd->add_option("--nvec", f.nvec, "noise vectors");
    trace_cmd->add_option("--batch", f.batch, "noise vectors per multi-rhs solve");
    trace_cmd->add_option("--noise", f.noise, "z2 or gaussian");
    trace_cmd->add_flag("--zero-links", f.zero_links, "all links zero: M = m");
    trace_cmd->add_option("--samples", f.samples, "per-vector CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << "run with --help for usage\n";
        return kExitUsage;
    }

    RunConfig cfg;
    try {
        if (f.threads < 0) throw InvalidArgument("--threads must be >= 1");
        if (bench_dslash_cmd->parsed()) cfg = resolve(f, "16x16x16x16", Precision::f32, "1", 2, 50);
        else if (bench_cg_cmd->parsed()) cfg = resolve(f, "8x8x8x8", Precision::f32, "1", 2, kCgDefaultRepetitions);
        else if (trace_cmd->parsed()) cfg = resolve(f, "4x4x4x4", Precision::f64, "1", 1, 1);
        else if (intensity->parsed()) cfg = resolve(f, "4x4x4x4", Precision::f32, "1,2,3,4,5,6,8", 2, 1);
        else if (roofline->parsed()) cfg = resolve(f, "4x4x4x4", Precision::f32, "1,2,3,4,5,6,8", 1, 1);
        else cfg = resolve(f, "4x4x4x4", Precision::f64, "1", 2, 1);
        if (roofline->parsed() && !cfg.device) throw InvalidArgument("model roofline needs --device");
        if (trace_cmd->parsed() && cfg.lattices.size() != 1) throw InvalidArgument("trace takes a single lattice");
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NotFound& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }

    if (f.threads > 0) omp_set_num_threads(f.threads);

    try {
        Sink sink(f.output, out);
        auto& os = *sink;
        const bool f64 = cfg.precision == Precision::f64;
        if (bench_dslash_cmd->parsed()) {
            os << kBenchDslashHeader << '\n';
            f64 ? bench_dslash<double>(cfg, os) : bench_dslash<float>(cfg, os);
        } else if (bench_cg_cmd->parsed()) {
            os << kBenchCgHeader << '\n';
            f64 ? bench_cg<double>(cfg, os) : bench_cg<float>(cfg, os);
        } else if (trace_cmd->parsed()) {
            f64 ? trace<double>(cfg, os, err) : trace<float>(cfg, os, err);
        } else if (intensity->parsed()) {
            os << kIntensityHeader << '\n';
            for (const auto s : cfg.storages)
                for (const int n : cfg.rhs)
                    os << n << ',' << to_string(s) << ',' << to_string(cfg.precision) << ','
                       << fixed(arithmetic_intensity(n, s, cfg.precision), cfg.digits) << '\n';
        } else if (roofline->parsed()) {
            const auto& dev = *cfg.device;
            const double bw = cfg.measured_bw ? *dev.measured_bandwidth : dev.bandwidth;
            os << kRooflineHeader << '\n';
            for (const auto s : cfg.storages)
                for (const int n : cfg.rhs)
                    os << csv_field(dev.name) << ',' << n << ',' << to_string(s) << ','
                       << (cfg.measured_bw ? "measured" : "nominal") << ',' << bw << ','
                       << fixed(arithmetic_intensity(n, s, cfg.precision), 4) << ','
                       << fixed(roofline_predict(dev, n, s, cfg.measured_bw, cfg.precision), cfg.digits) << '\n';
        } else if (devices->parsed()) {
            os << kDevicesHeader << '\n';
            for (const auto& d : cfg.catalog)
                os << csv_field(d.name) << ',' << d.peak_fp32 << ',' << d.peak_fp64 << ',' << d.bandwidth << ','
                   << (d.measured_bandwidth ? std::to_string(static_cast<int>(*d.measured_bandwidth)) : "") << ','
                   << d.tdp << '\n';
        } else if (verify->parsed()) {
            VerifyOptions vo;
            vo.dims = cfg.lattices.front().dims();
            vo.seed = cfg.seed;
            vo.flip_backward_smeared = f.inject == "flip-backward";
            vo.naik_reals_16 = f.inject == "naik16";
            bool ok = true;
            for (const auto& c : run_verify_suite(vo)) {
                os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
                ok = ok && c.pass;
            }
            os << (ok ? "all checks passed" : "verification FAILED") << '\n';
            if (!ok) return kExitVerification;
        }
        return kExitOk;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NotFound& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::bad_alloc&) {
        err << "error: out of memory\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace hisq::cli
