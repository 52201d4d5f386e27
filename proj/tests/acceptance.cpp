// Acceptance run: one PASS/FAIL line per criterion, wall time included in the
// verdict where a limit applies. Exit status is nonzero if any line fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hisq/algebra.hpp"
#include "hisq/autotune.hpp"
#include "hisq/blas.hpp"
#include "hisq/cli.hpp"
#include "hisq/dslash.hpp"
#include "hisq/oracle.hpp"
#include "hisq/perfmodel.hpp"
#include "hisq/solver.hpp"
#include "hisq/traces.hpp"

using namespace hisq;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

std::string num(double v, int digits = 4) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

std::string cli_output(std::vector<std::string> args) {
    args.insert(args.begin(), "hisq");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (code != cli::kExitOk) throw std::runtime_error("hisq exited with " + std::to_string(code) + ": " + err.str());
    return out.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (char c : line) {
            if (c == '"') quoted = !quoted;
            else if (c == ',' && !quoted) {
                cells.push_back(cell);
                cell.clear();
            } else cell += c;
        }
        cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

struct Links {
    std::shared_ptr<LinkField<double>> x;
    std::shared_ptr<LinkField<double>> n;
    std::shared_ptr<Dslash<double>> d;
};

Links random_links(const LatticeGeometry& g, std::uint64_t seed) {
    Links l{std::make_shared<LinkField<double>>(g, LinkRole::smeared_x),
            std::make_shared<LinkField<double>>(g, LinkRole::naik_n), nullptr};
    fill_random_links(*l.x, seed);
    fill_random_links(*l.n, seed, 0.4);
    l.d = std::make_shared<Dslash<double>>(l.x, l.n);
    return l;
}

double rel_diff(const oracle::DenseVector& a, const oracle::DenseVector& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / den);
}

template <typename T>
bool same_bits(const ColorField<T>& a, const ColorField<T>& b) {
    return a.data().size() == b.data().size() &&
           std::memcmp(a.data().data(), b.data().data(), a.data().size_bytes()) == 0;
}

// 1. published intensities through the CLI
Verdict table1() {
    const double full[] = {0.73, 1.16, 1.45, 1.65, 1.80, 1.91, 2.08};
    const double r14[] = {0.80, 1.25, 1.53, 1.73, 1.87, 1.98, 2.14};
    const auto rows = csv_rows(cli_output({"model", "intensity", "--reconstruct", "both", "--digits", "6"}));
    Verdict v;
    if (rows.size() != 14) return {false, "expected 14 rows, got " + std::to_string(rows.size())};
    double worst = 0.0;
    for (std::size_t i = 0; i < 14; ++i) {
        const double pub = i < 7 ? full[i] : r14[i - 7];
        worst = std::max(worst, std::abs(std::stod(rows[i][3]) - pub));
    }
    v.pass = worst <= 0.005;
    v.detail = "14 entries, max |model - published| = " + num(worst, 3);
    return v;
}

// 2. ratio claims
Verdict ratios() {
    const auto ai = [](int n, LinkStorage s) { return arithmetic_intensity(n, s); };
    const double inf = asymptotic_intensity();
    const double r41 = ai(4, LinkStorage::full18) / ai(1, LinkStorage::full18);
    const double r8 = ai(8, LinkStorage::full18) / inf;
    const double r1 = ai(1, LinkStorage::full18) / inf;
    const double g1 = ai(1, LinkStorage::r14) / ai(1, LinkStorage::full18) - 1.0;
    const double g8 = ai(8, LinkStorage::r14) / ai(8, LinkStorage::full18) - 1.0;
    Verdict v;
    auto part = [&](const std::string& name, double val, bool ok) {
        v.pass = v.pass && ok;
        v.detail += (v.detail.empty() ? "" : ", ") + name + " = " + num(val) + (ok ? "" : " (out of range)");
    };
    part("AI(4)/AI(1)", r41, r41 >= 2.0);
    part("AI(8)/AI(inf)", r8, r8 >= 0.72 && r8 <= 0.78);
    part("AI(1)/AI(inf)", r1, r1 >= 0.25 && r1 <= 0.30);
    part("r14 gain n=1", g1, g1 >= 0.09 && g1 <= 0.11);
    part("r14 gain n=8", g8, g8 >= 0.025 && g8 <= 0.035);
    return v;
}

// 3. production Dslash against the dense matrix
Verdict oracle_equivalence() {
    const LatticeGeometry g({4, 4, 4, 4});
    const auto l = random_links(g, 101);
    const auto dense = oracle::build_dense_dslash(*l.x, *l.n);
    const double anti = (dense + dense.dagger()).max_abs();
    VectorBundle<double> in(g, 100);
    VectorBundle<double> out(g, 100);
    fill_random_rhs(in, 102, NoiseKind::gaussian);
    l.d->apply(in, out);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) worst = std::max(worst, rel_diff(oracle::to_dense(out[i]), dense * oracle::to_dense(in[i])));
    return {worst <= 1e-12 && anti <= 1e-12,
            "max relative deviation over 100 vectors = " + num(worst, 3) + ", max|D + D^dagger| = " + num(anti, 3)};
}

// 4. CG against the dense solve
Verdict cg_correctness() {
    const LatticeGeometry g({4, 4, 4, 4});
    const auto l = random_links(g, 103);
    const double m = 0.1;
    const int n = 4;
    const FermionOperator<double> op(l.d, m);
    VectorBundle<double> b(g, n);
    VectorBundle<double> x(g, n);
    fill_random_rhs(b, 104, NoiseKind::gaussian);
    const CgConfig cfg{1e-10, 10000};
    const auto rep = cg_solve(op, b, x, cfg);

    const oracle::LuFactorization lu(oracle::build_dense_fermion(*l.x, *l.n, m));
    double dev = 0.0;
    double true_res = 0.0;
    bool bits = true;
    std::int64_t iters = 0;
    for (int i = 0; i < n; ++i) {
        const auto& r = rep.rhs[static_cast<std::size_t>(i)];
        iters += r.iterations;
        true_res = std::max(true_res, r.true_residual);
        dev = std::max(dev, rel_diff(oracle::to_dense(x[i]), lu.solve(lu.solve_adjoint(oracle::to_dense(b[i])))));
        VectorBundle<double> bi(g, 1);
        VectorBundle<double> xi(g, 1);
        copy(b[i], bi[0]);
        const auto ri = cg_solve(op, bi, xi, cfg);
        bits = bits && ri.rhs[0].iterations == r.iterations && same_bits(xi[0], x[i]);
    }
    std::int64_t active = 0;
    for (const auto& row : rep.history)
        for (double r : row) active += std::isnan(r) ? 0 : 1;
    const bool counts = rep.dslash_applications == 2 * iters && rep.dslash_applications == 2 * active &&
                        rep.check_dslash_applications == 2 * n;
    std::string its;
    for (const auto& r : rep.rhs) its += (its.empty() ? "" : "/") + std::to_string(r.iterations);
    return {rep.all_converged() && dev <= 1e-6 && true_res <= 2 * cfg.tol && bits && counts,
            "iterations " + its + ", max deviation from dense " + num(dev, 3) + ", true residual " + num(true_res, 3) +
                ", single-rhs bit-identical " + (bits ? "yes" : "NO") + ", Dslash count " +
                std::to_string(rep.dslash_applications) + (counts ? " exact" : " WRONG")};
}

// 5. transfer accounting against the closed form
Verdict transfer_accounting() {
    int cases = 0;
    int bad = 0;
    double worst_ai = 0.0;
    std::string first_bad;
    auto check = [&]<typename T>(const LatticeGeometry& g, int n, LinkStorage s) {
        auto x = std::make_shared<LinkField<T>>(g, LinkRole::smeared_x);
        auto nk = std::make_shared<LinkField<T>>(g, LinkRole::naik_n, s);
        fill_random_links(*x, 5);
        fill_random_links(*nk, 5, 0.4);
        const Dslash<T> d(x, nk);
        VectorBundle<T> in(g, n);
        VectorBundle<T> out(g, n);
        fill_random_rhs(in, 6, NoiseKind::gaussian);
        const auto st = d.apply(in, out);
        const std::int64_t V = g.volume();
        const std::int64_t P = sizeof(T);
        const std::int64_t L = reals_per_link(s);
        const bool ok = st.flops == 1146 * V * n && st.bytes_links == V * 8 * (18 + L) * P &&
                        st.bytes_vectors_in == V * n * 16 * 6 * P && st.bytes_vectors_out == V * n * 6 * P;
        const double dai = std::abs(st.intensity() - arithmetic_intensity(n, s, precision_of<T>));
        worst_ai = std::max(worst_ai, dai);
        ++cases;
        if (!ok || dai > 1e-12) {
            if (bad++ == 0)
                first_bad = g.to_string() + " n=" + std::to_string(n) + " " + std::string(to_string(s)) + " P=" +
                            std::to_string(P);
        }
    };
    for (const auto& dims : {std::array<int, 4>{4, 4, 4, 4}, std::array<int, 4>{8, 4, 4, 4}, std::array<int, 4>{8, 8, 8, 8}}) {
        const LatticeGeometry g(dims);
        for (int n : {1, 2, 4, 8})
            for (auto s : {LinkStorage::full18, LinkStorage::r14}) {
                check.operator()<float>(g, n, s);
                check.operator()<double>(g, n, s);
            }
    }
    return {bad == 0, std::to_string(cases) + " cases, " + std::to_string(bad) + " mismatches" +
                          (bad ? " (first: " + first_bad + ")" : "") + ", max |AI_stats - AI_model| = " +
                          num(worst_ai, 3)};
}

// 6. r14 roundtrip
Verdict r14_roundtrip() {
    Rng rng(106);
    double w32 = 0.0;
    double w64 = 0.0;
    for (int t = 0; t < 10000; ++t) {
        auto u = random_su3<double>(rng);
        const double s = 0.05 + rng.uniform();
        const double ph = 2.0 * std::numbers::pi * rng.uniform();
        for (auto& z : u.e) z *= s * std::polar(1.0, ph);
        const auto r = reconstruct_r14(compress_r14(u));
        const auto uf = convert<float>(u);
        const auto rf = reconstruct_r14(compress_r14(uf));
        for (std::size_t i = 0; i < 9; ++i) {
            w64 = std::max(w64, std::abs(r.e[i] - u.e[i]));
            w32 = std::max(w32, static_cast<double>(std::abs(rf.e[i] - uf.e[i])));
        }
    }
    return {w32 <= 1e-6 && w64 <= 1e-14, "10000 matrices, max error f32 " + num(w32, 3) + ", f64 " + num(w64, 3)};
}

// 7. stochastic traces
Verdict traces() {
    Verdict v;
    const LatticeGeometry g({4, 4, 4, 4});

    {
        auto zx = std::make_shared<LinkField<double>>(g, LinkRole::smeared_x);
        auto zn = std::make_shared<LinkField<double>>(g, LinkRole::naik_n);
        const FermionOperator<double> op(std::make_shared<Dslash<double>>(zx, zn), 2.0);
        TraceConfig cfg;
        cfg.n_vectors = 8;
        const auto e = estimate_chain(ChainSpec::parse("inv"), op, cfg);
        const bool ok = e.mean == std::complex<double>(384.0, 0.0) && e.std_error == 0.0;
        v.pass = ok;
        v.detail = "identity " + num(e.mean.real(), 6) + " +- " + num(e.std_error) + (ok ? "" : " (expected 384 +- 0)");
    }

    const auto l = random_links(g, 107);
    const double m = 0.5;
    const FermionOperator<double> op(l.d, m);
    const auto mm = oracle::build_dense_fermion(*l.x, *l.n, m);
    const std::vector<oracle::DenseMatrix> ders{oracle::finite_difference_mu_derivative(*l.x, *l.n, 0.0, 1)};

    TraceConfig cfg;
    cfg.batch = 8;
    cfg.seed = 108;
    cfg.n_vectors = 4000;
    const auto inv = estimate_chain(ChainSpec::parse("inv"), op, cfg);
    const std::span<const std::complex<double>> all(inv.samples);
    const std::vector<oracle::DenseInsertion> dense_inv{{true, 0}};
    const auto exact_inv = oracle::dense_trace_chain(dense_inv, mm, ders);
    const auto e2000 = summarize_samples(all.first(2000));
    const double dev_inv = std::abs(e2000.mean - exact_inv);
    const bool ok_inv = dev_inv <= 3.0 * e2000.std_error;

    const double s250 = summarize_samples(all.first(250)).std_error;
    const double s1000 = summarize_samples(all.first(1000)).std_error;
    const double s4000 = inv.std_error;
    // stderr * sqrt(N) should be flat; allow a factor 2 between any two sizes
    const double a = s250 * std::sqrt(250.0);
    const double b = s1000 * std::sqrt(1000.0);
    const double c = s4000 * std::sqrt(4000.0);
    const double spread = std::max({a, b, c}) / std::min({a, b, c});
    const bool ok_scaling = spread <= 2.0;

    cfg.n_vectors = 2000;
    cfg.seed = 109;
    const auto chain = ChainSpec::parse("d1,inv");
    const auto d1 = estimate_chain(chain, op, cfg);
    const std::vector<oracle::DenseInsertion> dense_d1{{false, 1}, {true, 0}};
    const auto exact_d1 = oracle::dense_trace_chain(dense_d1, mm, ders);
    const double dev_d1 = std::abs(d1.mean - exact_d1);
    const bool ok_d1 = dev_d1 <= 3.0 * d1.std_error;

    v.pass = v.pass && ok_inv && ok_scaling && ok_d1;
    v.detail += "; [inv] N=2000 |mean - dense| = " + num(dev_inv, 3) + " vs 3 stderr " + num(3 * e2000.std_error, 3) +
                "; [d1,inv] N=2000 " + num(dev_d1, 3) + " vs " + num(3 * d1.std_error, 3) +
                "; stderr N=250/1000/4000 = " + num(s250, 3) + "/" + num(s1000, 3) + "/" + num(s4000, 3) +
                ", sqrt(N)-scaled spread " + num(spread, 3);
    return v;
}

// 8. bit-identity over the tuning space
template <typename T>
int tuning_space(const LatticeGeometry& g, const std::vector<VectorLayout>& layouts, std::string& failure) {
    const int n = 4;
    auto x = std::make_shared<LinkField<T>>(g, LinkRole::smeared_x);
    auto nk = std::make_shared<LinkField<T>>(g, LinkRole::naik_n);
    fill_random_links(*x, 110);
    fill_random_links(*nk, 110, 0.4);
    VectorBundle<T> in(g, n);
    fill_random_rhs(in, 111, NoiseKind::gaussian);
    VectorBundle<T> ref(g, n);
    Dslash<T>(x, nk).apply(in, ref);

    std::vector<DslashStrategy> strategies;
    for (int k : {1, 2, 3, 4}) strategies.push_back(DslashStrategy::register_block(k));
    for (int s : {1, 16, 64, 256, 4096}) strategies.push_back(DslashStrategy::cache_block(s));
    for (int k : {1, 2, 3, 4})
        for (int s : {16, 256}) strategies.push_back(DslashStrategy::combined(k, s));
    for (const auto& c : Autotuner::default_candidates(g, n)) strategies.push_back(c.strategy);

    int configs = 0;
    for (const auto& layout : layouts) {
        const auto lin = convert_layout(in, layout);
        VectorBundle<T> out(g, n, layout);
        for (const auto& st : strategies)
            for (bool split : {false, true}) {
                Dslash<T>(x, nk, {st, split}).apply(lin, out);
                const auto back = convert_layout(out, VectorLayout::soa());
                for (int i = 0; i < n; ++i)
                    if (!same_bits(back[i], ref[i]) && failure.empty())
                        failure = g.to_string() + " " + layout.name() + " " + st.describe() + (split ? "+split" : "");
                ++configs;
            }
    }
    return configs;
}

Verdict tuning_equivalence() {
    std::string failure;
    const LatticeGeometry g8({8, 8, 8, 8});
    const std::vector<VectorLayout> l8{VectorLayout::soa(), VectorLayout::fused(4)};
    int configs = tuning_space<float>(g8, l8, failure) + tuning_space<double>(g8, l8, failure);
    // fused8 and fused16 need Nx/2 divisible by 16
    const LatticeGeometry gw({32, 8, 4, 4});
    const std::vector<VectorLayout> lw{VectorLayout::soa(), VectorLayout::fused(4), VectorLayout::fused(8),
                                       VectorLayout::fused(16)};
    const int wide = tuning_space<float>(gw, lw, failure) + tuning_space<double>(gw, lw, failure);
    return {failure.empty(), std::to_string(configs) + " configurations on 8^4 (soa, fused4) and " +
                                 std::to_string(wide) + " on 32x8x4x4 (soa, fused4/8/16), f32 and f64, n=4" +
                                 (failure.empty() ? ", all bit-identical" : ", first mismatch: " + failure)};
}

// 9. roofline
Verdict roofline() {
    const double k40 = roofline_predict(find_device("K40"), 4, LinkStorage::r14, false);
    const double phi = roofline_predict(find_device("5110P"), 4, LinkStorage::full18, true);
    const double eff = efficiency(300.0, 200.0);
    return {std::abs(k40 - 498.0) <= 1.0 && std::abs(phi - 231.0) <= 1.0 && eff == 1.5,
            "K40/r14/n=4 " + num(k40, 5) + " GFlop/s, Phi measured/full/n=4 " + num(phi, 5) +
                " GFlop/s, efficiency(300, 200) = " + num(eff, 17)};
}

// 10. host benchmark, reported only
Verdict host_report() {
    const auto rows = csv_rows(cli_output({"bench", "dslash", "--lattice", "16x16x16x16", "--rhs", "1..4",
                                           "--repetitions", "20", "--precision", "f32"}));
    std::string detail = "16^4 f32 GFlop/s n=1..4:";
    bool monotone = true;
    double prev = 0.0;
    for (const auto& r : rows) {
        const double gf = std::stod(r[10]);
        detail += " " + num(gf, 3);
        monotone = monotone && gf >= prev;
        prev = gf;
    }
    const auto cg = csv_rows(cli_output({"bench", "cg", "--lattice", "16x16x16x16", "--rhs", "1,4", "--tol", "1e-30",
                                         "--max-iter", "20", "--repetitions", "1", "--precision", "f32"}));
    const double t1 = std::stod(cg[0][8]);
    const double t4 = std::stod(cg[1][8]);
    detail += monotone ? " (non-decreasing)" : " (NOT monotone; recorded, not asserted)";
    detail += "; CG time per iteration 1 rhs " + num(t1, 3) + " s, 4 rhs " + num(t4, 3) + " s" +
              (t4 < 4 * t1 ? " (< 4x)" : " (not < 4x; recorded, not asserted)");
    return {true, detail};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Table-1 reproduction", 1.0, table1},
        {2, "intensity ratio claims", 1.0, ratios},
        {3, "oracle equivalence", 10.0, oracle_equivalence},
        {4, "CG correctness", 30.0, cg_correctness},
        {5, "transfer accounting", 10.0, transfer_accounting},
        {6, "r14 roundtrip", 5.0, r14_roundtrip},
        {7, "trace estimator", 300.0, traces},
        {8, "equivalence under tuning space", 60.0, tuning_equivalence},
        {9, "roofline predictions", 1.0, roofline},
        {10, "host benchmark report (not asserted)", 0.0, host_report},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Verdict v;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.limit_s <= 0.0 || secs < c.limit_s;
        const bool pass = v.pass && in_time;
        failed += pass ? 0 : 1;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " | " << v.detail << " | "
                  << std::fixed << std::setprecision(2) << secs << " s";
        if (c.limit_s > 0.0) std::cout << " (limit " << c.limit_s << " s" << (in_time ? "" : ", EXCEEDED") << ")";
        std::cout << std::defaultfloat << '\n' << std::flush;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
