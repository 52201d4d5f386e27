#include <cmath>
#include <cstring>
#include <functional>
#include <sstream>

#include "hisq/blas.hpp"
#include "hisq/cli.hpp"
#include "hisq/dslash.hpp"
#include "hisq/oracle.hpp"
#include "hisq/perfmodel.hpp"
#include "hisq/solver.hpp"
#include "hisq/traces.hpp"

namespace hisq::cli {

namespace {

double rel_diff(const oracle::DenseVector& a, const oracle::DenseVector& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::string sci(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

// Restores the mutation hook even if a check throws.
struct FlipGuard {
    explicit FlipGuard(bool on) { testing_hooks::set_flip_backward_smeared(on); }
    ~FlipGuard() { testing_hooks::set_flip_backward_smeared(false); }
    FlipGuard(const FlipGuard&) = delete;
    FlipGuard& operator=(const FlipGuard&) = delete;
};

} // namespace

std::vector<VerifyCheck> run_verify_suite(const VerifyOptions& opts) {
    std::vector<VerifyCheck> checks;
    auto run = [&](const std::string& name, const std::function<VerifyCheck()>& fn) {
        try {
            auto c = fn();
            c.name = name;
            checks.push_back(std::move(c));
        } catch (const std::exception& e) {
            checks.push_back({name, false, std::string("exception: ") + e.what()});
        }
    };

    const LatticeGeometry g(opts.dims);
    auto x = std::make_shared<LinkField<double>>(g, LinkRole::smeared_x);
    auto n = std::make_shared<LinkField<double>>(g, LinkRole::naik_n);
    fill_random_links(*x, opts.seed);
    fill_random_links(*n, opts.seed, 0.4);
    auto d = std::make_shared<Dslash<double>>(x, n);
    const FlipGuard flip(opts.flip_backward_smeared);

    oracle::DenseMatrix dense;
    run("dense_anti_hermitian", [&] {
        dense = oracle::build_dense_dslash(*x, *n);
        const double dev = (dense + dense.dagger()).max_abs();
        return VerifyCheck{"", dev <= 1e-12, "max|D + D^dagger| = " + sci(dev)};
    });

    run("dslash_vs_dense", [&] {
        const int nv = 100;
        VectorBundle<double> in(g, nv);
        VectorBundle<double> out(g, nv);
        fill_random_rhs(in, opts.seed + 1, NoiseKind::gaussian);
        d->apply(in, out);
        double worst = 0.0;
        for (int i = 0; i < nv; ++i) worst = std::max(worst, rel_diff(oracle::to_dense(out[i]), dense * oracle::to_dense(in[i])));
        return VerifyCheck{"", worst <= 1e-12, "max relative deviation over 100 vectors = " + sci(worst)};
    });

    run("operator_anti_hermitian", [&] {
        VectorBundle<double> in(g, 2);
        VectorBundle<double> out(g, 2);
        fill_random_rhs(in, opts.seed + 2, NoiseKind::gaussian);
        d->apply(in, out);
        const auto a = dot(in[0], out[1]);
        const auto b = dot(out[0], in[1]);
        const double rel = std::abs(a + b) / std::abs(a);
        return VerifyCheck{"", rel <= 1e-12, "|<u,Dv> + <Du,v>| / |<u,Dv>| = " + sci(rel)};
    });

    run("daggered_vs_dense", [&] {
        VectorBundle<double> in(g, 4);
        VectorBundle<double> out(g, 4);
        fill_random_rhs(in, opts.seed + 3, NoiseKind::gaussian);
        d->apply_daggered(in, out);
        const auto dd = dense.dagger();
        double worst = 0.0;
        for (int i = 0; i < 4; ++i) worst = std::max(worst, rel_diff(oracle::to_dense(out[i]), dd * oracle::to_dense(in[i])));
        return VerifyCheck{"", worst <= 1e-12, "max relative deviation = " + sci(worst)};
    });

    run("strategy_equivalence", [&] {
        const int nr = 4;
        VectorBundle<double> in(g, nr);
        fill_random_rhs(in, opts.seed + 4, NoiseKind::gaussian);
        VectorBundle<double> ref(g, nr);
        d->apply(in, ref);
        std::vector<VectorLayout> layouts{VectorLayout::soa()};
        for (int w : {4, 8, 16})
            if ((g.extent(0) / 2) % w == 0) layouts.push_back(VectorLayout::fused(w));
        int configs = 0;
        for (const auto& layout : layouts) {
            const auto lin = convert_layout(in, layout);
            for (const auto& st : {DslashStrategy::register_block(1), DslashStrategy::register_block(3),
                                   DslashStrategy::register_block(4), DslashStrategy::cache_block(16),
                                   DslashStrategy::combined(2, 64)}) {
                for (bool split : {false, true}) {
                    Dslash<double> op(x, n, {st, split});
                    VectorBundle<double> out(g, nr, layout);
                    op.apply(lin, out);
                    const auto back = convert_layout(out, VectorLayout::soa());
                    for (int i = 0; i < nr; ++i) {
                        if (std::memcmp(back[i].data().data(), ref[i].data().data(), ref[i].data().size_bytes()) != 0) {
                            return VerifyCheck{"", false, st.describe() + " split=" + std::to_string(split) + " layout=" +
                                                              layout.name() + " differs"};
                        }
                    }
                    ++configs;
                }
            }
        }
        return VerifyCheck{"", true, std::to_string(configs) + " configurations bit-identical"};
    });

    run("cg_vs_dense", [&] {
        const double m = 0.1;
        const FermionOperator<double> op(d, m);
        VectorBundle<double> b(g, 2);
        VectorBundle<double> sol(g, 2);
        fill_random_rhs(b, opts.seed + 5, NoiseKind::gaussian);
        const CgConfig cfg{1e-10, 10000};
        const auto rep = cg_solve(op, b, sol, cfg);
        const oracle::LuFactorization lu(oracle::build_dense_fermion(*x, *n, m));
        double worst = 0.0;
        double worst_true = 0.0;
        for (int i = 0; i < 2; ++i) {
            const auto ref = lu.solve(lu.solve_adjoint(oracle::to_dense(b[i])));
            worst = std::max(worst, rel_diff(oracle::to_dense(sol[i]), ref));
            worst_true = std::max(worst_true, rep.rhs[static_cast<std::size_t>(i)].true_residual);
        }
        const bool ok = rep.all_converged() && worst <= 1e-6 && worst_true <= 2 * cfg.tol;
        return VerifyCheck{"", ok, "solution deviation " + sci(worst) + ", true residual " + sci(worst_true)};
    });

    run("trace_identity", [&] {
        auto zx = std::make_shared<LinkField<double>>(g, LinkRole::smeared_x);
        auto zn = std::make_shared<LinkField<double>>(g, LinkRole::naik_n);
        const FermionOperator<double> op(std::make_shared<Dslash<double>>(zx, zn), 2.0);
        TraceConfig cfg;
        cfg.n_vectors = 4;
        cfg.seed = opts.seed;
        const auto e = estimate_chain(ChainSpec::parse("inv"), op, cfg);
        const double expected = 3.0 * static_cast<double>(g.volume()) / 2.0;
        const bool ok = e.mean == std::complex<double>(expected, 0.0) && e.std_error == 0.0;
        return VerifyCheck{"", ok, "mean " + std::to_string(e.mean.real()) + ", expected " + std::to_string(expected)};
    });

    run("trace_vs_dense", [&] {
        const double m = 0.5;
        const FermionOperator<double> op(d, m);
        TraceConfig cfg;
        cfg.n_vectors = 200;
        cfg.batch = 8;
        cfg.seed = opts.seed;
        const auto chain = ChainSpec::parse("inv");
        const auto e = estimate_chain(chain, op, cfg);
        const std::vector<oracle::DenseInsertion> dchain{{true, 0}};
        const auto exact = oracle::dense_trace_chain(dchain, oracle::build_dense_fermion(*x, *n, m), {});
        const double dev = std::abs(e.mean - exact);
        return VerifyCheck{"", dev <= 3 * e.std_error,
                           "|mean - Tr M^-1| = " + sci(dev) + ", 3 stderr = " + sci(3 * e.std_error)};
    });

    run("r14_roundtrip", [&] {
        Rng rng(opts.seed);
        double w32 = 0.0;
        double w64 = 0.0;
        for (int t = 0; t < 10000; ++t) {
            auto u = random_su3<double>(rng);
            const double s = 0.05 + rng.uniform();
            const double ph = 6.283185307179586 * rng.uniform();
            for (auto& z : u.e) z *= s * std::polar(1.0, ph);
            const auto r = reconstruct_r14(compress_r14(u));
            for (std::size_t i = 0; i < 9; ++i) w64 = std::max(w64, std::abs(r.e[i] - u.e[i]));
            const auto uf = convert<float>(u);
            const auto rf = reconstruct_r14(compress_r14(uf));
            for (std::size_t i = 0; i < 9; ++i) w32 = std::max(w32, static_cast<double>(std::abs(rf.e[i] - uf.e[i])));
        }
        return VerifyCheck{"", w32 <= 1e-6 && w64 <= 1e-14, "max error f32 " + sci(w32) + ", f64 " + sci(w64)};
    });

    run("table1_regression", [&] {
        CostModel model;
        if (opts.naik_reals_16) model.naik_reals_full = 16;
        const int rhs[] = {1, 2, 3, 4, 5, 6, 8};
        const double full[] = {0.73, 1.16, 1.45, 1.65, 1.80, 1.91, 2.08};
        const double r14[] = {0.80, 1.25, 1.53, 1.73, 1.87, 1.98, 2.14};
        double worst = 0.0;
        for (int i = 0; i < 7; ++i) {
            worst = std::max(worst, std::abs(model.arithmetic_intensity(rhs[i], LinkStorage::full18) - full[i]));
            worst = std::max(worst, std::abs(model.arithmetic_intensity(rhs[i], LinkStorage::r14) - r14[i]));
        }
        return VerifyCheck{"", worst <= 0.005, "max deviation from the published table = " + sci(worst)};
    });

    return checks;
}

} // namespace hisq::cli
