#include <doctest.h>

#include <chrono>
#include <cmath>

#include "hisq/error.hpp"
#include "hisq/oracle.hpp"
#include "hisq/traces.hpp"

using namespace hisq;

namespace {

struct Problem {
    LatticeGeometry geom;
    std::shared_ptr<LinkField<double>> x;
    std::shared_ptr<LinkField<double>> n;
    std::shared_ptr<Dslash<double>> d;
};

Problem make_problem(const LatticeGeometry& g, std::uint64_t seed, bool zero = false) {
    Problem p{g, std::make_shared<LinkField<double>>(g, LinkRole::smeared_x),
              std::make_shared<LinkField<double>>(g, LinkRole::naik_n), nullptr};
    if (!zero) {
        fill_random_links(*p.x, seed);
        fill_random_links(*p.n, seed, 0.4);
    }
    p.d = std::make_shared<Dslash<double>>(p.x, p.n);
    return p;
}

std::vector<oracle::DenseInsertion> to_dense_chain(const ChainSpec& c) {
    std::vector<oracle::DenseInsertion> out;
    for (const auto& i : c.insertions) out.push_back({i.kind == ChainInsertion::Kind::inverse, i.order});
    return out;
}

} // namespace

TEST_CASE("chain parsing") {
    const auto c = ChainSpec::parse("d1,inv,d2,inv", 0.1);
    REQUIRE(c.insertions.size() == 4);
    CHECK(c.insertions[0] == ChainInsertion::derivative(1));
    CHECK(c.insertions[1] == ChainInsertion::inverse());
    CHECK(c.insertions[2] == ChainInsertion::derivative(2));
    CHECK(c.mu_hat == 0.1);
    CHECK(c.describe() == "d1,inv,d2,inv");
    CHECK(ChainSpec::parse("inv").insertions.size() == 1);
    CHECK(ChainSpec::parse("inv,inv").insertions.size() == 2);
    for (const char* bad : {"d1", "", "d1,d2,inv", "d0,inv", "inv,", "dx,inv", "inverse"}) {
        CHECK_THROWS_AS((void)ChainSpec::parse(bad), InvalidArgument);
    }
}

TEST_CASE("sample statistics") {
    const std::vector<std::complex<double>> s{{1.0, 0.0}, {3.0, 0.0}, {2.0, 2.0}, {2.0, -2.0}};
    const auto e = summarize_samples(s);
    CHECK(e.mean == std::complex<double>(2.0, 0.0));
    // (1 + 1 + 4 + 4) / 3 / 4
    CHECK(e.std_error == doctest::Approx(std::sqrt(10.0 / 12.0)));
    CHECK(summarize_samples(std::vector<std::complex<double>>{{5.0, 1.0}}).std_error == 0.0);
}

TEST_CASE("zero links: exact identity trace") {
    const auto p = make_problem(LatticeGeometry({4, 4, 4, 4}), 0, true);
    const FermionOperator<double> op(p.d, 2.0);
    TraceConfig cfg;
    cfg.n_vectors = 7;
    cfg.batch = 3;
    const auto e = estimate_chain(ChainSpec::parse("inv"), op, cfg);
    for (const auto& s : e.samples) CHECK(s == std::complex<double>(384.0, 0.0));
    CHECK(e.mean == std::complex<double>(384.0, 0.0));
    CHECK(e.std_error == 0.0);
    CHECK(e.n_vectors == 7);
}

TEST_CASE("batched and sequential samples are bit-identical") {
    const auto p = make_problem(LatticeGeometry({4, 4, 4, 4}), 3);
    const FermionOperator<double> op(p.d, 0.5);
    TraceConfig cfg;
    cfg.n_vectors = 6;
    cfg.seed = 77;
    cfg.batch = 4;
    const auto chain = ChainSpec::parse("d1,inv");
    const auto a = estimate_chain(chain, op, cfg);
    cfg.batch = 1;
    const auto b = estimate_chain(chain, op, cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
    CHECK(a.mean == b.mean);
}

TEST_CASE("estimates agree with dense traces") {
    const auto p = make_problem(LatticeGeometry({4, 4, 4, 4}), 5);
    const double m = 0.5;
    const FermionOperator<double> op(p.d, m);
    TraceConfig cfg;
    cfg.n_vectors = 300;
    cfg.batch = 6;
    cfg.seed = 9;

    for (double mu : {0.0, 0.15}) {
        const auto mm = oracle::build_dense_fermion(*p.x, *p.n, m, mu);
        const std::vector<oracle::DenseMatrix> ders{oracle::finite_difference_mu_derivative(*p.x, *p.n, mu, 1),
                                                    oracle::finite_difference_mu_derivative(*p.x, *p.n, mu, 2)};
        for (const char* text : {"inv", "d1,inv", "d2,inv"}) {
            const auto chain = ChainSpec::parse(text, mu);
            const auto exact = oracle::dense_trace_chain(to_dense_chain(chain), mm, ders);
            const auto e = estimate_chain(chain, op, cfg);
            INFO(text, " mu=", mu, " exact=", exact, " mean=", e.mean, " stderr=", e.std_error);
            CHECK(e.std_error > 0.0);
            CHECK(std::abs(e.mean - exact) <= 3.0 * e.std_error);
            if (mu == 0.0 && chain.insertions[0].order % 2 == 0) {
                CHECK(std::abs(exact.imag()) <= 1e-8 * std::abs(exact));
                CHECK(std::abs(e.mean.imag()) <= 3.0 * e.std_error);
            }
        }
    }
}

TEST_CASE("non-convergence names the vector") {
    const auto p = make_problem(LatticeGeometry({4, 4, 4, 4}), 5);
    const FermionOperator<double> op(p.d, 0.1);
    TraceConfig cfg;
    cfg.n_vectors = 2;
    cfg.cg.max_iter = 2;
    try {
        (void)estimate_chain(ChainSpec::parse("inv"), op, cfg);
        FAIL("expected an error");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("noise vector 0") != std::string::npos);
    }
}
