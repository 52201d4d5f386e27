#include "hisq/traces.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "hisq/blas.hpp"
#include "hisq/error.hpp"

namespace hisq {

ChainSpec ChainSpec::parse(std::string_view text, double mu_hat) {
    ChainSpec c;
    c.mu_hat = mu_hat;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find(',', pos), text.size());
        const auto tok = text.substr(pos, end - pos);
        if (tok == "inv") {
            c.insertions.push_back(ChainInsertion::inverse());
        } else if (tok.size() >= 2 && tok[0] == 'd') {
            int k = 0;
            const auto [ptr, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), k);
            if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
                throw InvalidArgument("bad derivative token '" + std::string(tok) + "'");
            }
            c.insertions.push_back(ChainInsertion::derivative(k));
        } else {
            throw InvalidArgument("bad chain token '" + std::string(tok) + "' (expected inv or dK)");
        }
        pos = end + 1;
    }
    c.validate();
    return c;
}

void ChainSpec::validate() const {
    bool any_inverse = false;
    for (std::size_t i = 0; i < insertions.size(); ++i) {
        const auto& ins = insertions[i];
        if (ins.kind == ChainInsertion::Kind::inverse) {
            any_inverse = true;
            continue;
        }
        if (ins.order < 1) throw InvalidArgument("derivative order must be >= 1");
        if (i + 1 < insertions.size() && insertions[i + 1].kind == ChainInsertion::Kind::derivative) {
            throw InvalidArgument("two adjacent derivative insertions");
        }
    }
    if (!any_inverse) throw InvalidArgument("chain needs at least one inverse");
    if (!std::isfinite(mu_hat)) throw InvalidArgument("mu_hat must be finite");
}

std::string ChainSpec::describe() const {
    std::string s;
    for (const auto& ins : insertions) {
        if (!s.empty()) s += ',';
        s += ins.kind == ChainInsertion::Kind::inverse ? "inv" : "d" + std::to_string(ins.order);
    }
    return s;
}

TraceEstimate summarize_samples(std::span<const std::complex<double>> samples) {
    if (samples.empty()) throw InvalidArgument("no samples");
    TraceEstimate e;
    e.n_vectors = static_cast<int>(samples.size());
    std::complex<double> sum{};
    for (const auto& s : samples) sum += s;
    e.mean = sum / static_cast<double>(samples.size());
    if (samples.size() > 1) {
        double var = 0.0;
        for (const auto& s : samples) var += std::norm(s - e.mean);
        var /= static_cast<double>(samples.size() - 1);
        e.std_error = std::sqrt(var / static_cast<double>(samples.size()));
    }
    return e;
}

template <typename T>
TransferStats mu_weighted_dslash(const Dslash<T>& d, double mu_hat, int order, const VectorBundle<T>& in,
                                 VectorBundle<T>& out) {
    return d.apply_weighted(HopWeights::chemical_potential(mu_hat, order), in, out);
}

template <typename T>
TraceEstimate estimate_chain(const ChainSpec& chain, const FermionOperator<T>& base, const TraceConfig& cfg) {
    chain.validate();
    cfg.cg.validate();
    if (cfg.n_vectors < 1) throw InvalidArgument("n_vectors must be >= 1");
    if (cfg.batch < 1) throw InvalidArgument("batch must be >= 1");
    const FermionOperator<T> op(base.dslash_ptr(), base.mass(), chain.mu_hat);
    const auto& d = op.dslash();
    const auto& g = op.geometry();
    const auto index = make_layout_index(g, VectorLayout::soa());

    std::vector<std::complex<double>> samples;
    samples.reserve(static_cast<std::size_t>(cfg.n_vectors));
    std::int64_t iterations = 0;
    for (int k0 = 0; k0 < cfg.n_vectors; k0 += cfg.batch) {
        const int nb = std::min(cfg.batch, cfg.n_vectors - k0);
        VectorBundle<T> eta(index, nb);
        for (int i = 0; i < nb; ++i) fill_random_field(eta[i], cfg.seed, static_cast<std::uint64_t>(k0 + i), cfg.noise);
        VectorBundle<T> cur = eta;
        VectorBundle<T> next(index, nb);
        for (auto it = chain.insertions.rbegin(); it != chain.insertions.rend(); ++it) {
            if (it->kind == ChainInsertion::Kind::derivative) {
                mu_weighted_dslash(d, chain.mu_hat, it->order, cur, next);
            } else {
                VectorBundle<T> rhs(index, nb);
                op.apply_Mdag(cur, rhs);
                const auto rep = cg_solve(op, rhs, next, cfg.cg);
                for (int i = 0; i < nb; ++i) {
                    const auto& r = rep.rhs[static_cast<std::size_t>(i)];
                    iterations += r.iterations;
                    if (!r.converged) {
                        throw NumericalError("CG did not converge for noise vector " + std::to_string(k0 + i) +
                                             " (residual " + std::to_string(r.residual) + ")");
                    }
                }
            }
            std::swap(cur, next);
        }
        for (int i = 0; i < nb; ++i) samples.push_back(dot(eta[i], cur[i]));
    }
    TraceEstimate e = summarize_samples(samples);
    e.cg_iterations = iterations;
    if (cfg.keep_samples) e.samples = std::move(samples);
    return e;
}

template TransferStats mu_weighted_dslash<float>(const Dslash<float>&, double, int, const VectorBundle<float>&,
                                                 VectorBundle<float>&);
template TransferStats mu_weighted_dslash<double>(const Dslash<double>&, double, int, const VectorBundle<double>&,
                                                  VectorBundle<double>&);
template TraceEstimate estimate_chain<float>(const ChainSpec&, const FermionOperator<float>&, const TraceConfig&);
template TraceEstimate estimate_chain<double>(const ChainSpec&, const FermionOperator<double>&, const TraceConfig&);

} // namespace hisq
