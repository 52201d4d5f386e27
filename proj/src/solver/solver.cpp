#include "hisq/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "hisq/blas.hpp"
#include "hisq/error.hpp"

namespace hisq {

template <typename T>
FermionOperator<T>::FermionOperator(std::shared_ptr<const Dslash<T>> dslash, double mass, double mu_hat)
    : dslash_(std::move(dslash)), mass_(mass), mu_hat_(mu_hat) {
    if (!dslash_) throw InvalidArgument("FermionOperator needs a Dslash");
    if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidArgument("mass must be positive");
    if (!std::isfinite(mu_hat)) throw InvalidArgument("mu_hat must be finite");
}

template <typename T>
TransferStats FermionOperator<T>::hop(std::span<const ColorField<T>* const> in, std::span<ColorField<T>* const> out,
                                      double mu) const {
    applications_ += static_cast<std::int64_t>(in.size());
    if (mu == 0.0) return dslash_->apply(in, out);
    const auto w = HopWeights::chemical_potential(mu, 0);
    return dslash_->apply(in, out, &w);
}

template <typename T>
TransferStats FermionOperator<T>::apply_M(std::span<const ColorField<T>* const> in,
                                          std::span<ColorField<T>* const> out) const {
    const auto s = hop(in, out, mu_hat_);
    for (std::size_t i = 0; i < in.size(); ++i) axpby(mass_, *in[i], 1.0, *out[i]);
    return s;
}

template <typename T>
TransferStats FermionOperator<T>::apply_Mdag(std::span<const ColorField<T>* const> in,
                                             std::span<ColorField<T>* const> out) const {
    const auto s = hop(in, out, -mu_hat_);
    for (std::size_t i = 0; i < in.size(); ++i) axpby(mass_, *in[i], -1.0, *out[i]);
    return s;
}

template <typename T>
TransferStats FermionOperator<T>::apply_normal(std::span<const ColorField<T>* const> in,
                                               std::span<ColorField<T>* const> out,
                                               std::span<ColorField<T>* const> tmp) const {
    if (tmp.size() != in.size()) throw ShapeMismatch("scratch bundle has the wrong number of rhs");
    std::vector<const ColorField<T>*> ctmp(tmp.begin(), tmp.end());
    TransferStats s;
    if (mu_hat_ == 0.0) {
        s += hop(in, tmp, 0.0);
        s += hop(ctmp, out, 0.0);
        for (std::size_t i = 0; i < in.size(); ++i) axpby(mass_ * mass_, *in[i], -1.0, *out[i]);
    } else {
        s += apply_M(in, tmp);
        s += apply_Mdag(ctmp, out);
    }
    return s;
}

template <typename T>
TransferStats FermionOperator<T>::apply_M(const VectorBundle<T>& in, VectorBundle<T>& out) const {
    const auto pi = in.pointers();
    const auto po = out.pointers();
    if (pi.size() != po.size()) throw ShapeMismatch("input and output bundles differ in n_rhs");
    return apply_M(std::span<const ColorField<T>* const>(pi), std::span<ColorField<T>* const>(po));
}

template <typename T>
TransferStats FermionOperator<T>::apply_Mdag(const VectorBundle<T>& in, VectorBundle<T>& out) const {
    const auto pi = in.pointers();
    const auto po = out.pointers();
    if (pi.size() != po.size()) throw ShapeMismatch("input and output bundles differ in n_rhs");
    return apply_Mdag(std::span<const ColorField<T>* const>(pi), std::span<ColorField<T>* const>(po));
}

template <typename T>
TransferStats FermionOperator<T>::apply_normal(const VectorBundle<T>& in, VectorBundle<T>& out) const {
    VectorBundle<T> tmp(in.index(), in.n_rhs());
    const auto pi = in.pointers();
    const auto po = out.pointers();
    const auto pt = tmp.pointers();
    if (pi.size() != po.size()) throw ShapeMismatch("input and output bundles differ in n_rhs");
    return apply_normal(std::span<const ColorField<T>* const>(pi), std::span<ColorField<T>* const>(po),
                        std::span<ColorField<T>* const>(pt));
}

void CgConfig::validate() const {
    if (!(tol > 0.0 && tol < 1.0)) throw InvalidArgument("tol must lie in (0, 1)");
    if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
}

int CgReport::max_iterations() const noexcept {
    int m = 0;
    for (const auto& r : rhs) m = std::max(m, r.iterations);
    return m;
}

bool CgReport::all_converged() const noexcept {
    for (const auto& r : rhs)
        if (!r.converged) return false;
    return true;
}

std::string CgReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << kCgCsvHeader << '\n';
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        const auto& r = rhs[i];
        os << i << ',' << r.iterations << ',' << r.residual << ',' << r.true_residual << ','
           << (r.converged ? 1 : 0) << ',' << (r.breakdown ? 1 : 0) << '\n';
    }
    return os.str();
}

std::string CgReport::summary() const {
    nlohmann::json j;
    j["n_rhs"] = rhs.size();
    j["max_iterations"] = max_iterations();
    j["all_converged"] = all_converged();
    j["dslash_applications"] = dslash_applications;
    j["check_dslash_applications"] = check_dslash_applications;
    j["flops"] = stats.flops;
    j["bytes_links"] = stats.bytes_links;
    j["bytes_vectors"] = stats.bytes_vectors_in + stats.bytes_vectors_out;
    j["wall_seconds"] = wall_seconds;
    auto& per = j["rhs"] = nlohmann::json::array();
    for (const auto& r : rhs) {
        per.push_back({{"iterations", r.iterations},
                       {"residual", r.residual},
                       {"true_residual", r.true_residual},
                       {"converged", r.converged}});
    }
    return j.dump(2);
}

template <typename T>
CgReport cg_solve(const FermionOperator<T>& op, const VectorBundle<T>& b, VectorBundle<T>& x, const CgConfig& cfg) {
    cfg.validate();
    if (cfg.precision != precision_of<T>) throw InvalidArgument("CgConfig precision does not match the field type");
    if (b.n_rhs() != x.n_rhs()) throw ShapeMismatch("b and x differ in n_rhs");
    if (!(b.geometry() == op.geometry()) || !(x.geometry() == op.geometry())) {
        throw ShapeMismatch("solver fields differ from operator geometry");
    }
    if (!(b.layout() == x.layout())) throw ShapeMismatch("b and x differ in layout");

    const auto t0 = std::chrono::steady_clock::now();
    const int n = b.n_rhs();
    VectorBundle<T> r(b.index(), n);
    VectorBundle<T> p(b.index(), n);
    VectorBundle<T> ap(b.index(), n);
    VectorBundle<T> tmp(b.index(), n);

    CgReport rep;
    rep.rhs.resize(static_cast<std::size_t>(n));
    std::vector<double> bnorm(static_cast<std::size_t>(n));
    std::vector<double> rr(static_cast<std::size_t>(n));
    std::vector<int> active;
    for (int i = 0; i < n; ++i) {
        x[i].set_zero();
        const double b2 = norm2(b[i]);
        if (!std::isfinite(b2)) throw InvalidArgument("right-hand side " + std::to_string(i) + " is not finite");
        bnorm[static_cast<std::size_t>(i)] = std::sqrt(b2);
        if (b2 == 0.0) {
            rep.rhs[static_cast<std::size_t>(i)].converged = true;
            continue;
        }
        copy(b[i], r[i]);
        copy(b[i], p[i]);
        rr[static_cast<std::size_t>(i)] = b2;
        active.push_back(i);
    }

    const std::int64_t apps0 = op.dslash_applications();
    std::vector<const ColorField<T>*> pin;
    std::vector<ColorField<T>*> pout;
    std::vector<ColorField<T>*> ptmp;
    while (!active.empty()) {
        pin.clear();
        pout.clear();
        ptmp.clear();
        for (int i : active) {
            pin.push_back(&p[i]);
            pout.push_back(&ap[i]);
            ptmp.push_back(&tmp[i]);
        }
        rep.stats += op.apply_normal(pin, pout, ptmp);

        std::vector<double> row(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
        std::vector<int> still;
        for (int i : active) {
            const auto u = static_cast<std::size_t>(i);
            auto& ri = rep.rhs[u];
            const double pap = dot(p[i], ap[i]).real();
            if (!(pap > 0.0) || !std::isfinite(pap)) {
                ri.breakdown = true;
                ri.residual = std::sqrt(rr[u]) / bnorm[u];
                continue;
            }
            const double alpha = rr[u] / pap;
            axpy(alpha, p[i], x[i]);
            axpy(-alpha, ap[i], r[i]);
            const double rr_new = norm2(r[i]);
            ++ri.iterations;
            ri.residual = std::sqrt(rr_new) / bnorm[u];
            row[u] = ri.residual;
            if (ri.residual <= cfg.tol) {
                ri.converged = true;
                continue;
            }
            if (ri.iterations >= cfg.max_iter) continue;
            xpay(r[i], rr_new / rr[u], p[i]);
            rr[u] = rr_new;
            still.push_back(i);
        }
        rep.history.push_back(std::move(row));
        active = std::move(still);
    }
    rep.dslash_applications = op.dslash_applications() - apps0;

    // true residual |b - A x| / |b|
    pin.clear();
    pout.clear();
    ptmp.clear();
    std::vector<int> check;
    for (int i = 0; i < n; ++i) {
        if (bnorm[static_cast<std::size_t>(i)] == 0.0) continue;
        check.push_back(i);
        pin.push_back(&x[i]);
        pout.push_back(&ap[i]);
        ptmp.push_back(&tmp[i]);
    }
    if (!check.empty()) {
        const std::int64_t apps1 = op.dslash_applications();
        (void)op.apply_normal(pin, pout, ptmp);
        rep.check_dslash_applications = op.dslash_applications() - apps1;
        for (int i : check) {
            const auto u = static_cast<std::size_t>(i);
            rep.rhs[u].true_residual = std::sqrt(xmy_norm(b[i], ap[i])) / bnorm[u];
        }
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

template class FermionOperator<float>;
template class FermionOperator<double>;
template CgReport cg_solve<float>(const FermionOperator<float>&, const VectorBundle<float>&, VectorBundle<float>&,
                                  const CgConfig&);
template CgReport cg_solve<double>(const FermionOperator<double>&, const VectorBundle<double>&, VectorBundle<double>&,
                                   const CgConfig&);

} // namespace hisq
