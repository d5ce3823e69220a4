#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bstorus.hpp"
#include "fourier.hpp"
#include "jgroup.hpp"
#include "quantization.hpp"
#include "starexp.hpp"
#include "starproduct.hpp"

namespace jstar {

enum class CheckStatus { pass, fail, skip };

struct Check {
    std::string suite, name;
    double residual = 0.0, tolerance = 0.0;
    CheckStatus status = CheckStatus::pass;
};

inline Check make_check(std::string suite, std::string name, double residual, double tol)
{
    bool ok = std::isfinite(residual) && residual <= tol;
    return {std::move(suite), std::move(name), residual, tol, ok ? CheckStatus::pass : CheckStatus::fail};
}

// A negative control passes when its residual exceeds the threshold.
inline Check make_control(std::string suite, std::string name, double residual, double threshold)
{
    bool ok = std::isfinite(residual) && residual > threshold;
    return {std::move(suite), std::move(name), residual, threshold, ok ? CheckStatus::pass : CheckStatus::fail};
}

inline Check make_skip(std::string suite, std::string name)
{
    return {std::move(suite), std::move(name), std::nan(""), std::nan(""), CheckStatus::skip};
}

inline const char *status_string(CheckStatus s)
{
    switch (s) {
    case CheckStatus::pass:
        return "PASS";
    case CheckStatus::fail:
        return "FAIL";
    case CheckStatus::skip:
        return "SKIP";
    }
    return "?";
}

enum class GroupKind { elementary, siegel };

struct VerifyConfig {
    GroupKind group = GroupKind::elementary;
    int n = 0;
    int epsilon = 1;
    int eps1 = 1, eps2 = 1;
    double theta = 1.0;
    std::uint64_t seed = 1;
    std::vector<std::string> suites;

    void validate() const
    {
        if (!(theta > 0.0) || !std::isfinite(theta))
            throw std::invalid_argument("theta must be positive");
        if (group == GroupKind::elementary)
            ElementaryDescriptor{n, epsilon}.validate();
        else if (std::abs(eps1) != 1 || std::abs(eps2) != 1)
            throw std::invalid_argument("orbit signs must be +1 or -1");
    }

    NormalDescriptor tree() const
    {
        return group == GroupKind::elementary ? NormalDescriptor::leaf({n, epsilon}) : siegel(eps1, eps2);
    }

    // Elementary descriptors covered by per-factor checks
    std::vector<ElementaryDescriptor> factors() const { return tree().factors; }

    // The last factor: where star products, Fourier transforms and BS generators live
    ElementaryDescriptor main_factor() const { return tree().factors.back(); }
};

inline const std::vector<std::string> &suite_names()
{
    static const std::vector<std::string> names{"group", "lie",   "moment",   "quant",   "trace", "star",
                                                "invariance", "exp", "calculus", "fourier", "bs"};
    return names;
}

namespace detail {

// Each suite draws from its own stream so that its output does not depend on which suites ran before.
struct Sampler {
    std::mt19937_64 rng;

    Sampler(std::uint64_t seed, std::uint64_t stream) : rng(seed * 0x9E3779B97F4A7C15ULL + stream) {}

    double unif(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

    Vec vec(int m, double s)
    {
        Vec v(m);
        for (int i = 0; i < m; ++i)
            v[i] = unif(-s, s);
        return v;
    }

    GroupElement element(int n, double s = 1.0)
    {
        double a = unif(-s, s);
        Vec x = vec(2 * n, s);
        return {a, x, unif(-s, s)};
    }

    LieVector lie(int n, double s = 1.0)
    {
        double al = unif(-s, s);
        Vec y = vec(2 * n, s);
        return {al, y, unif(-s, s)};
    }

    NormalElement normal(const NormalDescriptor &t, double s = 1.0)
    {
        NormalElement g;
        for (const auto &d : t.factors)
            g.parts.push_back(element(d.n, s));
        return g;
    }

    QPoint qpoint(int n)
    {
        double a = unif(-1, 1);
        return {a, vec(n, 1.0)};
    }
};

inline double rel_diff(const Vec &a, const Vec &b)
{
    return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

inline Vec flat(const LieVector &X)
{
    Vec v(X.y.size() + 2);
    v[0] = X.alpha;
    v.segment(1, X.y.size()) = X.y;
    v[X.y.size() + 1] = X.beta;
    return v;
}

inline Vec flat(const NormalElement &g)
{
    std::vector<double> out;
    for (const auto &p : g.parts) {
        Vec f = p.flat();
        out.insert(out.end(), f.data(), f.data() + f.size());
    }
    return Eigen::Map<Vec>(out.data(), static_cast<Eigen::Index>(out.size()));
}

inline std::string tag(const ElementaryDescriptor &d)
{
    return " (n=" + std::to_string(d.n) + ", eps=" + (d.epsilon > 0 ? "+1" : "-1") + ")";
}

inline SymbolFunction gauss0(double c0, double w0, double l0, double wl, double nu = 0.0,
                             Chart chart = Chart::r_chart)
{
    return gaussian_symbol(0, GaussianParams{chart, c0, w0, Vec(), 1.0, l0, wl, nu});
}

inline SymbolFunction gauss_n(int n, double c0, double w0, double wx, double l0, double wl, double nu = 0.0)
{
    Vec x0(2 * n);
    for (int i = 0; i < 2 * n; ++i)
        x0[i] = 0.1 * (i + 1) * (i % 2 ? -1.0 : 1.0);
    return gaussian_symbol(n, GaussianParams{Chart::r_chart, c0, w0, x0, wx, l0, wl, nu});
}

// a smooth state with a phase
inline StateFunction probe_state(int n)
{
    return [n](const QPoint &q) {
        double s = n > 0 ? q.v.squaredNorm() : 0.0;
        double lin = n > 0 ? q.v.sum() : 0.0;
        return std::exp(-0.7 * (q.a - 0.2) * (q.a - 0.2) - 0.4 * s) * std::exp(I * (0.3 * q.a + 0.2 * lin));
    };
}

inline StarConfig star_config(int n, int eps, double theta)
{
    StarConfig c;
    c.theta = theta;
    c.n = n;
    c.epsilon = eps;
    c.window = 14.0;
    c.abs_tol = 1e-10;
    c.rel_tol = 1e-9;
    return c;
}

inline cplx value_at(const SymbolFunction &f, const GroupElement &g)
{
    return inverse_partial_fourier(f.spectrum, g.a, g.x, g.ell, 40.0, 1e-12, 32).value;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Suites

inline std::vector<Check> suite_group(const VerifyConfig &c, int triples = 1000)
{
    detail::Sampler s(c.seed, 1);
    const auto t = c.tree();
    double assoc = 0.0, ident = 0.0, inv = 0.0;
    const auto e = t.identity();
    for (int k = 0; k < triples; ++k) {
        auto g = s.normal(t), h = s.normal(t), f = s.normal(t);
        using detail::flat;
        assoc = std::max(assoc, detail::rel_diff(flat(multiply_normal(t, multiply_normal(t, g, h), f)),
                                                 flat(multiply_normal(t, g, multiply_normal(t, h, f)))));
        ident = std::max(ident, detail::rel_diff(flat(multiply_normal(t, e, g)), flat(g)));
        ident = std::max(ident, detail::rel_diff(flat(multiply_normal(t, g, e)), flat(g)));
        inv = std::max(inv, detail::rel_diff(flat(multiply_normal(t, g, inverse_normal(t, g))), flat(e)));
        inv = std::max(inv, detail::rel_diff(flat(multiply_normal(t, inverse_normal(t, g), g)), flat(e)));
    }
    const std::string w = c.group == GroupKind::siegel ? " (siegel)" : detail::tag(c.main_factor());
    return {make_check("group", "associativity" + w, assoc, 1e-12),
            make_check("group", "identity" + w, ident, 1e-12), make_check("group", "inverse" + w, inv, 1e-12)};
}

inline std::vector<Check> suite_lie(const VerifyConfig &c, int samples = 300)
{
    detail::Sampler s(c.seed, 2);
    std::vector<Check> out;
    for (const auto &d : c.factors()) {
        const int n = d.n;
        double exp_log = 0.0, log_exp = 0.0, singular = 0.0, bch_err = 0.0;
        for (int k = 0; k < samples; ++k) {
            LieVector X = s.lie(n);
            if (k % 7 == 0)
                X.alpha = 0.0;
            exp_log = std::max(exp_log, detail::rel_diff(detail::flat(log_group(d, exp_lie(d, X))), detail::flat(X)));
            auto g = s.element(n);
            log_exp = std::max(log_exp, detail::rel_diff(exp_lie(d, log_group(d, g)).flat(), g.flat()));
            // |alpha| = 1e-8 probes
            LieVector Y = s.lie(n);
            Y.alpha = k % 2 ? 1e-8 : -1e-8;
            singular =
                std::max(singular, detail::rel_diff(detail::flat(log_group(d, exp_lie(d, Y))), detail::flat(Y)));
            auto h = s.element(n);
            h.a = k % 2 ? 1e-8 : -1e-8;
            singular = std::max(singular, detail::rel_diff(exp_lie(d, log_group(d, h)).flat(), h.flat()));
            LieVector X1 = s.lie(n), X2 = s.lie(n);
            if (k % 4 == 0)
                X1.alpha = 1e-8;
            if (k % 5 == 0)
                X2.alpha = -X1.alpha + (k % 2 ? 1e-8 : 0.0);
            bch_err = std::max(bch_err, detail::rel_diff(exp_lie(d, bch(d, X1, X2)).flat(),
                                                         multiply(d, exp_lie(d, X1), exp_lie(d, X2)).flat()));
        }
        const auto w = detail::tag(d);
        out.push_back(make_check("lie", "log(exp X) = X" + w, exp_log, 1e-10));
        out.push_back(make_check("lie", "exp(log g) = g" + w, log_exp, 1e-10));
        out.push_back(make_check("lie", "round trip at |alpha| = 1e-8" + w, singular, 1e-10));
        out.push_back(make_check("lie", "exp(BCH(X,Y)) = exp X exp Y" + w, bch_err, 1e-10));
    }
    return out;
}

inline std::vector<Check> suite_moment(const VerifyConfig &c, int points = 100)
{
    detail::Sampler s(c.seed, 3);
    std::vector<Check> out;
    for (const auto &d : c.factors()) {
        const int n = d.n, m = 2 * n + 2;
        double ham = 0.0;
        for (const auto &X : LieVector::basis(n))
            for (int k = 0; k < points; ++k) {
                auto g = s.element(n);
                Vec Xs = fundamental_field(d, X, g);
                for (int j = 0; j < m; ++j) {
                    Vec u = Vec::Unit(m, j);
                    auto lam = [&](const Vec &p) { return moment(d, X, GroupElement::from_flat(p)); };
                    double dl = finite_difference(lam, g.flat(), u);
                    double rhs = kks_form(d, u, Xs);
                    ham = std::max(ham, std::abs(dl - rhs) / std::max(1.0, std::abs(rhs)));
                }
            }
        double sym = 0.0;
        for (int k = 0; k < 20; ++k) {
            auto g = s.element(n), p = s.element(n);
            Mat D(m, m);
            for (int j = 0; j < m; ++j) {
                Vec e = Vec::Unit(m, j);
                auto sp = [&](double h) { return symmetry(d, g, GroupElement::from_flat(p.flat() + h * e)).flat(); };
                D.col(j) = (sp(1e-5) - sp(-1e-5)) / 2e-5;
            }
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    Vec u = Vec::Unit(m, i), v = Vec::Unit(m, j);
                    double ref = kks_form(d, u, v);
                    sym = std::max(sym, std::abs(kks_form(d, D * u, D * v) - ref) / std::max(1.0, std::abs(ref)));
                }
        }
        const auto w = detail::tag(d);
        out.push_back(make_check("moment", "d lambda_X = omega(X*, .)" + w, ham, 1e-6));
        out.push_back(make_check("moment", "symmetry preserves omega" + w, sym, 1e-6));
    }
    return out;
}

inline std::vector<Check> suite_quant(const VerifyConfig &c, int samples = 100)
{
    detail::Sampler s(c.seed, 4);
    const auto d = c.main_factor();
    const int n = d.n;
    QuantizationConfig q{c.theta, d.epsilon, n};
    auto phi = detail::probe_state(n);
    double closed = 0.0, equiv = 0.0, dconj = 0.0;
    for (int k = 0; k < samples; ++k) {
        auto g = s.element(n), g0 = s.element(n);
        auto p = s.qpoint(n);
        cplx a = op_Omega(q, g).apply_at(phi, p), b = op_Omega_composed(q, g).apply_at(phi, p);
        closed = std::max(closed, std::abs(a - b) / std::max(1.0, std::abs(a)));
        cplx lhs = op_Omega(q, multiply(d, g, g0)).apply_at(phi, p);
        cplx rhs = (op_U(q, g) * op_Omega(q, g0) * op_U(q, inverse(d, g))).apply_at(phi, p);
        equiv = std::max(equiv, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        cplx dl = (op_U(q, g) * op_d(q) * op_U(q, inverse(d, g))).apply_at(phi, p);
        cplx dr = op_d(q).apply_at(phi, p) / modular(d, g);
        dconj = std::max(dconj, std::abs(dl - dr) / std::max(1e-300, std::abs(dr)));
    }
    // metaplectic part: the action of the first Siegel factor on an n = 1 factor
    auto t = siegel(c.eps1, c.group == GroupKind::siegel ? c.eps2 : d.epsilon);
    const auto &act = t.actions[0];
    QuantizationConfig q2{c.theta, t.factors[1].epsilon, 1};
    auto phi1 = detail::probe_state(1);
    double inter = 0.0, sig = 0.0;
    for (int k = 0; k < samples; ++k) {
        NormalElement g1{{GroupElement(s.unif(-1, 1), Vec(0), s.unif(-1.5, 1.5))}};
        auto g2 = s.element(1);
        auto p = s.qpoint(1);
        cplx lhs = op_U(q2, jstar::act(act, g1, g2)).apply_at(phi1, p);
        cplx rhs = (op_R(q2, act, g1) * op_U(q2, g2) * op_R_inverse(q2, act, g1)).apply_at(phi1, p);
        inter = std::max(inter, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        cplx sc = (op_R(q2, act, g1) * op_Sigma(q2) * op_R_inverse(q2, act, g1)).apply_at(phi1, p);
        cplx s0 = op_Sigma(q2).apply_at(phi1, p);
        sig = std::max(sig, std::abs(sc - s0) / std::max(1.0, std::abs(s0)));
    }
    const auto w = detail::tag(d);
    return {make_check("quant", "Omega closed form = U m0 Sigma U^-1" + w, closed, 1e-10),
            make_check("quant", "Omega equivariance" + w, equiv, 1e-10),
            make_check("quant", "d conjugation" + w, dconj, 1e-10),
            make_check("quant", "metaplectic intertwining (n=1)", inter, 1e-10),
            make_check("quant", "metaplectic commutes with Sigma (n=1)", sig, 1e-10)};
}

inline std::vector<Check> suite_trace(const VerifyConfig &c)
{
    detail::Sampler s(c.seed, 5);
    std::vector<Check> out;
    {
        QuantizationConfig q{c.theta, c.main_factor().epsilon, 1};
        auto phi = gaussian_state(1, 0.1, 0.8, Vec::Constant(1, 0.2), 1.1, 0.4);
        auto qs = default_q_spec(1, 9.0, 10.0);
        double base = norm_sq(1, phi, qs), worst = 0.0;
        for (int k = 0; k < 5; ++k)
            worst = std::max(worst, std::abs(norm_sq(1, op_U(q, s.element(1)).apply(phi), qs) - base) / base);
        out.push_back(make_check("trace", "unitarity of U(g) (n=1)", worst, 1e-6));
        auto t = siegel();
        NormalElement g1{{GroupElement(s.unif(-0.5, 0.5), Vec(0), s.unif(-1.2, 1.2))}};
        double r = std::abs(norm_sq(1, op_R(q, t.actions[0], g1).apply(phi), qs) - base) / base;
        out.push_back(make_check("trace", "unitarity of the metaplectic factor (n=1)", r, 1e-6));
    }
    {
        // narrow states keep the ell-profile of <U(g)phi, psi> inside the window
        QuantizationConfig q{c.theta, c.main_factor().epsilon, 0};
        auto qs = default_q_spec(0, 2.5);
        qs.nodes = {20};
        auto gs = default_g_spec(q);
        gs.bounds = {{-2.5, 2.5}, {-30.0 * std::max(1.0, c.theta), 30.0 * std::max(1.0, c.theta)}};
        gs.nodes = {5, static_cast<int>(std::ceil(12 * std::max(1.0, c.theta)))};
        auto psi = gaussian_state(0, 0.1, 0.3, Vec(), 1.0, 0.5);
        auto T = rank_one(0, psi, qs);
        double expected = norm_sq(0, psi, qs);
        cplx t1 = coherent_trace(q, T, gaussian_state(0, 0.0, 0.3), gs, qs).value;
        cplx t2 = coherent_trace(q, T, gaussian_state(0, -0.2, 0.25, Vec(), 1.0, -0.8), gs, qs).value;
        out.push_back(make_check("trace", "coherent trace of rank one = |psi|^2 (n=0)",
                                 std::abs(t1 - expected) / expected, 1e-5));
        out.push_back(make_check("trace", "mother-state independence (n=0)", std::abs(t1 - t2) / expected, 1e-4));
    }
    return out;
}

inline std::vector<Check> suite_star(const VerifyConfig &c)
{
    const auto d = c.main_factor();
    if (d.n != 0 || c.group != GroupKind::elementary)
        return {make_skip("star", "star-product core runs on the n=0 elementary group")};
    detail::Sampler s(c.seed, 6);
    const int eps = d.epsilon;
    auto sc = detail::star_config(0, eps, c.theta);
    std::vector<Check> out;
    using detail::gauss0;
    {
        auto u = sc;
        u.path = StarPath::reduced_A;
        auto one = constant_symbol(0, 1.0);
        auto f = gauss0(0.3, 1.0, 0.2, 1.1, 0.5);
        double worst = 0.0;
        for (int k = 0; k < 3; ++k) {
            auto g = s.element(0, 0.6);
            worst = std::max(worst, std::abs(star(u, one, f, g).value - f(g)));
            worst = std::max(worst, std::abs(star(u, f, one, g).value - f(g)));
        }
        out.push_back(make_check("star", "unit law", worst, 1e-5));
    }
    {
        auto f1 = gauss0(0.2, 0.9, 0.1, 1.0, 0.4), f2 = gauss0(-0.1, 1.1, -0.3, 0.9, -0.2);
        auto lhs = integrate_adaptive(
            [&](double a) { return star_spectrum(sc, f1.spectrum, f2.spectrum, a, 0.0).value; }, -3, 3, 1e-10, 1e-9);
        auto rhs = integrate_adaptive(
            [&](double a) {
                return integrate_adaptive([&](double l) { return f1(a, Vec(0), l) * f2(a, Vec(0), l); }, -9, 9, 1e-12,
                                          1e-11)
                    .value;
            },
            -3, 3, 1e-10, 1e-9);
        out.push_back(make_check("star", "tracial identity (relative)",
                                 std::abs(lhs.value - rhs.value) / std::abs(rhs.value), 1e-4));
    }
    {
        auto f1 = gauss0(0.1, 1.0, 0.0, 1.0, 0.2), f2 = gauss0(0.2, 0.9, 0.2, 1.1);
        double worst = 0.0;
        for (int k = 0; k < 3; ++k) {
            auto g0 = s.element(0, 0.4), g = s.element(0, 0.6);
            cplx lhs = star(sc, f1, f2, multiply(d, g0, g)).value;
            cplx rhs = star(sc, translate_left(d, f1, g0), translate_left(d, f2, g0), g).value;
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        out.push_back(make_check("star", "left invariance", worst, 1e-4));
    }
    {
        auto f1 = gauss0(0.2, 1.0, 0.1, 1.0, 0.3), f2 = gauss0(-0.1, 0.8, -0.2, 1.2);
        auto moyal = sc;
        moyal.path = StarPath::moyal_intertwined;
        double worst = 0.0;
        for (int k = 0; k < 5; ++k) {
            auto g = s.element(0, 0.6);
            worst = std::max(worst, std::abs(star(sc, f1, f2, g).value - star(moyal, f1, f2, g).value));
        }
        out.push_back(make_check("star", "full kernel = Moyal-intertwined (5 probes)", worst, 1e-4));
    }
    {
        auto ac = sc;
        ac.abs_tol = 1e-9;
        ac.rel_tol = 1e-8;
        auto f1 = gauss0(0.1, 1.0, 0.0, 1.0, 0.3), f2 = gauss0(-0.2, 0.9, 0.2, 1.0), f3 = gauss0(0.0, 1.1, -0.1, 0.9);
        auto left = star_symbol(ac, star_symbol(ac, f1, f2), f3);
        auto right = star_symbol(ac, f1, star_symbol(ac, f2, f3));
        double worst = 0.0;
        for (int k = 0; k < 3; ++k) {
            double a = s.unif(-0.4, 0.4), xi = s.unif(-1.5, 1.5);
            worst = std::max(worst, std::abs(left.spectrum(a, Vec(0), xi) - right.spectrum(a, Vec(0), xi)));
        }
        out.push_back(make_check("star", "associativity on a Gaussian triple", worst, 1e-3));
    }
    return out;
}

inline std::vector<Check> suite_invariance(const VerifyConfig &c)
{
    const auto d = c.main_factor();
    if (d.n > 1)
        return {make_skip("invariance", "strong invariance runs for n <= 1")};
    detail::Sampler s(c.seed, 7);
    auto sc = detail::star_config(d.n, d.epsilon, c.theta);
    auto f = d.n == 0 ? detail::gauss0(0.1, 1.0, 0.2, 1.0, 0.3) : detail::gauss_n(1, 0.0, 1.0, 1.0, 0.1, 1.0, 0.2);
    std::vector<std::pair<std::string, LieVector>> Xs{{"H", LieVector::H(d.n)}, {"E", LieVector::E(d.n)}};
    for (int i = 0; i < 2 * d.n; ++i)
        Xs.push_back({"e" + std::to_string(i + 1), LieVector::e(d.n, i)});
    std::vector<Check> out;
    for (const auto &[name, X] : Xs) {
        double worst = 0.0;
        for (int k = 0; k < 2; ++k)
            worst = std::max(worst, strong_invariance_check(sc, X, f, s.element(d.n, 0.6)).residual);
        out.push_back(make_check("invariance", "[lambda_" + name + ", f] = -i theta " + name + "* f" + detail::tag(d),
                                 worst, 1e-5));
    }
    return out;
}

inline std::vector<Check> suite_exp(const VerifyConfig &c)
{
    detail::Sampler s(c.seed, 8);
    std::vector<Check> out;
    const auto d = c.main_factor();
    const double th = c.theta;
    {
        std::vector<double> ts;
        for (int k = 0; k <= 40; ++k)
            ts.push_back(0.05 * k);
        double r = std::max(verify_ode_system(0.7, -0.3, ts).max(), verify_ode_system(0.0, 0.8, ts).max());
        out.push_back(make_check("exp", "ansatz ODE residual", r, 1e-6));
    }
    if (d.n <= 1) {
        std::vector<LieVector> Xs{LieVector::H(d.n), LieVector::E(d.n)};
        for (int i = 0; i < 2 * d.n; ++i)
            Xs.push_back(LieVector::e(d.n, i));
        Xs.push_back(s.lie(d.n, 0.6));
        double worst = 0.0;
        for (const auto &X : Xs)
            worst = std::max(worst, verify_pde(d, th, X, 0.3, s.element(d.n, 0.6), 1e-3).residual);
        out.push_back(make_check("exp", "evolution equation residual" + detail::tag(d), worst, 1e-5));
    } else {
        out.push_back(make_skip("exp", "evolution equation runs for n <= 1"));
    }
    {
        double herm = 0.0, cov = 0.0;
        for (int k = 0; k < 10; ++k) {
            auto g = s.element(d.n), g0 = s.element(d.n), gp = s.element(d.n);
            auto E = star_exp_elementary(d, th, g);
            herm = std::max(herm, std::abs(std::conj(E(g0)) - star_exp_elementary(d, th, inverse(d, g))(g0)));
            auto conj_g = multiply(d, multiply(d, gp, g), inverse(d, gp));
            cov = std::max(cov, std::abs(star_exp_elementary(d, th, conj_g)(multiply(d, gp, g0)) - E(g0)));
        }
        out.push_back(make_check("exp", "hermiticity" + detail::tag(d), herm, 1e-12));
        out.push_back(make_check("exp", "covariance" + detail::tag(d), cov, 1e-12));
    }
    if (d.n <= 1) {
        auto phi = detail::gauss_n(d.n, 0.0, 1.0, 1.0, 0.0, 1.0, 0.3);
        double worst = 0.0;
        for (int k = 0; k < 5; ++k) {
            auto g1 = s.element(d.n, 0.5), g2 = s.element(d.n, 0.5), g0 = s.element(d.n, 0.4);
            auto E1 = star_exp_elementary(d, th, g1), E2 = star_exp_elementary(d, th, g2);
            auto E12 = star_exp_elementary(d, th, multiply(d, g1, g2));
            cplx lhs = detail::value_at(starexp_left_star_symbol(E1, starexp_left_star_symbol(E2, phi)), g0);
            cplx rhs = detail::value_at(starexp_left_star_symbol(E12, phi), g0);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        out.push_back(make_check("exp", "E_g * (E_h * phi) = E_gh * phi (5 pairs)" + detail::tag(d), worst, 1e-4));
    } else {
        out.push_back(make_skip("exp", "left-star BCH runs for n <= 1"));
    }
    {
        auto t = siegel(c.eps1, c.eps2);
        const auto d2 = t.factors[1];
        double worst = 0.0;
        for (int k = 0; k < 9; ++k) {
            NormalElement pre{{GroupElement(s.unif(-1, 1), Vec(), s.unif(-1.5, 1.5))}};
            auto tm = twist_matrices(t.actions[0].rho_plus(pre), t.actions[0].rho_minus(pre));
            for (int j = 0; j < 4; ++j) {
                auto g2 = s.element(1), g2p = s.element(1);
                worst = std::max(worst, std::abs(star_exp_twisted(d2, th, tm, g2, g2p, TwistForm::x_tilde) -
                                                 star_exp_twisted(d2, th, tm, g2, g2p, TwistForm::assembled)));
            }
        }
        out.push_back(make_check("exp", "twisted quadratic forms agree (siegel)", worst, 1e-10));
    }
    return out;
}

inline std::vector<Check> suite_calculus(const VerifyConfig &c)
{
    const auto d = c.main_factor();
    if (d.n != 0 || c.group != GroupKind::elementary)
        return {make_skip("calculus", "smeared trace identity runs on the n=0 elementary group")};
    QuantizationConfig q{c.theta, d.epsilon, 0};
    auto f = detail::gauss0(0.1, 1.0, 0.2, 0.9, 0.3), h = detail::gauss0(-0.3, 0.8, -0.1, 1.1, -0.5);
    auto r = smeared_trace_identity(q, f, h);
    return {make_check("calculus", "tr(Omega(f) Omega(h)) = kappa int f h (relative)", r.residual, 1e-3)};
}

inline std::vector<Check> suite_fourier(const VerifyConfig &c)
{
    const auto d = c.main_factor();
    if (d.n != 0 || c.group != GroupKind::elementary)
        return {make_skip("fourier", "Fourier suite runs on the n=0 elementary group")};
    detail::Sampler s(c.seed, 10);
    const auto leaf = NormalDescriptor::leaf(d);
    const OrbitSelector plus{{1}}, minus{{-1}};
    auto cfg = [](double th) {
        FourierConfig fc;
        fc.theta = th;
        return fc;
    };
    std::vector<Check> out;
    auto f = detail::gauss0(0.2, 0.9, 0.1, 1.0, 0.4);
    {
        auto fc = cfg(c.theta);
        auto bundle = fourier_bundle(fc, leaf, f);
        double worst = 0.0;
        for (int k = 0; k < 10; ++k) {
            GroupElement g(s.unif(-0.8, 0.8), Vec(), s.unif(-1.5, 1.5));
            worst = std::max(worst, std::abs(inverse_adapted_fourier(fc, leaf, bundle, g).value - f(g)));
        }
        out.push_back(make_check("fourier", "inversion round trip (10 probes)", worst, 1e-4));
    }
    out.push_back(make_check("fourier", "Plancherel at theta", plancherel_residual(cfg(c.theta), leaf, f),
                             c.theta == 1.0 ? 1e-4 : 1e-3));
    for (double th : {0.5, 2.0})
        if (th != c.theta) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "Plancherel at theta = %g", th);
            out.push_back(make_check("fourier", buf, plancherel_residual(cfg(th), leaf, f), 1e-3));
        }
    {
        auto psi = detail::gauss0(0.3, 0.8, -0.2, 1.1, 0.0, Chart::group);
        auto fc = cfg(c.theta);
        double same = 0.0, cross = 0.0;
        for (int k = 0; k < 3; ++k) {
            GroupElement gp(s.unif(-0.8, 0.8), Vec(), s.unif(-1.5, 1.5));
            for (const auto &o : {plus, minus}) {
                const auto &other = o == plus ? minus : plus;
                same = std::max(same, std::abs(orthogonality_smeared(fc, leaf, o, o, psi, gp).value - psi(gp)));
                cross = std::max(cross, std::abs(orthogonality_smeared(fc, leaf, o, other, psi, gp).value));
            }
        }
        out.push_back(make_check("fourier", "F F* = id (smeared)", same, 1e-4));
        out.push_back(make_check("fourier", "cross-orbit F F'* = 0 (smeared)", cross, 1e-4));
    }
    {
        auto f1 = detail::gauss0(0.2, 0.9, 0.1, 1.0, 0.4), f2 = detail::gauss0(-0.1, 1.1, -0.2, 0.9, -0.3);
        auto sc = detail::star_config(0, 1, c.theta);
        auto fc = cfg(c.theta);
        double worst = 0.0;
        for (int eps : {1, -1}) {
            GroupElement gp(s.unif(-0.5, 0.5), Vec(), s.unif(-1, 1));
            worst = std::max(worst, convolution_theorem(fc, eps, f1, f2, gp, sc).residual);
        }
        out.push_back(make_check("fourier", "convolution theorem", worst, 1e-3));
    }
    return out;
}

inline std::vector<Check> suite_bs(const VerifyConfig &c)
{
    detail::Sampler s(c.seed, 11);
    const auto t = c.tree();
    if (c.group == GroupKind::elementary && t.factors[0].n > 2)
        return {make_skip("bs", "relation suite runs for n <= 2")};
    std::vector<Check> out;
    auto emit = [&](const std::string &prefix, const RelationReport &r) {
        out.push_back(make_check("bs", prefix + r.name + " [group]", r.group_residual, 1e-10));
        if (r.star_residual)
            out.push_back(make_check("bs", prefix + r.name + " [star]", *r.star_residual, 1e-4));
        else
            out.push_back(make_skip("bs", prefix + r.name + " [star]"));
    };
    auto suite = relation_suite(t, c.theta);
    for (const auto &r : suite.displayed)
        emit("", r);
    for (const auto &r : suite.corrected)
        emit("corrected: ", r);
    for (const auto &r : suite.unlisted)
        emit("trivial: ", r);
    auto ctl = wrong_exponent_control(t, c.theta);
    out.push_back(make_control("bs", "control " + ctl.name + " [group]", ctl.group_residual, 1e-10));
    out.push_back(make_control("bs", "control " + ctl.name + " [star]", ctl.star_residual.value_or(0.0), 1e-4));
    std::vector<NormalElement> probes;
    for (int k = 0; k < 3; ++k)
        probes.push_back(s.normal(t, 0.8));
    auto sc = commutator_scaling(t, gen_U(), gen_V(), {1e-3, 2e-3, 4e-3}, probes);
    double dev = 0.0;
    for (double sl : sc.slopes)
        dev = std::max(dev, std::abs(std::log2(sl)));
    out.push_back(make_check("bs", "UV - VU slope as theta -> 0 (|log2 slope|)", dev, 1.0));
    return out;
}

inline std::vector<Check> run_suite(const std::string &name, const VerifyConfig &c)
{
    if (name == "group")
        return suite_group(c);
    if (name == "lie")
        return suite_lie(c);
    if (name == "moment")
        return suite_moment(c);
    if (name == "quant")
        return suite_quant(c);
    if (name == "trace")
        return suite_trace(c);
    if (name == "star")
        return suite_star(c);
    if (name == "invariance")
        return suite_invariance(c);
    if (name == "exp")
        return suite_exp(c);
    if (name == "calculus")
        return suite_calculus(c);
    if (name == "fourier")
        return suite_fourier(c);
    if (name == "bs")
        return suite_bs(c);
    throw std::invalid_argument("unknown suite: " + name);
}

inline std::vector<Check> run_verify(const VerifyConfig &c)
{
    c.validate();
    std::vector<Check> all;
    for (const auto &name : c.suites) {
        auto part = run_suite(name, c);
        all.insert(all.end(), part.begin(), part.end());
    }
    return all;
}

inline bool all_pass(const std::vector<Check> &checks)
{
    for (const auto &k : checks)
        if (k.status == CheckStatus::fail)
            return false;
    return true;
}

inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string &s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"')
            q += '"';
        q += ch;
    }
    return q + "\"";
}

inline std::string format_report(const std::vector<Check> &checks)
{
    std::string out = "suite,check,residual,tolerance,status\n";
    for (const auto &k : checks)
        out += csv_field(k.suite) + "," + csv_field(k.name) + "," + format_number(k.residual) + "," +
               format_number(k.tolerance) + "," + status_string(k.status) + "\n";
    return out;
}

} // namespace jstar
