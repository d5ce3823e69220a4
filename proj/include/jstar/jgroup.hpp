#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace jstar {

struct ElementaryDescriptor {
    int n = 0;
    int epsilon = 1;

    int dim() const { return 2 * n + 2; }

    void validate() const
    {
        if (n < 0)
            throw std::invalid_argument("descriptor: n must be nonnegative");
        if (epsilon != 1 && epsilon != -1)
            throw std::invalid_argument("descriptor: epsilon must be +1 or -1");
    }
};

struct GroupElement {
    double a = 0.0;
    Vec x;
    double ell = 0.0;

    GroupElement() : x(Vec::Zero(0)) {}
    GroupElement(double a_, Vec x_, double l_) : a(a_), x(std::move(x_)), ell(l_) {}

    static GroupElement identity(int n) { return {0.0, Vec::Zero(2 * n), 0.0}; }

    // (a, x_1..x_2n, ell)
    Vec flat() const
    {
        Vec v(x.size() + 2);
        v[0] = a;
        v.segment(1, x.size()) = x;
        v[x.size() + 1] = ell;
        return v;
    }

    static GroupElement from_flat(const Vec &v)
    {
        const auto m = v.size() - 2;
        return {v[0], v.segment(1, m), v[m + 1]};
    }
};

struct LieVector {
    double alpha = 0.0;
    Vec y;
    double beta = 0.0;

    LieVector() : y(Vec::Zero(0)) {}
    LieVector(double al, Vec y_, double be) : alpha(al), y(std::move(y_)), beta(be) {}

    static LieVector H(int n) { return {1.0, Vec::Zero(2 * n), 0.0}; }
    static LieVector E(int n) { return {0.0, Vec::Zero(2 * n), 1.0}; }
    static LieVector e(int n, int i)
    {
        Vec y = Vec::Zero(2 * n);
        y[i] = 1.0;
        return {0.0, y, 0.0};
    }
    // H, e_1..e_2n, E
    static std::vector<LieVector> basis(int n)
    {
        std::vector<LieVector> b{H(n)};
        for (int i = 0; i < 2 * n; ++i)
            b.push_back(e(n, i));
        b.push_back(E(n));
        return b;
    }

    LieVector operator*(double t) const { return {alpha * t, y * t, beta * t}; }
    LieVector operator+(const LieVector &o) const { return {alpha + o.alpha, y + o.y, beta + o.beta}; }
};

inline double omega0(const Vec &x, const Vec &y)
{
    const auto n = x.size() / 2;
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        s += x[i] * y[i + n] - x[i + n] * y[i];
    return s;
}

// matrix J with omega0(x,y) = x^T J y
inline Mat omega0_matrix(int n)
{
    Mat J = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        J(i, i + n) = 1.0;
        J(i + n, i) = -1.0;
    }
    return J;
}

struct CoadjointVector {
    double cH = 0.0;
    Vec cx;
    double cE = 0.0;

    // the x-slot is read through omega0: <cx-part, y> = omega0(cx, y)
    double pair(const LieVector &X) const { return cH * X.alpha + omega0(cx, X.y) + cE * X.beta; }
};

namespace detail {

inline void check_dim(const ElementaryDescriptor &d, const Vec &x, const char *what)
{
    if (x.size() != 2 * d.n)
        throw std::invalid_argument(std::string(what) + ": vector length does not match 2n");
}

// sinh(z)/z with a Taylor branch near zero
inline double sinhc(double z)
{
    if (std::abs(z) < 1e-6)
        return 1.0 + z * z / 6.0;
    return std::sinh(z) / z;
}

} // namespace detail

inline GroupElement multiply(const ElementaryDescriptor &d, const GroupElement &g, const GroupElement &h)
{
    detail::check_dim(d, g.x, "multiply");
    detail::check_dim(d, h.x, "multiply");
    const double e1 = std::exp(-h.a);
    return {g.a + h.a, e1 * g.x + h.x, e1 * e1 * g.ell + h.ell + 0.5 * e1 * omega0(g.x, h.x)};
}

inline GroupElement inverse(const ElementaryDescriptor &d, const GroupElement &g)
{
    detail::check_dim(d, g.x, "inverse");
    const double e1 = std::exp(g.a);
    return {-g.a, -e1 * g.x, -e1 * e1 * g.ell};
}

inline GroupElement exp_lie(const ElementaryDescriptor &d, const LieVector &X)
{
    detail::check_dim(d, X.y, "exp_lie");
    const double al = X.alpha;
    return {al, std::exp(-0.5 * al) * detail::sinhc(0.5 * al) * X.y,
            X.beta * std::exp(-al) * detail::sinhc(al)};
}

inline LieVector log_group(const ElementaryDescriptor &d, const GroupElement &g)
{
    detail::check_dim(d, g.x, "log_group");
    const double a = g.a;
    return {a, std::exp(0.5 * a) / detail::sinhc(0.5 * a) * g.x, std::exp(a) / detail::sinhc(a) * g.ell};
}

inline LieVector bch(const ElementaryDescriptor &d, const LieVector &X1, const LieVector &X2)
{
    detail::check_dim(d, X1.y, "bch");
    detail::check_dim(d, X2.y, "bch");
    using detail::sinhc;
    const double a1 = X1.alpha, a2 = X2.alpha, s = a1 + a2;
    Vec y = (std::exp(-0.5 * a2) * sinhc(0.5 * a1) * X1.y + std::exp(0.5 * a1) * sinhc(0.5 * a2) * X2.y) /
            sinhc(0.5 * s);
    double beta = (X1.beta * std::exp(-a2) * sinhc(a1) + X2.beta * std::exp(a1) * sinhc(a2) +
                   0.5 * std::exp(0.5 * (a1 - a2)) * sinhc(0.5 * a1) * sinhc(0.5 * a2) * omega0(X1.y, X2.y)) /
                  sinhc(s);
    return {s, y, beta};
}

// Loos symmetry s_g(h)
inline GroupElement symmetry(const ElementaryDescriptor &d, const GroupElement &g, const GroupElement &h)
{
    detail::check_dim(d, g.x, "symmetry");
    detail::check_dim(d, h.x, "symmetry");
    const double t = g.a - h.a;
    return {2.0 * g.a - h.a, 2.0 * std::cosh(t) * g.x - h.x,
            2.0 * std::cosh(2.0 * t) * g.ell - h.ell + std::sinh(t) * omega0(g.x, h.x)};
}

inline double moment(const ElementaryDescriptor &d, const LieVector &X, const GroupElement &g)
{
    detail::check_dim(d, X.y, "moment");
    detail::check_dim(d, g.x, "moment");
    const double eps = d.epsilon;
    return eps * (2.0 * X.alpha * g.ell + std::exp(-g.a) * omega0(X.y, g.x) + X.beta * std::exp(-2.0 * g.a));
}

inline CoadjointVector coadjoint(const ElementaryDescriptor &d, const GroupElement &g)
{
    detail::check_dim(d, g.x, "coadjoint");
    const double eps = d.epsilon;
    return {2.0 * eps * g.ell, -eps * std::exp(-g.a) * g.x, eps * std::exp(-2.0 * g.a)};
}

// X* at g in the (a, x, ell) chart: the generator of h -> exp(-tX) h
inline Vec fundamental_field(const ElementaryDescriptor &d, const LieVector &X, const GroupElement &g)
{
    detail::check_dim(d, X.y, "fundamental_field");
    detail::check_dim(d, g.x, "fundamental_field");
    const double e1 = std::exp(-g.a);
    Vec v(d.dim());
    v[0] = -X.alpha;
    v.segment(1, 2 * d.n) = -e1 * X.y;
    v[d.dim() - 1] = -X.beta * e1 * e1 + 0.5 * e1 * omega0(g.x, X.y);
    return v;
}

inline double kks_form(const ElementaryDescriptor &d, const Vec &u, const Vec &v)
{
    if (u.size() != d.dim() || v.size() != d.dim())
        throw std::invalid_argument("kks_form: tangent length must be 2n+2");
    const int m = d.dim() - 1;
    return d.epsilon *
           (2.0 * (u[0] * v[m] - u[m] * v[0]) + omega0(u.segment(1, 2 * d.n), v.segment(1, 2 * d.n)));
}

inline double modular(const ElementaryDescriptor &d, const GroupElement &g)
{
    return std::exp(-2.0 * (d.n + 1) * g.a);
}

// ---------------------------------------------------------------------------
// Normal j-groups as a left comb ((S_1 x| S_2) x| S_3) ...; action k acts on factor k+1
// through the prefix group formed by factors 0..k.

struct NormalElement {
    std::vector<GroupElement> parts;

    NormalElement prefix(std::size_t k) const
    {
        return {std::vector<GroupElement>(parts.begin(), parts.begin() + static_cast<long>(k))};
    }
};

struct NormalLieVector {
    std::vector<LieVector> parts;
};

struct ExtensionAction {
    std::function<Mat(const NormalElement &)> rho_plus;
    std::function<Mat(const NormalElement &)> rho_minus;
    std::function<Mat(const NormalLieVector &)> drho;

    Mat matrix(const NormalElement &g1) const
    {
        Mat p = rho_plus(g1), m = rho_minus(g1);
        const auto k = p.rows();
        Mat r = Mat::Zero(2 * k, 2 * k);
        r.topLeftCorner(k, k) = p;
        r.bottomLeftCorner(k, k) = m;
        r.bottomRightCorner(k, k) = p.transpose().inverse();
        return r;
    }
};

struct NormalDescriptor {
    std::vector<ElementaryDescriptor> factors;
    std::vector<ExtensionAction> actions; // actions[k-1] acts on factors[k]

    static NormalDescriptor leaf(const ElementaryDescriptor &d) { return {{d}, {}}; }

    NormalDescriptor extend(const ElementaryDescriptor &d, ExtensionAction act) const
    {
        NormalDescriptor r = *this;
        r.factors.push_back(d);
        r.actions.push_back(std::move(act));
        return r;
    }

    std::size_t size() const { return factors.size(); }

    int dim() const
    {
        int s = 0;
        for (auto &f : factors)
            s += f.dim();
        return s;
    }

    NormalDescriptor prefix(std::size_t k) const
    {
        NormalDescriptor r;
        r.factors.assign(factors.begin(), factors.begin() + static_cast<long>(k));
        r.actions.assign(actions.begin(), actions.begin() + static_cast<long>(k - 1));
        return r;
    }

    NormalElement identity() const
    {
        NormalElement e;
        for (auto &f : factors)
            e.parts.push_back(GroupElement::identity(f.n));
        return e;
    }

    void validate() const
    {
        if (factors.empty())
            throw std::invalid_argument("normal descriptor: no factors");
        if (actions.size() + 1 != factors.size())
            throw std::invalid_argument("normal descriptor: one action per extension required");
        for (auto &f : factors)
            f.validate();
    }

    void check(const NormalElement &g) const
    {
        if (g.parts.size() != factors.size())
            throw std::invalid_argument("normal element: component count mismatch");
        for (std::size_t k = 0; k < factors.size(); ++k)
            detail::check_dim(factors[k], g.parts[k].x, "normal element");
    }
};

// rho(g1) acting on a group element of the right factor: x is transformed, a and ell are fixed
inline GroupElement act(const ExtensionAction &action, const NormalElement &g1, const GroupElement &g2)
{
    return {g2.a, action.matrix(g1) * g2.x, g2.ell};
}

inline NormalElement multiply_normal(const NormalDescriptor &t, const NormalElement &g, const NormalElement &h)
{
    t.check(g);
    t.check(h);
    NormalElement r;
    r.parts.push_back(multiply(t.factors[0], g.parts[0], h.parts[0]));
    for (std::size_t k = 1; k < t.size(); ++k) {
        GroupElement moved = act(t.actions[k - 1], g.prefix(k), h.parts[k]);
        r.parts.push_back(multiply(t.factors[k], g.parts[k], moved));
    }
    return r;
}

inline NormalElement inverse_normal(const NormalDescriptor &t, const NormalElement &g)
{
    t.check(g);
    if (t.size() == 1)
        return {{inverse(t.factors[0], g.parts[0])}};
    const std::size_t k = t.size() - 1;
    NormalDescriptor pre = t.prefix(k);
    NormalElement g1inv = inverse_normal(pre, g.prefix(k));
    GroupElement g2inv = inverse(t.factors[k], g.parts[k]);
    NormalElement r = g1inv;
    r.parts.push_back(act(t.actions[k - 1], g1inv, g2inv));
    return r;
}

inline double modular(const NormalDescriptor &t, const NormalElement &g)
{
    t.check(g);
    double m = 1.0;
    for (std::size_t k = 0; k < t.size(); ++k)
        m *= modular(t.factors[k], g.parts[k]);
    return m;
}

// exp of a Lie vector supported in a single factor (the one-parameter subgroups used by words)
inline NormalElement exp_factor(const NormalDescriptor &t, std::size_t factor, const LieVector &X)
{
    NormalElement g = t.identity();
    g.parts.at(factor) = exp_lie(t.factors[factor], X);
    return g;
}

// lambda_X(g) for the sign-vector orbit: recursive over the comb, each extension adds
// -(eps_k/2) omega0(x_k, drho_k(X_prefix) x_k) to the prefix pairing.
inline double moment_normal(const NormalDescriptor &t, const NormalLieVector &X, const NormalElement &g)
{
    t.check(g);
    if (X.parts.size() != t.size())
        throw std::invalid_argument("moment_normal: Lie vector shape mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
        s += moment(t.factors[k], X.parts[k], g.parts[k]);
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (!t.actions[k - 1].drho)
            throw std::logic_error("moment_normal: action without drho");
        NormalLieVector pre{std::vector<LieVector>(X.parts.begin(), X.parts.begin() + static_cast<long>(k))};
        const Vec &xk = g.parts[k].x;
        s -= 0.5 * t.factors[k].epsilon * omega0(xk, t.actions[k - 1].drho(pre) * xk);
    }
    return s;
}

inline std::vector<CoadjointVector> coadjoint_normal(const NormalDescriptor &t, const NormalElement &g)
{
    t.check(g);
    std::vector<CoadjointVector> out;
    NormalLieVector X;
    for (auto &f : t.factors)
        X.parts.push_back(LieVector(0.0, Vec::Zero(2 * f.n), 0.0));
    for (std::size_t k = 0; k < t.size(); ++k) {
        const int n = t.factors[k].n;
        CoadjointVector c;
        c.cx = Vec::Zero(2 * n);
        auto eval = [&](const LieVector &b) {
            X.parts[k] = b;
            double v = moment_normal(t, X, g);
            X.parts[k] = LieVector(0.0, Vec::Zero(2 * n), 0.0);
            return v;
        };
        c.cH = eval(LieVector::H(n));
        c.cE = eval(LieVector::E(n));
        // omega0(cx, e_i) = value on e_i, solved through J
        Vec vals(2 * n);
        for (int i = 0; i < 2 * n; ++i)
            vals[i] = eval(LieVector::e(n, i));
        if (n > 0)
            c.cx = omega0_matrix(n).transpose().colPivHouseholderQr().solve(vals);
        out.push_back(c);
    }
    return out;
}

// Six-dimensional Siegel group S_1 x| S_2 (S_1 affine, dim V_2 = 2) with the homomorphic action
// rho(a1, l1) = [[e^{-a1}, 0], [e^{a1} l1, e^{a1}]].
inline NormalDescriptor siegel(int eps1 = 1, int eps2 = 1)
{
    ExtensionAction act;
    act.rho_plus = [](const NormalElement &g1) {
        Mat m(1, 1);
        m(0, 0) = std::exp(-g1.parts[0].a);
        return m;
    };
    act.rho_minus = [](const NormalElement &g1) {
        Mat m(1, 1);
        m(0, 0) = std::exp(g1.parts[0].a) * g1.parts[0].ell;
        return m;
    };
    act.drho = [](const NormalLieVector &X) {
        const LieVector &x1 = X.parts[0];
        Mat m(2, 2);
        m << -x1.alpha, 0.0, x1.beta, x1.alpha;
        return m;
    };
    return NormalDescriptor::leaf({0, eps1}).extend({1, eps2}, act);
}

// Siegel coordinates (a1, l1, a2, v2, w2, l2)
inline NormalElement siegel_element(double a1, double l1, double a2, double v2, double w2, double l2)
{
    Vec x(2);
    x << v2, w2;
    return {{GroupElement(a1, Vec::Zero(0), l1), GroupElement(a2, x, l2)}};
}

struct SiegelMoments {
    double H1, E1, H2, f2, f2p, E2;
};

inline SiegelMoments siegel_moments(int eps1, int eps2, const NormalElement &g)
{
    const auto &g1 = g.parts.at(0);
    const auto &g2 = g.parts.at(1);
    const double v = g2.x[0], w = g2.x[1];
    return {2.0 * eps1 * g1.ell - eps2 * v * w,
            eps1 * std::exp(-2.0 * g1.a) - 0.5 * eps2 * v * v,
            2.0 * eps2 * g2.ell,
            eps2 * std::exp(-g2.a) * w,
            -eps2 * std::exp(-g2.a) * v,
            eps2 * std::exp(-2.0 * g2.a)};
}

} // namespace jstar
