#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "jgroup.hpp"
#include "numerics.hpp"
#include "schwartz.hpp"

namespace jstar {

struct QuantizationConfig {
    double theta = 1.0;
    int epsilon = 1;
    int n = 0;

    double kappa() const { return 1.0 / (std::pow(2.0, n) * std::pow(pi * theta, n + 1)); }
    ElementaryDescriptor descriptor() const { return {n, epsilon}; }

    void validate() const
    {
        if (!(theta > 0.0) || !std::isfinite(theta))
            throw std::invalid_argument("quantization: theta must be positive");
        descriptor().validate();
    }
};

// Points of Q = exp(RH + V_0): (a0, v0) with v0 of length n.
struct QPoint {
    double a = 0.0;
    Vec v;
};

using StateFunction = std::function<cplx(const QPoint &)>;

// phi -> weight(q) phi(map(q))
struct WeightedMap {
    std::function<cplx(const QPoint &)> weight;
    std::function<QPoint(const QPoint &)> map;
    std::string name;
};

// Product F_0 F_1 ... F_k of weighted composition operators, applied pointwise without grids.
struct OperatorExpr {
    std::vector<WeightedMap> factors;

    OperatorExpr operator*(const OperatorExpr &o) const
    {
        OperatorExpr r = *this;
        r.factors.insert(r.factors.end(), o.factors.begin(), o.factors.end());
        return r;
    }

    // accumulated weight and final point: (T phi)(q) = w phi(p)
    std::pair<cplx, QPoint> pullback(const QPoint &q) const
    {
        cplx w = 1.0;
        QPoint p = q;
        for (const auto &f : factors) {
            w *= f.weight(p);
            p = f.map(p);
        }
        return {w, p};
    }

    cplx apply_at(const StateFunction &phi, const QPoint &q) const
    {
        auto [w, p] = pullback(q);
        return w * phi(p);
    }

    StateFunction apply(StateFunction phi) const
    {
        OperatorExpr self = *this;
        return [self, phi](const QPoint &q) { return self.apply_at(phi, q); };
    }
};

inline OperatorExpr identity_operator()
{
    return {};
}

namespace detail {

inline void split_x(const Vec &x, int n, Vec &v, Vec &w)
{
    if (x.size() != 2 * n)
        throw std::invalid_argument("representation: x has wrong dimension");
    v = x.head(n);
    w = x.tail(n);
}

} // namespace detail

inline OperatorExpr op_U(const QuantizationConfig &c, const GroupElement &g)
{
    Vec v, w;
    detail::split_x(g.x, c.n, v, w);
    const double th = c.theta, eps = c.epsilon;
    WeightedMap m;
    m.name = "U";
    m.weight = [=](const QPoint &q) {
        double e1 = std::exp(g.a - q.a);
        double ph = e1 * e1 * g.ell + (0.5 * e1 * v - q.v).dot(e1 * w);
        return std::exp(I * (eps * ph / th));
    };
    m.map = [=](const QPoint &q) { return QPoint{q.a - g.a, q.v - std::exp(g.a - q.a) * v}; };
    return {{m}};
}

inline OperatorExpr op_Sigma(const QuantizationConfig &)
{
    WeightedMap m;
    m.name = "Sigma";
    m.weight = [](const QPoint &) { return cplx(1.0); };
    m.map = [](const QPoint &q) { return QPoint{-q.a, -q.v}; };
    return {{m}};
}

inline double m0(int n, double a)
{
    return std::pow(2.0, n + 1) * std::sqrt(std::cosh(2.0 * a)) * std::pow(std::cosh(a), n);
}

inline OperatorExpr op_m0(const QuantizationConfig &c)
{
    WeightedMap m;
    m.name = "m0";
    const int n = c.n;
    m.weight = [n](const QPoint &q) { return cplx(m0(n, q.a)); };
    m.map = [](const QPoint &q) { return q; };
    return {{m}};
}

// U(g) m0 Sigma U(g)^{-1}
inline OperatorExpr op_Omega_composed(const QuantizationConfig &c, const GroupElement &g)
{
    return op_U(c, g) * op_m0(c) * op_Sigma(c) * op_U(c, inverse(c.descriptor(), g));
}

inline OperatorExpr op_Omega(const QuantizationConfig &c, const GroupElement &g)
{
    Vec v, w;
    detail::split_x(g.x, c.n, v, w);
    const double th = c.theta, eps = c.epsilon;
    const int n = c.n;
    WeightedMap m;
    m.name = "Omega";
    m.weight = [=](const QPoint &q) {
        double t = g.a - q.a, ch = std::cosh(t);
        double ph = std::sinh(2.0 * t) * g.ell + (ch * v - q.v).dot(ch * w);
        return m0(n, t) * std::exp(I * (2.0 * eps * ph / th));
    };
    m.map = [=](const QPoint &q) {
        double t = g.a - q.a;
        return QPoint{2.0 * g.a - q.a, 2.0 * std::cosh(t) * v - q.v};
    };
    return {{m}};
}

// d = kappa^2 e^{-2(n+1) a0}
inline OperatorExpr op_d(const QuantizationConfig &c)
{
    WeightedMap m;
    m.name = "d";
    const double k2 = c.kappa() * c.kappa();
    const int n = c.n;
    m.weight = [=](const QPoint &q) { return cplx(k2 * std::exp(-2.0 * (n + 1) * q.a)); };
    m.map = [](const QPoint &q) { return q; };
    return {{m}};
}

// Metaplectic operator of the extension: |det rho+|^{-1/2} e^{-(i eps2/2theta) v0 rho- rho+^{-1} v0} phi(a0, rho+^{-1} v0)
inline OperatorExpr op_R(const QuantizationConfig &c2, const ExtensionAction &action, const NormalElement &g1)
{
    Mat P = action.rho_plus(g1), M = action.rho_minus(g1);
    if (P.rows() != c2.n)
        throw std::invalid_argument("op_R: action dimension does not match the factor");
    const double det = P.determinant();
    if (std::abs(det) < 1e-14)
        throw std::invalid_argument("op_R: rho_plus is singular");
    Mat Pinv = P.inverse();
    Mat Q = M * Pinv;
    const double pref = 1.0 / std::sqrt(std::abs(det));
    const double th = c2.theta, eps = c2.epsilon;
    WeightedMap m;
    m.name = "R";
    m.weight = [=](const QPoint &q) { return pref * std::exp(I * (-eps / (2.0 * th) * q.v.dot(Q * q.v))); };
    m.map = [=](const QPoint &q) { return QPoint{q.a, Pinv * q.v}; };
    return {{m}};
}

// direct inverse of op_R
inline OperatorExpr op_R_inverse(const QuantizationConfig &c2, const ExtensionAction &action,
                                 const NormalElement &g1)
{
    Mat P = action.rho_plus(g1), M = action.rho_minus(g1);
    const double det = P.determinant();
    if (std::abs(det) < 1e-14)
        throw std::invalid_argument("op_R_inverse: rho_plus is singular");
    Mat Q = M * P.inverse();
    const double pref = std::sqrt(std::abs(det));
    const double th = c2.theta, eps = c2.epsilon;
    WeightedMap m;
    m.name = "R^-1";
    m.weight = [=](const QPoint &q) {
        Vec u = P * q.v;
        return pref * std::exp(I * (eps / (2.0 * th) * u.dot(Q * u)));
    };
    m.map = [=](const QPoint &q) { return QPoint{q.a, P * q.v}; };
    return {{m}};
}

// ---------------------------------------------------------------------------
// Quadrature over Q

inline QuadratureSpec default_q_spec(int n, double a_box = 8.0, double v_box = 8.0)
{
    QuadratureSpec s;
    s.kind = RuleKind::fixed;
    s.order = 20;
    s.bounds.push_back({-a_box, a_box});
    s.nodes.push_back(12);
    for (int i = 0; i < n; ++i) {
        s.bounds.push_back({-v_box, v_box});
        s.nodes.push_back(12);
    }
    return s;
}

template <class F>
QuadResult integrate_q(F &&f, int n, const QuadratureSpec &spec)
{
    if (static_cast<int>(spec.dim()) != n + 1)
        throw std::invalid_argument("integrate_q: box dimension must be n+1");
    auto g = [&](std::span<const double> p) {
        QPoint q{p[0], Vec(n)};
        for (int i = 0; i < n; ++i)
            q.v[i] = p[1 + i];
        return cplx(f(q));
    };
    return integrate(g, spec);
}

// <phi, psi> = int conj(phi) psi
inline QuadResult inner_product(int n, const StateFunction &phi, const StateFunction &psi,
                                const QuadratureSpec &spec)
{
    return integrate_q([&](const QPoint &q) { return std::conj(phi(q)) * psi(q); }, n, spec);
}

inline double norm_sq(int n, const StateFunction &phi, const QuadratureSpec &spec)
{
    return inner_product(n, phi, phi, spec).value.real();
}

inline double weighted_norm_sq(const QuantizationConfig &c, const StateFunction &phi,
                               const QuadratureSpec &spec)
{
    const int n = c.n;
    return integrate_q([&](const QPoint &q) { return std::norm(phi(q)) * std::exp(2.0 * (n + 1) * q.a); },
                       n, spec)
        .value.real();
}

inline StateFunction gaussian_state(int n, double a0, double wa, Vec v0 = Vec(), double wv = 1.0,
                                    double phase_slope = 0.0)
{
    if (v0.size() == 0)
        v0 = Vec::Zero(n);
    return [=](const QPoint &q) {
        double t = (q.a - a0) / wa;
        double s = n > 0 ? (q.v - v0).squaredNorm() / (wv * wv) : 0.0;
        return std::exp(-t * t - s) * std::exp(I * (phase_slope * q.a));
    };
}

// The operator acting on states, for traces: phi -> T phi.
using StateOperator = std::function<StateFunction(const StateFunction &)>;

inline StateOperator as_state_operator(const OperatorExpr &T)
{
    return [T](const StateFunction &phi) { return T.apply(phi); };
}

// |psi><psi|, with the scalar <psi, phi> taken by quadrature
inline StateOperator rank_one(int n, StateFunction psi, QuadratureSpec q_spec)
{
    return [=](const StateFunction &phi) {
        cplx s = inner_product(n, psi, phi, q_spec).value;
        return StateFunction([psi, s](const QPoint &q) { return s * psi(q); });
    };
}

// Box for the group integral of coherent traces, in the rescaled coordinates (a, e^a x, e^{2a} ell)
// in which the phase of U(g) stays bounded as a -> -infinity.
inline QuadratureSpec default_g_spec(const QuantizationConfig &c)
{
    QuadratureSpec s;
    s.kind = RuleKind::fixed;
    s.order = 20;
    s.bounds.push_back({-4.0, 4.0});
    s.nodes.push_back(8);
    for (int i = 0; i < 2 * c.n; ++i) {
        s.bounds.push_back({-8.0, 8.0});
        s.nodes.push_back(8);
    }
    s.bounds.push_back({-8.0 / c.theta, 8.0 / c.theta});
    s.nodes.push_back(8);
    return s;
}

// tr T = kappa / |phi|_w^2 int <U(g)phi, T U(g)phi> da dx dell, integrated over the rescaled box
inline QuadResult coherent_trace(const QuantizationConfig &c, const StateOperator &T, const StateFunction &phi,
                                 const QuadratureSpec &g_spec, const QuadratureSpec &q_spec)
{
    c.validate();
    if (static_cast<int>(g_spec.dim()) != 2 * c.n + 2)
        throw std::invalid_argument("coherent_trace: group box must have dimension 2n+2");
    const double wn = weighted_norm_sq(c, phi, q_spec);
    if (!(wn > 0.0))
        throw std::invalid_argument("coherent_trace: mother state must be nonzero");
    auto integrand = [&](std::span<const double> p) {
        const double a = p[0], ea = std::exp(-a);
        GroupElement g(a, Vec(2 * c.n), p[2 * c.n + 1] * ea * ea);
        for (int i = 0; i < 2 * c.n; ++i)
            g.x[i] = p[1 + i] * ea;
        StateFunction pg = op_U(c, g).apply(phi);
        StateFunction tp = T(pg);
        return inner_product(c.n, pg, tp, q_spec).value * std::pow(ea, 2 * c.n + 2);
    };
    QuadResult r = integrate(integrand, g_spec);
    r.value *= c.kappa() / wn;
    r.error *= c.kappa() / wn;
    return r;
}

// Trace of a single weighted composition via its fixed points: sum w(q*) / |det(1 - D map(q*))|.
// Newton from `guess`; the caller supplies a guess in the basin of the unique fixed point.
struct FixedPointTrace {
    cplx value{0.0, 0.0};
    QPoint fixed_point;
    double jacobian_det = 0.0;
    bool converged = false;
};

inline FixedPointTrace fixed_point_trace(const OperatorExpr &T, int n, QPoint guess, int max_iter = 60)
{
    const int m = n + 1;
    auto to_vec = [&](const QPoint &q) {
        Vec z(m);
        z[0] = q.a;
        z.tail(n) = q.v;
        return z;
    };
    auto to_q = [&](const Vec &z) { return QPoint{z[0], z.tail(n)}; };
    auto tau = [&](const Vec &z) { return to_vec(T.pullback(to_q(z)).second); };
    auto jac = [&](const Vec &z) {
        Mat J(m, m);
        for (int k = 0; k < m; ++k) {
            Vec e = Vec::Zero(m);
            e[k] = 1.0;
            auto fk = [&](double t) { return tau(Vec(z + t * e)); };
            Vec d = (4.0 * (fk(2.5e-6) - fk(-2.5e-6)) / 5e-6 - (fk(5e-6) - fk(-5e-6)) / 1e-5) / 3.0;
            J.col(k) = d;
        }
        return J;
    };
    FixedPointTrace out;
    Vec z = to_vec(guess);
    for (int it = 0; it < max_iter; ++it) {
        Vec r = z - tau(z);
        if (r.norm() < 1e-13 * (1.0 + z.norm())) {
            out.converged = true;
            break;
        }
        Mat A = Mat::Identity(m, m) - jac(z);
        z -= A.colPivHouseholderQr().solve(r);
    }
    Mat A = Mat::Identity(m, m) - jac(z);
    out.fixed_point = to_q(z);
    out.jacobian_det = A.determinant();
    out.value = T.pullback(out.fixed_point).first / std::abs(out.jacobian_det);
    return out;
}

// Integral kernel of Omega(f) at n = 0: (Omega(f) phi)(a0) = int k(a0, b) phi(b) db
inline cplx omega_kernel(const QuantizationConfig &c, const SymbolFunction &f, double a0, double b,
                         const FourierWindow &w = {})
{
    if (c.n != 0)
        throw CapabilityError("omega_kernel: only n = 0");
    double t = b - a0;
    double xi = -2.0 * c.epsilon / c.theta * std::sinh(t);
    return c.kappa() * std::sqrt(std::cosh(t)) * partial_fourier_ell(f, 0.5 * (a0 + b), Vec::Zero(0), xi, w);
}

// (Omega(f) phi)(probe) = kappa int f(g) (Omega(g) phi)(probe) dg, with the ell integral done as a
// partial Fourier transform; the box runs over (a, x).
inline QuadResult quantize_symbol(const QuantizationConfig &c, const SymbolFunction &f, const StateFunction &phi,
                                  const QPoint &probe, const QuadratureSpec &ax_spec, const FourierWindow &w = {})
{
    c.validate();
    const int n = c.n;
    if (static_cast<int>(ax_spec.dim()) != 2 * n + 1)
        throw std::invalid_argument("quantize_symbol: box must have dimension 2n+1");
    const double th = c.theta, eps = c.epsilon;
    auto integrand = [&](std::span<const double> p) {
        double a = p[0];
        Vec x(2 * n);
        for (int i = 0; i < 2 * n; ++i)
            x[i] = p[1 + i];
        double t = a - probe.a, ch = std::cosh(t);
        Vec v = x.head(n), wv = x.tail(n);
        double xi = -2.0 * eps / th * std::sinh(2.0 * t);
        cplx fh = partial_fourier_ell(f, a, x, xi, w);
        double ph = (ch * v - probe.v).dot(ch * wv);
        QPoint target{2.0 * a - probe.a, 2.0 * ch * v - probe.v};
        return m0(n, t) * std::exp(I * (2.0 * eps * ph / th)) * fh * phi(target);
    };
    QuadResult r = integrate(integrand, ax_spec);
    r.value *= c.kappa();
    r.error *= c.kappa();
    return r;
}

// tr(Omega(f) Omega(h)) = kappa int f h dg, the smeared form of tr(Omega(f) Omega(g)) = f(g). The trace is
// the diagonal integral of the composed kernels; the pairing is a direct group integral of f h.
struct TraceIdentity {
    cplx trace;
    cplx pairing;
    double residual = 0.0; // relative
};

inline TraceIdentity smeared_trace_identity(const QuantizationConfig &c, const SymbolFunction &f,
                                            const SymbolFunction &h, double a_box = 6.0, double t_box = 4.0,
                                            double ell_box = 12.0, const FourierWindow &w = {})
{
    c.validate();
    if (c.n != 0)
        throw CapabilityError("smeared_trace_identity: only n = 0");
    QuadratureSpec kb;
    kb.bounds = {{-a_box, a_box}, {-t_box, t_box}};
    kb.nodes = {8, 8};
    kb.abs_tol = 1e-9;
    kb.rel_tol = 1e-8;
    // (u, t) = midpoint and separation of the kernel arguments; da db = du dt
    auto tr = integrate(
        [&](std::span<const double> p) {
            double a = p[0] - 0.5 * p[1], b = p[0] + 0.5 * p[1];
            return omega_kernel(c, f, a, b, w) * omega_kernel(c, h, b, a, w);
        },
        kb);
    QuadratureSpec gb;
    gb.bounds = {{-a_box, a_box}, {-ell_box, ell_box}};
    gb.nodes = {8, 8};
    gb.abs_tol = 1e-9;
    gb.rel_tol = 1e-8;
    auto pr = integrate(
        [&](std::span<const double> p) {
            GroupElement g(p[0], Vec::Zero(0), p[1]);
            return f(g) * h(g);
        },
        gb);
    TraceIdentity r{tr.value, c.kappa() * pr.value, 0.0};
    r.residual = std::abs(r.trace - r.pairing) / std::max(std::abs(r.pairing), 1e-300);
    return r;
}

} // namespace jstar
