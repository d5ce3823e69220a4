#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace jstar {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

struct QuadResult {
    cplx value{0.0, 0.0};
    double error = 0.0;
    bool converged = true;
    long evals = 0;

    QuadResult &operator+=(const QuadResult &o)
    {
        value += o.value;
        error += o.error;
        converged = converged && o.converged;
        evals += o.evals;
        return *this;
    }
};

// Gauss-Legendre nodes on [-1,1], Newton iteration on P_n; cached per order.
struct GaussRule {
    std::vector<double> x, w;
};

inline const GaussRule &gauss_legendre(int n)
{
    static std::mutex mtx;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end())
        return it->second;
    if (n < 1)
        throw std::invalid_argument("gauss_legendre: order must be positive");

    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return cache.emplace(n, std::move(r)).first->second;
}

// Composite Gauss-Legendre rule: `panels` equal panels of `order` nodes each.
inline void composite_rule(double lo, double hi, int order, int panels,
                           std::vector<double> &x, std::vector<double> &w)
{
    const GaussRule &g = gauss_legendre(order);
    x.clear();
    w.clear();
    x.reserve(order * panels);
    w.reserve(order * panels);
    double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        double c = lo + (p + 0.5) * h;
        for (int i = 0; i < order; ++i) {
            x.push_back(c + 0.5 * h * g.x[i]);
            w.push_back(0.5 * h * g.w[i]);
        }
    }
}

template <class F>
QuadResult integrate_fixed(F &&f, double lo, double hi, int order = 20, int panels = 1)
{
    std::vector<double> x, w;
    composite_rule(lo, hi, order, panels, x, w);
    QuadResult r;
    for (std::size_t i = 0; i < x.size(); ++i)
        r.value += w[i] * cplx(f(x[i]));
    r.evals = static_cast<long>(x.size());
    return r;
}

namespace detail {

// Kronrod 15 / Gauss 7 abscissae and weights (QUADPACK qk15)
inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b;
    cplx value;
    double error;
    bool operator<(const Segment &o) const { return error < o.error; }
};

template <class F>
Segment gk15(F &f, double a, double b)
{
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cplx fc = f(c);
    cplx k = fc * wgk[7];
    cplx g = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        double dx = h * xgk[j];
        cplx s = cplx(f(c - dx)) + cplx(f(c + dx));
        k += wgk[j] * s;
        if (j % 2 == 1)
            g += wg[j / 2] * s;
    }
    k *= h;
    g *= h;
    return {a, b, k, std::abs(k - g)};
}

} // namespace detail

// Globally adaptive Gauss-Kronrod on [lo,hi]; the worst panel is bisected first.
template <class F>
QuadResult integrate_adaptive(F &&f, double lo, double hi, double abs_tol = 1e-10,
                              double rel_tol = 1e-10, int max_segments = 2000,
                              int initial_panels = 1)
{
    std::priority_queue<detail::Segment> heap;
    QuadResult r;
    double h = (hi - lo) / initial_panels;
    cplx total = 0.0;
    double err = 0.0;
    for (int p = 0; p < initial_panels; ++p) {
        auto s = detail::gk15(f, lo + p * h, p + 1 == initial_panels ? hi : lo + (p + 1) * h);
        total += s.value;
        err += s.error;
        heap.push(s);
    }
    r.evals = 15L * initial_panels;
    int segments = initial_panels;
    while (err > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (segments >= max_segments) {
            r.converged = false;
            break;
        }
        auto worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        r.evals += 30;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++segments;
    }
    // re-sum from the panels so the result does not carry update round-off
    total = 0.0;
    err = 0.0;
    std::vector<detail::Segment> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](auto &x, auto &y) { return x.a < y.a; });
    for (auto &s : all) {
        total += s.value;
        err += s.error;
    }
    r.value = total;
    r.error = err;
    return r;
}

enum class RuleKind { fixed, adaptive };

// Per-axis box and rule; for the adaptive kind `nodes` gives the initial panel count.
struct QuadratureSpec {
    std::vector<std::pair<double, double>> bounds;
    std::vector<int> nodes;
    RuleKind kind = RuleKind::adaptive;
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_segments = 2000;
    int order = 20; // Gauss-Legendre order per panel for the fixed kind

    std::size_t dim() const { return bounds.size(); }

    void validate() const
    {
        if (bounds.empty())
            throw std::invalid_argument("quadrature: empty box");
        if (!nodes.empty() && nodes.size() != bounds.size())
            throw std::invalid_argument("quadrature: nodes/bounds size mismatch");
        for (auto &b : bounds)
            if (!(std::isfinite(b.first) && std::isfinite(b.second) && b.first < b.second))
                throw std::invalid_argument("quadrature: bounds must be finite and ordered");
        for (int n : nodes)
            if (n < 1)
                throw std::invalid_argument("quadrature: node count must be positive");
    }
};

namespace detail {

template <class F>
QuadResult nested(F &f, const QuadratureSpec &spec, std::vector<double> &pt, std::size_t axis,
                  double abs_tol)
{
    const auto [lo, hi] = spec.bounds[axis];
    const int panels = spec.nodes.empty() ? 1 : spec.nodes[axis];
    if (axis + 1 == spec.dim()) {
        auto g = [&](double t) {
            pt[axis] = t;
            return cplx(f(std::span<const double>(pt)));
        };
        return integrate_adaptive(g, lo, hi, abs_tol, spec.rel_tol, spec.max_segments, panels);
    }
    QuadResult inner_total;
    inner_total.evals = 0;
    double inner_tol = 0.1 * abs_tol / (hi - lo);
    auto g = [&](double t) {
        std::vector<double> local = pt;
        local[axis] = t;
        auto r = nested(f, spec, local, axis + 1, inner_tol);
        inner_total.evals += r.evals;
        inner_total.converged = inner_total.converged && r.converged;
        return r.value;
    };
    auto r = integrate_adaptive(g, lo, hi, abs_tol, spec.rel_tol, spec.max_segments, panels);
    r.evals = inner_total.evals;
    r.converged = r.converged && inner_total.converged;
    return r;
}

} // namespace detail

// Integrates f over the box of `spec`; f receives the point as a span of length dim.
template <class F>
QuadResult integrate(F &&f, const QuadratureSpec &spec)
{
    spec.validate();
    const std::size_t d = spec.dim();
    if (spec.kind == RuleKind::adaptive) {
        std::vector<double> pt(d, 0.0);
        return detail::nested(f, spec, pt, 0, spec.abs_tol);
    }
    std::vector<std::vector<double>> xs(d), ws(d);
    for (std::size_t k = 0; k < d; ++k)
        composite_rule(spec.bounds[k].first, spec.bounds[k].second, spec.order,
                       spec.nodes.empty() ? 1 : spec.nodes[k], xs[k], ws[k]);
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> pt(d);
    QuadResult r;
    while (true) {
        double w = 1.0;
        for (std::size_t k = 0; k < d; ++k) {
            pt[k] = xs[k][idx[k]];
            w *= ws[k][idx[k]];
        }
        r.value += w * cplx(f(std::span<const double>(pt)));
        ++r.evals;
        std::size_t k = d;
        while (k > 0) {
            --k;
            if (++idx[k] < xs[k].size())
                break;
            idx[k] = 0;
            if (k == 0)
                return r;
        }
    }
}

// Central differences with one Richardson step: h = 1e-5 for first, 1e-4 for second order.
template <class F>
auto derivative(F &&f, double x, int order = 1, double h = 0.0)
{
    if (order == 1) {
        if (h == 0.0)
            h = 1e-5;
        auto d = [&](double s) { return (f(x + s) - f(x - s)) / (2.0 * s); };
        return (4.0 * d(0.5 * h) - d(h)) / 3.0;
    }
    if (order != 2)
        throw std::invalid_argument("derivative: order must be 1 or 2");
    if (h == 0.0)
        h = 1e-4;
    auto fx = f(x);
    auto d = [&](double s) { return (f(x + s) - 2.0 * fx + f(x - s)) / (s * s); };
    return (4.0 * d(0.5 * h) - d(h)) / 3.0;
}

template <class F>
auto finite_difference(F &&f, const Vec &point, const Vec &direction, int order = 1)
{
    auto along = [&](double t) { return f(Vec(point + t * direction)); };
    return derivative(along, 0.0, order);
}

// Orders of the phase-invariant regularizers applied to the two-point kernel.
struct RegularizerOrders {
    int k1 = 2, k2 = 2, p1 = 2, p2 = 2, q1 = 1, q2 = 1;

    void validate() const
    {
        if (k1 < 0 || k2 < 0 || p1 < 0 || p2 < 0 || q1 < 0 || q2 < 0)
            throw std::invalid_argument("regularizer orders must be nonnegative");
        if (p1 < q2 || p2 < q1)
            throw std::invalid_argument("regularizer orders need p1 >= q2 and p2 >= q1");
    }
};

// Two-point variable layout for the kernel integrals on S x S:
// u = (a1, x1[2n], l1, a2, x2[2n], l2).
struct PairLayout {
    int n = 0;
    int dim() const { return 4 * n + 4; }
    int a1() const { return 0; }
    int x1(int i) const { return 1 + i; }
    int l1() const { return 2 * n + 1; }
    int a2() const { return 2 * n + 2; }
    int x2(int i) const { return 2 * n + 3 + i; }
    int l2() const { return 4 * n + 3; }
};

using PairField = std::function<cplx(const Vec &)>;

namespace detail {

inline PairField shifted_diff(const PairField &g, int axis, double h)
{
    return [g, axis, h](const Vec &u) {
        Vec p = u, m = u;
        p[axis] += h;
        m[axis] -= h;
        return (g(p) - g(m)) / (2.0 * h);
    };
}

inline PairField second_diff(const PairField &g, int axis, double h)
{
    return [g, axis, h](const Vec &u) {
        Vec p = u, m = u;
        p[axis] += h;
        m[axis] -= h;
        return (g(p) - 2.0 * g(u) + g(m)) / (h * h);
    };
}

// adjoint of sech(2a)(d_a - tanh(a) x.d_x) on the (a, x) block starting at `ai`
inline PairField dilation_adjoint(const PairField &g, const PairLayout &L, int ai, int xi0, double h)
{
    const int n2 = 2 * L.n;
    PairField weighted = [g, ai](const Vec &u) { return g(u) / std::cosh(2.0 * u[ai]); };
    PairField da = shifted_diff(weighted, ai, h);
    std::vector<PairField> dx;
    for (int i = 0; i < n2; ++i)
        dx.push_back(shifted_diff(g, xi0 + i, h));
    return [g, da, dx, ai, xi0, n2](const Vec &u) {
        cplx v = -da(u);
        if (n2 > 0) {
            double c = std::tanh(u[ai]) / std::cosh(2.0 * u[ai]);
            cplx s = double(n2) * g(u);
            for (int i = 0; i < n2; ++i)
                s += u[xi0 + i] * dx[i](u);
            v += c * s;
        }
        return v;
    };
}

} // namespace detail

// Applies the adjoint regularizers (O*) of the kernel phase exp(-(2i/theta) S(0,g1,g2)) to F.
inline PairField regularize(const PairField &F, const PairLayout &L, double theta,
                            const RegularizerOrders &ord, double h = 2e-3)
{
    PairField g = F;
    const int n2 = 2 * L.n;
    auto wrap_l = [&](int q, int ai, int xi0, int li) {
        for (int k = 0; k < q; ++k) {
            PairField g0 = g;
            PairField d1 = detail::dilation_adjoint(g0, L, ai, xi0, h);
            PairField d2 = detail::dilation_adjoint(d1, L, ai, xi0, h);
            g = [g0, d2, li, theta](const Vec &u) {
                return (g0(u) - theta * theta / 16.0 * d2(u)) / (1.0 + u[li] * u[li]);
            };
        }
    };
    // O_{l1}: derivatives on (a2, x2); O_{l2}: on (a1, x1)
    wrap_l(ord.q1, L.a2(), L.x2(0), L.l1());
    wrap_l(ord.q2, L.a1(), L.x1(0), L.l2());
    auto wrap_x = [&](int p, int xdecay0, int xderiv0) {
        for (int k = 0; k < p && n2 > 0; ++k) {
            PairField g0 = g;
            std::vector<PairField> lap;
            for (int i = 0; i < n2; ++i)
                lap.push_back(detail::second_diff(g0, xderiv0 + i, h));
            g = [g0, lap, xdecay0, n2, theta, L](const Vec &u) {
                double c = std::cosh(u[L.a1()]) * std::cosh(u[L.a2()]);
                cplx s = 0.0;
                for (int i = 0; i < n2; ++i)
                    s += lap[i](u);
                double r2 = 0.0;
                for (int i = 0; i < n2; ++i)
                    r2 += u[xdecay0 + i] * u[xdecay0 + i];
                return (g0(u) - theta * theta / (4.0 * c * c) * s) / (1.0 + r2);
            };
        }
    };
    // O_{x2} decays in x2 with derivatives in x1, and symmetrically
    wrap_x(ord.p2, L.x2(0), L.x1(0));
    wrap_x(ord.p1, L.x1(0), L.x2(0));
    auto wrap_a = [&](int k, int adecay, int lderiv) {
        for (int j = 0; j < k; ++j) {
            PairField g0 = g;
            PairField d2 = detail::second_diff(g0, lderiv, h);
            g = [g0, d2, adecay, theta](const Vec &u) {
                double s = std::sinh(2.0 * u[adecay]);
                return (g0(u) - theta * theta / 4.0 * d2(u)) / (1.0 + s * s);
            };
        }
    };
    wrap_a(ord.k1, L.a1(), L.l2());
    wrap_a(ord.k2, L.a2(), L.l1());
    return g;
}

// Phase of the two-point kernel at the identity, epsilon times the bracket.
inline double kernel_phase_at_identity(const Vec &u, const PairLayout &L, int epsilon)
{
    double a1 = u[L.a1()], a2 = u[L.a2()], l1 = u[L.l1()], l2 = u[L.l2()];
    double w = 0.0;
    for (int i = 0; i < L.n; ++i)
        w += u[L.x1(i)] * u[L.x2(L.n + i)] - u[L.x1(L.n + i)] * u[L.x2(i)];
    return epsilon * (std::sinh(2.0 * a1) * l2 - std::sinh(2.0 * a2) * l1 +
                      std::cosh(a1) * std::cosh(a2) * w);
}

struct OscillatoryResult {
    QuadResult result;
    cplx incremented{0.0, 0.0};
    double drift = 0.0;
    bool reliable = true;
};

// int exp(-(2i/theta) S(0,g1,g2)) amplitude(u) F(u) du, rewritten with the adjoint
// regularizers before quadrature. The result is recomputed with every order raised by one;
// a relative drift above 1% marks it unreliable.
inline OscillatoryResult oscillatory_integrate(const PairField &amplitude, const PairField &F,
                                               int n, int epsilon, double theta,
                                               const RegularizerOrders &orders,
                                               const QuadratureSpec &spec, bool certify = true)
{
    orders.validate();
    PairLayout L{n};
    if (static_cast<int>(spec.dim()) != L.dim())
        throw std::invalid_argument("oscillatory_integrate: box dimension mismatch");
    PairField AF = [amplitude, F](const Vec &u) { return amplitude(u) * F(u); };
    auto run = [&](const RegularizerOrders &o) {
        PairField g = regularize(AF, L, theta, o);
        auto integrand = [&](std::span<const double> s) {
            Vec u = Eigen::Map<const Vec>(s.data(), static_cast<Eigen::Index>(s.size()));
            double ph = kernel_phase_at_identity(u, L, epsilon);
            return std::exp(cplx(0.0, -2.0 * ph / theta)) * g(u);
        };
        return integrate(integrand, spec);
    };
    OscillatoryResult out;
    out.result = run(orders);
    if (certify) {
        RegularizerOrders up = orders;
        up.k1 += 1;
        up.q1 += 1;
        up.p2 = std::max(up.p2, up.q1);
        auto r2 = run(up);
        out.incremented = r2.value;
        double scale = std::max(std::abs(out.result.value), 1e-300);
        out.drift = std::abs(r2.value - out.result.value) / scale;
        out.reliable = out.drift <= 1e-2;
    }
    return out;
}

} // namespace jstar
