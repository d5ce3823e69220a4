#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jgroup.hpp"
#include "starexp.hpp"

namespace jstar {

// Generators of the Baumslag-Solitar subgroup: exp(theta X) for X in the adapted basis. On an
// elementary group U, V, W_i come from H, E, e_i; on the Siegel group U, V, W_1, W_2 come from the
// second factor (H2, E2, f2, f2') and R, S from the first (H1, E1).
enum class GeneratorKind { U, V, W, R, S };

struct GeneratorId {
    GeneratorKind kind = GeneratorKind::U;
    int index = 0; // 1-based for W

    std::string name() const
    {
        switch (kind) {
        case GeneratorKind::U:
            return "U";
        case GeneratorKind::V:
            return "V";
        case GeneratorKind::W:
            return "W" + std::to_string(index);
        case GeneratorKind::R:
            return "R";
        case GeneratorKind::S:
            return "S";
        }
        return "?";
    }
    bool operator==(const GeneratorId &) const = default;
};

inline GeneratorId gen_U() { return {GeneratorKind::U, 0}; }
inline GeneratorId gen_V() { return {GeneratorKind::V, 0}; }
inline GeneratorId gen_W(int i) { return {GeneratorKind::W, i}; }
inline GeneratorId gen_R() { return {GeneratorKind::R, 0}; }
inline GeneratorId gen_S() { return {GeneratorKind::S, 0}; }

// Real powers are one-parameter subgroups: X^c = exp(c theta X).
struct GeneratorPower {
    GeneratorId id;
    double exponent = 1.0;
};

using GeneratorWord = std::vector<GeneratorPower>;

inline std::string word_string(const GeneratorWord &w)
{
    if (w.empty())
        return "1";
    std::string s;
    for (const auto &p : w) {
        s += p.id.name();
        if (p.exponent != 1.0) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "^%.6g", p.exponent);
            s += buf;
        }
    }
    return s;
}

inline GeneratorWord inverse_word(const GeneratorWord &w)
{
    GeneratorWord r;
    for (auto it = w.rbegin(); it != w.rend(); ++it)
        r.push_back({it->id, -it->exponent});
    return r;
}

inline GeneratorWord concat(GeneratorWord a, const GeneratorWord &b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

namespace detail {

inline bool is_siegel_shape(const NormalDescriptor &t)
{
    return t.size() == 2 && t.factors[0].n == 0 && t.factors[1].n == 1;
}

} // namespace detail

// The factor and Lie vector behind a generator.
inline std::pair<std::size_t, LieVector> generator_lie(const NormalDescriptor &t, const GeneratorId &id)
{
    t.validate();
    const bool siegel_like = detail::is_siegel_shape(t);
    if (t.size() != 1 && !siegel_like)
        throw std::invalid_argument("generator: only elementary and Siegel-shaped trees carry named generators");
    const std::size_t main = t.size() - 1;
    const int n = t.factors[main].n;
    switch (id.kind) {
    case GeneratorKind::U:
        return {main, LieVector::H(n)};
    case GeneratorKind::V:
        return {main, LieVector::E(n)};
    case GeneratorKind::W:
        if (id.index < 1 || id.index > 2 * n)
            throw std::invalid_argument("generator: W index out of range");
        return {main, LieVector::e(n, id.index - 1)};
    case GeneratorKind::R:
    case GeneratorKind::S:
        if (!siegel_like)
            throw std::invalid_argument("generator: R and S exist only on the Siegel group");
        return {0, id.kind == GeneratorKind::R ? LieVector::H(0) : LieVector::E(0)};
    }
    throw std::invalid_argument("generator: unknown id");
}

inline NormalElement generator_element(const NormalDescriptor &t, double theta, const GeneratorId &id,
                                       double exponent = 1.0)
{
    auto [k, X] = generator_lie(t, id);
    return exp_factor(t, k, X * (exponent * theta));
}

// Symbol of a generator: the star-exponential of its group element.
inline std::function<cplx(const NormalElement &)> generator_symbol(const NormalDescriptor &t, double theta,
                                                                    const GeneratorId &id)
{
    auto E = star_exp_normal(t, theta, generator_element(t, theta, id));
    return [E](const NormalElement &g) { return E(g); };
}

inline NormalElement word_reduce(const NormalDescriptor &t, double theta, const GeneratorWord &w)
{
    NormalElement g = t.identity();
    for (const auto &p : w)
        g = multiply_normal(t, g, generator_element(t, theta, p.id, p.exponent));
    return g;
}

inline double sup_distance(const NormalElement &g, const NormalElement &h)
{
    double d = 0.0;
    for (std::size_t k = 0; k < g.parts.size(); ++k)
        d = std::max(d, (g.parts[k].flat() - h.parts[k].flat()).cwiseAbs().maxCoeff());
    return d;
}

// ---------------------------------------------------------------------------
// Relations

struct Relation {
    std::string name;
    GeneratorWord lhs, rhs;
    bool displayed = true; // false for the unlisted commuting pairs
};

struct RelationReport {
    std::string name;
    std::string lhs, rhs;
    bool displayed = true;
    double group_residual = 0.0;
    bool group_pass = false;
    // star-product spot check (E_lhs * phi)(g0) against (E_rhs * phi)(g0); empty when not available
    std::optional<double> star_residual;
    bool star_pass = true;
    bool pass() const { return group_pass && star_pass; }
};

struct RelationTolerances {
    double group = 1e-10;
    double star = 1e-4;
};

namespace detail {

// (E_{w_1} * (E_{w_2} * ... (E_{w_k} * phi)))(g0) for a word of generators living in one elementary factor
inline cplx word_left_star(const ElementaryDescriptor &d, double theta, const GeneratorWord &w,
                           const NormalDescriptor &t, const SymbolFunction &phi, const GroupElement &g0)
{
    SymbolFunction cur = phi;
    const std::size_t main = t.size() - 1;
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        auto [k, X] = generator_lie(t, it->id);
        if (k != main)
            throw CapabilityError("spot check: generator outside the last factor");
        auto E = star_exp_elementary(d, theta, exp_lie(d, X * (it->exponent * theta)));
        cur = starexp_left_star_symbol(E, cur);
    }
    return inverse_partial_fourier(cur.spectrum, g0.a, g0.x, g0.ell, 40.0, 1e-12, 32).value;
}

inline bool word_in_last_factor(const NormalDescriptor &t, const GeneratorWord &w)
{
    for (const auto &p : w)
        if (generator_lie(t, p.id).first != t.size() - 1)
            return false;
    return true;
}

} // namespace detail

// Spot-check operand in the last factor: a Gaussian with a nonzero ell-frequency
inline SymbolFunction spot_check_operand(int n)
{
    Vec x0 = Vec::Zero(2 * n);
    for (int i = 0; i < 2 * n; ++i)
        x0[i] = 0.1 * (i + 1) * (i % 2 ? -1 : 1);
    return gaussian_symbol(n, GaussianParams{Chart::r_chart, 0.2, 1.1, x0, 1.2, 0.1, 0.9, 0.4});
}

inline GroupElement spot_check_probe(int n)
{
    Vec x = Vec::Zero(2 * n);
    for (int i = 0; i < 2 * n; ++i)
        x[i] = 0.15 * (i % 2 ? 1 : -1);
    return {0.1, x, 0.2};
}

// Group reduction always; the star-product spot check runs when both words live in the last factor
// (there the symbols are star-exponentials of that elementary factor times 1).
inline RelationReport verify_relation(const NormalDescriptor &t, double theta, const Relation &rel,
                                      bool spot_check = true, const RelationTolerances &tol = {})
{
    RelationReport r;
    r.name = rel.name;
    r.lhs = word_string(rel.lhs);
    r.rhs = word_string(rel.rhs);
    r.displayed = rel.displayed;
    r.group_residual = sup_distance(word_reduce(t, theta, rel.lhs), word_reduce(t, theta, rel.rhs));
    r.group_pass = r.group_residual <= tol.group;
    if (spot_check && detail::word_in_last_factor(t, rel.lhs) && detail::word_in_last_factor(t, rel.rhs)) {
        const auto &d = t.factors.back();
        auto phi = spot_check_operand(d.n);
        auto g0 = spot_check_probe(d.n);
        cplx l = detail::word_left_star(d, theta, rel.lhs, t, phi, g0);
        cplx rr = detail::word_left_star(d, theta, rel.rhs, t, phi, g0);
        r.star_residual = std::abs(l - rr);
        r.star_pass = *r.star_residual <= tol.star;
    }
    return r;
}

inline RelationReport verify_relation(const NormalDescriptor &t, double theta, const GeneratorWord &lhs,
                                      const GeneratorWord &rhs, bool spot_check = true)
{
    return verify_relation(t, theta, Relation{word_string(lhs) + " = " + word_string(rhs), lhs, rhs, true},
                           spot_check);
}

// ---------------------------------------------------------------------------
// Relation lists

inline Relation commute(const GeneratorId &a, const GeneratorId &b)
{
    return {a.name() + " commutes with " + b.name(), {{a, 1.0}, {b, 1.0}}, {{b, 1.0}, {a, 1.0}}, false};
}

inline std::vector<GeneratorId> generators(const NormalDescriptor &t)
{
    const int n = t.factors.back().n;
    std::vector<GeneratorId> g{gen_U(), gen_V()};
    for (int i = 1; i <= 2 * n; ++i)
        g.push_back(gen_W(i));
    if (detail::is_siegel_shape(t)) {
        g.push_back(gen_R());
        g.push_back(gen_S());
    }
    return g;
}

// Displayed relations for the elementary group, plus commuting checks for every unlisted pair.
inline std::vector<Relation> elementary_relations(int n, double theta, double beta = 0.7)
{
    const double e2 = std::exp(2.0 * theta), e1 = std::exp(theta);
    std::vector<Relation> rels;
    rels.push_back({"UV = V^{e^{2 theta}} U", {{gen_U()}, {gen_V()}}, {{gen_V(), e2}, {gen_U()}}});
    rels.push_back({"UV^b = V^{b e^{2 theta}} U", {{gen_U()}, {gen_V(), beta}}, {{gen_V(), beta * e2}, {gen_U()}}});
    for (int i = 1; i <= 2 * n; ++i)
        rels.push_back({"UW" + std::to_string(i) + " = W" + std::to_string(i) + "^{e^theta} U",
                        {{gen_U()}, {gen_W(i)}},
                        {{gen_W(i), e1}, {gen_U()}}});
    for (int i = 1; i <= n; ++i)
        rels.push_back({"W" + std::to_string(i) + "W" + std::to_string(i + n) + " = V^theta W" + std::to_string(i + n) +
                            "W" + std::to_string(i),
                        {{gen_W(i)}, {gen_W(i + n)}},
                        {{gen_V(), theta}, {gen_W(i + n)}, {gen_W(i)}}});
    for (int i = 1; i <= 2 * n; ++i)
        rels.push_back(commute(gen_V(), gen_W(i)));
    for (int i = 1; i <= 2 * n; ++i)
        for (int j = i + 1; j <= 2 * n; ++j)
            if (j != i + n)
                rels.push_back(commute(gen_W(i), gen_W(j)));
    return rels;
}

// The Siegel list as displayed. With the homomorphic action the two R-W relations hold only in the
// forms of siegel_relations_corrected.
inline std::vector<Relation> siegel_relations_printed(double theta)
{
    const double e2 = std::exp(2.0 * theta), e1 = std::exp(theta);
    auto U = gen_U(), V = gen_V(), W1 = gen_W(1), W2 = gen_W(2), R = gen_R(), S = gen_S();
    return {
        {"UV = V^{e^{2 theta}} U", {{U}, {V}}, {{V, e2}, {U}}},
        {"UW1 = W1^{e^theta} U", {{U}, {W1}}, {{W1, e1}, {U}}},
        {"UW2 = W2^{e^theta} U", {{U}, {W2}}, {{W2, e1}, {U}}},
        {"W1W2 = V^theta W2W1", {{W1}, {W2}}, {{V, theta}, {W2}, {W1}}},
        {"RS = S^{e^{2 theta}} R", {{R}, {S}}, {{S, e2}, {R}}},
        {"RW1 = W1^{e^theta} R", {{R}, {W1}}, {{W1, e1}, {R}}},
        {"RW2 = W1^{e^{-theta}} R", {{R}, {W2}}, {{W1, 1.0 / e1}, {R}}},
        {"SW1 = V^{theta^2/2} W2^theta W1 S", {{S}, {W1}}, {{V, 0.5 * theta * theta}, {W2, theta}, {W1}, {S}}},
    };
}

inline std::vector<Relation> siegel_relations_corrected(double theta)
{
    const double e1 = std::exp(theta);
    auto W1 = gen_W(1), W2 = gen_W(2), R = gen_R();
    return {
        {"RW1 = W1^{e^{-theta}} R", {{R}, {W1}}, {{W1, 1.0 / e1}, {R}}},
        {"RW2 = W2^{e^theta} R", {{R}, {W2}}, {{W2, e1}, {R}}},
    };
}

inline std::vector<Relation> siegel_unlisted()
{
    auto U = gen_U(), V = gen_V(), W1 = gen_W(1), W2 = gen_W(2), R = gen_R(), S = gen_S();
    return {commute(U, R), commute(U, S), commute(V, R), commute(V, S), commute(V, W1), commute(V, W2),
            commute(S, W2)};
}

// Negative control: UV = V^{e^theta} U has the wrong exponent and must fail.
inline RelationReport wrong_exponent_control(const NormalDescriptor &t, double theta, bool spot_check = true)
{
    return verify_relation(t, theta,
                           Relation{"UV = V^{e^theta} U (control)", {{gen_U()}, {gen_V()}},
                                    {{gen_V(), std::exp(theta)}, {gen_U()}}},
                           spot_check);
}

struct RelationSuite {
    std::vector<RelationReport> displayed;
    std::vector<RelationReport> corrected;
    std::vector<RelationReport> unlisted;

    bool displayed_pass() const
    {
        for (const auto &r : displayed)
            if (!r.pass())
                return false;
        return true;
    }
    bool all_pass() const
    {
        if (!displayed_pass())
            return false;
        for (const auto &v : {&corrected, &unlisted})
            for (const auto &r : *v)
                if (!r.pass())
                    return false;
        return true;
    }
};

inline RelationSuite relation_suite(const NormalDescriptor &t, double theta, bool spot_check = true)
{
    RelationSuite s;
    if (t.size() == 1) {
        for (const auto &rel : elementary_relations(t.factors[0].n, theta))
            (rel.displayed ? s.displayed : s.unlisted).push_back(verify_relation(t, theta, rel, spot_check));
        return s;
    }
    if (!detail::is_siegel_shape(t))
        throw CapabilityError("relation_suite: elementary or Siegel trees only");
    for (const auto &rel : siegel_relations_printed(theta))
        s.displayed.push_back(verify_relation(t, theta, rel, spot_check));
    for (const auto &rel : siegel_relations_corrected(theta))
        s.corrected.push_back(verify_relation(t, theta, rel, spot_check));
    for (const auto &rel : siegel_unlisted())
        s.unlisted.push_back(verify_relation(t, theta, rel, spot_check));
    return s;
}

// Commutative limit: sup over probes of |E_{UV}(g0) - E_{VU}(g0)| for each theta, and the log-log slope
// between consecutive thetas.
struct CommutatorScaling {
    std::vector<double> thetas, sizes, slopes;
};

inline CommutatorScaling commutator_scaling(const NormalDescriptor &t, const GeneratorId &a, const GeneratorId &b,
                                            const std::vector<double> &thetas,
                                            const std::vector<NormalElement> &probes)
{
    CommutatorScaling out;
    for (double th : thetas) {
        auto ab = star_exp_normal(t, th, word_reduce(t, th, {{a}, {b}}));
        auto ba = star_exp_normal(t, th, word_reduce(t, th, {{b}, {a}}));
        double m = 0.0;
        for (const auto &p : probes)
            m = std::max(m, std::abs(ab(p) - ba(p)));
        out.thetas.push_back(th);
        out.sizes.push_back(m);
    }
    for (std::size_t k = 1; k < thetas.size(); ++k)
        out.slopes.push_back(std::log(out.sizes[k] / out.sizes[k - 1]) / std::log(thetas[k] / thetas[k - 1]));
    return out;
}

} // namespace jstar
