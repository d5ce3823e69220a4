// jstar: verification suites, star products, Fourier transforms, BS relations and orbit tables.
// Exit codes: 0 all checks pass, 1 a check fails, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "jstar/verify.hpp"

using namespace jstar;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string group = "elementary";
    int n = 0;
    int eps = 1, eps1 = 1, eps2 = 1;
    double theta = 1.0;
    std::uint64_t seed = 1;
    std::string output;
    std::vector<std::string> suites;
    std::string f1 = "unit", f2 = "gauss", f = "gauss";
    std::string path = "full";
    bool cross_check = false;
    std::vector<std::string> probes;
    int count = 5;
    std::vector<double> theta_sweep;
};

VerifyConfig verify_config(const Options &o)
{
    VerifyConfig c;
    if (o.group == "elementary")
        c.group = GroupKind::elementary;
    else if (o.group == "siegel")
        c.group = GroupKind::siegel;
    else
        throw UsageError("unknown group: " + o.group);
    c.n = o.n;
    c.epsilon = o.eps;
    c.eps1 = o.eps1;
    c.eps2 = o.eps2;
    c.theta = o.theta;
    c.seed = o.seed;
    c.suites = o.suites.empty() ? suite_names() : o.suites;
    for (const auto &s : c.suites) {
        bool known = false;
        for (const auto &k : suite_names())
            known = known || k == s;
        if (!known)
            throw UsageError("unknown suite: " + s);
    }
    try {
        c.validate();
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    return c;
}

// Output sink: the --output file when given, stdout otherwise
class Sink {
public:
    explicit Sink(const std::string &path)
    {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_)
                throw UsageError("cannot open output file: " + path);
        }
    }
    std::ostream &out() { return file_.is_open() ? static_cast<std::ostream &>(file_) : std::cout; }

private:
    std::ofstream file_;
};

std::string num(double v) { return format_number(v); }

// Named test functions on an elementary factor of dimension 2n+2
SymbolFunction named_function(const std::string &name, int n)
{
    if (name == "unit")
        return constant_symbol(n, 1.0);
    if (name == "zero")
        return scale(detail::gauss_n(n, 0.2, 0.9, 1.0, 0.1, 1.0, 0.4), 0.0);
    if (name == "gauss")
        return detail::gauss_n(n, 0.2, 0.9, 1.0, 0.1, 1.0, 0.4);
    if (name == "gauss2")
        return detail::gauss_n(n, -0.1, 1.1, 0.9, -0.2, 0.9, -0.3);
    if (name == "profile")
        return a_only_symbol(n, [](double a) { return cplx(std::exp(-a * a)); }, DecayClass::bounded_oscillatory);
    throw UsageError("unknown function: " + name + " (known: unit, zero, gauss, gauss2, profile)");
}

std::vector<GroupElement> probe_list(const Options &o, int n)
{
    std::vector<GroupElement> out;
    for (const auto &p : o.probes) {
        std::vector<double> v;
        std::stringstream ss(p);
        std::string tok;
        while (std::getline(ss, tok, ':')) {
            try {
                std::size_t used = 0;
                v.push_back(std::stod(tok, &used));
                if (used != tok.size())
                    throw std::invalid_argument(tok);
            } catch (const std::exception &) {
                throw UsageError("bad probe coordinate: " + tok);
            }
        }
        if (static_cast<int>(v.size()) != 2 * n + 2)
            throw UsageError("probe needs 2n+2 colon-separated coordinates: " + p);
        out.push_back(GroupElement::from_flat(Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size()))));
    }
    if (out.empty()) {
        detail::Sampler s(o.seed, 100);
        for (int k = 0; k < o.count; ++k)
            out.push_back(s.element(n, 0.6));
    }
    return out;
}

std::string coordinate_header(int n)
{
    std::string h = "a";
    for (int i = 1; i <= 2 * n; ++i)
        h += ",x_" + std::to_string(i);
    return h + ",ell";
}

std::string coordinates(const GroupElement &g)
{
    std::string s = num(g.a);
    for (int i = 0; i < g.x.size(); ++i)
        s += "," + num(g.x[i]);
    return s + "," + num(g.ell);
}

int cmd_verify(const Options &o)
{
    auto c = verify_config(o);
    auto checks = run_verify(c);
    Sink sink(o.output);
    sink.out() << format_report(checks);
    return all_pass(checks) ? 0 : 1;
}

StarPath parse_path(const std::string &p)
{
    if (p == "full")
        return StarPath::full_kernel;
    if (p == "moyal")
        return StarPath::moyal_intertwined;
    if (p == "reduced")
        return StarPath::reduced_A;
    throw UsageError("unknown path: " + p + " (known: full, moyal, reduced)");
}

int cmd_star(const Options &o)
{
    auto c = verify_config(o);
    if (c.group != GroupKind::elementary)
        throw UsageError("star: the Siegel product is evaluated per factor; pass --group elementary");
    const int n = c.n;
    auto f1 = named_function(o.f1, n), f2 = named_function(o.f2, n);
    auto sc = detail::star_config(n, c.epsilon, c.theta);
    sc.path = parse_path(o.path);
    auto alt = sc;
    alt.path = sc.path == StarPath::full_kernel ? StarPath::moyal_intertwined : StarPath::full_kernel;
    auto probes = probe_list(o, n);
    Sink sink(o.output);
    auto &out = sink.out();
    out << coordinate_header(n) << ",re,im" << (o.cross_check ? ",re_alt,im_alt,diff" : "") << "\n";
    double worst = 0.0;
    for (const auto &g : probes) {
        cplx v = star(sc, f1, f2, g).value;
        out << coordinates(g) << "," << num(v.real()) << "," << num(v.imag());
        if (o.cross_check) {
            cplx w = star(alt, f1, f2, g).value;
            worst = std::max(worst, std::abs(v - w));
            out << "," << num(w.real()) << "," << num(w.imag()) << "," << num(std::abs(v - w));
        }
        out << "\n";
    }
    return o.cross_check && worst > 1e-4 ? 1 : 0;
}

int cmd_fourier(const Options &o)
{
    auto c = verify_config(o);
    if (c.group != GroupKind::elementary)
        throw UsageError("fourier: elementary groups only");
    const int n = c.n;
    auto f = named_function(o.f, n);
    if (f.decay != DecayClass::schwartz_r_chart)
        throw UsageError("fourier: the function must be Schwartz");
    const auto leaf = NormalDescriptor::leaf({n, c.epsilon});
    std::vector<double> thetas = o.theta_sweep.empty() ? std::vector<double>{c.theta} : o.theta_sweep;
    for (double th : thetas)
        if (!(th > 0.0))
            throw UsageError("theta sweep values must be positive");
    Sink sink(o.output);
    auto &out = sink.out();
    out << "theta,orbit,s";
    for (int i = 1; i <= 2 * n; ++i)
        out << ",z_" << i;
    out << ",ell,re,im\n";
    bool ok = true;
    for (double th : thetas) {
        FourierConfig fc;
        fc.theta = th;
        for (int sign : {1, -1}) {
            auto F = adapted_fourier(fc, leaf, f, OrbitSelector{{sign}});
            for (double s : {0.5, 1.0, 2.0})
                for (double z : {-0.5, 0.5})
                    for (double ell : {-1.0, 0.0, 1.0}) {
                        if (n == 0 && z > 0)
                            continue;
                        // moment chart (s, z, ell) = (e^{-2a}, e^{-a} x, ell)
                        const double a = -0.5 * std::log(s);
                        Vec zv = Vec::Constant(2 * n, z);
                        GroupElement g(a, std::exp(a) * zv, ell);
                        cplx v = F(g);
                        out << num(th) << "," << sign << "," << num(s);
                        for (int i = 0; i < 2 * n; ++i)
                            out << "," << num(zv[i]);
                        out << "," << num(ell) << "," << num(v.real()) << "," << num(v.imag()) << "\n";
                    }
        }
        if (n == 0) {
            double pr = plancherel_residual(fc, leaf, f);
            double tol_p = th == 1.0 ? 1e-4 : 1e-3;
            auto bundle = fourier_bundle(fc, leaf, f);
            detail::Sampler smp(o.seed, 200);
            double inv = 0.0;
            for (int k = 0; k < 10; ++k) {
                GroupElement g(smp.unif(-0.8, 0.8), Vec(), smp.unif(-1.5, 1.5));
                inv = std::max(inv, std::abs(inverse_adapted_fourier(fc, leaf, bundle, g).value - f(g)));
            }
            ok = ok && pr <= tol_p && inv <= 1e-4;
            std::cerr << "theta " << num(th) << ": Plancherel residual " << num(pr) << " (tol " << num(tol_p) << ") "
                      << (pr <= tol_p ? "PASS" : "FAIL") << "; inversion residual " << num(inv) << " (tol 1e-4) "
                      << (inv <= 1e-4 ? "PASS" : "FAIL") << "\n";
        } else {
            std::cerr << "theta " << num(th) << ": Plancherel and inversion residuals are computed for n = 0 only\n";
        }
    }
    return ok ? 0 : 1;
}

int cmd_bs(const Options &o)
{
    auto c = verify_config(o);
    auto t = c.tree();
    auto suite = relation_suite(t, c.theta);
    auto ctl = wrong_exponent_control(t, c.theta);
    Sink sink(o.output);
    auto &out = sink.out();
    out << "kind,relation,lhs,rhs,group_residual,star_residual,status\n";
    auto row = [&](const std::string &kind, const RelationReport &r, bool expect_pass) {
        bool good = r.pass() == expect_pass;
        out << kind << "," << csv_field(r.name) << "," << csv_field(r.lhs) << "," << csv_field(r.rhs) << ","
            << num(r.group_residual) << "," << (r.star_residual ? num(*r.star_residual) : std::string()) << ","
            << (good ? "PASS" : "FAIL") << "\n";
        return good;
    };
    bool ok = true;
    for (const auto &r : suite.displayed)
        ok = row("displayed", r, true) && ok;
    for (const auto &r : suite.corrected)
        ok = row("corrected", r, true) && ok;
    for (const auto &r : suite.unlisted)
        ok = row("trivial", r, true) && ok;
    ok = row("control", ctl, false) && ok;
    return ok ? 0 : 1;
}

int cmd_orbit(const Options &o)
{
    auto c = verify_config(o);
    Sink sink(o.output);
    auto &out = sink.out();
    if (c.group == GroupKind::siegel) {
        detail::Sampler s(o.seed, 300);
        out << "a1,l1,a2,v2,w2,l2,lambda_H1,lambda_E1,lambda_H2,lambda_f2,lambda_f2p,lambda_E2\n";
        auto t = c.tree();
        for (int k = 0; k < o.count; ++k) {
            auto g = s.normal(t, 0.8);
            auto m = siegel_moments(c.eps1, c.eps2, g);
            const auto &g1 = g.parts[0], &g2 = g.parts[1];
            out << num(g1.a) << "," << num(g1.ell) << "," << num(g2.a) << "," << num(g2.x[0]) << "," << num(g2.x[1])
                << "," << num(g2.ell) << "," << num(m.H1) << "," << num(m.E1) << "," << num(m.H2) << ","
                << num(m.f2) << "," << num(m.f2p) << "," << num(m.E2) << "\n";
        }
        return 0;
    }
    ElementaryDescriptor d{c.n, c.epsilon};
    auto basis = LieVector::basis(c.n);
    std::vector<std::string> names{"H"};
    for (int i = 1; i <= 2 * c.n; ++i)
        names.push_back("e" + std::to_string(i));
    names.push_back("E");
    out << coordinate_header(c.n);
    for (const auto &nm : names)
        out << ",lambda_" << nm;
    out << ",coadjoint_H";
    for (int i = 1; i <= 2 * c.n; ++i)
        out << ",coadjoint_x" << i;
    out << ",coadjoint_E\n";
    for (const auto &g : probe_list(o, c.n)) {
        out << coordinates(g);
        for (const auto &X : basis)
            out << "," << num(moment(d, X, g));
        auto co = coadjoint(d, g);
        out << "," << num(co.cH);
        for (int i = 0; i < co.cx.size(); ++i)
            out << "," << num(co.cx[i]);
        out << "," << num(co.cE) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"jstar: invariant star products and Fourier analysis on normal j-groups"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value file; command-line flags override it");
    Options o;
    app.add_option("--group", o.group, "elementary or siegel")->check(CLI::IsMember({"elementary", "siegel"}));
    app.add_option("--n", o.n, "half-dimension of the symplectic part")->check(CLI::NonNegativeNumber);
    app.add_option("--eps", o.eps, "orbit sign of the elementary group")->check(CLI::IsMember({-1, 1}));
    app.add_option("--eps1", o.eps1, "orbit sign of the first Siegel factor")->check(CLI::IsMember({-1, 1}));
    app.add_option("--eps2", o.eps2, "orbit sign of the second Siegel factor")->check(CLI::IsMember({-1, 1}));
    app.add_option("--theta", o.theta, "deformation parameter")->check(CLI::PositiveNumber);
    app.add_option("--seed", o.seed, "seed for random probes");
    app.add_option("--output", o.output, "output file (default stdout)");
    app.add_option("--suite", o.suites, "comma-separated suites")->delimiter(',');
    app.add_option("--f1", o.f1, "left operand: unit, zero, gauss, gauss2, profile");
    app.add_option("--f2", o.f2, "right operand");
    app.add_option("--f", o.f, "function to transform");
    app.add_option("--path", o.path, "star-product path: full, moyal, reduced");
    app.add_flag("--cross-check", o.cross_check, "also evaluate the other path and report the difference");
    app.add_option("--probe", o.probes, "probe a:x_1:...:x_2n:ell (repeatable)");
    app.add_option("--count", o.count, "number of random probes when none are given")->check(CLI::PositiveNumber);
    app.add_option("--theta-sweep", o.theta_sweep, "comma-separated theta values")->delimiter(',');

    auto *verify = app.add_subcommand("verify", "run verification suites and print a report");
    auto *starc = app.add_subcommand("star", "evaluate a star product of named functions at probes");
    auto *fourier = app.add_subcommand("fourier", "adapted Fourier transform on a moment-chart grid");
    auto *bs = app.add_subcommand("bs-relations", "check the Baumslag-Solitar relations");
    auto *orbit = app.add_subcommand("orbit", "moment-map and coadjoint tables");
    for (auto *s : {verify, starc, fourier, bs, orbit})
        s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*verify)
            return cmd_verify(o);
        if (*starc)
            return cmd_star(o);
        if (*fourier)
            return cmd_fourier(o);
        if (*bs)
            return cmd_bs(o);
        if (*orbit)
            return cmd_orbit(o);
    } catch (const UsageError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CapabilityError &e) {
        std::cerr << "unsupported: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
