#include "tdec/decompose.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "tdec/eigen.hpp"
#include "tdec/extension.hpp"
#include "tdec/moment.hpp"

namespace tdec {

Polynomial expand(const Shape& s, const std::vector<Term>& terms)
{
    Polynomial t(s);
    for (const auto& m : enumerate_monomials(s, s.degrees)) {
        cplx c = 0.0;
        for (const auto& term : terms)
            c += term.weight * eval_monomial(s, m, term.point);
        t.add(m, c * static_cast<double>(multinomial(s, m)));
    }
    return t;
}

double verify(const Polynomial& t, const Decomposition& d)
{
    if (!(t.shape == d.shape))
        throw Error("verify: shape mismatch");
    Polynomial e = expand(t.shape, d.terms);
    double diff = 0.0;
    for (const auto& m : enumerate_monomials(t.shape, t.shape.degrees))
        diff += std::norm(t.coef(m) - e.coef(m));
    for (const auto& [m, c] : t.terms)
        if (!within(t.shape, m))
            diff += std::norm(c);
    double n = t.norm();
    return std::sqrt(diff) / (n > 0.0 ? n : 1.0);
}

int rank_lower_bound(const Polynomial& t, double tol)
{
    const Shape& s = t.shape;
    MomentFunctional lambda = build_moment_functional(t);
    int best = 0;
    std::vector<int> split(s.k(), 0);
    while (true) {
        std::vector<int> rest(s.k());
        for (int g = 0; g < s.k(); ++g)
            rest[g] = s.degrees[g] - split[g];
        auto rows = enumerate_monomials(s, split);
        auto cols = enumerate_monomials(s, rest);
        Eigen::MatrixXcd h(rows.size(), cols.size());
        for (size_t i = 0; i < rows.size(); ++i)
            for (size_t j = 0; j < cols.size(); ++j)
                h(i, j) = lambda.at(monomial_mul(rows[i], cols[j])).c;
        best = std::max(best, numerical_rank(h, tol));
        int g = s.k() - 1;
        while (g >= 0 && split[g] == s.degrees[g]) {
            split[g] = 0;
            --g;
        }
        if (g < 0)
            break;
        ++split[g];
    }
    return best;
}

int rank_upper_bound(std::array<int, 3> dims)
{
    std::sort(dims.begin(), dims.end());
    if (dims[0] < 1)
        throw Error("rank_upper_bound: dimensions must be positive");
    return dims[0] + dims[1] * (dims[2] / 2);
}

int expected_rank(const Shape& s)
{
    std::uint64_t denom = 1;
    for (int n : s.dims)
        denom += static_cast<std::uint64_t>(n);
    std::uint64_t amb = s.ambient();
    return static_cast<int>((amb + denom - 1) / denom);
}

int kruskal_bound(const Shape& s)
{
    if (s.k() < 3)
        return 0;
    int sum = 0;
    for (int n : s.dims)
        sum += n + 1;
    return std::max(0, sum / 2 - 1);
}

static int default_upper(const Shape& s, bool* atkinson)
{
    *atkinson = false;
    int amb_half = static_cast<int>(std::min<std::uint64_t>((s.ambient() + 1) / 2, 1u << 30));
    if (s.k() == 3 && s.multilinear()) {
        *atkinson = true;
        return rank_upper_bound({s.dims[0] + 1, s.dims[1] + 1, s.dims[2] + 1});
    }
    return amb_half;
}

RankBounds rank_bounds(const Polynomial& t, double tol)
{
    RankBounds b;
    b.lower = rank_lower_bound(t, tol);
    b.upper = default_upper(t.shape, &b.upper_atkinson);
    b.expected = expected_rank(t.shape);
    b.kruskal = kruskal_bound(t.shape);
    return b;
}

// ---- multilinear arrays -------------------------------------------------

namespace {

std::vector<int> full_dims(const Shape& s)
{
    std::vector<int> d;
    for (int n : s.dims)
        d.push_back(n + 1);
    return d;
}

std::size_t volume(const std::vector<int>& d)
{
    std::size_t v = 1;
    for (int x : d)
        v *= static_cast<std::size_t>(x);
    return v;
}

void require_multilinear(const Shape& s, const char* what)
{
    if (!s.multilinear())
        throw Error(std::string(what) + ": tensor must be multilinear");
}

Eigen::MatrixXcd unfold(const std::vector<cplx>& a, const std::vector<int>& d, int mode)
{
    std::size_t vol = volume(d);
    Eigen::MatrixXcd m(d[mode], static_cast<Eigen::Index>(vol / d[mode]));
    std::vector<int> idx(d.size(), 0);
    for (std::size_t lin = 0; lin < vol; ++lin) {
        std::size_t col = 0, stride = 1;
        for (size_t g = 0; g < d.size(); ++g) {
            if (static_cast<int>(g) == mode)
                continue;
            col += idx[g] * stride;
            stride *= d[g];
        }
        m(idx[mode], static_cast<Eigen::Index>(col)) = a[lin];
        for (size_t g = 0; g < d.size(); ++g) {
            if (++idx[g] < d[g])
                break;
            idx[g] = 0;
        }
    }
    return m;
}

// a x_mode m, with m of size new x d[mode]
std::vector<cplx> mode_product(const std::vector<cplx>& a, std::vector<int>& d, int mode,
                               const Eigen::MatrixXcd& m)
{
    std::vector<int> nd = d;
    nd[mode] = static_cast<int>(m.rows());
    std::vector<cplx> out(volume(nd), 0.0);
    std::size_t inner = 1;
    for (int g = 0; g < mode; ++g)
        inner *= d[g];
    std::size_t outer = volume(d) / (inner * d[mode]);
    for (std::size_t o = 0; o < outer; ++o)
        for (int i = 0; i < nd[mode]; ++i)
            for (int j = 0; j < d[mode]; ++j) {
                cplx c = m(i, j);
                if (c == cplx(0.0))
                    continue;
                const cplx* src = &a[(o * d[mode] + j) * inner];
                cplx* dst = &out[(o * nd[mode] + i) * inner];
                for (std::size_t t = 0; t < inner; ++t)
                    dst[t] += c * src[t];
            }
    d = nd;
    return out;
}

double array_norm(const std::vector<cplx>& a)
{
    double s = 0.0;
    for (cplx c : a)
        s += std::norm(c);
    return std::sqrt(s);
}

Eigen::MatrixXcd leading_left(const Eigen::MatrixXcd& m, int t)
{
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(t);
}

}  // namespace

std::vector<cplx> to_array(const Polynomial& t)
{
    require_multilinear(t.shape, "to_array");
    const Shape& s = t.shape;
    auto d = full_dims(s);
    std::vector<cplx> a(volume(d), 0.0);
    for (const auto& [m, c] : t.terms) {
        if (!within(s, m))
            throw Error("to_array: degree overflow");
        std::size_t lin = 0, stride = 1;
        for (int g = 0; g < s.k(); ++g) {
            int j = 0;
            for (int l = 0; l < s.dims[g]; ++l)
                if (m.e[s.offset(g) + l])
                    j = l + 1;
            lin += j * stride;
            stride *= d[g];
        }
        a[lin] = c;
    }
    return a;
}

Polynomial from_array(const Shape& s, const std::vector<cplx>& a)
{
    require_multilinear(s, "from_array");
    auto d = full_dims(s);
    if (a.size() != volume(d))
        throw Error("from_array: size mismatch");
    Polynomial t(s);
    std::vector<int> idx(d.size(), 0);
    for (std::size_t lin = 0; lin < a.size(); ++lin) {
        Monomial m = one(s);
        for (int g = 0; g < s.k(); ++g)
            if (idx[g] > 0)
                m.e[s.offset(g) + idx[g] - 1] = 1;
        t.add(m, a[lin]);
        for (size_t g = 0; g < d.size(); ++g) {
            if (++idx[g] < d[g])
                break;
            idx[g] = 0;
        }
    }
    return t;
}

std::vector<int> multilinear_rank(const Polynomial& t, double tol)
{
    auto a = to_array(t);
    auto d = full_dims(t.shape);
    std::vector<int> out;
    for (int g = 0; g < t.shape.k(); ++g)
        out.push_back(numerical_rank(unfold(a, d, g), tol));
    return out;
}

Tucker hosvd_reduce(const Polynomial& t, std::vector<int> target, int max_iter)
{
    const Shape& s = t.shape;
    require_multilinear(s, "hosvd_reduce");
    if (static_cast<int>(target.size()) != s.k())
        throw Error("hosvd_reduce: one target per mode expected");
    auto a = to_array(t);
    auto d = full_dims(s);
    for (int g = 0; g < s.k(); ++g) {
        if (target[g] < 1 || target[g] > d[g])
            throw Error("hosvd_reduce: target out of range");
        // a core mode needs the homogenizing coordinate plus one affine variable
        target[g] = std::max(target[g], 2);
    }
    Tucker out;
    for (int g = 0; g < s.k(); ++g)
        out.factors.push_back(leading_left(unfold(a, d, g), target[g]));
    for (int it = 0; it < max_iter; ++it)
        for (int g = 0; g < s.k(); ++g) {
            auto y = a;
            auto dy = d;
            for (int h = 0; h < s.k(); ++h)
                if (h != g)
                    y = mode_product(y, dy, h, out.factors[h].adjoint());
            out.factors[g] = leading_left(unfold(y, dy, g), target[g]);
        }
    auto core = a;
    auto dc = d;
    for (int g = 0; g < s.k(); ++g)
        core = mode_product(core, dc, g, out.factors[g].adjoint());
    auto back = core;
    auto db = dc;
    for (int g = 0; g < s.k(); ++g)
        back = mode_product(back, db, g, out.factors[g]);
    double diff = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        diff += std::norm(a[i] - back[i]);
    double n = array_norm(a);
    out.error = std::sqrt(diff) / (n > 0.0 ? n : 1.0);
    std::vector<int> cd;
    for (int x : target)
        cd.push_back(x - 1);
    out.core = from_array(Shape(cd, std::vector<int>(s.k(), 1)), core);
    return out;
}

namespace {

// Lift homogeneous vector u (entry 0 the homogenizing one) to an affine
// point; returns the scale s so that u = s (1, z).
cplx dehomogenize(const Eigen::VectorXcd& u, std::vector<cplx>& z)
{
    cplx s = u(0);
    if (std::abs(s) <= 1e-12 * u.norm())
        throw Error("term is not affine after the change of basis");
    z.resize(u.size() - 1);
    for (Eigen::Index i = 1; i < u.size(); ++i)
        z[i - 1] = u(i) / s;
    return s;
}

Eigen::VectorXcd homogeneous(const std::vector<cplx>& z)
{
    Eigen::VectorXcd u(z.size() + 1);
    u(0) = 1.0;
    for (size_t i = 0; i < z.size(); ++i)
        u(i + 1) = z[i];
    return u;
}

}  // namespace

Decomposition map_back(const Decomposition& core_dec, const std::vector<Eigen::MatrixXcd>& factors,
                       const Polynomial& original)
{
    const Shape& s = original.shape;
    require_multilinear(s, "map_back");
    if (static_cast<int>(factors.size()) != s.k())
        throw Error("map_back: one factor per mode expected");
    Decomposition out;
    out.shape = s;
    for (const auto& term : core_dec.terms) {
        Term lifted{term.weight, Point{}};
        lifted.point.coords.resize(s.k());
        for (int g = 0; g < s.k(); ++g) {
            Eigen::VectorXcd u = factors[g] * homogeneous(term.point.coords[g]);
            cplx sc = dehomogenize(u, lifted.point.coords[g]);
            lifted.weight *= sc;
        }
        out.terms.push_back(std::move(lifted));
    }
    out.residual = verify(original, out);
    return out;
}

Polynomial change_coordinates(const Polynomial& t, const std::vector<Eigen::MatrixXcd>& a)
{
    const Shape& s = t.shape;
    if (static_cast<int>(a.size()) != s.k())
        throw Error("change_coordinates: one matrix per group expected");
    using HomPoly = std::map<std::vector<int>, cplx>;
    Polynomial out(s);
    for (const auto& [m, c] : t.terms) {
        // expand group by group, then combine
        std::vector<HomPoly> parts;
        for (int g = 0; g < s.k(); ++g) {
            const int n = s.dims[g];
            std::vector<int> factors;
            int deg = m.group_degree(s, g);
            for (int r = 0; r < s.degrees[g] - deg; ++r)
                factors.push_back(0);
            for (int l = 0; l < n; ++l)
                for (int r = 0; r < m.e[s.offset(g) + l]; ++r)
                    factors.push_back(l + 1);
            HomPoly p{{std::vector<int>(n + 1, 0), 1.0}};
            for (int f : factors) {
                HomPoly q;
                for (const auto& [e, v] : p)
                    for (int j = 0; j <= n; ++j) {
                        cplx w = a[g](f, j);
                        if (w == cplx(0.0))
                            continue;
                        auto e2 = e;
                        ++e2[j];
                        q[e2] += v * w;
                    }
                p = std::move(q);
            }
            parts.push_back(std::move(p));
        }
        std::vector<std::pair<Monomial, cplx>> acc{{one(s), c}};
        for (int g = 0; g < s.k(); ++g) {
            std::vector<std::pair<Monomial, cplx>> next;
            for (const auto& [mon, v] : acc)
                for (const auto& [e, w] : parts[g]) {
                    Monomial m2 = mon;
                    for (int l = 0; l < s.dims[g]; ++l)
                        m2.e[s.offset(g) + l] = e[l + 1];
                    next.emplace_back(m2, v * w);
                }
            acc = std::move(next);
        }
        for (const auto& [mon, v] : acc)
            out.add(mon, v);
    }
    // drop round-off noise
    double n = out.norm();
    for (auto it = out.terms.begin(); it != out.terms.end();)
        it = std::abs(it->second) <= 1e-15 * n ? out.terms.erase(it) : std::next(it);
    return out;
}

std::vector<Term> undo_change(const Shape& s, const std::vector<Term>& terms,
                              const std::vector<Eigen::MatrixXcd>& a)
{
    // T(Ay) = sum w ((A^t z) . y)^d, so z = A^{-t} z'
    std::vector<Eigen::MatrixXcd> inv;
    for (const auto& m : a)
        inv.push_back(m.transpose().fullPivLu().inverse());
    std::vector<Term> out;
    for (const auto& term : terms) {
        Term t{term.weight, Point{}};
        t.point.coords.resize(s.k());
        for (int g = 0; g < s.k(); ++g) {
            Eigen::VectorXcd u = inv[g] * homogeneous(term.point.coords[g]);
            cplx sc = dehomogenize(u, t.point.coords[g]);
            t.weight *= std::pow(sc, s.degrees[g]);
        }
        out.push_back(std::move(t));
    }
    return out;
}

// ---- rank loop -----------------------------------------------------------

namespace {

enum class Failure { None, NoBlock, Inconsistent, NotFlat, Deficient, NonSimple, Numeric, Residual };

struct Attempt {
    Failure why = Failure::None;
    std::string detail;
    Decomposition dec;
};

std::vector<Eigen::MatrixXcd> random_change(const Shape& s, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss;
    std::vector<Eigen::MatrixXcd> out;
    for (int g = 0; g < s.k(); ++g) {
        int n = s.dims[g] + 1;
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m(i, j) = gauss(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
        Eigen::MatrixXd q = qr.householderQ();
        out.push_back(q.cast<cplx>());
    }
    return out;
}

Attempt run_pipeline(const Polynomial& t, const MomentFunctional& lambda, const BasisPair& bases,
                     const DecomposeOptions& opt, std::uint64_t seed)
{
    const Shape& s = t.shape;
    Attempt at;
    ExtensionResult ext;
    // noise at the level of the accepted residual must not read as inconsistency
    const double noise = std::max(opt.tol_rank, opt.tol_resid);
    ExtensionOptions eo;
    eo.tol_consistency = std::max(eo.tol_consistency, opt.tol_resid);
    try {
        ext = propagate_commutation(lambda, bases.cols, bases.rows, eo);
    } catch (const Error& e) {
        at.why = Failure::Numeric;
        at.detail = e.what();
        return at;
    }
    if (ext.status == ExtensionStatus::Inconsistent) {
        at.why = Failure::Inconsistent;
        std::ostringstream os;
        os << "commutation system inconsistent (residual " << ext.system_residual << ")";
        at.detail = os.str();
        return at;
    }
    if (ext.matrices.empty()) {
        at.why = Failure::Deficient;
        at.detail = "no multiplication matrix determined";
        return at;
    }
    if (ext.status == ExtensionStatus::Extended &&
        !flat_extension_check(ext.functional, bases.cols, bases.rows, noise)) {
        at.why = Failure::NotFlat;
        at.detail = "extension is not flat";
        return at;
    }
    MultiplicationFamily fam{s, bases.cols, ext.matrices};
    RootSet roots = joint_eigenvectors(fam, seed);
    if (!roots.simple) {
        at.why = Failure::NonSimple;
        at.detail = "joint eigenvalues are not simple";
        return at;
    }
    roots = read_coordinates(roots, fam);
    try {
        auto missing = missing_variables(s, roots);
        WeightFit fit = solve_weights(t, roots.points);
        if (!missing.empty()) {
            roots = recover_missing_coordinates(lambda, roots, fit.weights, missing);
            fit = solve_weights(t, roots.points);
        }
        at.dec.shape = s;
        double big = 0.0;
        for (cplx w : fit.weights)
            big = std::max(big, std::abs(w));
        for (size_t i = 0; i < fit.weights.size(); ++i) {
            if (std::abs(fit.weights[i]) <= 1e-10 * big) {
                at.why = Failure::Numeric;
                at.detail = "vanishing weight";
                return at;
            }
            at.dec.terms.push_back({fit.weights[i], roots.points[i]});
        }
    } catch (const Error& e) {
        at.why = Failure::Numeric;
        at.detail = e.what();
        return at;
    }
    at.dec.residual = verify(t, at.dec);
    if (at.dec.residual > opt.tol_resid) {
        at.why = Failure::Residual;
        std::ostringstream os;
        os << "residual " << at.dec.residual;
        at.detail = os.str();
    }
    return at;
}

std::string basis_string(const Shape& s, const MonomialBasis& b)
{
    std::string out = "{";
    for (int i = 0; i < b.size(); ++i)
        out += (i ? "," : "") + to_string(s, b.mons[i]);
    return out + "}";
}

}  // namespace

static DecomposeReport decompose_impl(const Polynomial& t, const DecomposeOptions& opt);

static DecomposeReport decompose_direct(const Polynomial& t, const DecomposeOptions& opt)
{
    const Shape& s = t.shape;
    auto log = [&](const std::string& msg) {
        if (opt.log)
            opt.log(msg);
    };
    DecomposeReport rep;
    rep.bounds = rank_bounds(t, opt.tol_rank);
    rep.max_rank = opt.max_rank > 0 ? opt.max_rank : std::min({rep.bounds.upper, 30});
    if (opt.max_rank <= 0) {
        int half = static_cast<int>(std::min<std::uint64_t>((s.ambient() + 1) / 2, 30));
        rep.max_rank = std::min(rep.max_rank, half);
    }
    rep.max_rank = std::max(rep.max_rank, 1);
    std::string last;
    int start = rep.bounds.lower;
    if (opt.tol_resid > opt.tol_rank)
        start = std::min(start, rank_lower_bound(t, opt.tol_resid));
    for (int r = std::max(start, 1); r <= rep.max_rank; ++r) {
        std::mt19937_64 change_rng(opt.seed * 1000003ULL + static_cast<std::uint64_t>(r));
        for (int attempt = 0; attempt <= opt.max_coordinate_changes; ++attempt) {
            Polynomial work = t;
            std::vector<Eigen::MatrixXcd> change;
            if (attempt > 0) {
                change = random_change(s, change_rng);
                work = change_coordinates(t, change);
            }
            MomentFunctional lambda = build_moment_functional(work);
            auto cands = candidate_bases(lambda, r, SelectOptions{opt.tol_rank, 1e10});
            log("r=" + std::to_string(r) + " attempt=" + std::to_string(attempt) + ": " +
                std::to_string(cands.size()) + " candidate bases");
            bool degenerate = cands.empty();
            if (cands.empty())
                last = "r=" + std::to_string(r) + ": no invertible known Hankel block";
            std::uint64_t eig_seed = opt.seed + 7919ULL * static_cast<std::uint64_t>(r) +
                                     104729ULL * static_cast<std::uint64_t>(attempt);
            for (const auto& c : cands) {
                Attempt at = run_pipeline(work, lambda, c, opt, eig_seed);
                std::ostringstream os;
                os << "r=" << r << " B=" << basis_string(s, c.cols)
                   << " B'=" << basis_string(s, c.rows) << ": ";
                if (!at.dec.terms.empty()) {
                    if (rep.best_residual < 0 || at.dec.residual < rep.best_residual)
                        rep.best_residual = at.dec.residual;
                }
                if (at.why == Failure::None) {
                    os << "accepted, residual " << at.dec.residual;
                    log(os.str());
                    Decomposition d = at.dec;
                    if (attempt > 0) {
                        d.terms = undo_change(s, d.terms, change);
                        d.coordinate_change = true;
                        d.change = change;
                        d.residual = verify(t, d);
                        if (d.residual > opt.tol_resid) {
                            last = "residual after undoing the coordinate change too large";
                            log(last);
                            continue;
                        }
                    }
                    rep.ok = true;
                    rep.dec = std::move(d);
                    return rep;
                }
                os << at.detail;
                log(os.str());
                last = os.str();
                if (at.why != Failure::Inconsistent && at.why != Failure::NotFlat &&
                    at.why != Failure::Residual)
                    degenerate = true;
            }
            if (!degenerate)
                break;
        }
    }
    rep.diagnostics = "no decomposition up to rank " + std::to_string(rep.max_rank);
    if (!last.empty())
        rep.diagnostics += "; last: " + last;
    return rep;
}

namespace {

bool less_cplx(cplx a, cplx b)
{
    if (a.real() != b.real())
        return a.real() < b.real();
    return a.imag() < b.imag();
}

bool term_less(const Term& x, const Term& y)
{
    for (size_t g = 0; g < x.point.coords.size(); ++g)
        for (size_t l = 0; l < x.point.coords[g].size(); ++l) {
            cplx a = x.point.coords[g][l], b = y.point.coords[g][l];
            if (a != b)
                return less_cplx(a, b);
        }
    return less_cplx(x.weight, y.weight);
}

// Drops roundoff imaginary parts for real tensors and sorts the terms.
void finish(const Polynomial& t, Decomposition& d, double tol_resid)
{
    bool real = true;
    for (const auto& [m, c] : t.terms)
        real = real && c.imag() == 0.0;
    if (real) {
        Decomposition r = d;
        auto strip = [](cplx& c) {
            if (std::abs(c.imag()) <= 1e-10 * std::max(1.0, std::abs(c.real())))
                c = cplx(c.real(), 0.0);
        };
        for (auto& term : r.terms) {
            strip(term.weight);
            for (auto& g : term.point.coords)
                for (cplx& c : g)
                    strip(c);
        }
        r.residual = verify(t, r);
        if (r.residual <= std::max(tol_resid, d.residual))
            d = std::move(r);
    }
    std::sort(d.terms.begin(), d.terms.end(), term_less);
}

}  // namespace

DecomposeReport decompose(const Polynomial& t, const DecomposeOptions& opt)
{
    DecomposeReport rep = decompose_impl(t, opt);
    if (rep.ok)
        finish(t, rep.dec, opt.tol_resid);
    return rep;
}

static DecomposeReport decompose_impl(const Polynomial& t, const DecomposeOptions& opt)
{
    if (!t.within_degree())
        throw Error("decompose: tensor has terms beyond the degree bounds");
    if (t.terms.empty() || t.norm() == 0.0)
        throw Error("zero tensor");
    if (!opt.reduce)
        return decompose_direct(t, opt);

    const Shape& s = t.shape;
    require_multilinear(s, "reduce");
    // singular values below the residual tolerance count as noise
    auto ranks = multilinear_rank(t, std::max(opt.tol_rank, opt.tol_resid));
    Tucker tk = hosvd_reduce(t, ranks);
    if (opt.log) {
        std::ostringstream os;
        os << "reduced to core";
        for (int d : tk.core.shape.dims)
            os << " " << d + 1;
        os << ", error " << tk.error;
        opt.log(os.str());
    }
    DecomposeOptions sub = opt;
    sub.reduce = false;
    sub.max_rank = opt.max_rank;
    DecomposeReport core = decompose_direct(tk.core, sub);
    DecomposeReport rep = core;
    rep.reduced = true;
    for (int d : tk.core.shape.dims)
        rep.reduced_dims.push_back(d + 1);
    rep.bounds = rank_bounds(t, std::max(opt.tol_rank, opt.tol_resid));
    if (!core.ok)
        return rep;
    try {
        rep.dec = map_back(core.dec, tk.factors, t);
    } catch (const Error& e) {
        rep.ok = false;
        rep.diagnostics = e.what();
        return rep;
    }
    rep.dec.coordinate_change = core.dec.coordinate_change;
    if (rep.dec.residual > opt.tol_resid) {
        rep.ok = false;
        std::ostringstream os;
        os << "lifted residual " << rep.dec.residual << " exceeds tolerance";
        rep.diagnostics = os.str();
    }
    return rep;
}

}  // namespace tdec
