#include "tdec/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tdec {

Shape::Shape(std::vector<int> d, std::vector<int> deg) : dims(std::move(d)), degrees(std::move(deg))
{
    if (dims.empty() || dims.size() != degrees.size())
        throw Error("shape: dims and degrees must be non-empty and of equal length");
    for (size_t i = 0; i < dims.size(); ++i)
        if (dims[i] < 1 || degrees[i] < 1)
            throw Error("shape: dimensions and degrees must be positive");
}

int Shape::nvars() const { return std::accumulate(dims.begin(), dims.end(), 0); }

int Shape::offset(int group) const
{
    return std::accumulate(dims.begin(), dims.begin() + group, 0);
}

int Shape::group_of(int var) const
{
    for (int g = 0; g < k(); ++g) {
        if (var < dims[g])
            return g;
        var -= dims[g];
    }
    throw Error("variable index out of range");
}

bool Shape::multilinear() const
{
    return std::all_of(degrees.begin(), degrees.end(), [](int d) { return d == 1; });
}

static std::uint64_t binom(int n, int r)
{
    if (r < 0 || r > n)
        return 0;
    r = std::min(r, n - r);
    unsigned __int128 acc = 1;
    for (int i = 1; i <= r; ++i) {
        acc = acc * static_cast<unsigned>(n - r + i) / static_cast<unsigned>(i);
        if (acc > std::numeric_limits<std::uint64_t>::max())
            throw Error("binomial coefficient overflows 64 bits");
    }
    return static_cast<std::uint64_t>(acc);
}

static std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t out;
    if (__builtin_mul_overflow(a, b, &out))
        throw Error("multinomial coefficient overflows 64 bits");
    return out;
}

std::uint64_t Shape::ambient() const
{
    std::uint64_t n = 1;
    for (int i = 0; i < k(); ++i)
        n = checked_mul(n, binom(dims[i] + degrees[i], degrees[i]));
    return n;
}

std::string Shape::var_name(int var) const
{
    int g = group_of(var);
    int l = var - offset(g) + 1;
    if (k() <= 26)
        return std::string(1, static_cast<char>('a' + g)) + std::to_string(l);
    return "x" + std::to_string(g + 1) + "_" + std::to_string(l);
}

int Monomial::degree() const { return std::accumulate(e.begin(), e.end(), 0); }

int Monomial::group_degree(const Shape& s, int group) const
{
    int o = s.offset(group);
    return std::accumulate(e.begin() + o, e.begin() + o + s.dims[group], 0);
}

bool Monomial::is_one() const
{
    return std::all_of(e.begin(), e.end(), [](int x) { return x == 0; });
}

bool Monomial::operator<(const Monomial& o) const
{
    int da = degree(), db = o.degree();
    if (da != db)
        return da < db;
    // same degree: larger leading exponent sorts first, so a1 < a2 < ... in the listing
    for (size_t i = 0; i < e.size() && i < o.e.size(); ++i)
        if (e[i] != o.e[i])
            return e[i] > o.e[i];
    return e.size() < o.e.size();
}

Monomial one(const Shape& s) { return Monomial(std::vector<int>(s.nvars(), 0)); }

Monomial variable(const Shape& s, int var)
{
    Monomial m = one(s);
    m.e.at(var) = 1;
    return m;
}

Monomial from_groups(const Shape& s, const std::vector<std::vector<int>>& exps)
{
    if (static_cast<int>(exps.size()) != s.k())
        throw Error("monomial: expected " + std::to_string(s.k()) + " exponent lists");
    Monomial m;
    for (int g = 0; g < s.k(); ++g) {
        if (static_cast<int>(exps[g].size()) != s.dims[g])
            throw Error("monomial: exponent list " + std::to_string(g) + " has wrong length");
        for (int x : exps[g]) {
            if (x < 0)
                throw Error("monomial: negative exponent");
            m.e.push_back(x);
        }
    }
    return m;
}

std::vector<std::vector<int>> to_groups(const Shape& s, const Monomial& m)
{
    std::vector<std::vector<int>> out(s.k());
    for (int g = 0; g < s.k(); ++g) {
        int o = s.offset(g);
        out[g].assign(m.e.begin() + o, m.e.begin() + o + s.dims[g]);
    }
    return out;
}

Monomial monomial_mul(const Monomial& a, const Monomial& b)
{
    if (a.e.size() != b.e.size())
        throw Error("monomial_mul: shape mismatch");
    Monomial m = a;
    for (size_t i = 0; i < m.e.size(); ++i)
        m.e[i] += b.e[i];
    return m;
}

bool within(const Shape& s, const Monomial& m)
{
    for (int g = 0; g < s.k(); ++g)
        if (m.group_degree(s, g) > s.degrees[g])
            return false;
    return true;
}

std::string to_string(const Shape& s, const Monomial& m)
{
    std::string out;
    for (int v = 0; v < s.nvars(); ++v) {
        if (m.e[v] == 0)
            continue;
        if (!out.empty())
            out += "*";
        out += s.var_name(v);
        if (m.e[v] > 1)
            out += "^" + std::to_string(m.e[v]);
    }
    return out.empty() ? "1" : out;
}

std::uint64_t multinomial(int delta, const int* alpha, int n)
{
    std::uint64_t c = 1;
    int rest = delta;
    for (int j = 0; j < n; ++j) {
        if (alpha[j] > rest)
            throw Error("multinomial: exponent exceeds degree");
        c = checked_mul(c, binom(rest, alpha[j]));
        rest -= alpha[j];
    }
    return c;
}

std::uint64_t multinomial(const Shape& s, const Monomial& m)
{
    std::uint64_t c = 1;
    for (int g = 0; g < s.k(); ++g)
        c = checked_mul(c, multinomial(s.degrees[g], m.e.data() + s.offset(g), s.dims[g]));
    return c;
}

void Polynomial::add(const Monomial& m, cplx c)
{
    if (c == cplx(0.0))
        return;
    auto it = terms.find(m);
    if (it == terms.end()) {
        terms.emplace(m, c);
        return;
    }
    it->second += c;
    if (it->second == cplx(0.0))
        terms.erase(it);
}

cplx Polynomial::coef(const Monomial& m) const
{
    auto it = terms.find(m);
    return it == terms.end() ? cplx(0.0) : it->second;
}

double Polynomial::norm() const
{
    double s = 0;
    for (const auto& [m, c] : terms)
        s += std::norm(c);
    return std::sqrt(s);
}

bool Polynomial::within_degree() const
{
    return std::all_of(terms.begin(), terms.end(),
                       [&](const auto& t) { return within(shape, t.first); });
}

bool Point::complete() const
{
    for (const auto& g : coords)
        for (cplx c : g)
            if (is_missing(c))
                return false;
    return true;
}

Point make_point(const Shape& s)
{
    Point z;
    for (int g = 0; g < s.k(); ++g)
        z.coords.emplace_back(s.dims[g], cplx(std::numeric_limits<double>::quiet_NaN(), 0.0));
    return z;
}

bool is_missing(cplx c) { return std::isnan(c.real()) || std::isnan(c.imag()); }

cplx eval_monomial(const Shape& s, const Monomial& m, const Point& z)
{
    cplx v = 1.0;
    for (int g = 0; g < s.k(); ++g) {
        int o = s.offset(g);
        for (int l = 0; l < s.dims[g]; ++l) {
            int p = m.e[o + l];
            for (int t = 0; t < p; ++t)
                v *= z.coords[g][l];
        }
    }
    return v;
}

cplx evaluate_poly(const Polynomial& p, const Point& z)
{
    cplx v = 0.0;
    for (const auto& [m, c] : p.terms)
        v += c * eval_monomial(p.shape, m, z);
    return v;
}

Affine Affine::param(int id)
{
    Affine a;
    a.lin[id] = 1.0;
    return a;
}

Affine& Affine::operator+=(const Affine& o)
{
    c += o.c;
    for (const auto& [id, v] : o.lin) {
        auto& slot = lin[id];
        slot += v;
        if (slot == cplx(0.0))
            lin.erase(id);
    }
    return *this;
}

Affine& Affine::operator*=(cplx s)
{
    if (s == cplx(0.0)) {
        lin.clear();
        c = 0.0;
        return *this;
    }
    c *= s;
    for (auto& [id, v] : lin)
        v *= s;
    return *this;
}

Affine operator+(Affine a, const Affine& b) { return a += b; }
Affine operator*(cplx s, Affine a) { return a *= s; }

Affine mul(const Affine& a, const Affine& b)
{
    if (!a.known() && !b.known())
        throw Error("product of two unknown moments");
    if (a.known())
        return a.c * b;
    return b.c * a;
}

const Affine* MomentFunctional::find(const Monomial& m) const
{
    auto it = entries.find(m);
    return it == entries.end() ? nullptr : &it->second;
}

const Affine& MomentFunctional::at(const Monomial& m) const
{
    const Affine* a = find(m);
    if (!a)
        throw Error("moment of " + to_string(shape, m) + " is not tracked");
    return *a;
}

int MomentFunctional::next_param() const
{
    int next = 0;
    for (const auto& [m, a] : entries)
        if (!a.lin.empty())
            next = std::max(next, a.lin.rbegin()->first + 1);
    return next;
}

MomentFunctional MomentFunctional::with_parameters(std::vector<Monomial> ms) const
{
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    MomentFunctional out = *this;
    int id = next_param();
    for (const auto& m : ms)
        if (!out.find(m))
            out.entries.emplace(m, Affine::param(id++));
    return out;
}

MomentFunctional star_action(const Polynomial& p, const MomentFunctional& lambda,
                             const std::vector<Monomial>& domain)
{
    MomentFunctional out(lambda.shape);
    for (const auto& q : domain) {
        Affine v;
        for (const auto& [m, c] : p.terms)
            v += c * lambda.at(monomial_mul(m, q));
        out.entries[q] = v;
    }
    return out;
}

MomentFunctional evaluation_functional(const Shape& s, const Point& z,
                                       const std::vector<Monomial>& domain)
{
    MomentFunctional out(s);
    for (const auto& m : domain)
        out.entries[m] = Affine(eval_monomial(s, m, z));
    return out;
}

cplx apolar_pairing(const Polynomial& f, const Polynomial& g)
{
    if (!(f.shape == g.shape))
        throw Error("apolar_pairing: shape mismatch");
    cplx acc = 0.0;
    for (const auto& [m, c] : f.terms) {
        if (!within(f.shape, m))
            throw Error("apolar_pairing: degree overflow in " + to_string(f.shape, m));
        auto it = g.terms.find(m);
        if (it == g.terms.end())
            continue;
        acc += c * it->second * static_cast<double>(multinomial(f.shape, m));
    }
    for (const auto& [m, c] : g.terms)
        if (!within(g.shape, m))
            throw Error("apolar_pairing: degree overflow in " + to_string(g.shape, m));
    return acc;
}

}  // namespace tdec
