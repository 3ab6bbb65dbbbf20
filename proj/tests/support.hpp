#ifndef TDEC_TESTS_SUPPORT_HPP
#define TDEC_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tdec/decompose.hpp"
#include "tdec/eigen.hpp"
#include "tdec/extension.hpp"
#include "tdec/io.hpp"
#include "tdec/moment.hpp"

namespace tdec::test {

inline std::string data_path(const std::string& name)
{
    return std::string(TDEC_TEST_DATA) + "/" + name;
}

inline TensorFile load_tensor(const std::string& name)
{
    return parse_tensor_file(read_file(data_path(name)));
}

inline DecompositionFile load_decomposition(const std::string& name)
{
    return parse_decomposition_file(read_file(data_path(name)));
}

// Binomial by Pascal's rule; independent of the library's multinomial.
inline std::uint64_t pascal(int n, int k)
{
    std::vector<std::vector<std::uint64_t>> c(n + 1, std::vector<std::uint64_t>(n + 1, 0));
    for (int i = 0; i <= n; ++i) {
        c[i][0] = 1;
        for (int j = 1; j <= i; ++j)
            c[i][j] = c[i - 1][j - 1] + (j <= i - 1 ? c[i - 1][j] : 0);
    }
    return (k < 0 || k > n) ? 0 : c[n][k];
}

// delta! / (alpha! (delta-|alpha|)!) as a product of binomials.
inline std::uint64_t multinomial_oracle(int delta, const std::vector<int>& alpha)
{
    std::uint64_t out = 1;
    int left = delta;
    for (int a : alpha) {
        out *= pascal(left, a);
        left -= a;
    }
    return out;
}

using Dense = std::map<std::vector<int>, cplx>;

inline Dense dense_mul(const Dense& x, const Dense& y)
{
    Dense out;
    for (const auto& [ex, cx] : x)
        for (const auto& [ey, cy] : y) {
            std::vector<int> e(ex.size());
            for (size_t i = 0; i < e.size(); ++i)
                e[i] = ex[i] + ey[i];
            out[e] += cx * cy;
        }
    return out;
}

// Brute-force expansion of sum_i w_i prod_g (1 + z_g . x_g)^delta_g by
// repeated multiplication of linear forms.
inline Polynomial brute_expand(const Shape& s, const std::vector<Term>& terms)
{
    const int nv = s.nvars();
    Dense total;
    for (const auto& t : terms) {
        Dense acc{{std::vector<int>(nv, 0), t.weight}};
        for (int g = 0; g < s.k(); ++g) {
            Dense lin{{std::vector<int>(nv, 0), 1.0}};
            for (int l = 0; l < s.dims[g]; ++l) {
                std::vector<int> e(nv, 0);
                e[s.offset(g) + l] = 1;
                lin[e] += t.point.coords[g][l];
            }
            for (int d = 0; d < s.degrees[g]; ++d)
                acc = dense_mul(acc, lin);
        }
        for (const auto& [e, c] : acc)
            total[e] += c;
    }
    Polynomial p(s);
    for (const auto& [e, c] : total)
        p.add(Monomial(e), c);
    return p;
}

inline double coef_distance(const Polynomial& a, const Polynomial& b)
{
    double worst = 0.0;
    for (const auto& [m, c] : a.terms)
        worst = std::max(worst, std::abs(c - b.coef(m)));
    for (const auto& [m, c] : b.terms)
        worst = std::max(worst, std::abs(c - a.coef(m)));
    return worst;
}

inline Point random_point(const Shape& s, std::mt19937_64& rng, bool complex = false)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Point p;
    for (int g = 0; g < s.k(); ++g) {
        std::vector<cplx> z;
        for (int l = 0; l < s.dims[g]; ++l)
            z.emplace_back(u(rng), complex ? u(rng) : 0.0);
        p.coords.push_back(z);
    }
    return p;
}

inline std::vector<Term> random_terms(const Shape& s, int r, std::mt19937_64& rng, bool complex = false)
{
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::bernoulli_distribution sign(0.5);
    std::vector<Term> out;
    for (int i = 0; i < r; ++i) {
        double w = u(rng) * (sign(rng) ? 1.0 : -1.0);
        out.push_back({cplx(w, 0.0), random_point(s, rng, complex)});
    }
    return out;
}

// sum_i w_i 1_{z_i} on the given monomials.
inline MomentFunctional functional_of(const Shape& s, const std::vector<Term>& terms,
                                      const std::vector<Monomial>& domain)
{
    MomentFunctional f(s);
    for (const auto& m : domain) {
        cplx v = 0.0;
        for (const auto& t : terms)
            v += t.weight * eval_monomial(s, m, t.point);
        f.entries.emplace(m, Affine(v));
    }
    return f;
}

inline double point_distance(const Point& a, const Point& b)
{
    double worst = 0.0;
    for (size_t g = 0; g < a.coords.size(); ++g)
        for (size_t l = 0; l < a.coords[g].size(); ++l)
            worst = std::max(worst, std::abs(a.coords[g][l] - b.coords[g][l]));
    return worst;
}

// Largest mismatch after pairing each expected term with its closest found term;
// infinity when the sizes differ or two expected terms claim the same found one.
inline double match_terms(const std::vector<Term>& found, const std::vector<Term>& expected,
                          double* weight_err = nullptr)
{
    if (found.size() != expected.size())
        return INFINITY;
    std::vector<bool> used(found.size(), false);
    double worst = 0.0, wworst = 0.0;
    for (const auto& e : expected) {
        int best = -1;
        double bd = INFINITY;
        for (size_t i = 0; i < found.size(); ++i) {
            if (used[i])
                continue;
            double d = point_distance(found[i].point, e.point);
            if (d < bd) {
                bd = d;
                best = static_cast<int>(i);
            }
        }
        if (best < 0)
            return INFINITY;
        used[best] = true;
        worst = std::max(worst, bd);
        wworst = std::max(wworst, std::abs(found[best].weight - e.weight));
    }
    if (weight_err)
        *weight_err = wworst;
    return worst;
}

inline MonomialBasis basis_of(const Shape& s, const std::vector<std::string>& names)
{
    MonomialBasis b;
    for (const auto& n : names) {
        if (n == "1") {
            b.mons.push_back(one(s));
            continue;
        }
        Monomial m = one(s);
        for (int v = 0; v < s.nvars(); ++v)
            if (s.var_name(v) == n)
                m = variable(s, v);
        b.mons.push_back(m);
    }
    return b;
}

inline int var_index(const Shape& s, const std::string& name)
{
    for (int v = 0; v < s.nvars(); ++v)
        if (s.var_name(v) == name)
            return v;
    return -1;
}

inline std::vector<Monomial> products(const MonomialBasis& x, const MonomialBasis& y)
{
    std::vector<Monomial> out;
    for (const auto& a : x.mons)
        for (const auto& b : y.mons)
            out.push_back(monomial_mul(a, b));
    return out;
}

// sum_i w_i 1_{z_i} on every product of the prolonged bases
inline MomentFunctional complete_functional(const Shape& s, const std::vector<Term>& terms,
                                     const MonomialBasis& b, const MonomialBasis& bp)
{
    return functional_of(s, terms, products(basis_plus(s, bp), basis_plus(s, b)));
}

inline std::vector<Eigen::MatrixXcd> family(const MomentFunctional& lam, const MonomialBasis& b,
                                     const MonomialBasis& bp)
{
    std::vector<Eigen::MatrixXcd> ms;
    for (int v = 0; v < lam.shape.nvars(); ++v)
        ms.push_back(multiplication_matrix(lam, b, bp, v));
    return ms;
}

inline Eigen::MatrixXcd random_orthonormal(int n, int m, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            a(i, j) = g(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
    return q.cast<cplx>();
}

// Tucker tensor: random core of size ranks, random orthonormal factors.
inline Polynomial tucker_tensor(const Shape& s, const std::vector<int>& ranks, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    std::vector<int> full;
    for (int n : s.dims)
        full.push_back(n + 1);
    std::vector<Eigen::MatrixXcd> u;
    for (int i = 0; i < s.k(); ++i)
        u.push_back(random_orthonormal(full[i], ranks[i], rng));
    std::size_t csize = 1, tsize = 1;
    for (int i = 0; i < s.k(); ++i) {
        csize *= ranks[i];
        tsize *= full[i];
    }
    std::vector<double> core(csize);
    for (auto& c : core)
        c = g(rng);
    std::vector<cplx> arr(tsize, 0.0);
    for (std::size_t ti = 0; ti < tsize; ++ti) {
        for (std::size_t ci = 0; ci < csize; ++ci) {
            std::size_t rt = ti, rc = ci;
            cplx v = core[ci];
            for (int i = 0; i < s.k(); ++i) {
                int a = static_cast<int>(rt % full[i]), b = static_cast<int>(rc % ranks[i]);
                rt /= full[i];
                rc /= ranks[i];
                v *= u[i](a, b);
            }
            arr[ti] += v;
        }
    }
    return from_array(s, arr);
}

}  // namespace tdec::test

#endif
