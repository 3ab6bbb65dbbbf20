#include "tdec/moment.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <set>

namespace tdec {

int MonomialBasis::index(const Monomial& m) const
{
    auto it = std::find(mons.begin(), mons.end(), m);
    return it == mons.end() ? -1 : static_cast<int>(it - mons.begin());
}

bool connected_to_one(const MonomialBasis& b)
{
    std::set<Monomial> seen(b.mons.begin(), b.mons.end());
    if (seen.size() != b.mons.size() || b.mons.empty())
        return false;
    bool has_one = false;
    for (const auto& m : b.mons) {
        if (m.is_one()) {
            has_one = true;
            continue;
        }
        bool ok = false;
        for (size_t v = 0; v < m.e.size() && !ok; ++v) {
            if (m.e[v] == 0)
                continue;
            Monomial d = m;
            --d.e[v];
            ok = seen.count(d) > 0;
        }
        if (!ok)
            return false;
    }
    return has_one;
}

MomentFunctional build_moment_functional(const Polynomial& t)
{
    const Shape& s = t.shape;
    MomentFunctional out(s);
    for (const auto& [m, c] : t.terms)
        if (!within(s, m))
            throw Error("build_moment_functional: degree overflow in " + to_string(s, m));
    for (const auto& m : enumerate_monomials(s, s.degrees))
        out.entries.emplace(m, Affine(t.coef(m) / static_cast<double>(multinomial(s, m))));
    return out;
}

Polynomial functional_to_tensor(const MomentFunctional& lambda, const Shape& s)
{
    Polynomial t(s);
    for (const auto& m : enumerate_monomials(s, s.degrees)) {
        const Affine* a = lambda.find(m);
        if (!a)
            continue;
        if (!a->known())
            throw Error("functional_to_tensor: unresolved moment " + to_string(s, m));
        t.add(m, a->c * static_cast<double>(multinomial(s, m)));
    }
    return t;
}

std::vector<Monomial> enumerate_monomials(const Shape& s, const std::vector<int>& bounds)
{
    if (static_cast<int>(bounds.size()) != s.k())
        throw Error("enumerate_monomials: one bound per group expected");
    std::vector<std::vector<int>> partial{{}};
    for (int g = 0; g < s.k(); ++g) {
        // exponent vectors of group g with total degree <= bounds[g]
        std::vector<std::vector<int>> group;
        std::vector<int> cur(s.dims[g], 0);
        std::function<void(int, int)> rec = [&](int pos, int left) {
            if (pos == s.dims[g]) {
                group.push_back(cur);
                return;
            }
            for (int x = 0; x <= left; ++x) {
                cur[pos] = x;
                rec(pos + 1, left - x);
            }
            cur[pos] = 0;
        };
        rec(0, std::max(bounds[g], 0));
        std::vector<std::vector<int>> next;
        for (const auto& p : partial)
            for (const auto& q : group) {
                auto r = p;
                r.insert(r.end(), q.begin(), q.end());
                next.push_back(std::move(r));
            }
        partial = std::move(next);
    }
    std::vector<Monomial> out;
    out.reserve(partial.size());
    for (auto& e : partial)
        out.emplace_back(std::move(e));
    std::sort(out.begin(), out.end());
    return out;
}

MonomialBasis basis_plus(const Shape& s, const MonomialBasis& b)
{
    std::set<Monomial> all(b.mons.begin(), b.mons.end());
    for (const auto& m : b.mons)
        for (int v = 0; v < s.nvars(); ++v)
            all.insert(monomial_mul(m, variable(s, v)));
    return MonomialBasis{std::vector<Monomial>(all.begin(), all.end())};
}

MonomialBasis border(const Shape& s, const MonomialBasis& b)
{
    MonomialBasis out;
    for (const auto& m : basis_plus(s, b).mons)
        if (!b.contains(m))
            out.mons.push_back(m);
    return out;
}

MonomialBasis block_plus(const Shape& s, const MonomialBasis& b)
{
    MonomialBasis out = b;
    for (const auto& m : border(s, b).mons)
        out.mons.push_back(m);
    return out;
}

bool HankelMatrix::known() const
{
    return std::all_of(entries.begin(), entries.end(), [](const Affine& a) { return a.known(); });
}

Eigen::MatrixXcd HankelMatrix::values() const
{
    Eigen::MatrixXcd h(rows.size(), cols.size());
    for (int i = 0; i < rows.size(); ++i)
        for (int j = 0; j < cols.size(); ++j) {
            const Affine& a = (*this)(i, j);
            if (!a.known())
                throw Error("hankel matrix has unresolved parameters");
            h(i, j) = a.c;
        }
    return h;
}

std::vector<int> HankelMatrix::params() const
{
    std::set<int> ids;
    for (const auto& a : entries)
        for (const auto& [id, v] : a.lin)
            ids.insert(id);
    return {ids.begin(), ids.end()};
}

static HankelMatrix build_hankel(const MomentFunctional& lambda, const Monomial& shift,
                                 const MonomialBasis& rows, const MonomialBasis& cols)
{
    std::vector<Monomial> prods;
    prods.reserve(rows.mons.size() * cols.mons.size());
    for (const auto& r : rows.mons)
        for (const auto& c : cols.mons)
            prods.push_back(monomial_mul(shift, monomial_mul(r, c)));
    std::vector<Monomial> missing;
    for (const auto& p : prods)
        if (!lambda.find(p))
            missing.push_back(p);
    const MomentFunctional* src = &lambda;
    MomentFunctional extended;
    if (!missing.empty()) {
        extended = lambda.with_parameters(missing);
        src = &extended;
    }
    HankelMatrix h{rows, cols, {}};
    h.entries.reserve(prods.size());
    for (const auto& p : prods)
        h.entries.push_back(src->at(p));
    return h;
}

HankelMatrix hankel(const MomentFunctional& lambda, const MonomialBasis& rows,
                    const MonomialBasis& cols)
{
    return build_hankel(lambda, one(lambda.shape), rows, cols);
}

HankelMatrix shifted_hankel(const MomentFunctional& lambda, int var, const MonomialBasis& rows,
                            const MonomialBasis& cols)
{
    return build_hankel(lambda, variable(lambda.shape, var), rows, cols);
}

int numerical_rank(const Eigen::MatrixXcd& m, double tol)
{
    if (m.size() == 0)
        return 0;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0)
        return 0;
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * sv(0))
            ++r;
    return r;
}

double condition_number(const Eigen::MatrixXcd& m)
{
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0)
        return 0.0;
    double lo = sv(sv.size() - 1);
    return lo == 0.0 ? std::numeric_limits<double>::infinity() : sv(0) / lo;
}

namespace {

bool connected_to(const Monomial& m, const std::vector<Monomial>& set)
{
    if (m.is_one())
        return true;
    for (size_t v = 0; v < m.e.size(); ++v) {
        if (m.e[v] == 0)
            continue;
        Monomial d = m;
        --d.e[v];
        if (std::find(set.begin(), set.end(), d) != set.end())
            return true;
    }
    return false;
}

Eigen::MatrixXcd known_block(const MomentFunctional& lambda, const std::vector<Monomial>& rows,
                             const std::vector<Monomial>& cols)
{
    Eigen::MatrixXcd k(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j)
            k(i, j) = lambda.at(monomial_mul(rows[i], cols[j])).c;
    return k;
}

// Greedy pick of r connected indices of `cand`, in order, each one raising
// the rank of the selected slice of k.
std::vector<int> greedy(const Eigen::MatrixXcd& k, const std::vector<Monomial>& cand, int r,
                        bool by_cols, double tol)
{
    std::vector<int> picked;
    std::vector<Monomial> mons;
    int rank = 0;
    for (int i = 0; i < static_cast<int>(cand.size()) && rank < r; ++i) {
        if (!connected_to(cand[i], mons))
            continue;
        if (mons.empty() && !cand[i].is_one())
            return {};
        picked.push_back(i);
        Eigen::MatrixXcd sub(by_cols ? k.rows() : picked.size(), by_cols ? picked.size() : k.cols());
        for (size_t t = 0; t < picked.size(); ++t) {
            if (by_cols)
                sub.col(t) = k.col(picked[t]);
            else
                sub.row(t) = k.row(picked[t]);
        }
        int nr = numerical_rank(sub, tol);
        if (nr > rank) {
            rank = nr;
            mons.push_back(cand[i]);
        } else {
            picked.pop_back();
            if (mons.empty())
                return {};
        }
    }
    if (rank < r)
        return {};
    return picked;
}

bool basis_less(const MonomialBasis& a, const MonomialBasis& b)
{
    return std::lexicographical_compare(a.mons.begin(), a.mons.end(), b.mons.begin(), b.mons.end());
}

int shift_score(const MomentFunctional& lambda, const BasisPair& p)
{
    const Shape& s = lambda.shape;
    int score = 0;
    for (int v = 0; v < s.nvars(); ++v) {
        bool all = true;
        for (const auto& r : p.rows.mons)
            for (const auto& c : p.cols.mons)
                all = all && within(s, monomial_mul(variable(s, v), monomial_mul(r, c)));
        score += all ? 1 : 0;
    }
    return score;
}

}  // namespace

std::vector<BasisPair> candidate_bases(const MomentFunctional& lambda, int r, const SelectOptions& opt)
{
    const Shape& s = lambda.shape;
    if (r < 1)
        throw Error("select_bases: rank must be positive");
    std::vector<std::pair<int, BasisPair>> found;
    std::vector<int> split(s.k(), 0);
    while (true) {
        std::vector<int> rest(s.k());
        for (int g = 0; g < s.k(); ++g)
            rest[g] = s.degrees[g] - split[g];
        auto rows = enumerate_monomials(s, split);
        auto cols = enumerate_monomials(s, rest);
        if (static_cast<int>(rows.size()) >= r && static_cast<int>(cols.size()) >= r) {
            Eigen::MatrixXcd k = known_block(lambda, rows, cols);
            auto ci = greedy(k, cols, r, true, opt.tol_rank);
            if (!ci.empty()) {
                BasisPair p;
                Eigen::MatrixXcd kc(k.rows(), r);
                for (int t = 0; t < r; ++t) {
                    p.cols.mons.push_back(cols[ci[t]]);
                    kc.col(t) = k.col(ci[t]);
                }
                bool done = false;
                if (split == rest) {
                    // symmetric split: try B' = B first
                    Eigen::MatrixXcd sq = known_block(lambda, p.cols.mons, p.cols.mons);
                    if (condition_number(sq) <= opt.max_condition) {
                        p.rows = p.cols;
                        done = true;
                    }
                }
                if (!done) {
                    auto ri = greedy(kc, rows, r, false, opt.tol_rank);
                    if (!ri.empty()) {
                        for (int t = 0; t < r; ++t)
                            p.rows.mons.push_back(rows[ri[t]]);
                        done = true;
                    }
                }
                if (done) {
                    Eigen::MatrixXcd h = known_block(lambda, p.rows.mons, p.cols.mons);
                    if (condition_number(h) <= opt.max_condition) {
                        bool dup = std::any_of(found.begin(), found.end(), [&](const auto& f) {
                            return f.second.cols == p.cols && f.second.rows == p.rows;
                        });
                        if (!dup)
                            found.emplace_back(shift_score(lambda, p), std::move(p));
                    }
                }
            }
        }
        int g = s.k() - 1;
        while (g >= 0 && split[g] == s.degrees[g]) {
            split[g] = 0;
            --g;
        }
        if (g < 0)
            break;
        ++split[g];
    }
    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first > b.first;
        if (!(a.second.cols == b.second.cols))
            return basis_less(a.second.cols, b.second.cols);
        return basis_less(a.second.rows, b.second.rows);
    });
    std::vector<BasisPair> out;
    for (auto& f : found)
        out.push_back(std::move(f.second));
    return out;
}

std::optional<BasisPair> select_bases(const MomentFunctional& lambda, int r, const SelectOptions& opt)
{
    auto c = candidate_bases(lambda, r, opt);
    if (c.empty())
        return std::nullopt;
    return c.front();
}

}  // namespace tdec
