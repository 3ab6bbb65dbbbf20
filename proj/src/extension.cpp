#include "tdec/extension.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <set>

namespace tdec {

const char* to_string(ExtensionStatus s)
{
    switch (s) {
    case ExtensionStatus::Extended:
        return "extended";
    case ExtensionStatus::RankDeficient:
        return "rank-deficient";
    case ExtensionStatus::Inconsistent:
        return "inconsistent";
    }
    return "?";
}

bool flat_extension_check(const MomentFunctional& lambda, const MonomialBasis& b,
                          const MonomialBasis& bp, double tol)
{
    const Shape& s = lambda.shape;
    HankelMatrix hp = hankel(lambda, basis_plus(s, bp), basis_plus(s, b));
    if (!hp.known())
        throw Error("flat_extension_check: unresolved parameters in H+");
    HankelMatrix h = hankel(lambda, bp, b);
    int r = b.size();
    return numerical_rank(hp.values(), tol) == r && numerical_rank(h.values(), tol) == r;
}

std::vector<BorderRelation> known_column_relations(const MomentFunctional& lambda,
                                                   const MonomialBasis& b, const MonomialBasis& bp,
                                                   const std::vector<Monomial>& targets)
{
    HankelMatrix h = hankel(lambda, bp, b);
    if (!h.known())
        throw Error("known_column_relations: H has unknown entries");
    Eigen::MatrixXcd hm = h.values();
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(hm);
    if (!lu.isInvertible())
        throw Error("known_column_relations: singular H");
    std::vector<BorderRelation> out;
    for (const auto& m : targets) {
        Eigen::VectorXcd col(bp.size());
        for (int i = 0; i < bp.size(); ++i) {
            const Affine* a = lambda.find(monomial_mul(bp.mons[i], m));
            if (!a || !a->known())
                throw Error("known_column_relations: column of " + to_string(lambda.shape, m) +
                            " is not known");
            col(i) = a->c;
        }
        out.push_back({m, lu.solve(col)});
    }
    return out;
}

double commutator_residual(const std::vector<Eigen::MatrixXcd>& ms)
{
    double worst = 0.0;
    for (size_t i = 0; i < ms.size(); ++i)
        for (size_t j = i + 1; j < ms.size(); ++j) {
            double c = (ms[i] * ms[j] - ms[j] * ms[i]).norm();
            double scale = std::max(1.0, ms[i].norm() * ms[j].norm());
            worst = std::max(worst, c / scale);
        }
    return worst;
}

bool rank_factor_check(const Eigen::MatrixXcd& hplus, int r, double tol)
{
    const int nr = static_cast<int>(hplus.rows()) - r;
    const int nc = static_cast<int>(hplus.cols()) - r;
    if (nr < 0 || nc < 0)
        throw Error("rank_factor_check: block larger than matrix");
    if (nr == 0 || nc == 0)
        return true;
    Eigen::MatrixXcd h = hplus.topLeftCorner(r, r);
    Eigen::MatrixXcd gp = hplus.topRightCorner(r, nc);
    Eigen::MatrixXcd g = hplus.bottomLeftCorner(nr, r).transpose();
    Eigen::MatrixXcd j = hplus.bottomRightCorner(nr, nc);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(h);
    if (!lu.isInvertible())
        throw Error("rank_factor_check: singular leading block");
    Eigen::MatrixXcd wp = lu.solve(gp);
    Eigen::MatrixXcd w = h.transpose().fullPivLu().solve(g);
    double scale = std::max(1.0, hplus.norm());
    if ((h * wp - gp).norm() > tol * scale || (h.transpose() * w - g).norm() > tol * scale)
        return false;
    double jn = j.norm();
    double res = (j - w.transpose() * h * wp).norm();
    return res <= tol * (jn > 0.0 ? jn : scale);
}

bool rank_factor_check(const HankelMatrix& hplus, int r, double tol)
{
    return rank_factor_check(hplus.values(), r, tol);
}

namespace {

// One column of a multiplication matrix: c + sum_p h_p t_p.
struct ACol {
    Eigen::VectorXcd c;
    std::vector<std::pair<int, Eigen::VectorXcd>> t;
    bool known() const { return t.empty(); }
};

// Affine vector accumulated while expanding one commutation equation.
struct Acc {
    Eigen::VectorXcd c;
    Eigen::VectorXd mag;
    std::map<int, Eigen::VectorXcd> t;
    explicit Acc(int r) : c(Eigen::VectorXcd::Zero(r)), mag(Eigen::VectorXd::Zero(r)) {}

    double norm() const
    {
        double n = mag.squaredNorm();
        for (const auto& [p, v] : t)
            n += v.squaredNorm();
        return std::sqrt(n);
    }

    void add_scaled(cplx s, const ACol& col)
    {
        c += s * col.c;
        mag += std::abs(s) * col.c.cwiseAbs();
        for (const auto& [p, v] : col.t) {
            auto it = t.find(p);
            if (it == t.end())
                t.emplace(p, s * v);
            else
                it->second += s * v;
        }
    }
    // vector u (constant) times the k-th entry of col
    void add_outer(const Eigen::VectorXcd& u, const ACol& col, int k)
    {
        c += u * col.c(k);
        mag += u.cwiseAbs() * std::abs(col.c(k));
        for (const auto& [p, v] : col.t) {
            auto it = t.find(p);
            if (it == t.end())
                t.emplace(p, u * v(k));
            else
                it->second += u * v(k);
        }
    }
};

struct Family {
    int r = 0;
    int nvars = 0;
    std::vector<std::vector<ACol>> cols;  // [var][j]
    std::vector<bool> full;               // all columns known

    const ACol& at(int v, int j) const { return cols[v][j]; }
};

Family build_family(const MomentFunctional& lp, const MonomialBasis& b, const MonomialBasis& bp,
                    const Eigen::MatrixXcd& hinv, const std::vector<std::optional<cplx>>& val)
{
    const Shape& s = lp.shape;
    Family f;
    f.r = b.size();
    f.nvars = s.nvars();
    f.cols.resize(f.nvars);
    f.full.assign(f.nvars, true);
    for (int v = 0; v < f.nvars; ++v) {
        Monomial xv = variable(s, v);
        for (int j = 0; j < f.r; ++j) {
            Eigen::VectorXcd y(f.r);
            std::map<int, Eigen::VectorXcd> e;
            Monomial vb = monomial_mul(xv, b.mons[j]);
            for (int i = 0; i < f.r; ++i) {
                const Affine& a = lp.at(monomial_mul(bp.mons[i], vb));
                cplx c = a.c;
                for (const auto& [p, coef] : a.lin) {
                    if (val[p]) {
                        c += coef * *val[p];
                        continue;
                    }
                    auto it = e.find(p);
                    if (it == e.end())
                        it = e.emplace(p, Eigen::VectorXcd::Zero(f.r)).first;
                    it->second(i) += coef;
                }
                y(i) = c;
            }
            ACol col;
            col.c = hinv * y;
            for (auto& [p, vec] : e)
                col.t.emplace_back(p, hinv * vec);
            if (!col.known())
                f.full[v] = false;
            f.cols[v].push_back(std::move(col));
        }
    }
    return f;
}

Eigen::MatrixXcd const_matrix(const Family& f, int v)
{
    Eigen::MatrixXcd m(f.r, f.r);
    for (int j = 0; j < f.r; ++j)
        m.col(j) = f.cols[v][j].c;
    return m;
}

// Expansion of (M_u M_v - M_v M_u) e_j when it is linear in the parameters.
std::optional<Acc> commutation_equation(const Family& f, int u, int v, int j)
{
    const ACol& uj = f.at(u, j);
    const ACol& vj = f.at(v, j);
    bool linear = (vj.known() || f.full[u]) && (uj.known() || f.full[v]);
    if (!linear)
        return std::nullopt;
    Acc acc(f.r);
    for (int k = 0; k < f.r; ++k) {
        // + M_u[:,k] M_v[k,j]
        if (vj.known())
            acc.add_scaled(vj.c(k), f.at(u, k));
        else
            acc.add_outer(f.at(u, k).c, vj, k);
        // - M_v[:,k] M_u[k,j]
        if (uj.known())
            acc.add_scaled(-uj.c(k), f.at(v, k));
        else
            acc.add_outer(-f.at(v, k).c, uj, k);
    }
    return acc;
}

// Gauss-Newton on all commutators at once, starting from the values found by
// the sequential solves. Their outcome depends on the order of the equations;
// the joint solution does not.
void polish(const Family& g, std::vector<std::optional<cplx>>& val, int steps)
{
    const int r = g.r, nv = g.nvars, np = static_cast<int>(val.size());
    if (np == 0 || nv < 2)
        return;
    Eigen::VectorXcd h(np);
    for (int p = 0; p < np; ++p)
        h(p) = *val[p];
    auto matrices = [&](const Eigen::VectorXcd& x) {
        std::vector<Eigen::MatrixXcd> ms;
        for (int v = 0; v < nv; ++v) {
            Eigen::MatrixXcd m = const_matrix(g, v);
            for (int j = 0; j < r; ++j)
                for (const auto& [p, vec] : g.at(v, j).t)
                    m.col(j) += x(p) * vec;
            ms.push_back(std::move(m));
        }
        return ms;
    };
    const int npairs = nv * (nv - 1) / 2;
    auto residual = [&](const std::vector<Eigen::MatrixXcd>& ms, const std::vector<double>& w) {
        Eigen::VectorXcd f(static_cast<Eigen::Index>(npairs) * r * r);
        int k = 0;
        for (int u = 0; u < nv; ++u)
            for (int v = u + 1; v < nv; ++v, ++k) {
                Eigen::MatrixXcd c = (ms[u] * ms[v] - ms[v] * ms[u]) / w[k];
                f.segment(static_cast<Eigen::Index>(k) * r * r, r * r) =
                    Eigen::Map<Eigen::VectorXcd>(c.data(), r * r);
            }
        return f;
    };
    auto ms = matrices(h);
    std::vector<double> w;
    for (int u = 0; u < nv; ++u)
        for (int v = u + 1; v < nv; ++v)
            w.push_back(std::max(1.0, ms[u].norm() * ms[v].norm()));
    Eigen::VectorXcd f = residual(ms, w);
    for (int step = 0; step < steps; ++step) {
        Eigen::MatrixXcd jac = Eigen::MatrixXcd::Zero(f.size(), np);
        int k = 0;
        for (int u = 0; u < nv; ++u)
            for (int v = u + 1; v < nv; ++v, ++k) {
                Eigen::Index base = static_cast<Eigen::Index>(k) * r * r;
                auto put = [&](int p, const Eigen::MatrixXcd& d) {
                    jac.col(p).segment(base, r * r) += Eigen::Map<const Eigen::VectorXcd>(d.data(), r * r) / w[k];
                };
                // d(M_u M_v - M_v M_u) for M_u += vec e_j^T, and likewise for M_v
                for (int j = 0; j < r; ++j) {
                    for (const auto& [p, vec] : g.at(u, j).t) {
                        Eigen::MatrixXcd d = vec * ms[v].row(j);
                        d.col(j) -= ms[v] * vec;
                        put(p, d);
                    }
                    for (const auto& [p, vec] : g.at(v, j).t) {
                        Eigen::MatrixXcd d = -vec * ms[u].row(j);
                        d.col(j) += ms[u] * vec;
                        put(p, d);
                    }
                }
            }
        // the start is already close, so normal equations lose nothing that matters
        Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(np, np);
        n.selfadjointView<Eigen::Lower>().rankUpdate(jac.adjoint());
        Eigen::LDLT<Eigen::MatrixXcd> ldlt(n);
        Eigen::VectorXcd dx = ldlt.solve(-(jac.adjoint() * f));
        if (ldlt.info() != Eigen::Success || !dx.allFinite())
            break;
        Eigen::VectorXcd hn = h + dx;
        auto msn = matrices(hn);
        Eigen::VectorXcd fn = residual(msn, w);
        if (!(fn.norm() < f.norm()))
            break;
        h = hn;
        ms = std::move(msn);
        f = fn;
        if (dx.norm() <= 1e-15 * std::max(1.0, h.norm()))
            break;
    }
    for (int p = 0; p < np; ++p)
        val[p] = h(p);
}

}  // namespace

ExtensionResult propagate_commutation(const MomentFunctional& lambda, const MonomialBasis& b,
                                      const MonomialBasis& bp, const ExtensionOptions& opt)
{
    const Shape& s = lambda.shape;
    const int r = b.size();
    if (bp.size() != r)
        throw Error("propagate_commutation: bases of different sizes");
    HankelMatrix h0 = hankel(lambda, bp, b);
    if (!h0.known())
        throw Error("propagate_commutation: H^{B',B} has unknown entries");
    Eigen::MatrixXcd hm = h0.values();
    if (condition_number(hm) > opt.max_condition)
        throw Error("propagate_commutation: singular H^{B',B}");
    Eigen::MatrixXcd hinv = hm.fullPivLu().inverse();

    MonomialBasis bplus = basis_plus(s, b);
    std::vector<Monomial> prods;
    for (const auto& x : bp.mons)
        for (const auto& y : bplus.mons)
            prods.push_back(monomial_mul(x, y));
    MomentFunctional lp = lambda.with_parameters(prods);
    const int nparams = lp.next_param();
    std::vector<std::optional<cplx>> val(nparams);

    ExtensionResult res;
    std::mt19937_64 shuffle_rng(opt.order_seed);
    Family fam;
    while (true) {
        fam = build_family(lp, b, bp, hinv, val);
        ++res.rounds;

        std::vector<Acc> eqs, checks;
        for (int u = 0; u < fam.nvars; ++u)
            for (int v = u + 1; v < fam.nvars; ++v)
                for (int j = 0; j < r; ++j) {
                    auto e = commutation_equation(fam, u, v, j);
                    if (!e)
                        continue;
                    (e->t.empty() ? checks : eqs).push_back(std::move(*e));
                }
        // Entries that vanish exactly carry roundoff only, so each equation is
        // scaled as a block, with a floor relative to the largest block.
        double big = 0.0;
        for (const auto* list : {&eqs, &checks})
            for (const auto& e : *list)
                big = std::max(big, e.norm());
        const double floor = 1e-8 * big;
        double check = 0.0;
        for (const auto& e : checks)
            check = std::max(check, e.c.norm() / std::max(e.mag.norm(), floor));
        if (check > opt.tol_consistency) {
            res.status = ExtensionStatus::Inconsistent;
            res.system_residual = check;
            break;
        }
        if (eqs.empty())
            break;
        if (opt.order_seed != 0)
            std::shuffle(eqs.begin(), eqs.end(), shuffle_rng);

        std::map<int, int> colof;
        for (const auto& e : eqs)
            for (const auto& [p, vec] : e.t)
                colof.emplace(p, 0);
        int q = 0;
        std::vector<int> ids;
        for (auto& [p, c] : colof) {
            c = q++;
            ids.push_back(p);
        }
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(eqs.size()) * r, q);
        Eigen::VectorXcd rhs(a.rows());
        Eigen::VectorXd mag(a.rows());
        for (size_t e = 0; e < eqs.size(); ++e)
            for (int i = 0; i < r; ++i) {
                Eigen::Index row = static_cast<Eigen::Index>(e) * r + i;
                for (const auto& [p, vec] : eqs[e].t)
                    a(row, colof[p]) = vec(i);
                rhs(row) = -eqs[e].c(i);
                mag(row) = eqs[e].mag(i);
            }
        for (size_t e = 0; e < eqs.size(); ++e) {
            double n = std::max(eqs[e].norm(), floor);
            a.middleRows(static_cast<Eigen::Index>(e) * r, r) /= n;
            rhs.segment(static_cast<Eigen::Index>(e) * r, r) /= n;
            mag.segment(static_cast<Eigen::Index>(e) * r, r) /= n;
        }
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        // Blocks have unit scale, so singular values are compared with the
        // threshold itself rather than with the largest one.
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv(i) > opt.tol_rank)
                ++rank;
        if (rank == 0)
            break;
        svd.setThreshold(opt.tol_rank / sv(0));
        Eigen::VectorXcd x = svd.solve(rhs);
        double scale = ((a.cwiseAbs() * x.cwiseAbs()) + mag).norm();
        double resid = (a * x - rhs).norm() / std::max(scale, 1e-300);
        res.system_residual = std::max(res.system_residual, resid);
        if (resid > opt.tol_consistency) {
            res.status = ExtensionStatus::Inconsistent;
            break;
        }
        int fixed = 0;
        const Eigen::MatrixXcd& vmat = svd.matrixV();
        for (int c = 0; c < q; ++c) {
            double nul = rank < q ? vmat.row(c).tail(q - rank).norm() : 0.0;
            if (nul <= 1e-7) {
                val[ids[c]] = x(c);
                ++fixed;
            }
        }
        if (fixed == 0)
            break;
    }

    // collect what is resolved
    for (int p = 0; p < nparams; ++p)
        if (!val[p])
            ++res.unresolved;
    if (res.status != ExtensionStatus::Inconsistent && res.unresolved == 0 && nparams > 0) {
        polish(build_family(lp, b, bp, hinv, std::vector<std::optional<cplx>>(nparams)), val, 2);
        fam = build_family(lp, b, bp, hinv, val);
    }
    res.functional = MomentFunctional(s);
    for (const auto& [m, a] : lp.entries) {
        cplx c = a.c;
        bool ok = true;
        for (const auto& [p, coef] : a.lin) {
            if (!val[p]) {
                ok = false;
                break;
            }
            c += coef * *val[p];
        }
        if (ok)
            res.functional.entries.emplace(m, Affine(c));
    }
    for (int v = 0; v < fam.nvars; ++v)
        if (fam.full[v])
            res.matrices.emplace(v, const_matrix(fam, v));
    for (const auto& m : border(s, b).mons) {
        for (int v = 0; v < s.nvars(); ++v) {
            if (m.e[v] == 0)
                continue;
            Monomial d = m;
            --d.e[v];
            int j = b.index(d);
            if (j < 0)
                continue;
            const ACol& col = fam.at(v, j);
            if (col.known()) {
                res.relations.push_back({m, col.c});
                break;
            }
        }
    }
    if (res.status == ExtensionStatus::Inconsistent)
        return res;
    if (res.unresolved > 0) {
        res.status = ExtensionStatus::RankDeficient;
        return res;
    }

    std::vector<Eigen::MatrixXcd> ms;
    for (const auto& [v, m] : res.matrices)
        ms.push_back(m);
    res.commutator_residual = commutator_residual(ms);
    if (res.commutator_residual > opt.tol_consistency) {
        res.status = ExtensionStatus::Inconsistent;
        return res;
    }

    // moments of B'+ * B+ through the projection p -> p(M)(1)
    int one_idx = b.index(one(s));
    int one_row = bp.index(one(s));
    if (one_idx < 0 || one_row < 0)
        throw Error("propagate_commutation: bases must contain 1");
    Eigen::RowVectorXcd ell = hm.row(one_row);
    MonomialBasis rows_plus = basis_plus(s, bp);
    for (const auto& x : rows_plus.mons)
        for (const auto& y : bplus.mons) {
            Monomial m = monomial_mul(x, y);
            if (res.functional.find(m))
                continue;
            Eigen::VectorXcd nf = Eigen::VectorXcd::Unit(r, one_idx);
            for (int v = 0; v < s.nvars(); ++v)
                for (int t = 0; t < m.e[v]; ++t)
                    nf = res.matrices.at(v) * nf;
            res.functional.entries.emplace(m, Affine(ell * nf));
        }
    res.status = ExtensionStatus::Extended;
    return res;
}

}  // namespace tdec
