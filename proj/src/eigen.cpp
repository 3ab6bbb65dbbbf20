#include "tdec/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace tdec {

Eigen::MatrixXcd multiplication_matrix(const MomentFunctional& lambda, const MonomialBasis& b,
                                       const MonomialBasis& bp, int var)
{
    HankelMatrix h = hankel(lambda, bp, b);
    HankelMatrix hv = shifted_hankel(lambda, var, bp, b);
    if (!h.known() || !hv.known())
        throw Error("multiplication_matrix: unresolved moments");
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(h.values());
    if (!lu.isInvertible())
        throw Error("multiplication_matrix: singular H");
    return lu.solve(hv.values());
}

namespace {

double min_gap(const Eigen::VectorXcd& ev)
{
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        for (Eigen::Index j = i + 1; j < ev.size(); ++j)
            gap = std::min(gap, std::abs(ev(i) - ev(j)));
    return gap;
}

}  // namespace

RootSet joint_eigenvectors(const MultiplicationFamily& f, std::uint64_t seed)
{
    const int r = f.basis.size();
    if (f.matrices.empty())
        throw Error("joint_eigenvectors: empty family");
    int one_idx = f.basis.index(one(f.shape));
    if (one_idx < 0)
        throw Error("joint_eigenvectors: basis does not contain 1");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es;
    bool separated = false;
    for (int attempt = 0; attempt < 2; ++attempt) {
        Eigen::MatrixXcd comb = Eigen::MatrixXcd::Zero(r, r);
        for (const auto& [v, m] : f.matrices)
            comb += unif(rng) * m.transpose();
        es.compute(comb);
        if (es.info() != Eigen::Success)
            throw Error("joint_eigenvectors: eigensolver failed");
        double big = es.eigenvalues().cwiseAbs().maxCoeff();
        if (min_gap(es.eigenvalues()) >= 1e-10 * (1.0 + big)) {
            separated = true;
            break;
        }
    }

    RootSet out;
    const Eigen::MatrixXcd& vecs = es.eigenvectors();
    bool normalizable = true;
    for (int i = 0; i < r; ++i) {
        Eigen::VectorXcd w = vecs.col(i);
        cplx lead = w(one_idx);
        if (std::abs(lead) <= 1e-12 * w.norm()) {
            normalizable = false;
            lead = 1.0;
        }
        w /= lead;
        std::map<int, cplx> lam;
        for (const auto& [v, m] : f.matrices)
            lam[v] = w.dot(m.transpose() * w) / w.squaredNorm();
        out.eigvecs.push_back(w);
        out.eigenvalues.push_back(std::move(lam));
        out.points.push_back(make_point(f.shape));
    }

    // distinct tuples differ somewhere by more than 1e-6 (1 + max |lambda|)
    double big = 0.0;
    for (const auto& lam : out.eigenvalues)
        for (const auto& [v, x] : lam)
            big = std::max(big, std::abs(x));
    double sep = std::numeric_limits<double>::infinity();
    bool distinct = true;
    for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j) {
            double d = 0.0;
            for (const auto& [v, x] : out.eigenvalues[i])
                d = std::max(d, std::abs(x - out.eigenvalues[j].at(v)));
            sep = std::min(sep, d / (1.0 + big));
            if (d <= 1e-6 * (1.0 + big))
                distinct = false;
        }
    // a defective combination shows up as a nearly singular eigenvector matrix
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vecs);
    const auto& sv = svd.singularValues();
    bool diagonalizable = sv(sv.size() - 1) > 1e-10 * sv(0);
    out.separation = r > 1 ? sep : 1.0;
    out.simple = separated && distinct && diagonalizable && normalizable;
    return out;
}

RootSet read_coordinates(const RootSet& roots, const MultiplicationFamily& f)
{
    const Shape& s = f.shape;
    RootSet out = roots;
    for (size_t i = 0; i < out.points.size(); ++i) {
        Point& z = out.points[i];
        if (z.coords.empty())
            z = make_point(s);
        for (int v = 0; v < s.nvars(); ++v) {
            int g = s.group_of(v);
            int l = v - s.offset(g);
            int idx = f.basis.index(variable(s, v));
            if (idx >= 0)
                z.coords[g][l] = out.eigvecs[i](idx);
            else if (out.eigenvalues[i].count(v))
                z.coords[g][l] = out.eigenvalues[i].at(v);
        }
    }
    return out;
}

std::vector<int> missing_variables(const Shape& s, const RootSet& roots)
{
    std::set<int> miss;
    for (const auto& z : roots.points)
        for (int v = 0; v < s.nvars(); ++v) {
            int g = s.group_of(v);
            if (z.coords.empty() || is_missing(z.coords[g][v - s.offset(g)]))
                miss.insert(v);
        }
    return {miss.begin(), miss.end()};
}

namespace {

bool uses_only(const Monomial& m, const std::vector<bool>& avail)
{
    for (size_t v = 0; v < m.e.size(); ++v)
        if (m.e[v] > 0 && !avail[v])
            return false;
    return true;
}

}  // namespace

RootSet recover_missing_coordinates(const MomentFunctional& lambda, const RootSet& roots,
                                    const std::vector<cplx>& weights,
                                    const std::vector<int>& missing)
{
    const Shape& s = lambda.shape;
    const int r = static_cast<int>(roots.points.size());
    if (static_cast<int>(weights.size()) != r)
        throw Error("recover_missing_coordinates: one weight per root expected");
    std::vector<bool> avail(s.nvars(), true);
    for (int v : missing)
        avail[v] = false;
    RootSet out = roots;
    auto mons = enumerate_monomials(s, s.degrees);
    for (int v : missing) {
        Monomial xv = variable(s, v);
        std::vector<Eigen::RowVectorXcd> rows;
        std::vector<cplx> rhs;
        for (const auto& m : mons) {
            if (!uses_only(m, avail))
                continue;
            Monomial vm = monomial_mul(xv, m);
            if (!within(s, vm))
                continue;
            const Affine* a = lambda.find(vm);
            if (!a || !a->known())
                continue;
            Eigen::RowVectorXcd row(r);
            for (int i = 0; i < r; ++i)
                row(i) = weights[i] * eval_monomial(s, m, roots.points[i]);
            rows.push_back(row);
            rhs.push_back(a->c);
        }
        if (static_cast<int>(rows.size()) < r)
            throw Error("recover_missing_coordinates: not enough moments for " + s.var_name(v));
        Eigen::MatrixXcd a(rows.size(), r);
        Eigen::VectorXcd b(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
            double n = rows[i].norm();
            if (n == 0.0)
                n = 1.0;
            a.row(i) = rows[i] / n;
            b(i) = rhs[i] / n;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
        qr.setThreshold(1e-12);
        if (qr.rank() < r)
            throw Error("recover_missing_coordinates: singular system for " + s.var_name(v));
        Eigen::VectorXcd x = qr.solve(b);
        int g = s.group_of(v);
        for (int i = 0; i < r; ++i)
            out.points[i].coords[g][v - s.offset(g)] = x(i);
    }
    return out;
}

WeightFit solve_weights(const Polynomial& t, const std::vector<Point>& points)
{
    const Shape& s = t.shape;
    const int r = static_cast<int>(points.size());
    WeightFit fit;
    if (r == 0)
        return fit;
    std::vector<bool> avail(s.nvars(), true);
    for (const auto& z : points)
        for (int v = 0; v < s.nvars(); ++v) {
            int g = s.group_of(v);
            if (is_missing(z.coords[g][v - s.offset(g)]))
                avail[v] = false;
        }
    std::vector<Monomial> used;
    for (const auto& m : enumerate_monomials(s, s.degrees))
        if (uses_only(m, avail))
            used.push_back(m);
    Eigen::MatrixXcd a(used.size(), r);
    Eigen::VectorXcd b(used.size());
    for (size_t e = 0; e < used.size(); ++e) {
        double c = static_cast<double>(multinomial(s, used[e]));
        for (int i = 0; i < r; ++i)
            a(e, i) = c * eval_monomial(s, used[e], points[i]);
        b(e) = t.coef(used[e]);
    }
    Eigen::VectorXd scale = a.colwise().norm().transpose();
    for (int i = 0; i < r; ++i)
        if (scale(i) > 0.0)
            a.col(i) /= scale(i);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
    qr.setThreshold(1e-12);
    if (qr.rank() < r)
        throw Error("solve_weights: points do not give independent evaluations");
    Eigen::VectorXcd g = qr.solve(b);
    double bn = b.norm();
    fit.residual = (a * g - b).norm() / (bn > 0.0 ? bn : 1.0);
    fit.equations = static_cast<int>(used.size());
    for (int i = 0; i < r; ++i)
        fit.weights.push_back(scale(i) > 0.0 ? g(i) / scale(i) : g(i));
    return fit;
}

}  // namespace tdec
