#include <gtest/gtest.h>

#include "support.hpp"

using namespace tdec;
using namespace tdec::test;

namespace {

// Dense multilinear tensor sum_i w_i u_i (x) v_i (x) ... in homogeneous coordinates,
// built without the library's array helpers.
std::vector<cplx> homogeneous_array(const Shape& s, const std::vector<Term>& terms)
{
    std::vector<int> d;
    std::size_t n = 1;
    for (int g = 0; g < s.k(); ++g) {
        d.push_back(s.dims[g] + 1);
        n *= d.back();
    }
    std::vector<cplx> out(n, 0.0);
    for (const auto& t : terms)
        for (std::size_t idx = 0; idx < n; ++idx) {
            std::size_t rest = idx;
            cplx v = t.weight;
            for (int g = 0; g < s.k(); ++g) {
                int i = static_cast<int>(rest % d[g]);
                rest /= d[g];
                v *= i == 0 ? cplx(1.0) : t.point.coords[g][i - 1];
            }
            out[idx] += v;
        }
    return out;
}

}  // namespace

TEST(Expand, MatchesBruteForce)
{
    std::mt19937_64 rng(301);
    for (int trial = 0; trial < 30; ++trial) {
        Shape s({1 + trial % 3, 1 + (trial / 3) % 2}, {1 + trial % 3, 1 + trial % 2});
        auto terms = random_terms(s, 1 + trial % 4, rng, trial % 2 == 0);
        EXPECT_LE(coef_distance(expand(s, terms), brute_expand(s, terms)), 1e-12);
    }
    auto t2 = load_tensor("example2.json").tensor;
    auto truth = load_decomposition("example2.truth.json");
    EXPECT_EQ(expand(t2.shape, truth.terms).terms, t2.terms);
}

TEST(Verify, Examples)
{
    auto t2 = load_tensor("example2.json").tensor;
    auto truth = load_decomposition("example2.truth.json");
    Decomposition d{t2.shape, truth.terms, 0.0, false, {}};
    EXPECT_LT(verify(t2, d), 1e-12);

    Shape s({2}, {2});
    EXPECT_EQ(verify(Polynomial(s), Decomposition{s, {}, 0.0, false, {}}), 0.0);

    auto bumped = d;
    bumped.terms[0].weight += 0.1;
    double r1 = verify(t2, bumped);
    bumped.terms[0].weight += 0.1;
    double r2 = verify(t2, bumped);
    EXPECT_GT(r1, 0.0);
    EXPECT_NEAR(r2 / r1, 2.0, 1e-9);
}

TEST(Bounds, Formulas)
{
    EXPECT_EQ(rank_upper_bound({4, 4, 7}), 16);
    EXPECT_EQ(rank_upper_bound({7, 4, 4}), 16);
    EXPECT_EQ(rank_upper_bound({1, 1, 1}), 1);
    EXPECT_EQ(rank_upper_bound({2, 2, 2}), 4);
    EXPECT_EQ(expected_rank(Shape({3, 3, 6}, {1, 1, 1})), 9);
    EXPECT_EQ(expected_rank(Shape({1, 1, 1}, {1, 1, 1})), 2);
    EXPECT_EQ(kruskal_bound(Shape({3, 3, 6}, {1, 1, 1})), 6);
    EXPECT_EQ(kruskal_bound(Shape({1, 1, 1}, {1, 1, 1})), 2);
    EXPECT_EQ(kruskal_bound(Shape({1, 1}, {1, 1})), 0);
    // one variable per group: the single term count
    EXPECT_EQ(expected_rank(Shape({1}, {1})), 1);
}

TEST(Bounds, ExpectedRankMatchesDimensionCount)
{
    // ceil(prod (n_i+1) / (1 + sum n_i)) for multilinear shapes
    for (int a = 1; a <= 4; ++a)
        for (int b = 1; b <= 4; ++b)
            for (int c = 1; c <= 6; ++c) {
                int amb = (a + 1) * (b + 1) * (c + 1);
                int den = 1 + a + b + c;
                EXPECT_EQ(expected_rank(Shape({a, b, c}, {1, 1, 1})), (amb + den - 1) / den);
            }
    // binary forms of degree d: ceil((d+1)/2)
    for (int d = 1; d <= 8; ++d)
        EXPECT_EQ(expected_rank(Shape({1}, {d})), (d + 2) / 2);
}

TEST(Bounds, LowerBound)
{
    EXPECT_EQ(rank_lower_bound(load_tensor("example2.json").tensor), 6);
    EXPECT_EQ(rank_lower_bound(load_tensor("example1.json").tensor), 4);
    std::mt19937_64 rng(307);
    for (int trial = 0; trial < 10; ++trial) {
        Shape s({2, 2, 2}, {1, 1, 1});
        EXPECT_EQ(rank_lower_bound(expand(s, random_terms(s, 1, rng))), 1);
        EXPECT_EQ(rank_lower_bound(expand(s, random_terms(s, 3, rng))), 3);
    }
    auto b = rank_bounds(load_tensor("example1.json").tensor);
    EXPECT_LE(b.lower, b.upper);
    EXPECT_TRUE(b.upper_atkinson);
}

TEST(Arrays, RoundTripAndLayout)
{
    std::mt19937_64 rng(311);
    Shape s({1, 2, 3}, {1, 1, 1});
    auto terms = random_terms(s, 3, rng, true);
    auto t = expand(s, terms);
    auto arr = to_array(t);
    auto ref = homogeneous_array(s, terms);
    ASSERT_EQ(arr.size(), ref.size());
    for (size_t i = 0; i < arr.size(); ++i)
        EXPECT_LE(std::abs(arr[i] - ref[i]), 1e-12);
    EXPECT_LE(coef_distance(from_array(s, arr), t), 1e-12);
}

TEST(MultilinearRank, Examples)
{
    std::mt19937_64 rng(313);
    Shape s({3, 3, 3}, {1, 1, 1});
    EXPECT_EQ(multilinear_rank(expand(s, random_terms(s, 1, rng))), (std::vector<int>{1, 1, 1}));
    EXPECT_EQ(multilinear_rank(tucker_tensor(s, {2, 3, 2}, rng)), (std::vector<int>{2, 3, 2}));
    EXPECT_EQ(multilinear_rank(load_tensor("example1.json").tensor), (std::vector<int>{4, 4, 4}));
}

TEST(Hosvd, FullTargetIsExact)
{
    auto t = load_tensor("example1.json").tensor;
    auto tk = hosvd_reduce(t, {4, 4, 4});
    EXPECT_LT(tk.error, 1e-10);
    double n0 = t.norm(), n1 = tk.core.norm();
    EXPECT_NEAR(n1 / n0, 1.0, 1e-12);
}

TEST(Hosvd, ExactTuckerTensors)
{
    std::mt19937_64 rng(317);
    for (int trial = 0; trial < 10; ++trial) {
        Shape s({3, 3, 4}, {1, 1, 1});
        std::vector<int> ranks = {2 + trial % 3, 2 + (trial / 3) % 3, 2 + trial % 2};
        auto t = tucker_tensor(s, ranks, rng);
        auto tk = hosvd_reduce(t, ranks);
        EXPECT_LT(tk.error, 1e-10);
        for (int i = 0; i < 3; ++i) {
            EXPECT_EQ(tk.factors[i].cols(), ranks[i]);
            Eigen::MatrixXcd g = tk.factors[i].adjoint() * tk.factors[i];
            EXPECT_LT((g - Eigen::MatrixXcd::Identity(ranks[i], ranks[i])).norm(), 1e-12);
        }
    }
}

TEST(Hosvd, TruncationErrorTracksTailEnergy)
{
    std::mt19937_64 rng(331);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 10; ++trial) {
        Shape s({3, 3, 3}, {1, 1, 1});
        auto t = expand(s, random_terms(s, 2, rng));
        Polynomial noisy(s);
        for (const auto& m : enumerate_monomials(s, s.degrees))
            noisy.add(m, t.coef(m) + 1e-3 * g(rng));
        auto tk = hosvd_reduce(noisy, {2, 2, 2}, 5);
        // the tail energy of the mode unfoldings bounds the optimum from below
        auto arr = to_array(noisy);
        double worst_tail = 0.0, sum_tail = 0.0;
        for (int mode = 0; mode < 3; ++mode) {
            Eigen::MatrixXcd u(4, 16);
            for (int idx = 0; idx < 64; ++idx) {
                int i[3] = {idx % 4, (idx / 4) % 4, idx / 16};
                int col = mode == 0 ? i[1] + 4 * i[2] : mode == 1 ? i[0] + 4 * i[2] : i[0] + 4 * i[1];
                u(i[mode], col) = arr[idx];
            }
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(u);
            double tail = svd.singularValues().tail(2).squaredNorm();
            worst_tail = std::max(worst_tail, tail);
            sum_tail += tail;
        }
        double nrm = noisy.norm();
        double err_abs = tk.error * nrm;
        EXPECT_GE(err_abs, 0.8 * std::sqrt(worst_tail));
        EXPECT_LE(err_abs, 1.2 * std::sqrt(sum_tail));
    }
}

TEST(MapBack, IdentityAndOrthogonalFactors)
{
    std::mt19937_64 rng(337);
    Shape s({2, 2, 2}, {1, 1, 1});
    auto terms = random_terms(s, 2, rng);
    auto t = expand(s, terms);
    Decomposition d{s, terms, 0.0, false, {}};
    std::vector<Eigen::MatrixXcd> eye(3, Eigen::MatrixXcd::Identity(3, 3));
    auto same = map_back(d, eye, t);
    EXPECT_LT(match_terms(same.terms, terms), 1e-12);
    EXPECT_LT(same.residual, 1e-12);

    // lifting through orthogonal factors keeps the reconstruction exact
    Shape big({3, 4, 3}, {1, 1, 1});
    std::vector<Eigen::MatrixXcd> u = {random_orthonormal(4, 3, rng), random_orthonormal(5, 3, rng),
                                       random_orthonormal(4, 3, rng)};
    std::vector<Term> lifted;
    for (const auto& x : terms) {
        Term y{x.weight, {}};
        for (int g = 0; g < 3; ++g) {
            Eigen::VectorXcd h(3);
            h << 1.0, x.point.coords[g][0], x.point.coords[g][1];
            Eigen::VectorXcd z = u[g] * h;
            y.weight *= z(0);
            std::vector<cplx> c;
            for (int i = 1; i < z.size(); ++i)
                c.push_back(z(i) / z(0));
            y.point.coords.push_back(c);
        }
        lifted.push_back(y);
    }
    auto original = expand(big, lifted);
    auto back = map_back(d, u, original);
    EXPECT_LT(back.residual, 1e-10);
    EXPECT_LT(match_terms(back.terms, lifted), 1e-8);
}

TEST(CoordinateChange, RoundTrip)
{
    std::mt19937_64 rng(347);
    for (int trial = 0; trial < 10; ++trial) {
        Shape s({2, 1 + trial % 2}, {1 + trial % 2, 2});
        auto terms = random_terms(s, 2, rng);
        auto t = expand(s, terms);
        std::vector<Eigen::MatrixXcd> a;
        for (int g = 0; g < s.k(); ++g)
            a.push_back(random_orthonormal(s.dims[g] + 1, s.dims[g] + 1, rng));
        auto work = change_coordinates(t, a);
        // terms of T(Ay) are (A^t (1,z)) dehomogenized
        std::vector<Term> moved;
        for (const auto& x : terms) {
            Term y{x.weight, {}};
            for (int g = 0; g < s.k(); ++g) {
                Eigen::VectorXcd h(s.dims[g] + 1);
                h(0) = 1.0;
                for (int l = 0; l < s.dims[g]; ++l)
                    h(l + 1) = x.point.coords[g][l];
                Eigen::VectorXcd z = a[g].transpose() * h;
                y.weight *= std::pow(z(0), s.degrees[g]);
                std::vector<cplx> c;
                for (int l = 1; l < z.size(); ++l)
                    c.push_back(z(l) / z(0));
                y.point.coords.push_back(c);
            }
            moved.push_back(y);
        }
        EXPECT_LE(coef_distance(work, expand(s, moved)), 1e-10);
        auto back = undo_change(s, moved, a);
        EXPECT_LT(match_terms(back, terms), 1e-10);
    }
}

TEST(Decompose, ExampleOne)
{
    auto t = load_tensor("example1.json").tensor;
    auto truth = load_decomposition("example1.truth.json");
    auto rep = decompose(t);
    ASSERT_TRUE(rep.ok);
    EXPECT_EQ(rep.dec.rank(), 4);
    double werr = 0.0;
    EXPECT_LT(match_terms(rep.dec.terms, truth.terms, &werr), 1e-6);
    EXPECT_LT(werr, 1e-8);
    EXPECT_LT(rep.dec.residual, 1e-8);
}

TEST(Decompose, ExampleTwo)
{
    auto t = load_tensor("example2.json").tensor;
    auto truth = load_decomposition("example2.truth.json");
    auto rep = decompose(t);
    ASSERT_TRUE(rep.ok);
    EXPECT_EQ(rep.dec.rank(), 6);
    double werr = 0.0;
    EXPECT_LT(match_terms(rep.dec.terms, truth.terms, &werr), 1e-6);
    EXPECT_LT(werr, 1e-3);
    EXPECT_LT(rep.dec.residual, 1e-6);
}

TEST(Decompose, RankOne)
{
    std::mt19937_64 rng(349);
    Shape s({2, 3}, {2, 1});
    auto terms = random_terms(s, 1, rng);
    auto rep = decompose(expand(s, terms));
    ASSERT_TRUE(rep.ok);
    EXPECT_EQ(rep.dec.rank(), 1);
    double werr = 0.0;
    EXPECT_LT(match_terms(rep.dec.terms, terms, &werr), 1e-10);
    EXPECT_LT(werr, 1e-10);
}

TEST(Decompose, ZeroTensorThrows)
{
    Shape s({2}, {2});
    EXPECT_THROW(decompose(Polynomial(s)), Error);
}

TEST(Decompose, ScalingEquivariance)
{
    std::mt19937_64 rng(353);
    for (int trial = 0; trial < 5; ++trial) {
        Shape s({2, 2, 2}, {1, 1, 1});
        auto t = expand(s, random_terms(s, 3, rng));
        Polynomial t3(s);
        for (const auto& [m, c] : t.terms)
            t3.add(m, -3.0 * c);
        auto a = decompose(t), b = decompose(t3);
        ASSERT_TRUE(a.ok && b.ok);
        auto scaled = a.dec.terms;
        for (auto& x : scaled)
            x.weight *= -3.0;
        double werr = 0.0;
        EXPECT_LT(match_terms(b.dec.terms, scaled, &werr), 1e-8);
        EXPECT_LT(werr, 1e-8 * 3.0);
    }
}

TEST(Decompose, AcceptedRankIsMinimalAndWithinBounds)
{
    std::mt19937_64 rng(359);
    for (int trial = 0; trial < 10; ++trial) {
        Shape s({2, 2, 3}, {1, 1, 1});
        int r = 2 + trial % 2;
        auto t = expand(s, random_terms(s, r, rng));
        auto rep = decompose(t);
        ASSERT_TRUE(rep.ok);
        EXPECT_EQ(rep.dec.rank(), r);
        EXPECT_LE(rep.bounds.lower, rep.dec.rank());
        EXPECT_LE(rep.dec.rank(), rep.bounds.upper);
        auto lam = build_moment_functional(t);
        for (int rr = 1; rr < r; ++rr)
            for (const auto& c : candidate_bases(lam, rr)) {
                auto ext = propagate_commutation(lam, c.cols, c.rows);
                if (ext.status == ExtensionStatus::Extended)
                    EXPECT_FALSE(flat_extension_check(ext.functional, c.cols, c.rows));
            }
    }
}

TEST(Decompose, CoordinateChangeRecordedAndUndone)
{
    // a1 and b1 vanish on every point, so no block built from them is invertible
    // until the coordinates are mixed
    std::mt19937_64 rng(367);
    Shape s({2, 2, 2}, {1, 1, 1});
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Term> terms;
    for (int i = 0; i < 3; ++i) {
        Point p{{{0.0, u(rng)}, {0.0, u(rng)}, {0.0, u(rng)}}};
        terms.push_back({cplx(1.0 + i), p});
    }
    auto t = expand(s, terms);
    auto rep = decompose(t);
    if (rep.ok && rep.dec.coordinate_change) {
        EXPECT_EQ(rep.dec.change.size(), 3u);
        EXPECT_LT(verify(t, rep.dec), 1e-6);
    }
    ASSERT_TRUE(rep.ok);
    EXPECT_LT(rep.dec.residual, 1e-6);
}

TEST(Decompose, ReduceNoisy)
{
    std::mt19937_64 rng(373);
    std::normal_distribution<double> g;
    Shape s({3, 3, 3}, {1, 1, 1});
    auto terms = random_terms(s, 3, rng);
    auto t = expand(s, terms);
    Polynomial noisy(s);
    for (const auto& m : enumerate_monomials(s, s.degrees))
        noisy.add(m, t.coef(m) + 1e-7 * g(rng));
    DecomposeOptions o;
    o.reduce = true;
    o.tol_resid = 1e-3;
    auto rep = decompose(noisy, o);
    ASSERT_TRUE(rep.ok) << rep.diagnostics;
    EXPECT_TRUE(rep.reduced);
    EXPECT_EQ(rep.reduced_dims, (std::vector<int>{3, 3, 3}));
    EXPECT_EQ(rep.dec.rank(), 3);
    EXPECT_LT(rep.dec.residual, 1e-3);
    EXPECT_LT(match_terms(rep.dec.terms, terms), 1e-3);
}

TEST(Decompose, Deterministic)
{
    std::mt19937_64 rng(379);
    Shape s({3, 3, 5}, {1, 1, 1});
    auto t = expand(s, random_terms(s, 6, rng));
    DecomposeOptions o;
    o.seed = 9;
    auto a = decompose(t, o), b = decompose(t, o);
    ASSERT_TRUE(a.ok && b.ok);
    ASSERT_EQ(a.dec.rank(), b.dec.rank());
    for (int i = 0; i < a.dec.rank(); ++i) {
        EXPECT_EQ(a.dec.terms[i].weight, b.dec.terms[i].weight);
        EXPECT_EQ(a.dec.terms[i].point.coords, b.dec.terms[i].point.coords);
    }
}
