#include <gtest/gtest.h>

#include "support.hpp"

using namespace tdec;
using namespace tdec::test;

namespace {

std::string message_of(const std::string& text)
{
    try {
        parse_tensor_file(text);
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

double awkward(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_int_distribution<int> e(-300, 300);
    return std::ldexp(u(rng), e(rng) / 10);
}

}  // namespace

TEST(TensorFile, RoundTripIsExact)
{
    std::mt19937_64 rng(401);
    for (int trial = 0; trial < 30; ++trial) {
        Shape s({1 + trial % 3, 1 + trial % 2}, {1 + trial % 2, 1 + trial % 3});
        TensorFile f;
        f.field = trial % 2 ? Field::Complex : Field::Real;
        f.tensor = Polynomial(s);
        for (const auto& m : enumerate_monomials(s, s.degrees))
            f.tensor.add(m, cplx(awkward(rng), f.field == Field::Complex ? awkward(rng) : 0.0));
        std::string text = write_tensor_file(f);
        TensorFile g = parse_tensor_file(text);
        EXPECT_TRUE(f == g);
        EXPECT_EQ(write_tensor_file(g), text);
    }
}

TEST(TensorFile, FixturesParse)
{
    auto f = load_tensor("example2.json");
    EXPECT_EQ(f.field, Field::Real);
    EXPECT_EQ(f.tensor.shape.dims, (std::vector<int>{3, 3, 5}));
    EXPECT_EQ(f.tensor.coef(one(f.tensor.shape)), cplx(-6.0));
}

TEST(TensorFile, ComplexPairs)
{
    auto f = parse_tensor_file(R"({"dims": [1], "degrees": [1], "field": "complex",
        "terms": [{"exp": [[0]], "coef": [1.5, -2]}, {"exp": [[1]], "coef": 3}]})");
    Shape s({1}, {1});
    EXPECT_EQ(f.tensor.coef(one(s)), cplx(1.5, -2.0));
    EXPECT_EQ(f.tensor.coef(variable(s, 0)), cplx(3.0, 0.0));
}

TEST(TensorFile, MalformedJsonHasLineAndColumn)
{
    std::string msg = message_of("{\"dims\": [1],\n\"degrees\": [1],\n\"terms\": [\n{\"exp\": [[1]], \"coef\": 1},");
    EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(TensorFile, ShapeViolationsPointAtTheTerm)
{
    std::string head = "{\"dims\": [2], \"degrees\": [1], \"field\": \"real\",\n\"terms\": [\n";
    std::string ok = "{\"exp\": [[0, 0]], \"coef\": 1},\n";
    auto check = [&](const std::string& bad, const std::string& words) {
        std::string msg = message_of(head + ok + bad + "]}");
        EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
        EXPECT_NE(msg.find(words), std::string::npos) << msg;
    };
    check("{\"exp\": [[1, 1]], \"coef\": 1}\n", "degree");
    check("{\"exp\": [[1]], \"coef\": 1}\n", "exponent list");
    check("{\"exp\": [[0, 0]], \"coef\": 1}\n", "duplicate");
    check("{\"exp\": [[1, 0]], \"coef\": [1, 2]}\n", "complex");
    check("{\"exp\": [[1, 0]]}\n", "coef");
    check("{\"exp\": [[1, 0], [0]], \"coef\": 1}\n", "exponent lists");
}

TEST(TensorFile, BadHeader)
{
    EXPECT_NE(message_of("[1, 2]").find("object"), std::string::npos);
    EXPECT_NE(message_of("{\"dims\": [0], \"degrees\": [1], \"terms\": []}"), "");
    EXPECT_NE(message_of("{\"dims\": [1], \"terms\": []}").find("degrees"), std::string::npos);
    EXPECT_NE(message_of("{\"dims\": [1], \"degrees\": [1], \"field\": \"quaternion\", \"terms\": []}")
                  .find("field"),
              std::string::npos);
}

TEST(DecompositionFile, RoundTripIsExact)
{
    std::mt19937_64 rng(409);
    for (int trial = 0; trial < 20; ++trial) {
        Shape s({1 + trial % 3, 2}, {1, 1 + trial % 2});
        DecompositionFile f;
        f.field = trial % 2 ? Field::Complex : Field::Real;
        for (int i = 0; i < 1 + trial % 4; ++i) {
            Term t;
            t.weight = cplx(awkward(rng), f.field == Field::Complex ? awkward(rng) : 0.0);
            for (int g = 0; g < s.k(); ++g) {
                std::vector<cplx> z;
                for (int l = 0; l < s.dims[g]; ++l)
                    z.emplace_back(awkward(rng), f.field == Field::Complex ? awkward(rng) : 0.0);
                t.point.coords.push_back(z);
            }
            f.terms.push_back(t);
        }
        f.residual = std::abs(awkward(rng));
        f.meta.seed = rng();
        f.meta.tol_rank = awkward(rng);
        f.meta.tol_resid = awkward(rng);
        f.meta.bounds = {1 + trial, 2 + trial, trial % 2 == 0, 3, 4};
        f.meta.coordinate_change_applied = trial % 3 == 0;
        f.meta.elapsed_ms = std::abs(awkward(rng));
        f.meta.reduced = trial % 2 == 1;
        if (f.meta.reduced)
            f.meta.reduced_dims = {2, 3, 2};
        f.meta.status = trial % 2 ? "ok" : "no-decomposition";
        f.meta.diagnostics = "r=3: \"quoted\"\nnext";
        std::string text = write_decomposition_file(f);
        auto g = parse_decomposition_file(text);
        EXPECT_TRUE(f == g);
        EXPECT_EQ(write_decomposition_file(g), text);
        EXPECT_EQ(to_decomposition(g, s).rank(), f.rank());
    }
}

TEST(DecompositionFile, RankMustMatchTerms)
{
    std::string text = R"({"rank": 2, "field": "real", "terms": [{"weight": 1, "points": [[1]]}],
        "residual": 0, "meta": {}})";
    EXPECT_THROW(parse_decomposition_file(text), Error);
}

TEST(DecompositionFile, NegativeResidualRejected)
{
    std::string text = R"({"rank": 0, "field": "real", "terms": [], "residual": -1, "meta": {}})";
    EXPECT_THROW(parse_decomposition_file(text), Error);
}

TEST(DecompositionFile, ShapeMismatch)
{
    auto d = load_decomposition("example2.truth.json");
    EXPECT_THROW(to_decomposition(d, Shape({3, 3, 3}, {1, 1, 1})), Error);
    EXPECT_EQ(to_decomposition(d, Shape({3, 3, 5}, {1, 1, 1})).rank(), 6);
}

TEST(FormatDouble, SeventeenDigits)
{
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(0.0), "0");
    EXPECT_EQ(format_double(-2.0), "-2");
    EXPECT_EQ(format_double(1e-8), "1e-08");
}
