#ifndef TDEC_ALGEBRA_HPP
#define TDEC_ALGEBRA_HPP

#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdec {

using cplx = std::complex<double>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Variable groups x_1..x_k; group i has dims[i] affine variables and the
/// tensor is of degree degrees[i] in it.
struct Shape {
    std::vector<int> dims;
    std::vector<int> degrees;

    Shape() = default;
    Shape(std::vector<int> d, std::vector<int> deg);

    int k() const { return static_cast<int>(dims.size()); }
    int nvars() const;
    int offset(int group) const;
    int group_of(int var) const;
    bool multilinear() const;
    // prod_i C(n_i + d_i, d_i)
    std::uint64_t ambient() const;
    std::string var_name(int var) const;

    bool operator==(const Shape&) const = default;
};

/// Exponents of all variables, group-major. The ordering is the canonical
/// one: total degree first, then lexicographic with a1 > a2 > ... > b1 > ...
struct Monomial {
    std::vector<int> e;

    Monomial() = default;
    explicit Monomial(std::vector<int> exps) : e(std::move(exps)) {}

    int degree() const;
    int group_degree(const Shape& s, int group) const;
    bool is_one() const;

    bool operator==(const Monomial&) const = default;
    bool operator<(const Monomial& o) const;
};

Monomial one(const Shape& s);
Monomial variable(const Shape& s, int var);
/// Builds a monomial from per-group exponent lists.
Monomial from_groups(const Shape& s, const std::vector<std::vector<int>>& exps);
std::vector<std::vector<int>> to_groups(const Shape& s, const Monomial& m);
Monomial monomial_mul(const Monomial& a, const Monomial& b);
// |alpha_i| <= delta_i for every group
bool within(const Shape& s, const Monomial& m);
std::string to_string(const Shape& s, const Monomial& m);

/// delta! / (alpha_1! ... alpha_n! (delta - |alpha|)!), exact; throws on overflow.
std::uint64_t multinomial(int delta, const int* alpha, int n);
std::uint64_t multinomial(const Shape& s, const Monomial& m);

struct Polynomial {
    Shape shape;
    std::map<Monomial, cplx> terms;

    Polynomial() = default;
    explicit Polynomial(Shape s) : shape(std::move(s)) {}

    void add(const Monomial& m, cplx c);
    cplx coef(const Monomial& m) const;
    double norm() const;
    bool within_degree() const;
};

/// Affine point, one coordinate vector per group. Missing coordinates are NaN.
struct Point {
    std::vector<std::vector<cplx>> coords;

    bool complete() const;
};

Point make_point(const Shape& s);
bool is_missing(cplx c);
cplx eval_monomial(const Shape& s, const Monomial& m, const Point& z);
cplx evaluate_poly(const Polynomial& p, const Point& z);

/// c + sum_p lin[p] h_p. Degree at most one in the parameters.
struct Affine {
    cplx c{0.0, 0.0};
    std::map<int, cplx> lin;

    Affine() = default;
    Affine(cplx v) : c(v) {}
    static Affine param(int id);

    bool known() const { return lin.empty(); }
    Affine& operator+=(const Affine& o);
    Affine& operator*=(cplx s);
    bool operator==(const Affine&) const = default;
};

Affine operator+(Affine a, const Affine& b);
Affine operator*(cplx s, Affine a);
// Product of two affine expressions; throws if both carry parameters.
Affine mul(const Affine& a, const Affine& b);

/// Partial linear form on monomials. Entries are constants (Known), bare
/// parameters (Unknown) or affine combinations of parameters.
struct MomentFunctional {
    Shape shape;
    std::map<Monomial, Affine> entries;

    MomentFunctional() = default;
    explicit MomentFunctional(Shape s) : shape(std::move(s)) {}

    const Affine* find(const Monomial& m) const;
    const Affine& at(const Monomial& m) const;
    int next_param() const;
    // Each monomial of ms that has no entry becomes a new parameter, in canonical order.
    MomentFunctional with_parameters(std::vector<Monomial> ms) const;
};

MomentFunctional star_action(const Polynomial& p, const MomentFunctional& lambda,
                             const std::vector<Monomial>& domain);
MomentFunctional evaluation_functional(const Shape& s, const Point& z,
                                       const std::vector<Monomial>& domain);
cplx apolar_pairing(const Polynomial& f, const Polynomial& g);

}  // namespace tdec

#endif
