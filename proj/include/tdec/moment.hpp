#ifndef TDEC_MOMENT_HPP
#define TDEC_MOMENT_HPP

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tdec/algebra.hpp"

namespace tdec {

/// Ordered list of distinct monomials. Bases used for Hankel blocks are
/// connected to 1.
struct MonomialBasis {
    std::vector<Monomial> mons;

    int size() const { return static_cast<int>(mons.size()); }
    int index(const Monomial& m) const;  // -1 if absent
    bool contains(const Monomial& m) const { return index(m) >= 0; }
    bool operator==(const MonomialBasis&) const = default;
};

bool connected_to_one(const MonomialBasis& b);

MomentFunctional build_moment_functional(const Polynomial& t);
Polynomial functional_to_tensor(const MomentFunctional& lambda, const Shape& s);

/// All monomials with |alpha_i| <= bounds[i], canonical order.
std::vector<Monomial> enumerate_monomials(const Shape& s, const std::vector<int>& bounds);

/// B+ = B u x_1 B u ... u x_n B, canonical order.
MonomialBasis basis_plus(const Shape& s, const MonomialBasis& b);
/// B+ \ B, canonical order.
MonomialBasis border(const Shape& s, const MonomialBasis& b);
/// B followed by its border: the layout with the B x B block in the top-left corner.
MonomialBasis block_plus(const Shape& s, const MonomialBasis& b);

/// Entry (i,j) is lambda(rows_i * cols_j).
struct HankelMatrix {
    MonomialBasis rows;
    MonomialBasis cols;
    std::vector<Affine> entries;  // row-major

    const Affine& operator()(int i, int j) const { return entries[i * cols.size() + j]; }
    bool known() const;
    bool known(int i, int j) const { return (*this)(i, j).known(); }
    // Numeric values; throws if a parameter is still present.
    Eigen::MatrixXcd values() const;
    std::vector<int> params() const;
};

/// Monomials absent from lambda become parameters, shared between equal
/// products and numbered in canonical order after those already present.
HankelMatrix hankel(const MomentFunctional& lambda, const MonomialBasis& rows,
                    const MonomialBasis& cols);
HankelMatrix shifted_hankel(const MomentFunctional& lambda, int var, const MonomialBasis& rows,
                            const MonomialBasis& cols);

/// Number of singular values above tol * sigma_max.
int numerical_rank(const Eigen::MatrixXcd& m, double tol);
double condition_number(const Eigen::MatrixXcd& m);

struct BasisPair {
    MonomialBasis cols;  // B
    MonomialBasis rows;  // B'
};

struct SelectOptions {
    double tol_rank = 1e-8;
    double max_condition = 1e10;
};

/// Candidate bases of size r with a fully known, well conditioned block,
/// one per admissible split of the degrees between rows and columns.
std::vector<BasisPair> candidate_bases(const MomentFunctional& lambda, int r,
                                       const SelectOptions& opt = {});
/// First candidate, or nothing when no invertible block of size r exists.
std::optional<BasisPair> select_bases(const MomentFunctional& lambda, int r,
                                      const SelectOptions& opt = {});

}  // namespace tdec

#endif
