#ifndef TDEC_DECOMPOSE_HPP
#define TDEC_DECOMPOSE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdec/algebra.hpp"

namespace tdec {

struct Term {
    cplx weight;
    Point point;
};

struct Decomposition {
    Shape shape;
    std::vector<Term> terms;
    double residual = 0.0;
    bool coordinate_change = false;
    // per group (n_i+1) x (n_i+1) matrix A with T_work(y) = T(A y); empty when unused
    std::vector<Eigen::MatrixXcd> change;

    int rank() const { return static_cast<int>(terms.size()); }
};

struct RankBounds {
    int lower = 0;
    int upper = 0;  // Atkinson bound for order-3 multilinear shapes, else ceil(ambient / 2)
    bool upper_atkinson = false;
    int expected = 0;
    int kruskal = 0;
};

/// sum_i w_i prod_g (1 + z_{g,i} . x_g)^{delta_g}
Polynomial expand(const Shape& s, const std::vector<Term>& terms);
double verify(const Polynomial& t, const Decomposition& d);

/// Largest numerical rank over the catalecticant blocks of T*, the group
/// flattenings among them.
int rank_lower_bound(const Polynomial& t, double tol = 1e-8);
/// n1 + n2 floor(n3 / 2) for full dimensions n1 <= n2 <= n3.
int rank_upper_bound(std::array<int, 3> dims);
/// ceil(ambient / (1 + sum n_i)), the dimension count over full dimensions.
int expected_rank(const Shape& s);
/// floor(sum (n_i + 1) / 2) - 1 with generic Kruskal ranks; 0 below order 3.
int kruskal_bound(const Shape& s);
RankBounds rank_bounds(const Polynomial& t, double tol = 1e-8);

/// Dense homogeneous array of a multilinear tensor, first index fastest.
std::vector<cplx> to_array(const Polynomial& t);
Polynomial from_array(const Shape& s, const std::vector<cplx>& a);

std::vector<int> multilinear_rank(const Polynomial& t, double tol = 1e-8);

struct Tucker {
    Polynomial core;
    std::vector<Eigen::MatrixXcd> factors;  // (n_i+1) x target_i, orthonormal columns
    double error = 0.0;                     // relative
};

Tucker hosvd_reduce(const Polynomial& t, std::vector<int> target, int max_iter = 0);
Decomposition map_back(const Decomposition& core_dec, const std::vector<Eigen::MatrixXcd>& factors,
                       const Polynomial& original);

/// T(A y) per group.
Polynomial change_coordinates(const Polynomial& t, const std::vector<Eigen::MatrixXcd>& a);
/// Terms of T(A y) mapped to terms of T.
std::vector<Term> undo_change(const Shape& s, const std::vector<Term>& terms,
                              const std::vector<Eigen::MatrixXcd>& a);

struct DecomposeOptions {
    int max_rank = 0;  // 0: min(Atkinson, ceil(ambient/2), 30)
    double tol_rank = 1e-8;
    double tol_resid = 1e-6;
    std::uint64_t seed = 0;
    bool reduce = false;
    int max_coordinate_changes = 3;
    std::function<void(const std::string&)> log;
};

struct DecomposeReport {
    bool ok = false;
    Decomposition dec;
    RankBounds bounds;
    double best_residual = -1.0;
    int max_rank = 0;
    bool reduced = false;
    std::vector<int> reduced_dims;
    std::string diagnostics;
};

DecomposeReport decompose(const Polynomial& t, const DecomposeOptions& opt = {});

}  // namespace tdec

#endif
