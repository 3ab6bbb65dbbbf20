#ifndef TDEC_EIGEN_HPP
#define TDEC_EIGEN_HPP

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "tdec/moment.hpp"

namespace tdec {

/// Multiplication operators of A = R / I in the basis B, keyed by variable index.
struct MultiplicationFamily {
    Shape shape;
    MonomialBasis basis;
    std::map<int, Eigen::MatrixXcd> matrices;
};

struct RootSet {
    std::vector<Point> points;
    // evaluations of B at each root, entry on 1 scaled to 1
    std::vector<Eigen::VectorXcd> eigvecs;
    std::vector<std::map<int, cplx>> eigenvalues;
    bool simple = false;
    // smallest separation between joint eigenvalue tuples, relative
    double separation = 0.0;
};

/// (H^{B',B})^{-1} H^{B',B}_{x_v * lambda}
Eigen::MatrixXcd multiplication_matrix(const MomentFunctional& lambda, const MonomialBasis& b,
                                       const MonomialBasis& bp, int var);

RootSet joint_eigenvectors(const MultiplicationFamily& f, std::uint64_t seed);

/// Coordinates from eigenvector entries on the variables of B, then from the
/// eigenvalues of the family. Others stay missing (NaN).
RootSet read_coordinates(const RootSet& roots, const MultiplicationFamily& f);

/// Variables without a coordinate in every point of the set.
std::vector<int> missing_variables(const Shape& s, const RootSet& roots);

/// Fills the listed variables from the moments lambda(x_v m) = sum_i w_i m(z_i) z_i[v]
/// over the monomials m that only involve recovered coordinates.
RootSet recover_missing_coordinates(const MomentFunctional& lambda, const RootSet& roots,
                                    const std::vector<cplx>& weights,
                                    const std::vector<int>& missing);

struct WeightFit {
    std::vector<cplx> weights;
    double residual = 0.0;  // relative, over the coefficients used
    int equations = 0;
};

/// Least squares on T_a = sum_i w_i C(delta, a) z_i^a, restricted to the
/// coefficients whose monomials only involve coordinates known in every point.
WeightFit solve_weights(const Polynomial& t, const std::vector<Point>& points);

}  // namespace tdec

#endif
