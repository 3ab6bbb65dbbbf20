#ifndef TDEC_EXTENSION_HPP
#define TDEC_EXTENSION_HPP

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "tdec/moment.hpp"

namespace tdec {

/// lead - sum_j tail_j b_j lies in the kernel of the Hankel operator.
struct BorderRelation {
    Monomial lead;
    Eigen::VectorXcd tail;
};

enum class ExtensionStatus { Extended, RankDeficient, Inconsistent };

const char* to_string(ExtensionStatus s);

struct ExtensionResult {
    ExtensionStatus status = ExtensionStatus::RankDeficient;
    // Known moments plus every resolved parameter; on Extended also the
    // moments of B'+ * B+ through the normal form.
    MomentFunctional functional;
    std::vector<BorderRelation> relations;
    double commutator_residual = 0.0;
    double system_residual = 0.0;
    // Variables whose multiplication matrix is fully resolved, with the matrices.
    std::map<int, Eigen::MatrixXcd> matrices;
    int rounds = 0;
    int unresolved = 0;
};

struct ExtensionOptions {
    double tol_consistency = 1e-6;
    double tol_rank = 1e-9;
    double max_condition = 1e10;
    // Nonzero: shuffle the order in which commutation equations are stacked.
    std::uint64_t order_seed = 0;
};

bool flat_extension_check(const MomentFunctional& lambda, const MonomialBasis& b,
                          const MonomialBasis& bp, double tol = 1e-8);

std::vector<BorderRelation> known_column_relations(const MomentFunctional& lambda,
                                                   const MonomialBasis& b, const MonomialBasis& bp,
                                                   const std::vector<Monomial>& targets);

ExtensionResult propagate_commutation(const MomentFunctional& lambda, const MonomialBasis& b,
                                      const MonomialBasis& bp, const ExtensionOptions& opt = {});

double commutator_residual(const std::vector<Eigen::MatrixXcd>& ms);

/// H+ laid out as [[H, G'], [G^t, J]] with H the leading r x r block.
bool rank_factor_check(const Eigen::MatrixXcd& hplus, int r, double tol);
bool rank_factor_check(const HankelMatrix& hplus, int r, double tol);

}  // namespace tdec

#endif
