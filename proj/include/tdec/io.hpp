#ifndef TDEC_IO_HPP
#define TDEC_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tdec/algebra.hpp"
#include "tdec/decompose.hpp"

namespace tdec {

enum class Field { Real, Complex };

struct TensorFile {
    Field field = Field::Real;
    Polynomial tensor;

    bool operator==(const TensorFile& o) const
    {
        return field == o.field && tensor.shape == o.tensor.shape && tensor.terms == o.tensor.terms;
    }
};

struct DecompositionMeta {
    std::uint64_t seed = 0;
    double tol_rank = 1e-8;
    double tol_resid = 1e-6;
    RankBounds bounds;
    bool coordinate_change_applied = false;
    double elapsed_ms = 0.0;
    bool reduced = false;
    std::vector<int> reduced_dims;
    std::string status = "ok";
    std::string diagnostics;

    bool operator==(const DecompositionMeta&) const;
};

struct DecompositionFile {
    Field field = Field::Real;
    std::vector<Term> terms;
    double residual = 0.0;
    DecompositionMeta meta;

    int rank() const { return static_cast<int>(terms.size()); }
    bool operator==(const DecompositionFile&) const;
};

/// Parse errors carry "line L, column C" or the line of the offending term.
TensorFile parse_tensor_file(const std::string& text);
std::string write_tensor_file(const TensorFile& f);

DecompositionFile parse_decomposition_file(const std::string& text);
std::string write_decomposition_file(const DecompositionFile& f);

/// Decomposition with the shape of t; throws if the point sizes disagree.
Decomposition to_decomposition(const DecompositionFile& f, const Shape& s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

/// %.17g
std::string format_double(double x);

}  // namespace tdec

#endif
