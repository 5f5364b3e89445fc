#pragma once

#include <vector>

#include "regsmith/matrix.hpp"

namespace regsmith::exact {

using regsmith::Int;
using regsmith::IntMat;

/// left * A * right = diag(invariant_factors), with left and right unimodular.
/// invariant_factors has length min(rows, cols), forms a divisibility chain
/// d1 | d2 | ..., entries nonnegative, trailing zeros = free rank.
struct SmithDecomposition {
    std::vector<Int> invariant_factors;
    IntMat left, right;

    int free_rank() const {
        int k = 0;
        for (const Int& d : invariant_factors)
            if (d == 0) ++k;
        return k;
    }
};

/// Exact SNF over Z; pivot rule: smallest nonzero magnitude, with row/column
/// reduction passes to limit entry growth.
SmithDecomposition smith_normal_form(const IntMat& a);

/// Textbook SNF without pivot optimization, pure Euclidean steps, no
/// transforms. Kept as an independent oracle for the optimized engine.
std::vector<Int> smith_invariant_factors_naive(const IntMat& a);

/// Exact rank over Q. Full-rank certificates come from ranks mod fixed
/// primes; deficient ranks are confirmed by fraction-free (Bareiss)
/// elimination over Z.
int rank_exact(const IntMat& a);

/// Fraction-free rank only (no modular fast path).
int rank_bareiss(const IntMat& a);

/// Exact test det(a) == 0 for square a: determinants mod enough 31-bit
/// primes to exceed twice the Hadamard bound (CRT certificate).
bool det_is_zero(const IntMat& a);

/// Is v in the column span (over Z) of B?
bool in_column_span(const IntMat& b, const std::vector<Int>& v);

}  // namespace regsmith::exact
