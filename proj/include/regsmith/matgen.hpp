#pragma once

#include <cstdint>
#include <string>

#include "regsmith/matrix.hpp"
#include "regsmith/rng.hpp"

namespace regsmith::matgen {

enum class ModelKind {
    PermSum,                  // sum of r uniform permutation matrices
    MatchingUnion,            // union of r uniform perfect matchings (symmetric)
    ConfigModel,              // configuration-model multigraph
    UniformSimpleRegular,     // configuration model conditioned simple
    DirectedUnion,            // union of r uniform loopless 1-regular digraphs
    DirectedUnionSimple,      // same, conditioned on no multiple edges
    HaarSymmetric,            // symmetric, entries uniform mod p^e
};

std::string model_kind_name(ModelKind k);
ModelKind parse_model_kind(const std::string& name);

struct ModelSpec {
    ModelKind kind = ModelKind::PermSum;
    int n = 0;
    int r = 0;
    std::int64_t p = 0;  // HaarSymmetric only
    int e = 0;           // HaarSymmetric only

    /// Throws std::invalid_argument on parity/feasibility violations that are
    /// detectable up front.
    void validate() const;
};

enum class ConfigCondition { None, NoLoops, Simple };
enum class DirectedCondition { None, NoMulti };

inline constexpr long long kDefaultRetryCap = 1'000'000;

/// Uniform random permutation of {0..n-1} by Fisher-Yates, written to perm.
void sample_permutation(int n, Xoshiro256& rng, std::vector<int>& perm);

/// D_n: sum of r independent uniform permutation matrices.
void sample_perm_sum(int n, int r, Xoshiro256& rng, IntMat& out);

/// C_n: union of r independent uniform perfect matchings; symmetric, zero
/// diagonal. Requires n even.
void sample_matching_union(int n, int r, Xoshiro256& rng, IntMat& out);

/// Configuration-model multigraph on n vertices with nr half-edges; loops add
/// 2 to the diagonal. Conditions resample until no loops / simple.
void sample_config_model(int n, int r, Xoshiro256& rng, IntMat& out,
                         ConfigCondition condition = ConfigCondition::None,
                         long long retry_cap = kDefaultRetryCap);

/// Sum of r uniform fixed-point-free permutation matrices (rejection from
/// uniform permutations). NoMulti resamples until all entries are <= 1.
void sample_directed_union(int n, int r, Xoshiro256& rng, IntMat& out,
                           DirectedCondition condition = DirectedCondition::None,
                           long long retry_cap = kDefaultRetryCap);

/// Symmetric matrix with entries on and above the diagonal independent
/// uniform in {0, ..., p^e - 1}.
void sample_haar_symmetric(int n, std::int64_t p, int e, Xoshiro256& rng, IntMat& out);

/// Dispatch on ModelSpec.
void sample(const ModelSpec& spec, Xoshiro256& rng, IntMat& out,
            long long retry_cap = kDefaultRetryCap);

IntMat sample(const ModelSpec& spec, Xoshiro256& rng);

}  // namespace regsmith::matgen
