#pragma once

#include <cstdint>
#include <vector>

#include "regsmith/abelian.hpp"
#include "regsmith/matrix.hpp"

namespace regsmith::coker {

using abelian::GroupType;
using regsmith::Int;
using regsmith::IntMat;

/// Full cokernel description: cok A = Z^free_rank + torsion, with the image
/// of every standard generator expressed in the invariant-factor
/// decomposition (torsion coordinates reduced mod d_j, free coordinates
/// exact).
struct CokernelReport {
    int n = 0;
    long long free_rank = 0;
    GroupType torsion;
    std::vector<Int> invariant_factors;  // full chain d1 | d2 | ..., zeros last
    std::vector<Int> torsion_orders;     // the d_j > 1, ascending
    std::vector<std::vector<Int>> basis_images;  // n rows: torsion coords then free coords
};

CokernelReport cokernel(const IntMat& a);

/// Sylow-p data of cok A computed by elimination over Z/p^cap with cap grown
/// until the partition stabilizes and exceeds the largest exponent by 2.
/// free_rank reports the infinite part explicitly.
struct PPartReport {
    std::int64_t p = 0;
    GroupType group;  // Sylow-p part of the torsion
    long long free_rank = 0;
    int cap_used = 0;

    abelian::SourceProfile profile() const {
        abelian::SourceProfile prof;
        abelian::PPartProfile pp;
        pp.exponents = group.partition(p);
        pp.unbounded = free_rank;
        prof[p] = pp;
        return prof;
    }
};

PPartReport cokernel_p_part(const IntMat& a, std::int64_t p, int e_hint = 4);

/// True iff det A = 0 over Q (exact; modular full-rank certificate with
/// fraction-free confirmation of deficient ranks).
bool is_singular(const IntMat& a);

/// The coset e1 + E of cok A, E = <e_i - e_j>, as a list of decomposition
/// slots with the coordinates of every standard generator. order == 0 marks
/// a free slot. p != 0 marks a Sylow-p-only structure.
struct PairSlot {
    Int order;               // cyclic order of the slot generator; 0 = free
    std::vector<Int> coeff;  // coordinate of e_i on this slot, i = 0..n-1
};

struct PairStructure {
    int n = 0;
    Int r;
    std::int64_t p = 0;  // 0 = full integral structure
    long long free_rank = 0;
    std::vector<PairSlot> slots;  // nontrivial slots only (order != 1)
    bool conditions_checked = false;
    bool cond1 = false, cond2 = false, cond3 = false;
    Int cond_m;  // the m used for condition (3); equals n
};

/// Exact route: full SNF, conditions (1)-(3) verified by lattice membership.
/// Requires all row and column sums equal to r.
PairStructure pair_structure(const IntMat& a, const Int& r);

/// Sylow-p route used at experiment scale; same slot semantics restricted to
/// the p-part. Conditions are not re-verified per call.
PairStructure pair_structure_p_part(const IntMat& a, const Int& r, std::int64_t p,
                                    int e_hint = 4);

/// Number of surjections cok A -> V carrying the coset e1+E onto B (the
/// target pair's coset). With free_rank > 0 the count factors through the
/// torsion quotient; callers see the flag via ps.free_rank.
Int count_pair_surjections(const PairStructure& ps, const abelian::RMPair& target,
                           const abelian::EnumerationBudget& budget = {});

/// Per-matrix lazy analysis sharing the exact rank across observables.
class TrialAnalyzer {
public:
    explicit TrialAnalyzer(const IntMat& a) : a_(a) {}

    long long free_rank();
    bool singular() { return free_rank() > 0; }
    const PPartReport& p_part(std::int64_t p, int e_hint = 4);
    PairStructure pair_p_part(const Int& r, std::int64_t p, int e_hint = 4);

private:
    const IntMat& a_;
    long long free_ = -1;
    std::map<std::int64_t, PPartReport> parts_;
};

}  // namespace regsmith::coker
