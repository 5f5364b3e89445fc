#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace regsmith::abelian {

using Int = mpz_class;

/// Canonical isomorphism class of a finite abelian group.
///
/// Stored as the primary decomposition: for each prime p a weakly decreasing
/// partition of exponents, so the group is the direct sum of Z/p^e over all
/// (p, e). The empty map is the trivial group. Two GroupType values compare
/// equal exactly when the groups are isomorphic.
class GroupType {
public:
    GroupType() = default;

    /// Builds the type of a direct sum of cyclic groups Z/n_i, n_i >= 2.
    /// Throws std::invalid_argument on any order < 2.
    static GroupType from_cyclic_orders(const std::vector<Int>& orders);

    /// Builds from an explicit prime -> partition map (validated).
    static GroupType from_partitions(std::map<std::int64_t, std::vector<int>> parts);

    /// p-group shortcut: partition at a single prime.
    static GroupType p_group(std::int64_t p, std::vector<int> partition);

    static GroupType trivial() { return GroupType{}; }

    bool is_trivial() const { return parts_.empty(); }
    Int order() const;

    /// Exponents at p, weakly decreasing; empty if p does not divide the order.
    const std::vector<int>& partition(std::int64_t p) const;
    const std::map<std::int64_t, std::vector<int>>& partitions() const { return parts_; }
    std::vector<std::int64_t> primes() const;

    /// Sylow p-part as its own GroupType.
    GroupType p_part(std::int64_t p) const;

    /// Cyclic factor orders p^e, primes ascending and exponents descending
    /// within each prime. This fixed order is the coordinate convention for
    /// Element values everywhere.
    std::vector<Int> cyclic_orders() const;

    /// Number of cyclic factors.
    int rank() const;

    bool operator==(const GroupType& o) const { return parts_ == o.parts_; }
    bool operator!=(const GroupType& o) const { return parts_ != o.parts_; }
    bool operator<(const GroupType& o) const { return parts_ < o.parts_; }

    /// Renders in the CLI grammar, e.g. "Z2^2*Z8" or "triv".
    std::string to_string() const;

    /// Parses the CLI grammar: product of terms Z<n> with optional ^<k>,
    /// or "triv". Round-trips with to_string().
    static GroupType parse(const std::string& text);

private:
    std::map<std::int64_t, std::vector<int>> parts_;
};

/// Exact factorization helper: trial division then Pollard rho. Every prime
/// factor must fit in 64 bits and the rho iteration budget must suffice,
/// otherwise a CapacityError is thrown.
std::map<std::int64_t, int> factorize(const Int& n);

/// p-adic valuation of n (n != 0).
int valuation(const Int& n, std::int64_t p);

}  // namespace regsmith::abelian
