#pragma once

#include <cstdint>
#include <vector>

namespace regsmith::padic {

/// Diagonalization of an integer matrix over Z/p^cap by unimodular row and
/// column operations. Reported valuations are exact p-adic valuations of the
/// invariant factors whenever they are < cap; a value of cap means
/// "valuation at least cap" (including genuinely infinite, i.e. zero factors).
struct SmithResult {
    std::int64_t p = 0;
    int cap = 0;
    std::uint64_t modulus = 0;  // p^cap
    int rows = 0, cols = 0;
    std::vector<int> val;  // size min(rows, cols), weakly increasing, clamped to cap
    // Row-major rows x rows left transform mod p^cap (only if requested):
    // left * A * right = diag(p^val * unit) over Z/p^cap.
    std::vector<std::uint64_t> left;

    int count_at_least(int v) const {
        int c = 0;
        for (int x : val)
            if (x >= v) ++c;
        return c;
    }
    /// Exponents 1 <= v < cap, weakly decreasing (partition order).
    std::vector<int> finite_exponents() const;
};

/// Reusable engine; scratch buffers survive across run() calls.
class SmithEngine {
public:
    SmithEngine(std::int64_t p, int cap);

    std::int64_t p() const { return p_; }
    int cap() const { return cap_; }
    std::uint64_t modulus() const { return mod_; }

    /// a: row-major rows x cols, entries already reduced mod p^cap.
    /// The contents of a are consumed (used as workspace).
    SmithResult run(std::vector<std::uint64_t> a, int rows, int cols, bool want_left);

    /// In-place variant over a caller-owned buffer (size rows*cols); left may
    /// be null. Returns valuations through val_out (resized).
    void run_inplace(std::uint64_t* a, int rows, int cols, std::vector<int>& val_out,
                     std::vector<std::uint64_t>* left_out);

    std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) const;
    std::uint64_t reduce_int64(std::int64_t x) const;  // handles negatives
    int valuation(std::uint64_t x) const;              // cap for x == 0
    std::uint64_t unit_inverse(std::uint64_t u) const;

private:
    std::int64_t p_;
    int cap_;
    std::uint64_t mod_;
    bool pow2_;
    bool small_;  // modulus <= 2^32: plain 64-bit products suffice
};

/// Largest e with p^e <= 2^62 (usable cap bound for SmithEngine).
int max_cap(std::int64_t p);

/// Rank of a square/rectangular matrix mod a prime q < 2^31.
/// Entries given as residues mod q.
int rank_mod_prime(std::vector<std::uint64_t> a, int rows, int cols, std::uint64_t q);

}  // namespace regsmith::padic
