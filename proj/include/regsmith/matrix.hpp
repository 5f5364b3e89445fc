#pragma once

#include <cstdint>
#include <vector>

#include <gmpxx.h>

namespace regsmith {

using Int = mpz_class;

/// Dense matrix of arbitrary-precision integers, row-major.
struct IntMat {
    int rows = 0, cols = 0;
    std::vector<Int> a;

    IntMat() = default;
    IntMat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}
    static IntMat square(int n) { return IntMat(n, n); }
    static IntMat identity(int n) {
        IntMat m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }

    Int& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    const Int& at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
    bool is_square() const { return rows == cols; }
    void resize(int r, int c) {
        rows = r;
        cols = c;
        a.assign(static_cast<std::size_t>(r) * c, Int(0));
    }
    void set_zero() {
        for (Int& x : a) x = 0;
    }
    bool operator==(const IntMat& o) const { return rows == o.rows && cols == o.cols && a == o.a; }

    /// Entries reduced into [0, m), as uint64 residues.
    std::vector<std::uint64_t> residues(std::uint64_t m) const {
        std::vector<std::uint64_t> r(a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            r[i] = mpz_fdiv_ui(a[i].get_mpz_t(), static_cast<unsigned long>(m));
        return r;
    }
};

}  // namespace regsmith
