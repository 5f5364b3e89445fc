#include "regsmith/snf.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "regsmith/padic.hpp"

namespace regsmith::exact {

namespace {

// Row/column elementary operations mirrored onto the transforms.
struct Workspace {
    IntMat d, l, r;
    bool with_transforms;

    void row_swap(int i, int j) {
        if (i == j) return;
        for (int c = 0; c < d.cols; ++c) std::swap(d.at(i, c), d.at(j, c));
        if (with_transforms)
            for (int c = 0; c < l.cols; ++c) std::swap(l.at(i, c), l.at(j, c));
    }
    void col_swap(int i, int j) {
        if (i == j) return;
        for (int rr = 0; rr < d.rows; ++rr) std::swap(d.at(rr, i), d.at(rr, j));
        if (with_transforms)
            for (int rr = 0; rr < r.rows; ++rr) std::swap(r.at(rr, i), r.at(rr, j));
    }
    void row_negate(int i) {
        for (int c = 0; c < d.cols; ++c) d.at(i, c) = -d.at(i, c);
        if (with_transforms)
            for (int c = 0; c < l.cols; ++c) l.at(i, c) = -l.at(i, c);
    }
    // row_i -= q * row_k
    void row_sub(int i, int k, const Int& q) {
        if (q == 0) return;
        for (int c = 0; c < d.cols; ++c) d.at(i, c) -= q * d.at(k, c);
        if (with_transforms)
            for (int c = 0; c < l.cols; ++c) l.at(i, c) -= q * l.at(k, c);
    }
    // col_j -= q * col_k
    void col_sub(int j, int k, const Int& q) {
        if (q == 0) return;
        for (int rr = 0; rr < d.rows; ++rr) d.at(rr, j) -= q * d.at(rr, k);
        if (with_transforms)
            for (int rr = 0; rr < r.rows; ++rr) r.at(rr, j) -= q * r.at(rr, k);
    }
    void row_add(int i, int k) {  // row_i += row_k
        for (int c = 0; c < d.cols; ++c) d.at(i, c) += d.at(k, c);
        if (with_transforms)
            for (int c = 0; c < l.cols; ++c) l.at(i, c) += l.at(k, c);
    }

    // Smallest-magnitude nonzero entry of the trailing submatrix.
    bool find_pivot(int k, int& pi, int& pj) const {
        pi = -1;
        pj = -1;
        for (int i = k; i < d.rows; ++i)
            for (int j = k; j < d.cols; ++j) {
                const Int& x = d.at(i, j);
                if (x == 0) continue;
                if (pi < 0 || cmpabs(x, d.at(pi, pj)) < 0) {
                    pi = i;
                    pj = j;
                }
            }
        return pi >= 0;
    }

private:
    static int cmpabs(const Int& a, const Int& b) {
        return mpz_cmpabs(a.get_mpz_t(), b.get_mpz_t());
    }
};

void smith_engine(Workspace& w, std::vector<Int>& diag) {
    const int kmax = std::min(w.d.rows, w.d.cols);
    diag.assign(kmax, Int(0));
    for (int k = 0; k < kmax; ++k) {
        int pi, pj;
        if (!w.find_pivot(k, pi, pj)) break;  // trailing zeros: free part
        w.row_swap(k, pi);
        w.col_swap(k, pj);
        if (w.d.at(k, k) < 0) w.row_negate(k);
        for (;;) {
            // reduce column k by floored quotients; remainder < pivot forces
            // a smaller pivot on the next pass
            bool dirty = false;
            for (int i = 0; i < w.d.rows; ++i) {
                if (i == k || w.d.at(i, k) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), w.d.at(i, k).get_mpz_t(), w.d.at(k, k).get_mpz_t());
                w.row_sub(i, k, q);
                if (w.d.at(i, k) != 0) dirty = true;
            }
            for (int j = 0; j < w.d.cols; ++j) {
                if (j == k || w.d.at(k, j) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), w.d.at(k, j).get_mpz_t(), w.d.at(k, k).get_mpz_t());
                w.col_sub(j, k, q);
                if (w.d.at(k, j) != 0) dirty = true;
            }
            if (dirty) {
                // a strictly smaller nonzero remainder exists in row/col k
                int pi2, pj2;
                w.find_pivot(k, pi2, pj2);
                w.row_swap(k, pi2);
                w.col_swap(k, pj2);
                if (w.d.at(k, k) < 0) w.row_negate(k);
                continue;
            }
            // row and column clean; enforce divisibility of the rest
            bool fixed = false;
            for (int i = k + 1; i < w.d.rows && !fixed; ++i)
                for (int j = k + 1; j < w.d.cols && !fixed; ++j)
                    if (w.d.at(i, j) % w.d.at(k, k) != 0) {
                        w.row_add(k, i);
                        fixed = true;
                    }
            if (!fixed) break;
        }
        diag[k] = w.d.at(k, k);
    }
}

}  // namespace

SmithDecomposition smith_normal_form(const IntMat& a) {
    Workspace w{a, IntMat::identity(a.rows), IntMat::identity(a.cols), true};
    SmithDecomposition out;
    smith_engine(w, out.invariant_factors);
    out.left = std::move(w.l);
    out.right = std::move(w.r);
    return out;
}

std::vector<Int> smith_invariant_factors_naive(const IntMat& a) {
    // First nonzero pivot, no magnitude heuristics, repeated Euclidean
    // reduction. Independent of the optimized engine above.
    IntMat d = a;
    const int kmax = std::min(d.rows, d.cols);
    std::vector<Int> diag(kmax, Int(0));
    for (int k = 0; k < kmax; ++k) {
        // locate any nonzero entry
        int pi = -1, pj = -1;
        for (int i = k; i < d.rows && pi < 0; ++i)
            for (int j = k; j < d.cols; ++j)
                if (d.at(i, j) != 0) {
                    pi = i;
                    pj = j;
                    break;
                }
        if (pi < 0) break;
        for (int c = 0; c < d.cols; ++c) std::swap(d.at(k, c), d.at(pi, c));
        for (int rr = 0; rr < d.rows; ++rr) std::swap(d.at(rr, k), d.at(rr, pj));
        for (;;) {
            bool dirty = false;
            for (int i = k + 1; i < d.rows; ++i) {
                while (d.at(i, k) != 0) {
                    Int q = d.at(i, k) / d.at(k, k);
                    for (int c = k; c < d.cols; ++c) d.at(i, c) -= q * d.at(k, c);
                    if (d.at(i, k) != 0) {
                        for (int c = k; c < d.cols; ++c) std::swap(d.at(k, c), d.at(i, c));
                        dirty = true;
                    }
                }
            }
            for (int j = k + 1; j < d.cols; ++j) {
                while (d.at(k, j) != 0) {
                    Int q = d.at(k, j) / d.at(k, k);
                    for (int rr = k; rr < d.rows; ++rr) d.at(rr, j) -= q * d.at(rr, k);
                    if (d.at(k, j) != 0) {
                        for (int rr = k; rr < d.rows; ++rr) std::swap(d.at(rr, k), d.at(rr, j));
                        dirty = true;
                    }
                }
            }
            if (dirty) continue;
            bool fixed = false;
            for (int i = k + 1; i < d.rows && !fixed; ++i)
                for (int j = k + 1; j < d.cols && !fixed; ++j)
                    if (d.at(i, j) % d.at(k, k) != 0) {
                        for (int c = k; c < d.cols; ++c) d.at(k, c) += d.at(i, c);
                        fixed = true;
                    }
            if (!fixed) break;
        }
        diag[k] = abs(d.at(k, k));
    }
    return diag;
}

int rank_bareiss(const IntMat& a) {
    IntMat b = a;
    int rank = 0;
    Int prev = 1;
    for (int col = 0; col < b.cols && rank < b.rows; ++col) {
        int piv = -1;
        for (int i = rank; i < b.rows; ++i)
            if (b.at(i, col) != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        if (piv != rank)
            for (int j = 0; j < b.cols; ++j) std::swap(b.at(piv, j), b.at(rank, j));
        const Int& pv = b.at(rank, col);
        for (int i = rank + 1; i < b.rows; ++i) {
            for (int j = col + 1; j < b.cols; ++j) {
                Int t = b.at(i, j) * pv - b.at(i, col) * b.at(rank, j);
                mpz_divexact(b.at(i, j).get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
            b.at(i, col) = 0;
        }
        prev = pv;
        ++rank;
    }
    return rank;
}

int rank_exact(const IntMat& a) {
    // Full rank mod a prime certifies full rank over Q; the fixed primes keep
    // runs reproducible. Anything else is settled exactly by Bareiss.
    static constexpr std::uint64_t kPrimes[2] = {2147483647ull, 2147483629ull};
    const int n = std::min(a.rows, a.cols);
    for (std::uint64_t q : kPrimes) {
        std::vector<std::uint64_t> res = a.residues(q);
        if (padic::rank_mod_prime(std::move(res), a.rows, a.cols, q) == n) return n;
    }
    return rank_bareiss(a);
}

namespace {

// Ascending 31-bit primes starting above 2^30, grown on demand; guarded for
// concurrent trial workers.
std::uint64_t nth_crt_prime(std::size_t i) {
    static std::mutex mu;
    static std::vector<std::uint64_t> primes;
    std::lock_guard<std::mutex> lock(mu);
    while (primes.size() <= i) {
        Int p(static_cast<unsigned long>(primes.empty() ? (1ull << 30) : primes.back()));
        mpz_nextprime(p.get_mpz_t(), p.get_mpz_t());
        primes.push_back(p.get_ui());
    }
    return primes[i];
}

std::uint64_t det_mod_prime(const IntMat& a, std::uint64_t q) {
    const int n = a.rows;
    std::vector<std::uint64_t> m = a.residues(q);
    auto at = [&](int i, int j) -> std::uint64_t& { return m[static_cast<std::size_t>(i) * n + j]; };
    std::uint64_t det = 1;
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        for (int i = c; i < n; ++i)
            if (at(i, c) % q != 0) {
                piv = i;
                break;
            }
        if (piv < 0) return 0;
        if (piv != c) {
            for (int j = c; j < n; ++j) std::swap(at(piv, j), at(c, j));
            det = q - det;
        }
        std::uint64_t pv = at(c, c) % q;
        det = det * pv % q;
        std::uint64_t inv = 1, base = pv, e = q - 2;
        while (e) {
            if (e & 1) inv = inv * base % q;
            base = base * base % q;
            e >>= 1;
        }
        for (int i = c + 1; i < n; ++i) {
            std::uint64_t f = at(i, c) % q * inv % q;
            if (!f) continue;
            for (int j = c; j < n; ++j) {
                std::uint64_t sub = f * (at(c, j) % q) % q;
                at(i, j) = (at(i, j) % q + q - sub) % q;
            }
        }
    }
    return det;
}

}  // namespace

bool det_is_zero(const IntMat& a) {
    if (!a.is_square()) throw std::invalid_argument("det_is_zero: matrix must be square");
    const int n = a.rows;
    if (n == 0) return false;  // empty determinant is 1
    // Hadamard: |det| <= prod_i |row_i|; track bits with slack.
    double bits = 8;
    for (int i = 0; i < n; ++i) {
        Int norm2 = 0;
        for (int j = 0; j < n; ++j) norm2 += a.at(i, j) * a.at(i, j);
        if (norm2 > 0)
            bits += 0.5 * static_cast<double>(mpz_sizeinbase(norm2.get_mpz_t(), 2));
    }
    // |det| < 2^bits; det = 0 iff det vanishes mod primes with product > 2^(bits+1)
    double have = 0;
    for (std::size_t i = 0; have <= bits + 1; ++i) {
        std::uint64_t q = nth_crt_prime(i);
        if (det_mod_prime(a, q) != 0) return false;
        have += std::log2(static_cast<double>(q));
    }
    return true;
}

bool in_column_span(const IntMat& b, const std::vector<Int>& v) {
    if (static_cast<int>(v.size()) != b.rows)
        throw std::invalid_argument("in_column_span: vector length mismatch");
    SmithDecomposition snf = smith_normal_form(b);
    const int kmax = static_cast<int>(snf.invariant_factors.size());
    // w = L v must have w_i divisible by d_i (d_i = 0 forces w_i = 0), and
    // w_i = 0 beyond the diagonal.
    for (int i = 0; i < b.rows; ++i) {
        Int w = 0;
        for (int j = 0; j < b.rows; ++j) w += snf.left.at(i, j) * v[j];
        if (i >= kmax || snf.invariant_factors[i] == 0) {
            if (w != 0) return false;
        } else if (w % snf.invariant_factors[i] != 0) {
            return false;
        }
    }
    return true;
}

}  // namespace regsmith::exact
