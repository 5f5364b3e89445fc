#include "regsmith/padic.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <stdexcept>

namespace regsmith::padic {

int max_cap(std::int64_t p) {
    int e = 0;
    unsigned __int128 m = 1;
    while (m * static_cast<unsigned __int128>(p) <= (static_cast<unsigned __int128>(1) << 62)) {
        m *= static_cast<unsigned __int128>(p);
        ++e;
    }
    return e;
}

std::vector<int> SmithResult::finite_exponents() const {
    std::vector<int> out;
    for (int v : val)
        if (v >= 1 && v < cap) out.push_back(v);
    std::sort(out.begin(), out.end(), std::greater<int>());
    return out;
}

SmithEngine::SmithEngine(std::int64_t p, int cap) : p_(p), cap_(cap) {
    if (p < 2 || cap < 1) throw std::invalid_argument("SmithEngine: need p >= 2, cap >= 1");
    if (cap > max_cap(p)) throw std::invalid_argument("SmithEngine: p^cap exceeds 2^62");
    unsigned __int128 m = 1;
    for (int i = 0; i < cap; ++i) m *= static_cast<unsigned __int128>(p);
    mod_ = static_cast<std::uint64_t>(m);
    pow2_ = (p == 2);
    small_ = mod_ <= (1ull << 32);
}

std::uint64_t SmithEngine::mulmod(std::uint64_t a, std::uint64_t b) const {
    if (pow2_) return (a * b) & (mod_ - 1);
    if (small_) return (a * b) % mod_;
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % mod_);
}

std::uint64_t SmithEngine::reduce_int64(std::int64_t x) const {
    std::int64_t m = static_cast<std::int64_t>(mod_);
    std::int64_t r = x % m;
    if (r < 0) r += m;
    return static_cast<std::uint64_t>(r);
}

int SmithEngine::valuation(std::uint64_t x) const {
    if (x == 0) return cap_;
    if (pow2_) return std::min(cap_, std::countr_zero(x));
    int v = 0;
    while (x % static_cast<std::uint64_t>(p_) == 0) {
        x /= static_cast<std::uint64_t>(p_);
        ++v;
    }
    return v;
}

std::uint64_t SmithEngine::unit_inverse(std::uint64_t u) const {
    // Extended Euclid against the modulus; u must be a unit.
    std::int64_t m = static_cast<std::int64_t>(mod_);
    std::int64_t a = static_cast<std::int64_t>(u % mod_), b = m;
    std::int64_t x0 = 1, x1 = 0;
    while (b != 0) {
        std::int64_t q = a / b;
        std::int64_t t = a - q * b;
        a = b;
        b = t;
        t = x0 - q * x1;
        x0 = x1;
        x1 = t;
    }
    assert(a == 1 && "unit_inverse: argument not a unit");
    x0 %= m;
    if (x0 < 0) x0 += m;
    return static_cast<std::uint64_t>(x0);
}

SmithResult SmithEngine::run(std::vector<std::uint64_t> a, int rows, int cols, bool want_left) {
    SmithResult res;
    res.p = p_;
    res.cap = cap_;
    res.modulus = mod_;
    res.rows = rows;
    res.cols = cols;
    if (want_left) {
        res.left.assign(static_cast<std::size_t>(rows) * rows, 0);
        for (int i = 0; i < rows; ++i) res.left[static_cast<std::size_t>(i) * rows + i] = 1;
    }
    run_inplace(a.data(), rows, cols, res.val, want_left ? &res.left : nullptr);
    return res;
}

void SmithEngine::run_inplace(std::uint64_t* a, int rows, int cols, std::vector<int>& val_out,
                              std::vector<std::uint64_t>* left_out) {
    const std::uint64_t mod = mod_;
    const int kmax = std::min(rows, cols);
    val_out.assign(kmax, cap_);
    auto A = [&](int i, int j) -> std::uint64_t& { return a[static_cast<std::size_t>(i) * cols + j]; };
    std::uint64_t* L = left_out ? left_out->data() : nullptr;

    for (int k = 0; k < kmax; ++k) {
        // pivot: minimal valuation in the remaining submatrix
        int pv = cap_, pi = -1, pj = -1;
        for (int i = k; i < rows && pv > 0; ++i)
            for (int j = k; j < cols; ++j) {
                std::uint64_t x = A(i, j);
                if (x == 0) continue;
                int v = valuation(x);
                if (v < pv) {
                    pv = v;
                    pi = i;
                    pj = j;
                    if (pv == 0) break;
                }
            }
        if (pi < 0) break;  // all remaining entries are 0 mod p^cap
        if (pi != k) {
            for (int j = 0; j < cols; ++j) std::swap(A(pi, j), A(k, j));
            if (L)
                for (int j = 0; j < rows; ++j)
                    std::swap(L[static_cast<std::size_t>(pi) * rows + j],
                              L[static_cast<std::size_t>(k) * rows + j]);
        }
        if (pj != k)
            for (int i = 0; i < rows; ++i) std::swap(A(i, pj), A(i, k));

        // normalize pivot to p^pv
        std::uint64_t ppow = 1;
        for (int i = 0; i < pv; ++i) ppow *= static_cast<std::uint64_t>(p_);
        std::uint64_t unit = A(k, k) / ppow;  // exact: valuation(pivot) == pv
        if (unit != 1) {
            std::uint64_t inv = unit_inverse(unit % mod);
            for (int j = k; j < cols; ++j) A(k, j) = mulmod(A(k, j), inv);
            if (L)
                for (int j = 0; j < rows; ++j) {
                    std::uint64_t& x = L[static_cast<std::size_t>(k) * rows + j];
                    x = mulmod(x, inv);
                }
        }
        // clear column k below and above; every entry has valuation >= pv
        for (int i = 0; i < rows; ++i) {
            if (i == k) continue;
            std::uint64_t x = A(i, k);
            if (x == 0) continue;
            std::uint64_t c = x / ppow;  // exact by pivot minimality
            for (int j = k; j < cols; ++j) {
                std::uint64_t sub = mulmod(c, A(k, j));
                std::uint64_t& y = A(i, j);
                y = (y >= sub) ? y - sub : y + (mod - sub);
            }
            if (L)
                for (int j = 0; j < rows; ++j) {
                    std::uint64_t sub = mulmod(c, L[static_cast<std::size_t>(k) * rows + j]);
                    std::uint64_t& y = L[static_cast<std::size_t>(i) * rows + j];
                    y = (y >= sub) ? y - sub : y + (mod - sub);
                }
        }
        // clear row k: column ops touch row k only (column k is zero elsewhere)
        for (int j = k + 1; j < cols; ++j) A(k, j) = 0;
        val_out[k] = pv;
    }
    // Minimal-valuation pivoting makes the diagonal ascending; row k of the
    // left transform belongs to val_out[k].
    for (std::size_t i = 1; i < val_out.size(); ++i) assert(val_out[i - 1] <= val_out[i]);
}

int rank_mod_prime(std::vector<std::uint64_t> a, int rows, int cols, std::uint64_t q) {
    if (q >= (1ull << 31)) throw std::invalid_argument("rank_mod_prime: q must be < 2^31");
    auto A = [&](int i, int j) -> std::uint64_t& { return a[static_cast<std::size_t>(i) * cols + j]; };
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int piv = -1;
        for (int i = rank; i < rows; ++i)
            if (A(i, col) % q != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        if (piv != rank)
            for (int j = col; j < cols; ++j) std::swap(A(piv, j), A(rank, j));
        // normalize pivot row
        std::uint64_t pv = A(rank, col) % q;
        // inverse via Fermat
        std::uint64_t inv = 1, base = pv, e = q - 2;
        while (e) {
            if (e & 1) inv = inv * base % q;
            base = base * base % q;
            e >>= 1;
        }
        for (int j = col; j < cols; ++j) A(rank, j) = A(rank, j) % q * inv % q;
        for (int i = 0; i < rows; ++i) {
            if (i == rank) continue;
            std::uint64_t c = A(i, col) % q;
            if (c == 0) continue;
            for (int j = col; j < cols; ++j) {
                std::uint64_t sub = c * A(rank, j) % q;
                A(i, j) = (A(i, j) % q + q - sub) % q;
            }
        }
        ++rank;
    }
    return rank;
}

}  // namespace regsmith::padic
