#include "regsmith/group_type.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

#include "regsmith/errors.hpp"

namespace regsmith::abelian {

namespace {

bool is_probable_prime(const Int& n) {
    return mpz_probab_prime_p(n.get_mpz_t(), 32) != 0;
}

// Pollard rho with Brent cycle detection. Returns a nontrivial factor of n
// (n composite, odd, not a prime power obstacle for rho).
Int pollard_rho(const Int& n, unsigned long c, long long max_iters) {
    Int x = 2, y = 2, d = 1, diff, ys = 2;
    long long iters = 0;
    auto step = [&](Int& v) { v = (v * v + c) % n; };
    // Brent: batch gcds
    Int q = 1;
    long long r = 1;
    while (d == 1) {
        x = y;
        for (long long i = 0; i < r; ++i) step(y);
        long long k = 0;
        while (k < r && d == 1) {
            ys = y;
            long long lim = std::min<long long>(128, r - k);
            for (long long i = 0; i < lim; ++i) {
                step(y);
                diff = x - y;
                q = (q * abs(diff)) % n;
            }
            mpz_gcd(d.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
            k += lim;
            iters += lim;
            if (iters > max_iters)
                throw CapacityError("factorize: Pollard rho iteration budget exceeded (" +
                                    std::to_string(max_iters) + "); torsion factor too hard");
        }
        r *= 2;
    }
    if (d == n) {
        // backtrack
        do {
            step(ys);
            diff = abs(x - ys);
            mpz_gcd(d.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
        } while (d == 1);
    }
    return d;
}

void factor_into(const Int& n, std::map<Int, int>& out, long long rho_budget) {
    if (n == 1) return;
    if (is_probable_prime(n)) {
        out[n] += 1;
        return;
    }
    // Perfect powers first: rho struggles on them.
    if (mpz_perfect_power_p(n.get_mpz_t())) {
        for (int k = 2; k <= 64; ++k) {
            Int root;
            if (mpz_root(root.get_mpz_t(), n.get_mpz_t(), k) != 0) {
                std::map<Int, int> sub;
                factor_into(root, sub, rho_budget);
                for (auto& [p, e] : sub) out[p] += e * k;
                return;
            }
        }
    }
    Int d = n;
    for (unsigned long c = 1; d == n; ++c) d = pollard_rho(n, c, rho_budget);
    factor_into(d, out, rho_budget);
    factor_into(n / d, out, rho_budget);
}

}  // namespace

std::map<std::int64_t, int> factorize(const Int& n) {
    if (n <= 0) throw std::invalid_argument("factorize: argument must be positive");
    Int m = n;
    std::map<std::int64_t, int> result;
    for (std::int64_t p : {2, 3, 5, 7, 11, 13}) {
        while (m % p == 0) {
            result[p] += 1;
            m /= p;
        }
    }
    for (std::int64_t p = 17; p < 100000 && m > 1; p += 2) {
        if (Int(p) * p > m) break;
        while (m % p == 0) {
            result[p] += 1;
            m /= p;
        }
    }
    if (m > 1) {
        std::map<Int, int> big;
        factor_into(m, big, 50'000'000);
        for (auto& [p, e] : big) {
            if (!p.fits_slong_p())
                throw CapacityError("factorize: prime factor exceeds 64 bits");
            result[p.get_si()] += e;
        }
    }
    return result;
}

int valuation(const Int& n, std::int64_t p) {
    if (n == 0) throw std::invalid_argument("valuation of zero");
    Int m = abs(n);
    int v = 0;
    while (m % p == 0) {
        m /= p;
        ++v;
    }
    return v;
}

GroupType GroupType::from_cyclic_orders(const std::vector<Int>& orders) {
    std::map<std::int64_t, std::vector<int>> parts;
    for (const Int& n : orders) {
        if (n < 2) throw std::invalid_argument("cyclic order must be >= 2, got " + n.get_str());
        for (auto& [p, e] : factorize(n)) parts[p].push_back(e);
    }
    for (auto& [p, part] : parts) std::sort(part.begin(), part.end(), std::greater<int>());
    GroupType g;
    g.parts_ = std::move(parts);
    return g;
}

GroupType GroupType::from_partitions(std::map<std::int64_t, std::vector<int>> parts) {
    for (auto it = parts.begin(); it != parts.end();) {
        auto& [p, part] = *it;
        if (p < 2 || mpz_probab_prime_p(Int(p).get_mpz_t(), 32) == 0)
            throw std::invalid_argument("not a prime: " + std::to_string(p));
        for (int e : part)
            if (e < 1) throw std::invalid_argument("partition entries must be >= 1");
        std::sort(part.begin(), part.end(), std::greater<int>());
        it = part.empty() ? parts.erase(it) : std::next(it);
    }
    GroupType g;
    g.parts_ = std::move(parts);
    return g;
}

GroupType GroupType::p_group(std::int64_t p, std::vector<int> partition) {
    std::map<std::int64_t, std::vector<int>> m;
    if (!partition.empty()) m.emplace(p, std::move(partition));
    return from_partitions(std::move(m));
}

Int GroupType::order() const {
    Int n = 1;
    for (auto& [p, part] : parts_) {
        int s = 0;
        for (int e : part) s += e;
        Int q;
        mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(s));
        n *= q;
    }
    return n;
}

const std::vector<int>& GroupType::partition(std::int64_t p) const {
    static const std::vector<int> empty;
    auto it = parts_.find(p);
    return it == parts_.end() ? empty : it->second;
}

std::vector<std::int64_t> GroupType::primes() const {
    std::vector<std::int64_t> ps;
    for (auto& [p, _] : parts_) ps.push_back(p);
    return ps;
}

GroupType GroupType::p_part(std::int64_t p) const {
    auto it = parts_.find(p);
    if (it == parts_.end()) return trivial();
    return p_group(p, it->second);
}

std::vector<Int> GroupType::cyclic_orders() const {
    std::vector<Int> orders;
    for (auto& [p, part] : parts_) {
        for (int e : part) {
            Int q;
            mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(p),
                          static_cast<unsigned long>(e));
            orders.push_back(q);
        }
    }
    return orders;
}

int GroupType::rank() const {
    int k = 0;
    for (auto& [_, part] : parts_) k += static_cast<int>(part.size());
    return k;
}

std::string GroupType::to_string() const {
    if (parts_.empty()) return "triv";
    // Collect cyclic orders, print ascending with ^multiplicity.
    std::vector<Int> orders = cyclic_orders();
    std::sort(orders.begin(), orders.end());
    std::ostringstream os;
    for (std::size_t i = 0; i < orders.size();) {
        std::size_t j = i;
        while (j < orders.size() && orders[j] == orders[i]) ++j;
        if (i) os << '*';
        os << 'Z' << orders[i].get_str();
        if (j - i > 1) os << '^' << (j - i);
        i = j;
    }
    return os.str();
}

GroupType GroupType::parse(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw std::invalid_argument("empty group literal");
    if (s == "triv" || s == "1" || s == "0") return trivial();
    std::vector<Int> orders;
    std::size_t pos = 0;
    while (pos < s.size()) {
        if (s[pos] != 'Z')
            throw std::invalid_argument("group literal: expected 'Z' at position " +
                                        std::to_string(pos) + " in \"" + text + "\"");
        ++pos;
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (start == pos) throw std::invalid_argument("group literal: missing order after 'Z'");
        Int n(s.substr(start, pos - start));
        long long k = 1;
        if (pos < s.size() && s[pos] == '^') {
            ++pos;
            start = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (start == pos) throw std::invalid_argument("group literal: missing exponent after '^'");
            k = std::stoll(s.substr(start, pos - start));
            if (k < 1) throw std::invalid_argument("group literal: exponent must be >= 1");
        }
        for (long long i = 0; i < k; ++i) orders.push_back(n);
        if (pos < s.size()) {
            if (s[pos] != '*')
                throw std::invalid_argument("group literal: expected '*' at position " +
                                            std::to_string(pos));
            ++pos;
            if (pos == s.size()) throw std::invalid_argument("group literal: trailing '*'");
        }
    }
    return from_cyclic_orders(orders);
}

}  // namespace regsmith::abelian
