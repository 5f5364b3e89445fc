#include "regsmith/matgen.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "regsmith/errors.hpp"

namespace regsmith::matgen {

std::string model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::PermSum: return "perm_sum";
        case ModelKind::MatchingUnion: return "matching_union";
        case ModelKind::ConfigModel: return "config_model_multigraph";
        case ModelKind::UniformSimpleRegular: return "uniform_simple_regular";
        case ModelKind::DirectedUnion: return "directed_1regular_union";
        case ModelKind::DirectedUnionSimple: return "directed_1regular_union_simple";
        case ModelKind::HaarSymmetric: return "haar_symmetric_mod";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string& name) {
    if (name == "perm_sum") return ModelKind::PermSum;
    if (name == "matching_union") return ModelKind::MatchingUnion;
    if (name == "config_model_multigraph" || name == "config_model") return ModelKind::ConfigModel;
    if (name == "uniform_simple_regular") return ModelKind::UniformSimpleRegular;
    if (name == "directed_1regular_union" || name == "directed_union")
        return ModelKind::DirectedUnion;
    if (name == "directed_1regular_union_simple") return ModelKind::DirectedUnionSimple;
    if (name == "haar_symmetric_mod" || name == "haar_symmetric") return ModelKind::HaarSymmetric;
    throw std::invalid_argument("unknown model kind: " + name);
}

void ModelSpec::validate() const {
    if (n < 1) throw std::invalid_argument("model: n must be >= 1");
    switch (kind) {
        case ModelKind::PermSum:
        case ModelKind::DirectedUnion:
        case ModelKind::DirectedUnionSimple:
            if (r < 1) throw std::invalid_argument("model: r must be >= 1");
            break;
        case ModelKind::MatchingUnion:
            if (r < 1) throw std::invalid_argument("model: r must be >= 1");
            if (n % 2 != 0)
                throw std::invalid_argument("matching_union requires n even, got n = " +
                                            std::to_string(n));
            break;
        case ModelKind::ConfigModel:
        case ModelKind::UniformSimpleRegular:
            if (r < 1) throw std::invalid_argument("model: r must be >= 1");
            if ((static_cast<long long>(n) * r) % 2 != 0)
                throw std::invalid_argument("configuration model requires n*r even");
            break;
        case ModelKind::HaarSymmetric:
            if (p < 2) throw std::invalid_argument("haar_symmetric_mod requires a prime p");
            if (e < 1) throw std::invalid_argument("haar_symmetric_mod requires e >= 1");
            break;
    }
}

void sample_permutation(int n, Xoshiro256& rng, std::vector<int>& perm) {
    perm.resize(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[i], perm[j]);
    }
}

void sample_perm_sum(int n, int r, Xoshiro256& rng, IntMat& out) {
    if (n < 1 || r < 1) throw std::invalid_argument("sample_perm_sum: need n >= 1, r >= 1");
    out.resize(n, n);
    std::vector<int> perm;
    for (int k = 0; k < r; ++k) {
        sample_permutation(n, rng, perm);
        for (int i = 0; i < n; ++i) out.at(i, perm[i]) += 1;
    }
}

namespace {

// Uniform perfect matching on items 0..m-1 (m even): repeatedly match the
// lowest unmatched item with a uniform choice among the rest.
void sample_perfect_matching(int m, Xoshiro256& rng, std::vector<int>& mate) {
    mate.assign(m, -1);
    std::vector<int> pool(m);
    for (int i = 0; i < m; ++i) pool[i] = i;
    int sz = m;
    while (sz > 0) {
        int a = pool[0];
        int pick = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(sz) - 1));
        int b = pool[pick];
        mate[a] = b;
        mate[b] = a;
        pool[pick] = pool[sz - 1];
        pool[0] = pool[sz - 2];
        sz -= 2;
    }
}

}  // namespace

void sample_matching_union(int n, int r, Xoshiro256& rng, IntMat& out) {
    if (n < 2 || n % 2 != 0)
        throw std::invalid_argument("sample_matching_union: n must be even and >= 2");
    if (r < 1) throw std::invalid_argument("sample_matching_union: r must be >= 1");
    out.resize(n, n);
    std::vector<int> mate;
    for (int k = 0; k < r; ++k) {
        sample_perfect_matching(n, rng, mate);
        for (int i = 0; i < n; ++i)
            if (mate[i] > i) {
                out.at(i, mate[i]) += 1;
                out.at(mate[i], i) += 1;
            }
    }
}

void sample_config_model(int n, int r, Xoshiro256& rng, IntMat& out, ConfigCondition condition,
                         long long retry_cap) {
    if (n < 1 || r < 1) throw std::invalid_argument("sample_config_model: need n, r >= 1");
    long long half_edges = static_cast<long long>(n) * r;
    if (half_edges % 2 != 0) throw std::invalid_argument("sample_config_model: n*r must be even");
    std::vector<int> mate;
    for (long long attempt = 0;; ++attempt) {
        if (attempt >= retry_cap)
            throw CapacityError("sample_config_model: rejection cap of " +
                                std::to_string(retry_cap) + " resamples exceeded for n=" +
                                std::to_string(n) + ", r=" + std::to_string(r));
        out.resize(n, n);
        sample_perfect_matching(static_cast<int>(half_edges), rng, mate);
        // half-edge h belongs to vertex h / r
        bool has_loop = false, has_multi = false;
        for (int h = 0; h < half_edges; ++h) {
            if (mate[h] < h) continue;
            int a = h / r, b = mate[h] / r;
            if (a == b) {
                out.at(a, a) += 2;  // loop: adjacency convention, keeps row sum r
                has_loop = true;
            } else {
                out.at(a, b) += 1;
                out.at(b, a) += 1;
                if (out.at(a, b) > 1) has_multi = true;
            }
        }
        if (condition == ConfigCondition::None) return;
        if (condition == ConfigCondition::NoLoops && !has_loop) return;
        if (condition == ConfigCondition::Simple && !has_loop && !has_multi) return;
    }
}

void sample_directed_union(int n, int r, Xoshiro256& rng, IntMat& out, DirectedCondition condition,
                           long long retry_cap) {
    if (n < 2 || r < 1) throw std::invalid_argument("sample_directed_union: need n >= 2, r >= 1");
    std::vector<int> perm;
    long long attempts = 0;
    for (;;) {
        out.resize(n, n);
        bool multi = false;
        for (int k = 0; k < r; ++k) {
            // uniform fixed-point-free permutation by rejection
            for (;;) {
                if (attempts++ >= retry_cap)
                    throw CapacityError("sample_directed_union: rejection cap of " +
                                        std::to_string(retry_cap) + " resamples exceeded");
                sample_permutation(n, rng, perm);
                bool fixed = false;
                for (int i = 0; i < n; ++i)
                    if (perm[i] == i) {
                        fixed = true;
                        break;
                    }
                if (!fixed) break;
            }
            for (int i = 0; i < n; ++i) {
                Int& cell = out.at(i, perm[i]);
                cell += 1;
                if (cell > 1) multi = true;
            }
        }
        if (condition == DirectedCondition::None || !multi) return;
        if (attempts >= retry_cap)
            throw CapacityError("sample_directed_union: rejection cap of " +
                                std::to_string(retry_cap) + " resamples exceeded (no_multi)");
    }
}

void sample_haar_symmetric(int n, std::int64_t p, int e, Xoshiro256& rng, IntMat& out) {
    if (n < 1 || p < 2 || e < 1)
        throw std::invalid_argument("sample_haar_symmetric: need n >= 1, p >= 2, e >= 1");
    Int q;
    mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e));
    if (!q.fits_ulong_p())
        throw std::invalid_argument("sample_haar_symmetric: p^e must fit in 64 bits");
    std::uint64_t m = q.get_ui();
    out.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            std::uint64_t v = rng.below(m);
            out.at(i, j) = static_cast<unsigned long>(v);
            out.at(j, i) = static_cast<unsigned long>(v);
        }
}

void sample(const ModelSpec& spec, Xoshiro256& rng, IntMat& out, long long retry_cap) {
    spec.validate();
    switch (spec.kind) {
        case ModelKind::PermSum: sample_perm_sum(spec.n, spec.r, rng, out); return;
        case ModelKind::MatchingUnion: sample_matching_union(spec.n, spec.r, rng, out); return;
        case ModelKind::ConfigModel:
            sample_config_model(spec.n, spec.r, rng, out, ConfigCondition::None, retry_cap);
            return;
        case ModelKind::UniformSimpleRegular:
            sample_config_model(spec.n, spec.r, rng, out, ConfigCondition::Simple, retry_cap);
            return;
        case ModelKind::DirectedUnion:
            sample_directed_union(spec.n, spec.r, rng, out, DirectedCondition::None, retry_cap);
            return;
        case ModelKind::DirectedUnionSimple:
            sample_directed_union(spec.n, spec.r, rng, out, DirectedCondition::NoMulti, retry_cap);
            return;
        case ModelKind::HaarSymmetric:
            sample_haar_symmetric(spec.n, spec.p, spec.e, rng, out);
            return;
    }
    throw std::logic_error("unreachable model kind");
}

IntMat sample(const ModelSpec& spec, Xoshiro256& rng) {
    IntMat out;
    sample(spec, rng, out, kDefaultRetryCap);
    return out;
}

}  // namespace regsmith::matgen
