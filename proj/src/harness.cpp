#include "regsmith/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "regsmith/coker.hpp"
#include "regsmith/errors.hpp"
#include "regsmith/version.hpp"

namespace regsmith::harness {

using json = nlohmann::ordered_json;

namespace {

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string render_group(long long free_rank, const GroupType& torsion) {
    if (free_rank == 0) return torsion.to_string();
    std::string s = "Z^" + std::to_string(free_rank);
    if (!torsion.is_trivial()) s += "*" + torsion.to_string();
    return s;
}

std::vector<std::int64_t> parse_coords(const std::string& text) {
    std::vector<std::int64_t> out;
    for (const std::string& tok : split(text, '.')) out.push_back(std::stoll(trim(tok)));
    return out;
}

std::string coords_text(const std::vector<std::int64_t>& coords) {
    std::string s;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (i) s += '.';
        s += std::to_string(coords[i]);
    }
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Observables

std::string PairTargetSpec::coset_text() const {
    if (whole_group) return "full";
    std::string s = coords_text(gamma);
    if (!subgroup_gens.empty()) {
        s += '+';
        for (std::size_t i = 0; i < subgroup_gens.size(); ++i) {
            if (i) s += ';';
            s += coords_text(subgroup_gens[i]);
        }
    }
    return s;
}

abelian::RMPair PairTargetSpec::build(const Int& m) const {
    auto amb = std::make_shared<const abelian::Group>(group);
    std::vector<abelian::Group::Element> gens;
    if (whole_group) {
        for (int i = 0; i < amb->num_factors(); ++i) {
            auto e = amb->zero();
            e[i] = 1;
            gens.push_back(e);
        }
    } else {
        for (const auto& g : subgroup_gens) gens.push_back(amb->make(g));
    }
    abelian::Group::Element rep = whole_group ? amb->zero() : amb->make(gamma);
    return abelian::RMPair(group, abelian::Coset(abelian::Subgroup(amb, gens), rep), r, m);
}

std::string Observable::key() const {
    switch (kind) {
        case Kind::PPart: return "ppart:" + std::to_string(p);
        case Kind::Moment: return "moment:" + group.to_string();
        case Kind::Singular: return "singular";
        case Kind::PairMoment:
            return "pair_moment:" + pair.group.to_string() + ":" + pair.coset_text() + ":" +
                   pair.r.get_str();
        case Kind::Histogram: {
            std::string s = "histogram:";
            for (std::size_t i = 0; i < primes.size(); ++i) {
                if (i) s += '+';
                s += std::to_string(primes[i]);
            }
            return s + ":" + cutoff.get_str();
        }
    }
    return "?";
}

Observable Observable::parse(const std::string& text) {
    std::string t = trim(text);
    Observable obs;
    if (t == "singular") {
        obs.kind = Kind::Singular;
        return obs;
    }
    std::vector<std::string> parts = split(t, ':');
    const std::string& head = parts[0];
    if (head == "ppart") {
        if (parts.size() != 2) throw std::invalid_argument("observable: ppart:<p> expected");
        obs.kind = Kind::PPart;
        obs.p = std::stoll(parts[1]);
        return obs;
    }
    if (head == "moment") {
        if (parts.size() != 2) throw std::invalid_argument("observable: moment:<group> expected");
        obs.kind = Kind::Moment;
        obs.group = GroupType::parse(parts[1]);
        return obs;
    }
    if (head == "pair_moment") {
        if (parts.size() != 4)
            throw std::invalid_argument("observable: pair_moment:<group>:<coset>:<r> expected");
        obs.kind = Kind::PairMoment;
        obs.pair.group = GroupType::parse(parts[1]);
        obs.pair.r = Int(parts[3]);
        const std::string& coset = parts[2];
        if (coset == "full") {
            obs.pair.whole_group = true;
        } else {
            std::vector<std::string> halves = split(coset, '+');
            obs.pair.gamma = parse_coords(halves[0]);
            if (halves.size() > 1)
                for (const std::string& gen : split(halves[1], ';'))
                    obs.pair.subgroup_gens.push_back(parse_coords(gen));
            if (halves.size() > 2)
                throw std::invalid_argument("observable: bad coset spec: " + coset);
        }
        return obs;
    }
    if (head == "histogram") {
        if (parts.size() != 3)
            throw std::invalid_argument("observable: histogram:<p1+p2>:<cutoff> expected");
        obs.kind = Kind::Histogram;
        for (const std::string& ps : split(parts[1], '+')) obs.primes.push_back(std::stoll(ps));
        obs.cutoff = Int(parts[2]);
        return obs;
    }
    throw std::invalid_argument("unknown observable: " + text);
}

// ---------------------------------------------------------------------------
// Config

matgen::ModelSpec ExperimentConfig::model_spec(int n) const {
    matgen::ModelSpec spec;
    spec.kind = model;
    spec.n = n;
    spec.r = r;
    spec.p = p;
    spec.e = e;
    return spec;
}

void ExperimentConfig::validate() const {
    if (n_schedule.empty()) throw std::invalid_argument("config: empty n schedule");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (trial_offset < 0) throw std::invalid_argument("config: trial_offset must be >= 0");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (observables.empty()) throw std::invalid_argument("config: no observables requested");
    for (int n : n_schedule) model_spec(n).validate();
}

std::vector<std::string> ExperimentConfig::warnings() const {
    std::vector<std::string> out;
    const bool symmetric = model == matgen::ModelKind::MatchingUnion ||
                           model == matgen::ModelKind::ConfigModel ||
                           model == matgen::ModelKind::UniformSimpleRegular;
    auto note = [&](std::int64_t p, const std::string& key) {
        if (r > 0 && p > 0 && r % p == 0)
            out.push_back("observable " + key + ": p = " + std::to_string(p) +
                          " divides r = " + std::to_string(r) +
                          "; the limiting distribution theorems make no prediction there "
                          "(exploratory)");
        else if (symmetric && p == 2)
            out.push_back("observable " + key +
                          ": the symmetric-model theorem requires odd primes; p = 2 is "
                          "exploratory");
    };
    for (const Observable& obs : observables) {
        switch (obs.kind) {
            case Observable::Kind::PPart: note(obs.p, obs.key()); break;
            case Observable::Kind::Moment:
                for (std::int64_t p : obs.group.primes()) note(p, obs.key());
                break;
            case Observable::Kind::Histogram:
                for (std::int64_t p : obs.primes) note(p, obs.key());
                break;
            default: break;  // pair moments are exactly the p | r theory
        }
    }
    return out;
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream os;
    os << "model=" << matgen::model_kind_name(model) << "\n";
    os << "r=" << r << "\n";
    os << "p=" << p << "\n";
    os << "e=" << e << "\n";
    os << "n=";
    for (std::size_t i = 0; i < n_schedule.size(); ++i) os << (i ? "," : "") << n_schedule[i];
    os << "\n";
    os << "seed=" << master_seed << "\n";
    os << "observables=";
    for (std::size_t i = 0; i < observables.size(); ++i)
        os << (i ? ";" : "") << observables[i].key();
    os << "\n";
    return os.str();
}

std::string ExperimentConfig::config_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical_text()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig cfg;
    std::string t = trim(text);
    auto apply = [&](const std::string& key, const std::string& value) {
        if (key == "label") {
            cfg.label = value;
        } else if (key == "model") {
            cfg.model = matgen::parse_model_kind(value);
        } else if (key == "r") {
            cfg.r = std::stoi(value);
        } else if (key == "p") {
            cfg.p = std::stoll(value);
        } else if (key == "e") {
            cfg.e = std::stoi(value);
        } else if (key == "n") {
            std::string v = value;
            std::replace(v.begin(), v.end(), ',', ' ');
            std::istringstream is(v);
            int n;
            while (is >> n) cfg.n_schedule.push_back(n);
        } else if (key == "trials") {
            cfg.trials = std::stoll(value);
        } else if (key == "trial_offset") {
            cfg.trial_offset = std::stoll(value);
        } else if (key == "seed") {
            cfg.master_seed = std::stoull(value);
        } else if (key == "workers") {
            cfg.workers = std::stoi(value);
        } else if (key == "retry_cap") {
            cfg.retry_cap = std::stoll(value);
        } else if (key == "predictions") {
            cfg.predictions_path = value;
        } else if (key == "observables") {
            std::istringstream is(value);
            std::string tok;
            while (is >> tok) cfg.observables.push_back(Observable::parse(tok));
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    };
    if (!t.empty() && t[0] == '{') {
        json j = json::parse(t);
        for (auto& [key, value] : j.items()) {
            if (key == "n" && value.is_array()) {
                for (auto& n : value) cfg.n_schedule.push_back(n.get<int>());
            } else if (key == "observables" && value.is_array()) {
                for (auto& o : value) cfg.observables.push_back(Observable::parse(o.get<std::string>()));
            } else if (value.is_string()) {
                apply(key, value.get<std::string>());
            } else {
                apply(key, value.dump());
            }
        }
        return cfg;
    }
    std::istringstream is(t);
    std::string line;
    while (std::getline(is, line)) {
        std::string l = trim(line);
        if (l.empty() || l[0] == '#') continue;
        std::size_t eq = l.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected 'key = value', got: " + line);
        apply(trim(l.substr(0, eq)), trim(l.substr(eq + 1)));
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

// ---------------------------------------------------------------------------
// Trial computation

std::uint64_t trial_stream_seed(std::uint64_t master_seed, int n, long long trial_index) {
    std::uint64_t salted =
        master_seed ^ matgen::mix64(static_cast<std::uint64_t>(n) * 0x9E3779B97F4A7C15ull);
    return matgen::SeedPolicy{salted, static_cast<std::uint64_t>(trial_index)}.stream_seed();
}

namespace {

struct SizeContext {
    int n = 0;
    // Pair targets resolved for this size (m = n_P); index-aligned with the
    // config's observables (nullopt for other kinds).
    std::vector<std::optional<abelian::RMPair>> pair_targets;
};

SizeContext make_size_context(const ExperimentConfig& cfg, int n) {
    SizeContext ctx;
    ctx.n = n;
    for (const Observable& obs : cfg.observables) {
        if (obs.kind != Observable::Kind::PairMoment) {
            ctx.pair_targets.emplace_back(std::nullopt);
            continue;
        }
        std::vector<std::int64_t> ps = obs.pair.group.primes();
        if (ps.size() > 1)
            throw std::invalid_argument(
                "pair_moment observable requires a p-group target, got " +
                obs.pair.group.to_string());
        Int m = abelian::largest_divisor_supported(n, ps);
        try {
            ctx.pair_targets.emplace_back(obs.pair.build(m));
        } catch (const std::exception& ex) {
            throw std::invalid_argument("pair_moment target " + obs.key() + " at n=" +
                                        std::to_string(n) + " (m=" + m.get_str() +
                                        "): " + ex.what());
        }
    }
    return ctx;
}

void compute_trial(const ExperimentConfig& cfg, const SizeContext& ctx, long long trial_index,
                   IntMat& scratch, TrialRecord& rec) {
    auto t0 = std::chrono::steady_clock::now();
    rec.n = ctx.n;
    rec.trial_index = trial_index;
    rec.stream_seed = trial_stream_seed(cfg.master_seed, ctx.n, trial_index);
    rec.values.clear();
    matgen::Xoshiro256 rng(rec.stream_seed);
    matgen::sample(cfg.model_spec(ctx.n), rng, scratch, cfg.retry_cap);

    coker::TrialAnalyzer analyzer(scratch);
    for (std::size_t oi = 0; oi < cfg.observables.size(); ++oi) {
        const Observable& obs = cfg.observables[oi];
        ObservedValue val;
        switch (obs.kind) {
            case Observable::Kind::PPart: {
                const coker::PPartReport& rep = analyzer.p_part(obs.p);
                val.value = render_group(rep.free_rank, rep.group);
                val.infinite_part = rep.free_rank > 0;
                break;
            }
            case Observable::Kind::Moment: {
                // Infinite cokernels contribute the surjection count of their
                // finite (torsion) quotient and are flagged.
                abelian::SourceProfile prof;
                bool inf = false;
                for (std::int64_t q : obs.group.primes()) {
                    const coker::PPartReport& rep = analyzer.p_part(q);
                    abelian::PPartProfile pp;
                    pp.exponents = rep.group.partition(q);
                    pp.unbounded = 0;
                    prof[q] = pp;
                    inf = inf || rep.free_rank > 0;
                }
                val.value = abelian::sur_count_profile(prof, obs.group).get_str();
                val.infinite_part = inf;
                break;
            }
            case Observable::Kind::PairMoment: {
                const abelian::RMPair& target = *ctx.pair_targets[oi];
                std::int64_t q = obs.pair.group.is_trivial() ? 2 : obs.pair.group.primes()[0];
                int hint = 4;
                for (int exp_v : obs.pair.group.partition(q)) hint = std::max(hint, exp_v + 2);
                coker::PairStructure ps = analyzer.pair_p_part(obs.pair.r, q, hint);
                val.value = coker::count_pair_surjections(ps, target).get_str();
                val.infinite_part = ps.free_rank > 0;
                break;
            }
            case Observable::Kind::Singular: {
                val.value = analyzer.singular() ? "1" : "0";
                break;
            }
            case Observable::Kind::Histogram: {
                std::map<std::int64_t, std::vector<int>> parts;
                long long free_rank = 0;
                for (std::int64_t q : obs.primes) {
                    const coker::PPartReport& rep = analyzer.p_part(q);
                    const auto& part = rep.group.partition(q);
                    if (!part.empty()) parts[q] = part;
                    free_rank = std::max(free_rank, rep.free_rank);
                }
                GroupType joint = GroupType::from_partitions(std::move(parts));
                if (joint.order() > obs.cutoff)
                    val.value = ">cutoff";
                else
                    val.value = render_group(free_rank, joint);
                val.infinite_part = free_rank > 0;
                break;
            }
        }
        rec.values.emplace_back(obs.key(), std::move(val));
    }
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void fold_record(const ExperimentConfig& cfg, const TrialRecord& rec, SizeSummary& size) {
    size.trials += 1;
    for (std::size_t oi = 0; oi < cfg.observables.size(); ++oi) {
        const Observable& obs = cfg.observables[oi];
        const auto& [key, val] = rec.values[oi];
        switch (obs.kind) {
            case Observable::Kind::PPart:
            case Observable::Kind::Histogram:
                size.histograms[key].counts[val.value] += 1;
                break;
            case Observable::Kind::Moment:
            case Observable::Kind::PairMoment: {
                MomentCell& cell = size.moments[key];
                cell.trials += 1;
                Int v(val.value);
                cell.sum += v;
                cell.sum_sq += v * v;
                if (val.infinite_part) cell.infinite_flagged += 1;
                break;
            }
            case Observable::Kind::Singular: {
                ProportionCell& cell = size.proportions[key];
                cell.trials += 1;
                if (val.value == "1") cell.hits += 1;
                break;
            }
        }
    }
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& config,
                                 std::vector<TrialRecord>* records_out) {
    config.validate();
    ExperimentSummary summary;
    summary.config_hash = config.config_hash();
    summary.master_seed = config.master_seed;
    summary.version = kVersion;
    summary.prng = kPrngId;
    summary.model_name = matgen::model_kind_name(config.model);
    summary.label = config.label;

    for (int n : config.n_schedule) {
        SizeContext ctx = make_size_context(config, n);
        std::vector<TrialRecord> slots(static_cast<std::size_t>(config.trials));
        std::vector<char> done(static_cast<std::size_t>(config.trials), 0);
        std::atomic<long long> next{0};
        std::mutex err_mu;
        std::string err_text;
        bool err_is_capacity = false;
        std::atomic<bool> abort{false};

        auto worker = [&]() {
            IntMat scratch;
            for (;;) {
                long long t = next.fetch_add(1);
                if (t >= config.trials || abort.load()) return;
                try {
                    compute_trial(config, ctx, config.trial_offset + t, scratch,
                                  slots[static_cast<std::size_t>(t)]);
                    done[static_cast<std::size_t>(t)] = 1;
                } catch (const std::exception& ex) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (err_text.empty()) {
                        err_text = "trial n=" + std::to_string(n) +
                                   ", index=" + std::to_string(config.trial_offset + t) + ": " +
                                   ex.what();
                        err_is_capacity = dynamic_cast<const CapacityError*>(&ex) != nullptr;
                    }
                    abort.store(true);
                    return;
                }
            }
        };
        int nworkers = std::max(1, config.workers);
        std::vector<std::thread> pool;
        pool.reserve(nworkers);
        for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();

        if (!err_text.empty()) {
            if (records_out)
                for (std::size_t t = 0; t < slots.size(); ++t)
                    if (done[t]) records_out->push_back(slots[t]);
            if (err_is_capacity) throw CapacityError(err_text);
            throw std::runtime_error(err_text);
        }

        SizeSummary size;
        size.n = n;
        for (const TrialRecord& rec : slots) fold_record(config, rec, size);
        summary.sizes.push_back(std::move(size));
        if (records_out)
            records_out->insert(records_out->end(), slots.begin(), slots.end());
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Summary / estimates

void ExperimentSummary::merge(const ExperimentSummary& other) {
    if (config_hash != other.config_hash)
        throw std::invalid_argument("summary merge refused: config hash mismatch (" + config_hash +
                                    " vs " + other.config_hash + ")");
    for (const SizeSummary& os : other.sizes) {
        SizeSummary* mine = nullptr;
        for (SizeSummary& s : sizes)
            if (s.n == os.n) {
                mine = &s;
                break;
            }
        if (!mine) {
            sizes.push_back(os);
            continue;
        }
        mine->trials += os.trials;
        for (auto& [k, cell] : os.histograms)
            for (auto& [bucket, c] : cell.counts) mine->histograms[k].counts[bucket] += c;
        for (auto& [k, cell] : os.moments) {
            MomentCell& m = mine->moments[k];
            m.trials += cell.trials;
            m.sum += cell.sum;
            m.sum_sq += cell.sum_sq;
            m.infinite_flagged += cell.infinite_flagged;
        }
        for (auto& [k, cell] : os.proportions) {
            ProportionCell& m = mine->proportions[k];
            m.trials += cell.trials;
            m.hits += cell.hits;
        }
    }
    std::sort(sizes.begin(), sizes.end(),
              [](const SizeSummary& a, const SizeSummary& b) { return a.n < b.n; });
}

std::string ExperimentSummary::to_json_text() const {
    json j;
    j["format"] = "regsmith-summary-v1";
    j["config_hash"] = config_hash;
    j["master_seed"] = master_seed;
    j["version"] = version;
    j["prng"] = prng;
    j["model"] = model_name;
    j["label"] = label;
    json sz = json::array();
    for (const SizeSummary& s : sizes) {
        json js;
        js["n"] = s.n;
        js["trials"] = s.trials;
        json hist;
        for (auto& [k, cell] : s.histograms) {
            json counts;
            for (auto& [bucket, c] : cell.counts) counts[bucket] = c;
            hist[k] = counts;
        }
        js["histograms"] = hist;
        json moments;
        for (auto& [k, cell] : s.moments) {
            json jm;
            jm["trials"] = cell.trials;
            jm["sum"] = cell.sum.get_str();
            jm["sum_sq"] = cell.sum_sq.get_str();
            jm["infinite_flagged"] = cell.infinite_flagged;
            moments[k] = jm;
        }
        js["moments"] = moments;
        json props;
        for (auto& [k, cell] : s.proportions) {
            json jp;
            jp["trials"] = cell.trials;
            jp["hits"] = cell.hits;
            props[k] = jp;
        }
        js["proportions"] = props;
        sz.push_back(js);
    }
    j["sizes"] = sz;
    return j.dump(1);
}

ExperimentSummary ExperimentSummary::from_json_text(const std::string& text) {
    json j = json::parse(text);
    if (j.value("format", "") != "regsmith-summary-v1")
        throw std::runtime_error("summary: unrecognized format tag");
    ExperimentSummary s;
    s.config_hash = j.at("config_hash").get<std::string>();
    s.master_seed = j.at("master_seed").get<std::uint64_t>();
    s.version = j.value("version", "");
    s.prng = j.value("prng", "");
    s.model_name = j.value("model", "");
    s.label = j.value("label", "");
    for (const json& js : j.at("sizes")) {
        SizeSummary size;
        size.n = js.at("n").get<int>();
        size.trials = js.at("trials").get<long long>();
        for (auto& [k, counts] : js.at("histograms").items())
            for (auto& [bucket, c] : counts.items())
                size.histograms[k].counts[bucket] = c.get<long long>();
        for (auto& [k, jm] : js.at("moments").items()) {
            MomentCell cell;
            cell.trials = jm.at("trials").get<long long>();
            cell.sum = Int(jm.at("sum").get<std::string>());
            cell.sum_sq = Int(jm.at("sum_sq").get<std::string>());
            cell.infinite_flagged = jm.at("infinite_flagged").get<long long>();
            size.moments[k] = cell;
        }
        for (auto& [k, jp] : js.at("proportions").items()) {
            ProportionCell cell;
            cell.trials = jp.at("trials").get<long long>();
            cell.hits = jp.at("hits").get<long long>();
            size.proportions[k] = cell;
        }
        s.sizes.push_back(std::move(size));
    }
    return s;
}

MomentEstimate moment_estimate(const MomentCell& cell) {
    MomentEstimate est;
    est.trials = cell.trials;
    est.infinite_flagged = cell.infinite_flagged;
    if (cell.trials == 0) return est;
    Int n(static_cast<long>(cell.trials));
    mpq_class mean(cell.sum, n);
    mean.canonicalize();
    est.mean = mean.get_d();
    if (cell.trials > 1) {
        // var = (N*sum_sq - sum^2) / (N*(N-1)); se = sqrt(var/N)
        Int num = n * cell.sum_sq - cell.sum * cell.sum;
        mpq_class var(num, n * (n - 1));
        var.canonicalize();
        double v = var.get_d();
        est.se = v > 0 ? std::sqrt(v / static_cast<double>(cell.trials)) : 0.0;
    }
    return est;
}

MomentEstimate estimate_moment(const std::vector<TrialRecord>& records, const GroupType& v) {
    std::string key = "moment:" + v.to_string();
    MomentCell cell;
    for (const TrialRecord& rec : records)
        for (const auto& [k, val] : rec.values)
            if (k == key) {
                cell.trials += 1;
                Int x(val.value);
                cell.sum += x;
                cell.sum_sq += x * x;
                if (val.infinite_part) cell.infinite_flagged += 1;
            }
    if (cell.trials == 0)
        throw std::invalid_argument("estimate_moment: observable " + key + " was not collected");
    return moment_estimate(cell);
}

ProportionEstimate proportion_estimate(long long hits, long long trials, double z) {
    ProportionEstimate est;
    est.trials = trials;
    est.hits = hits;
    if (trials == 0) return est;
    double n = static_cast<double>(trials);
    double ph = static_cast<double>(hits) / n;
    est.p_hat = ph;
    double z2 = z * z;
    double denom = 1 + z2 / n;
    double center = (ph + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n)) / denom;
    est.lo = std::max(0.0, center - half);
    est.hi = std::min(1.0, center + half);
    return est;
}

// ---------------------------------------------------------------------------
// Comparison

namespace {

struct SeriesPoint {
    int n;
    double estimate, spread;  // spread: SE for moments, Wilson halfwidth for proportions
    ProportionEstimate prop;  // valid for proportions
    bool is_proportion;
};

std::vector<SeriesPoint> series_for(const ExperimentSummary& summary, const std::string& key) {
    std::vector<SeriesPoint> out;
    std::string bucket;
    std::string base = key;
    std::size_t slash = key.find('/');
    if (slash != std::string::npos) {
        base = key.substr(0, slash);
        bucket = key.substr(slash + 1);
    }
    for (const SizeSummary& s : summary.sizes) {
        SeriesPoint pt{};
        pt.n = s.n;
        auto hist = s.histograms.find(base);
        if (hist != s.histograms.end()) {
            long long hits = 0;
            auto it = hist->second.counts.find(bucket);
            if (it != hist->second.counts.end()) hits = it->second;
            pt.prop = proportion_estimate(hits, s.trials);
            pt.estimate = pt.prop.p_hat;
            pt.spread = (pt.prop.hi - pt.prop.lo) / 2;
            pt.is_proportion = true;
            out.push_back(pt);
            continue;
        }
        auto prop = s.proportions.find(base);
        if (prop != s.proportions.end()) {
            pt.prop = proportion_estimate(prop->second.hits, prop->second.trials);
            pt.estimate = pt.prop.p_hat;
            pt.spread = (pt.prop.hi - pt.prop.lo) / 2;
            pt.is_proportion = true;
            out.push_back(pt);
            continue;
        }
        auto mom = s.moments.find(base);
        if (mom != s.moments.end()) {
            MomentEstimate est = moment_estimate(mom->second);
            pt.estimate = est.mean;
            pt.spread = est.se;
            pt.is_proportion = false;
            out.push_back(pt);
            continue;
        }
    }
    return out;
}

double se_of_proportion(const ProportionEstimate& p) {
    if (p.trials == 0) return 0;
    double n = static_cast<double>(p.trials);
    return std::sqrt(p.p_hat * (1 - p.p_hat) / n);
}

}  // namespace

ComparisonReport compare(const ExperimentSummary& summary,
                         const std::vector<Prediction>& predictions) {
    ComparisonReport report;
    report.config_hash = summary.config_hash;
    report.version = summary.version;
    report.prng = summary.prng;
    report.master_seed = summary.master_seed;
    for (const Prediction& pred : predictions) {
        std::vector<SeriesPoint> series = series_for(summary, pred.key);
        if (series.empty()) {
            report.rows.push_back(
                {pred.tag, pred.key, -1, 0, 0, pred.value, 0, "fail"});
            report.all_pass = false;
            continue;
        }
        int at_n = pred.at_n > 0 ? pred.at_n : series.back().n;
        const SeriesPoint* target = nullptr;
        for (const SeriesPoint& pt : series) {
            if (pt.n == at_n) target = &pt;
            if (pt.n != at_n || pred.check_trend)  // convergence table rows
                report.rows.push_back({pred.tag, pred.key, pt.n, pt.estimate, pt.spread,
                                       pred.value, 0, "info"});
        }
        if (!target) {
            report.rows.push_back({pred.tag, pred.key, at_n, 0, 0, pred.value, 0, "fail"});
            report.all_pass = false;
            continue;
        }
        ComparisonRow row{pred.tag, pred.key, target->n, target->estimate, 0, pred.value, 0, ""};
        bool pass = false;
        if (pred.kind == "moment" || (pred.kind.empty() && !target->is_proportion)) {
            row.spread = target->spread;
            double tol = std::max(3 * target->spread, pred.abs_tol);
            row.z = row.spread > 0 ? (row.estimate - pred.value) / row.spread : 0;
            pass = std::abs(row.estimate - pred.value) <= tol;
        } else if (pred.kind == "upper_bound") {
            row.spread = target->prop.hi - target->estimate;
            row.z = 0;
            pass = target->prop.hi <= pred.value;
        } else {  // proportion
            double se = se_of_proportion(target->prop);
            row.spread = se;
            row.z = se > 0 ? (row.estimate - pred.value) / se : 0;
            double tol = std::max(3 * se, pred.abs_tol);
            pass = std::abs(row.estimate - pred.value) <= tol ||
                   (target->prop.lo <= pred.value && pred.value <= target->prop.hi);
        }
        row.verdict = pass ? "pass" : "fail";
        if (!pass) report.all_pass = false;
        report.rows.push_back(row);

        if (pred.check_trend && series.size() > 1) {
            bool trend = true;
            for (std::size_t i = 0; i + 1 < series.size(); ++i) {
                if (!series[i].is_proportion) {
                    trend = false;
                    break;
                }
                // non-increasing within noise at 3 sigma
                if (series[i + 1].prop.lo > series[i].prop.hi) {
                    trend = false;
                    break;
                }
            }
            ComparisonRow trow{pred.tag, pred.key + "/trend", series.back().n, 0, 0, 0, 0,
                               trend ? "pass" : "fail"};
            if (!trend) report.all_pass = false;
            report.rows.push_back(trow);
        }
    }
    return report;
}

std::string ComparisonReport::to_csv() const {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "# config_hash=%s master_seed=%llu version=%s prng=%s\n", config_hash.c_str(),
                  static_cast<unsigned long long>(master_seed), version.c_str(), prng.c_str());
    std::string out = buf;
    out += "tag,key,n,estimate,spread,prediction,z,verdict\n";
    for (const ComparisonRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%d,%.10g,%.10g,%.10g,%.10g,%s\n", r.tag.c_str(),
                      r.key.c_str(), r.n, r.estimate, r.spread, r.prediction, r.z,
                      r.verdict.c_str());
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

json record_to_json(const TrialRecord& rec) {
    json j;
    j["n"] = rec.n;
    j["trial"] = rec.trial_index;
    j["seed"] = rec.stream_seed;
    j["wall_ms"] = rec.wall_ms;
    json values;
    for (const auto& [k, v] : rec.values) {
        json jv;
        jv["v"] = v.value;
        if (v.infinite_part) jv["inf"] = true;
        values[k] = jv;
    }
    j["values"] = values;
    return j;
}

TrialRecord record_from_json(const json& j) {
    TrialRecord rec;
    rec.n = j.at("n").get<int>();
    rec.trial_index = j.at("trial").get<long long>();
    rec.stream_seed = j.at("seed").get<std::uint64_t>();
    rec.wall_ms = j.value("wall_ms", 0.0);
    for (auto& [k, jv] : j.at("values").items()) {
        ObservedValue v;
        v.value = jv.at("v").get<std::string>();
        v.infinite_part = jv.value("inf", false);
        rec.values.emplace_back(k, v);
    }
    return rec;
}

}  // namespace

void write_records_jsonl(const std::string& path, const ExperimentConfig& config,
                         const std::vector<TrialRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    json header;
    header["format"] = "regsmith-records-v1";
    header["config_hash"] = config.config_hash();
    header["master_seed"] = config.master_seed;
    header["version"] = kVersion;
    header["prng"] = kPrngId;
    header["model"] = matgen::model_kind_name(config.model);
    header["label"] = config.label;
    out << header.dump() << "\n";
    for (const TrialRecord& rec : records) out << record_to_json(rec).dump() << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<TrialRecord> read_records_jsonl(const std::string& path,
                                            std::string* config_hash_out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    long long lineno = 0;
    std::vector<TrialRecord> records;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            if (lineno == 1) {
                if (j.value("format", "") != "regsmith-records-v1")
                    throw std::runtime_error("missing records format tag");
                if (config_hash_out) *config_hash_out = j.value("config_hash", "");
                continue;
            }
            records.push_back(record_from_json(j));
        } catch (const std::exception& ex) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + ex.what());
        }
    }
    return records;
}

void write_summary_json(const std::string& path, const ExperimentSummary& summary) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << summary.to_json_text() << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

ExperimentSummary read_summary_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return ExperimentSummary::from_json_text(ss.str());
    } catch (const std::exception& ex) {
        throw std::runtime_error(path + ": " + ex.what());
    }
}

void write_comparison_csv(const std::string& path, const ComparisonReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << report.to_csv();
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Prediction> predictions_from_json_text(const std::string& text) {
    json j = json::parse(text);
    std::vector<Prediction> out;
    for (const json& jp : j.at("predictions")) {
        Prediction p;
        p.key = jp.at("key").get<std::string>();
        p.value = jp.at("value").get<double>();
        p.kind = jp.value("kind", "proportion");
        p.abs_tol = jp.value("abs_tol", 0.0);
        p.at_n = jp.value("at_n", -1);
        p.check_trend = jp.value("check_trend", false);
        p.tag = jp.value("tag", "");
        out.push_back(p);
    }
    return out;
}

std::string predictions_to_json_text(const std::vector<Prediction>& predictions) {
    json arr = json::array();
    for (const Prediction& p : predictions) {
        json jp;
        jp["key"] = p.key;
        jp["value"] = p.value;
        jp["kind"] = p.kind;
        jp["abs_tol"] = p.abs_tol;
        jp["at_n"] = p.at_n;
        jp["check_trend"] = p.check_trend;
        jp["tag"] = p.tag;
        arr.push_back(jp);
    }
    json j;
    j["predictions"] = arr;
    return j.dump(1);
}

}  // namespace regsmith::harness
