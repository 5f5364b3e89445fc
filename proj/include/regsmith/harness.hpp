#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regsmith/abelian.hpp"
#include "regsmith/matgen.hpp"

namespace regsmith::harness {

using abelian::GroupType;
using abelian::Int;

/// Target pair (V, B) for the pair-moment observable. B is either the whole
/// group or gamma + <subgroup generators>; m is derived per size as n_P.
struct PairTargetSpec {
    GroupType group;
    bool whole_group = false;
    std::vector<std::int64_t> gamma;
    std::vector<std::vector<std::int64_t>> subgroup_gens;
    Int r;

    std::string coset_text() const;
    abelian::RMPair build(const Int& m) const;
};

struct Observable {
    enum class Kind { PPart, Moment, PairMoment, Singular, Histogram };
    Kind kind = Kind::Singular;
    std::int64_t p = 0;                   // PPart
    GroupType group;                      // Moment
    PairTargetSpec pair;                  // PairMoment
    std::vector<std::int64_t> primes;     // Histogram
    Int cutoff;                           // Histogram

    std::string key() const;
    /// Grammar: ppart:<p> | moment:<group> | singular |
    ///          pair_moment:<group>:<coset>:<r> with coset = full |
    ///          g1.g2...[+h1.h2...[;...]] | histogram:<p1+p2+...>:<cutoff>
    static Observable parse(const std::string& text);
};

struct ExperimentConfig {
    std::string label;
    matgen::ModelKind model = matgen::ModelKind::PermSum;
    int r = 0;
    std::int64_t p = 0;  // haar_symmetric_mod
    int e = 0;           // haar_symmetric_mod
    std::vector<int> n_schedule;
    long long trials = 0;
    long long trial_offset = 0;  // first per-size trial index (half-run merging)
    std::uint64_t master_seed = 0;
    std::vector<Observable> observables;
    int workers = 1;
    long long retry_cap = matgen::kDefaultRetryCap;
    std::string predictions_path;  // optional: compared after the run

    matgen::ModelSpec model_spec(int n) const;
    void validate() const;
    /// Non-blocking advisories: observables at primes where the limit
    /// theorems make no prediction (p | r, or p = 2 for the matching model).
    std::vector<std::string> warnings() const;
    /// Identity of the experiment family (model, sizes, seed, observables);
    /// trials/offset/workers are fold parameters and excluded.
    std::string canonical_text() const;
    std::string config_hash() const;  // 16 hex digits (FNV-1a 64)

    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
};

struct ObservedValue {
    std::string value;
    bool infinite_part = false;
    bool operator==(const ObservedValue& o) const = default;
};

struct TrialRecord {
    int n = 0;
    long long trial_index = 0;
    std::uint64_t stream_seed = 0;
    std::vector<std::pair<std::string, ObservedValue>> values;
    double wall_ms = 0;  // informational; excluded from summaries
};

struct HistogramCell {
    std::map<std::string, long long> counts;
};
struct MomentCell {
    long long trials = 0;
    Int sum = 0;
    Int sum_sq = 0;
    long long infinite_flagged = 0;
};
struct ProportionCell {
    long long trials = 0;
    long long hits = 0;
};

struct SizeSummary {
    int n = 0;
    long long trials = 0;
    std::map<std::string, HistogramCell> histograms;
    std::map<std::string, MomentCell> moments;
    std::map<std::string, ProportionCell> proportions;
};

struct ExperimentSummary {
    std::string config_hash;
    std::uint64_t master_seed = 0;
    std::string version, prng, model_name, label;
    std::vector<SizeSummary> sizes;

    /// Commutative, associative merge; refuses on config hash mismatch.
    void merge(const ExperimentSummary& other);
    std::string to_json_text() const;  // deterministic bytes
    static ExperimentSummary from_json_text(const std::string& text);
};

/// Per-trial seed derivation: the master seed is salted with the size, then
/// the trial index is golden-ratio scrambled and mixed (see SeedPolicy).
std::uint64_t trial_stream_seed(std::uint64_t master_seed, int n, long long trial_index);

/// Runs the experiment; deterministic given (config, master_seed) regardless
/// of worker count. Completed records are appended to *records_out as they
/// finish (also on error, for partial persistence).
ExperimentSummary run_experiment(const ExperimentConfig& config,
                                 std::vector<TrialRecord>* records_out = nullptr);

struct MomentEstimate {
    double mean = 0, se = 0;
    long long trials = 0, infinite_flagged = 0;
};
MomentEstimate moment_estimate(const MomentCell& cell);

/// Sample mean +- SE of |Sur(cok, V)| over records (observable must have been
/// collected).
MomentEstimate estimate_moment(const std::vector<TrialRecord>& records, const GroupType& v);

struct ProportionEstimate {
    double p_hat = 0, lo = 0, hi = 0;  // Wilson interval
    long long trials = 0, hits = 0;
};
ProportionEstimate proportion_estimate(long long hits, long long trials, double z = 3.0);

struct Prediction {
    std::string key;     // "ppart:2/triv", "moment:Z2", "singular", ...
    double value = 0;
    std::string kind;    // "proportion" | "moment" | "upper_bound"
    double abs_tol = 0;  // extra absolute tolerance
    int at_n = -1;       // -1 = largest size
    bool check_trend = false;
    std::string tag;     // prediction family, e.g. "directed_cohen_lenstra"
};

struct ComparisonRow {
    std::string tag, key;
    int n = 0;
    double estimate = 0, spread = 0, prediction = 0, z = 0;
    std::string verdict;  // "pass" | "fail" | "info"
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    bool all_pass = true;
    // provenance copied from the summary, emitted as comment lines
    std::string config_hash, version, prng;
    std::uint64_t master_seed = 0;
    std::string to_csv() const;
};

ComparisonReport compare(const ExperimentSummary& summary,
                         const std::vector<Prediction>& predictions);

// --- persistence ----------------------------------------------------------

void write_records_jsonl(const std::string& path, const ExperimentConfig& config,
                         const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_records_jsonl(const std::string& path,
                                            std::string* config_hash_out = nullptr);
void write_summary_json(const std::string& path, const ExperimentSummary& summary);
ExperimentSummary read_summary_json(const std::string& path);
void write_comparison_csv(const std::string& path, const ComparisonReport& report);

std::vector<Prediction> predictions_from_json_text(const std::string& text);
std::string predictions_to_json_text(const std::vector<Prediction>& predictions);

}  // namespace regsmith::harness
