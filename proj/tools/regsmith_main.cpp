#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "regsmith/coker.hpp"
#include "regsmith/errors.hpp"
#include "regsmith/harness.hpp"
#include "regsmith/matgen.hpp"
#include "regsmith/snf.hpp"
#include "regsmith/theory.hpp"
#include "regsmith/version.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace regsmith;

json matrix_to_json(const IntMat& m, const json& meta) {
    json j = meta;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    j["entries"] = json::array();  // row-major
    for (const Int& x : m.a) j["entries"].push_back(x.get_str());
    return j;
}

IntMat matrix_from_json(const json& j) {
    IntMat m;
    int rows = j.contains("rows") ? j.at("rows").get<int>() : j.at("n").get<int>();
    int cols = j.contains("cols") ? j.at("cols").get<int>() : rows;
    m.resize(rows, cols);
    const json& entries = j.at("entries");
    if (static_cast<int>(entries.size()) != rows * cols)
        throw std::invalid_argument("matrix JSON: entries length != rows*cols");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const json& e = entries[i];
        m.a[i] = e.is_string() ? Int(e.get<std::string>())
                               : Int(static_cast<long>(e.get<long long>()));
    }
    return m;
}

IntMat matrix_from_grid(std::istream& in) {
    std::vector<std::vector<Int>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<Int> row;
        std::string tok;
        while (ls >> tok) row.emplace_back(tok);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("empty matrix grid");
    IntMat m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows; ++i) {
        if (static_cast<int>(rows[i].size()) != m.cols)
            throw std::invalid_argument("ragged matrix grid");
        for (int j = 0; j < m.cols; ++j) m.at(i, j) = rows[i][j];
    }
    return m;
}

IntMat read_matrix(const std::string& path) {
    std::stringstream buf;
    if (path == "-" || path.empty()) {
        buf << std::cin.rdbuf();
    } else {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open: " + path);
        buf << in.rdbuf();
    }
    std::string text = buf.str();
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return matrix_from_json(json::parse(text));
    std::istringstream is(text);
    return matrix_from_grid(is);
}

json interval_json(const theory::Interval& iv) {
    json j;
    j["value"] = iv.mid();
    j["error_bound"] = iv.halfwidth();
    j["lo"] = iv.lo.get_d();
    j["hi"] = iv.hi.get_d();
    return j;
}

int cmd_sample(const std::string& model, int n, int r, std::int64_t p, int e,
               std::uint64_t seed, long long trials, long long first_trial,
               const std::string& condition, const std::string& format, long long retry_cap) {
    matgen::ModelKind kind = matgen::parse_model_kind(model);
    if (condition == "simple" && kind == matgen::ModelKind::ConfigModel)
        kind = matgen::ModelKind::UniformSimpleRegular;
    if (condition == "no_multi" && kind == matgen::ModelKind::DirectedUnion)
        kind = matgen::ModelKind::DirectedUnionSimple;
    matgen::ModelSpec spec{kind, n, r, p, e};
    spec.validate();
    for (long long t = 0; t < trials; ++t) {
        long long index = first_trial + t;
        std::uint64_t stream = harness::trial_stream_seed(seed, n, index);
        matgen::Xoshiro256 rng(stream);
        IntMat m;
        if (condition == "no_loops" &&
            (kind == matgen::ModelKind::ConfigModel)) {
            matgen::sample_config_model(n, r, rng, m, matgen::ConfigCondition::NoLoops, retry_cap);
        } else {
            matgen::sample(spec, rng, m, retry_cap);
        }
        if (format == "grid") {
            for (int i = 0; i < m.rows; ++i) {
                for (int j = 0; j < m.cols; ++j)
                    std::cout << (j ? " " : "") << m.at(i, j).get_str();
                std::cout << "\n";
            }
            if (t + 1 < trials) std::cout << "\n";
        } else {
            json meta;
            meta["model"] = matgen::model_kind_name(kind);
            meta["n"] = n;
            meta["r"] = r;
            if (kind == matgen::ModelKind::HaarSymmetric) {
                meta["p"] = p;
                meta["e"] = e;
            }
            meta["master_seed"] = seed;
            meta["trial"] = index;
            meta["stream_seed"] = stream;
            meta["prng"] = kPrngId;
            meta["version"] = kVersion;
            std::cout << matrix_to_json(m, meta).dump() << "\n";
        }
    }
    return 0;
}

int cmd_coker(const std::string& path, std::int64_t p, const std::string& pair_r,
              const std::string& target) {
    IntMat m = read_matrix(path);
    json out;
    out["rows"] = m.rows;
    out["cols"] = m.cols;
    if (p != 0) {
        coker::PPartReport rep = coker::cokernel_p_part(m, p);
        out["p"] = p;
        out["p_part"] = rep.group.to_string();
        out["free_rank"] = rep.free_rank;
        out["cap_used"] = rep.cap_used;
    } else {
        coker::CokernelReport rep = coker::cokernel(m);
        out["free_rank"] = rep.free_rank;
        out["torsion"] = rep.torsion.to_string();
        out["singular"] = rep.free_rank > 0;
        json inv = json::array();
        for (const Int& d : rep.invariant_factors) inv.push_back(d.get_str());
        out["invariant_factors"] = inv;
        json imgs = json::array();
        for (const auto& img : rep.basis_images) {
            json row = json::array();
            for (const Int& c : img) row.push_back(c.get_str());
            imgs.push_back(row);
        }
        out["basis_images"] = imgs;
        json orders = json::array();
        for (const Int& d : rep.torsion_orders) orders.push_back(d.get_str());
        out["torsion_orders"] = orders;
    }
    if (!pair_r.empty()) {
        Int r(pair_r);
        coker::PairStructure ps = coker::pair_structure(m, r);
        json jp;
        jp["r"] = r.get_str();
        jp["free_rank"] = ps.free_rank;
        jp["conditions"] = {{"r_quotient_killed", ps.cond1},
                            {"e1_generates", ps.cond2},
                            {"nr_e1_in_rE", ps.cond3}};
        if (!target.empty()) {
            harness::Observable obs = harness::Observable::parse("pair_moment:" + target);
            Int m_val = abelian::largest_divisor_supported(Int(m.rows), obs.pair.group.primes());
            abelian::RMPair tgt = obs.pair.build(m_val);
            jp["target"] = obs.key();
            jp["count"] = coker::count_pair_surjections(ps, tgt).get_str();
        }
        out["pair"] = jp;
    }
    std::cout << out.dump(1) << "\n";
    return 0;
}

int cmd_theory(const std::string& style, const std::string& group,
               std::vector<std::int64_t> primes, const std::string& r_text,
               const std::string& m_text, const std::string& cutoff_text, int terms) {
    json out;
    out["style"] = style;
    if (style == "cl" || style == "sym") {
        abelian::GroupType v = abelian::GroupType::parse(group);
        theory::Interval iv = style == "cl" ? theory::cl_probability(v, primes, terms)
                                            : theory::sym_probability(v, primes, terms);
        out["group"] = v.to_string();
        out["probability"] = interval_json(iv);
        std::cout << out.dump(1) << "\n";
        std::cerr << "P(" << v.to_string() << ") = " << iv.mid() << " +- " << iv.halfwidth()
                  << "\n";
        return 0;
    }
    if (style == "moment_directed" || style == "moment_symmetric" || style == "moment_rm") {
        abelian::GroupType v = abelian::GroupType::parse(group);
        Int r(r_text.empty() ? "1" : r_text);
        Int value;
        if (style == "moment_directed") {
            value = theory::predicted_moment_directed(v, r);
        } else if (style == "moment_symmetric") {
            value = theory::predicted_moment_symmetric(v, r);
        } else {
            Int m(m_text.empty() ? "1" : m_text);
            value = theory::predicted_moment_rm(v, r, m);
            out["m"] = m.get_str();
        }
        out["group"] = v.to_string();
        out["r"] = r.get_str();
        out["moment"] = value.get_str();
        std::cout << out.dump(1) << "\n";
        return 0;
    }
    if (style == "mass_cl" || style == "mass_sym") {
        Int cutoff(cutoff_text.empty() ? "256" : cutoff_text);
        theory::MassResult res = theory::mass_total(
            style == "mass_cl" ? theory::MeasureStyle::DirectedCL : theory::MeasureStyle::Symmetric,
            primes, cutoff, terms);
        out["cutoff"] = cutoff.get_str();
        out["groups"] = res.group_count;
        out["mass"] = interval_json(res.mass);
        std::cout << out.dump(1) << "\n";
        std::cerr << "partial mass over " << res.group_count << " group types: " << res.mass.mid()
                  << " +- " << res.mass.halfwidth() << "\n";
        return 0;
    }
    if (style == "table_cl" || style == "table_sym") {
        Int cutoff(cutoff_text.empty() ? "64" : cutoff_text);
        theory::MeasureTable table = theory::measure_table(
            style == "table_cl" ? theory::MeasureStyle::DirectedCL
                                : theory::MeasureStyle::Symmetric,
            primes, cutoff, terms);
        json rows = json::array();
        for (auto& [g, p] : table.entries) {
            json row;
            row["group"] = g.to_string();
            row["probability"] = interval_json(p);
            rows.push_back(row);
            std::cerr << "  " << g.to_string() << "  " << p.mid() << " +- " << p.halfwidth()
                      << "\n";
        }
        out["cutoff"] = cutoff.get_str();
        out["entries"] = rows;
        out["total"] = interval_json(table.total);
        std::cout << out.dump(1) << "\n";
        std::cerr << "total mass: " << table.total.mid() << "\n";
        return 0;
    }
    if (style == "pairing_residual") {
        if (primes.size() != 1)
            throw std::invalid_argument("pairing_residual expects exactly one odd prime");
        Int cutoff(cutoff_text.empty() ? "27" : cutoff_text);
        theory::Interval iv = theory::pairing_mass_identity_residual(primes[0], cutoff, terms);
        out["p"] = primes[0];
        out["cutoff"] = cutoff.get_str();
        out["residual"] = interval_json(iv);
        std::cout << out.dump(1) << "\n";
        std::cerr << "identity residual at cutoff " << cutoff.get_str() << ": " << iv.mid()
                  << " +- " << iv.halfwidth() << "\n";
        return 0;
    }
    throw std::invalid_argument("unknown theory style: " + style);
}

void print_summary_table(const harness::ExperimentSummary& summary) {
    std::cerr << "model=" << summary.model_name << " hash=" << summary.config_hash
              << " seed=" << summary.master_seed << "\n";
    for (const auto& size : summary.sizes) {
        std::cerr << "n=" << size.n << " trials=" << size.trials << "\n";
        for (const auto& [key, cell] : size.moments) {
            harness::MomentEstimate est = harness::moment_estimate(cell);
            std::cerr << "  " << key << ": mean=" << est.mean << " se=" << est.se;
            if (est.infinite_flagged) std::cerr << " (infinite flagged: " << est.infinite_flagged << ")";
            std::cerr << "\n";
        }
        for (const auto& [key, cell] : size.proportions) {
            harness::ProportionEstimate est =
                harness::proportion_estimate(cell.hits, cell.trials);
            std::cerr << "  " << key << ": p=" << est.p_hat << " wilson3=[" << est.lo << ","
                      << est.hi << "]\n";
        }
        for (const auto& [key, cell] : size.histograms) {
            std::cerr << "  " << key << ":";
            int shown = 0;
            for (const auto& [bucket, count] : cell.counts) {
                if (shown++ == 8) {
                    std::cerr << " ...";
                    break;
                }
                std::cerr << " " << bucket << "=" << count;
            }
            std::cerr << "\n";
        }
    }
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int workers_override) {
    harness::ExperimentConfig cfg = harness::ExperimentConfig::from_file(config_path);
    if (workers_override > 0) cfg.workers = workers_override;
    for (const std::string& w : cfg.warnings()) std::cerr << "warning: " << w << "\n";
    std::vector<harness::TrialRecord> records;
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    std::string records_path = out_dir.empty() ? "" : out_dir + "/records.jsonl";
    try {
        harness::ExperimentSummary summary = harness::run_experiment(cfg, &records);
        if (!out_dir.empty()) {
            harness::write_records_jsonl(records_path, cfg, records);
            harness::write_summary_json(out_dir + "/summary.json", summary);
        }
        std::cout << summary.to_json_text() << "\n";
        print_summary_table(summary);
        if (!cfg.predictions_path.empty()) {
            std::ifstream in(cfg.predictions_path);
            if (!in) throw std::runtime_error("cannot open: " + cfg.predictions_path);
            std::stringstream ss;
            ss << in.rdbuf();
            auto preds = harness::predictions_from_json_text(ss.str());
            harness::ComparisonReport report = harness::compare(summary, preds);
            std::cout << report.to_csv();
            if (!out_dir.empty()) harness::write_comparison_csv(out_dir + "/comparison.csv", report);
            if (!report.all_pass) return 2;
        }
        return 0;
    } catch (const std::exception& ex) {
        if (!records_path.empty() && !records.empty()) {
            harness::write_records_jsonl(records_path, cfg, records);
            std::cerr << "partial records persisted to " << records_path << "\n";
        }
        throw;
    }
}

int cmd_compare(const std::string& summary_path, const std::string& predictions_path,
                const std::string& csv_path) {
    harness::ExperimentSummary summary = harness::read_summary_json(summary_path);
    std::ifstream in(predictions_path);
    if (!in) throw std::runtime_error("cannot open: " + predictions_path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::vector<harness::Prediction> preds = harness::predictions_from_json_text(ss.str());
    harness::ComparisonReport report = harness::compare(summary, preds);
    std::cout << report.to_csv();
    if (!csv_path.empty()) harness::write_comparison_csv(csv_path, report);
    return report.all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random regular graph cokernel laboratory"};
    app.set_version_flag("--version", regsmith::kVersion);
    app.require_subcommand(1);

    // sample
    auto* sample = app.add_subcommand("sample", "sample random matrices");
    std::string model = "perm_sum", condition = "none", format = "json";
    int n = 10, r = 3, e = 1;
    std::int64_t p = 2;
    std::uint64_t seed = 0;
    long long trials = 1, first_trial = 0, retry_cap = matgen::kDefaultRetryCap;
    sample->add_option("--model", model, "model kind");
    sample->add_option("--n", n, "matrix size");
    sample->add_option("--r", r, "regularity");
    sample->add_option("--p", p, "prime (haar_symmetric_mod)");
    sample->add_option("--e", e, "exponent (haar_symmetric_mod)");
    sample->add_option("--seed", seed, "master seed");
    sample->add_option("--trials", trials, "number of matrices");
    sample->add_option("--first-trial", first_trial, "first trial index");
    sample->add_option("--condition", condition, "none|no_loops|simple|no_multi");
    sample->add_option("--format", format, "json|grid");
    sample->add_option("--retry-cap", retry_cap, "rejection resample cap");

    // coker
    auto* coker_cmd = app.add_subcommand("coker", "exact cokernel of a matrix");
    std::string matrix_path = "-", pair_r, pair_target;
    std::int64_t coker_p = 0;
    coker_cmd->add_option("matrix", matrix_path, "matrix file (JSON or grid), '-' for stdin");
    coker_cmd->add_option("--p", coker_p, "report only the Sylow-p part");
    coker_cmd->add_option("--pair-r", pair_r, "attach the coset structure for regularity r");
    coker_cmd->add_option("--target", pair_target,
                          "pair target '<group>:<coset>:<r>' for surjection counting");

    // theory
    auto* theory_cmd = app.add_subcommand("theory", "limiting predictions");
    std::string style = "cl", group = "triv", r_text, m_text, cutoff_text;
    std::vector<std::int64_t> primes;
    int terms = theory::kDefaultEulerTerms;
    theory_cmd->add_option("--style", style,
                           "cl|sym|moment_directed|moment_symmetric|moment_rm|mass_cl|mass_sym|"
                           "table_cl|table_sym|pairing_residual");
    theory_cmd->add_option("--group", group, "group literal, e.g. Z2^2*Z8");
    theory_cmd->add_option("--primes,--p", primes, "prime set");
    theory_cmd->add_option("--r", r_text, "regularity");
    theory_cmd->add_option("--m", m_text, "n_P value for rm moments");
    theory_cmd->add_option("--cutoff", cutoff_text, "order cutoff for mass sums");
    theory_cmd->add_option("--terms", terms, "Euler product truncation");

    // run
    auto* run_cmd = app.add_subcommand("run", "run an experiment from a config file");
    std::string config_path, out_dir;
    int workers_override = 0;
    run_cmd->add_option("config", config_path, "config file")->required();
    run_cmd->add_option("--out-dir", out_dir, "directory for records.jsonl / summary.json");
    run_cmd->add_option("--workers", workers_override, "override worker count");

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "compare a summary against predictions");
    std::string summary_path, predictions_path, csv_path;
    compare_cmd->add_option("summary", summary_path, "summary JSON")->required();
    compare_cmd->add_option("predictions", predictions_path, "predictions JSON")->required();
    compare_cmd->add_option("--csv", csv_path, "also write the comparison CSV here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sample)
            return cmd_sample(model, n, r, p, e, seed, trials, first_trial, condition, format,
                              retry_cap);
        if (*coker_cmd) return cmd_coker(matrix_path, coker_p, pair_r, pair_target);
        if (*theory_cmd)
            return cmd_theory(style, group, primes, r_text, m_text, cutoff_text, terms);
        if (*run_cmd) return cmd_run(config_path, out_dir, workers_override);
        if (*compare_cmd) return cmd_compare(summary_path, predictions_path, csv_path);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
