#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "regsmith/abelian.hpp"
#include "regsmith/coker.hpp"
#include "regsmith/errors.hpp"
#include "regsmith/harness.hpp"
#include "regsmith/matgen.hpp"
#include "regsmith/snf.hpp"
#include "regsmith/theory.hpp"
#include "regsmith/version.hpp"

namespace py = pybind11;
using namespace regsmith;
using abelian::GroupType;

namespace {

py::int_ to_py(const Int& x) {
    return py::reinterpret_steal<py::int_>(PyLong_FromString(x.get_str().c_str(), nullptr, 10));
}

Int to_int(const py::handle& v) {
    return Int(py::str(v).cast<std::string>());
}

IntMat mat_from_py(const py::sequence& rows) {
    IntMat m;
    m.rows = static_cast<int>(py::len(rows));
    if (m.rows == 0) return m;
    py::sequence first = rows[0].cast<py::sequence>();
    m.cols = static_cast<int>(py::len(first));
    m.a.resize(static_cast<std::size_t>(m.rows) * m.cols);
    for (int i = 0; i < m.rows; ++i) {
        py::sequence row = rows[i].cast<py::sequence>();
        if (static_cast<int>(py::len(row)) != m.cols)
            throw std::invalid_argument("matrix rows must have equal length");
        for (int j = 0; j < m.cols; ++j) m.at(i, j) = to_int(row[j]);
    }
    return m;
}

py::list mat_to_py(const IntMat& m) {
    py::list rows;
    for (int i = 0; i < m.rows; ++i) {
        py::list row;
        for (int j = 0; j < m.cols; ++j) row.append(to_py(m.at(i, j)));
        rows.append(row);
    }
    return rows;
}

py::tuple interval_to_py(const theory::Interval& iv) {
    return py::make_tuple(iv.mid(), iv.halfwidth());
}

matgen::ModelSpec spec_of(const std::string& model, int n, int r, std::int64_t p, int e) {
    matgen::ModelSpec spec;
    spec.kind = matgen::parse_model_kind(model);
    spec.n = n;
    spec.r = r;
    spec.p = p;
    spec.e = e;
    return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "exact cokernel statistics for random regular graph models";
    m.attr("__version__") = kVersion;
    m.attr("PRNG_ID") = kPrngId;

    py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);

    // --- finite abelian groups
    m.def("canonical_group", [](const std::string& text) {
        return GroupType::parse(text).to_string();
    }, py::arg("group"), "Canonical form of a group literal such as 'Z2^2*Z8'.");
    m.def("group_order", [](const std::string& g) { return to_py(GroupType::parse(g).order()); },
          py::arg("group"));
    m.def("aut_order",
          [](const std::string& g) { return to_py(abelian::aut_order(GroupType::parse(g))); },
          py::arg("group"), "Exact |Aut(G)|.");
    m.def("count_surjections",
          [](const std::string& g, const std::string& h) {
              return to_py(abelian::count_surjections(GroupType::parse(g), GroupType::parse(h)));
          },
          py::arg("source"), py::arg("target"), "Exact |Sur(G, H)|.");
    m.def("hom_count",
          [](const std::string& g, const std::string& h) {
              return to_py(abelian::hom_count(GroupType::parse(g), GroupType::parse(h)));
          },
          py::arg("source"), py::arg("target"));
    m.def("torsion_count",
          [](const std::string& g, const py::int_& r) {
              return to_py(abelian::torsion_count(GroupType::parse(g), to_int(r)));
          },
          py::arg("group"), py::arg("r"), "Number of elements killed by r.");
    m.def("exterior_square",
          [](const std::string& g) {
              return abelian::exterior_square(GroupType::parse(g)).to_string();
          },
          py::arg("group"));
    m.def("count_perfect_symmetric_pairings",
          [](const std::string& g) {
              return to_py(abelian::count_perfect_symmetric_pairings(GroupType::parse(g)));
          },
          py::arg("group"));
    m.def("count_subgroups",
          [](const std::string& g) {
              return abelian::enumerate_subgroups(GroupType::parse(g)).size();
          },
          py::arg("group"));
    m.def("enumerate_rm_pairs",
          [](const std::string& v, const py::int_& r, const py::int_& m_val) {
              py::list out;
              for (const auto& pair :
                   abelian::enumerate_rm_pairs(GroupType::parse(v), to_int(r), to_int(m_val))) {
                  py::dict d;
                  d["subgroup"] = pair.subgroup_type().to_string();
                  py::list rep;
                  for (auto c : pair.coset().representative()) rep.append(c);
                  d["coset_rep"] = rep;
                  d["torsion_r"] = to_py(abelian::torsion_count(pair.subgroup_type(), to_int(r)));
                  out.append(d);
              }
              return out;
          },
          py::arg("group"), py::arg("r"), py::arg("m"),
          "All (r,m)-pairs (V, gamma+H), one per coset.");

    // --- samplers
    m.def("sample",
          [](const std::string& model, int n, int r, std::uint64_t seed, long long trial,
             std::int64_t p, int e) {
              matgen::Xoshiro256 rng(harness::trial_stream_seed(seed, n, trial));
              IntMat out;
              matgen::sample(spec_of(model, n, r, p, e), rng, out, matgen::kDefaultRetryCap);
              return mat_to_py(out);
          },
          py::arg("model"), py::arg("n"), py::arg("r") = 0, py::arg("seed") = 0,
          py::arg("trial") = 0, py::arg("p") = 0, py::arg("e") = 0,
          "One sampled adjacency matrix; deterministic in (seed, n, trial).");

    // --- exact linear algebra
    m.def("smith_normal_form",
          [](const py::sequence& rows) {
              auto snf = exact::smith_normal_form(mat_from_py(rows));
              py::dict d;
              py::list inv;
              for (const Int& x : snf.invariant_factors) inv.append(to_py(x));
              d["invariant_factors"] = inv;
              d["left"] = mat_to_py(snf.left);
              d["right"] = mat_to_py(snf.right);
              return d;
          },
          py::arg("matrix"), "Exact SNF with unimodular transforms.");
    m.def("cokernel",
          [](const py::sequence& rows) {
              auto rep = coker::cokernel(mat_from_py(rows));
              py::dict d;
              d["free_rank"] = rep.free_rank;
              d["torsion"] = rep.torsion.to_string();
              py::list inv;
              for (const Int& x : rep.invariant_factors) inv.append(to_py(x));
              d["invariant_factors"] = inv;
              return d;
          },
          py::arg("matrix"));
    m.def("cokernel_p_part",
          [](const py::sequence& rows, std::int64_t p) {
              auto rep = coker::cokernel_p_part(mat_from_py(rows), p);
              py::dict d;
              d["group"] = rep.group.to_string();
              d["free_rank"] = rep.free_rank;
              d["cap_used"] = rep.cap_used;
              return d;
          },
          py::arg("matrix"), py::arg("p"), "Sylow-p part via adaptive p-adic elimination.");
    m.def("is_singular",
          [](const py::sequence& rows) { return coker::is_singular(mat_from_py(rows)); },
          py::arg("matrix"));
    m.def("pair_structure_conditions",
          [](const py::sequence& rows, const py::int_& r) {
              auto ps = coker::pair_structure(mat_from_py(rows), to_int(r));
              py::dict d;
              d["free_rank"] = ps.free_rank;
              d["r_quotient_killed"] = ps.cond1;
              d["e1_generates"] = ps.cond2;
              d["nr_e1_in_rE"] = ps.cond3;
              py::list orders;
              for (const auto& slot : ps.slots) orders.append(to_py(slot.order));
              d["slot_orders"] = orders;
              return d;
          },
          py::arg("matrix"), py::arg("r"),
          "Coset structure of (cok A, e1+E) with the pair conditions verified.");
    m.def("count_pair_surjections",
          [](const py::sequence& rows, const py::int_& r, const std::string& target_group,
             const std::string& coset, const py::int_& m_val) {
              IntMat a = mat_from_py(rows);
              auto ps = coker::pair_structure(a, to_int(r));
              harness::Observable obs = harness::Observable::parse(
                  "pair_moment:" + target_group + ":" + coset + ":" + to_int(r).get_str());
              return to_py(coker::count_pair_surjections(ps, obs.pair.build(to_int(m_val))));
          },
          py::arg("matrix"), py::arg("r"), py::arg("target_group"), py::arg("coset"),
          py::arg("m"),
          "Surjections of (cok A, e1+E) onto the target pair; coset is 'full' or "
          "'g1.g2[+h1.h2;...]'.");

    // --- limiting predictions
    m.def("cl_probability",
          [](const std::string& g, const std::vector<std::int64_t>& primes) {
              return interval_to_py(theory::cl_probability(GroupType::parse(g), primes));
          },
          py::arg("group"), py::arg("primes"), "(value, rigorous error bound).");
    m.def("sym_probability",
          [](const std::string& g, const std::vector<std::int64_t>& primes) {
              return interval_to_py(theory::sym_probability(GroupType::parse(g), primes));
          },
          py::arg("group"), py::arg("primes"));
    m.def("predicted_moment_directed",
          [](const std::string& g, const py::int_& r) {
              return to_py(theory::predicted_moment_directed(GroupType::parse(g), to_int(r)));
          },
          py::arg("group"), py::arg("r"));
    m.def("predicted_moment_symmetric",
          [](const std::string& g, const py::int_& r) {
              return to_py(theory::predicted_moment_symmetric(GroupType::parse(g), to_int(r)));
          },
          py::arg("group"), py::arg("r"));
    m.def("predicted_moment_rm",
          [](const std::string& g, const py::int_& r, const py::int_& m_val) {
              return to_py(
                  theory::predicted_moment_rm(GroupType::parse(g), to_int(r), to_int(m_val)));
          },
          py::arg("group"), py::arg("r"), py::arg("m"));
    m.def("mass_total",
          [](const std::string& style, const std::vector<std::int64_t>& primes,
             const py::int_& cutoff) {
              theory::MeasureStyle ms = style == "symmetric" ? theory::MeasureStyle::Symmetric
                                                             : theory::MeasureStyle::DirectedCL;
              auto res = theory::mass_total(ms, primes, to_int(cutoff));
              return py::make_tuple(res.mass.mid(), res.mass.halfwidth(), res.group_count);
          },
          py::arg("style"), py::arg("primes"), py::arg("cutoff"),
          "style: 'directed_cl' or 'symmetric'; returns (mass, bound, group_count).");
    m.def("pairing_mass_identity_residual",
          [](std::int64_t p, const py::int_& cutoff) {
              return interval_to_py(theory::pairing_mass_identity_residual(p, to_int(cutoff)));
          },
          py::arg("p"), py::arg("cutoff"));

    // --- experiments
    m.def("run_experiment_json",
          [](const std::string& config_text) {
              harness::ExperimentConfig cfg = harness::ExperimentConfig::parse(config_text);
              return harness::run_experiment(cfg).to_json_text();
          },
          py::arg("config_text"),
          "Runs an experiment config (key = value lines or JSON) and returns the summary JSON.");
    m.def("compare_json",
          [](const std::string& summary_json, const std::string& predictions_json) {
              auto summary = harness::ExperimentSummary::from_json_text(summary_json);
              auto preds = harness::predictions_from_json_text(predictions_json);
              auto report = harness::compare(summary, preds);
              return py::make_tuple(report.all_pass, report.to_csv());
          },
          py::arg("summary_json"), py::arg("predictions_json"),
          "Returns (all_pass, csv_table).");
    m.def("trial_stream_seed", &harness::trial_stream_seed, py::arg("master_seed"), py::arg("n"),
          py::arg("trial_index"));
}
