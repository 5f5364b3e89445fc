"""Smoke tests for the Python bindings."""

import json

import pytest

import regsmith as rs


def test_version_and_prng_id():
    assert rs.__version__
    assert rs.PRNG_ID == "xoshiro256ss-v1"


def test_group_arithmetic():
    assert rs.canonical_group("Z6") == "Z2*Z3"
    assert rs.group_order("Z2^2*Z8") == 32
    assert rs.aut_order("Z3") == 2
    assert rs.aut_order("Z9*Z3") == 108
    assert rs.count_surjections("Z2^2", "Z2") == 3
    assert rs.count_surjections("Z2", "Z2^2") == 0
    assert rs.torsion_count("Z9*Z3", 3) == 9
    assert rs.exterior_square("Z3^2") == "Z3"
    assert rs.count_perfect_symmetric_pairings("Z3^2") == 18
    assert rs.count_subgroups("Z2^2") == 5


def test_rm_pairs_and_moments():
    pairs = rs.enumerate_rm_pairs("Z4", 2, 2)
    assert len(pairs) == 2
    assert sum(p["torsion_r"] for p in pairs) == 4
    assert rs.predicted_moment_rm("Z4", 2, 1) == 2
    assert rs.predicted_moment_rm("Z4", 2, 2) == 4
    assert rs.predicted_moment_rm("Z2", 4, 1) == 3
    assert rs.predicted_moment_directed("Z5", 3) == 1
    assert rs.predicted_moment_symmetric("Z5^2", 3) == 5
    with pytest.raises(ValueError):
        rs.predicted_moment_directed("Z2", 4)


def test_sampling_is_deterministic():
    a = rs.sample("perm_sum", 12, 3, seed=7, trial=4)
    b = rs.sample("perm_sum", 12, 3, seed=7, trial=4)
    c = rs.sample("perm_sum", 12, 3, seed=7, trial=5)
    assert a == b
    assert a != c
    assert all(sum(row) == 3 for row in a)
    cols = [sum(row[j] for row in a) for j in range(12)]
    assert all(s == 3 for s in cols)


def test_exact_linear_algebra():
    snf = rs.smith_normal_form([[2, 0], [0, 3]])
    assert snf["invariant_factors"] == [1, 6]
    rep = rs.cokernel([[2, 2], [0, 3]])
    assert rep["torsion"] == rs.canonical_group("Z6")  # |det| = 6
    assert rep["free_rank"] == 0
    assert rs.is_singular([[1, 1], [1, 1]])
    assert not rs.is_singular([[1, 0], [0, 1]])
    pp = rs.cokernel_p_part([[12, 0], [0, 2]], 2)
    assert pp["group"] == "Z2*Z4"
    # big entries survive the trip through Python ints
    big = 10**30
    rep = rs.cokernel([[big]])
    assert rep["invariant_factors"] == [big]


def test_pair_structure():
    ps = rs.pair_structure_conditions([[3]], 3)
    assert ps["r_quotient_killed"] and ps["e1_generates"] and ps["nr_e1_in_rE"]
    assert rs.count_pair_surjections([[3]], 3, "Z3", "1", 1) == 1
    assert rs.count_pair_surjections([[3]], 3, "Z3", "full", 1) == 0


def test_theory_values():
    value, err = rs.cl_probability("triv", [2])
    assert abs(value - 0.2887880951) < 1e-9
    assert err < 1e-12
    value, err = rs.sym_probability("triv", [5])
    assert abs(value - 0.7933354701) < 1e-9
    mass, bound, count = rs.mass_total("directed_cl", [2], 256)
    assert mass >= 0.99 and count == 67
    value, err = rs.pairing_mass_identity_residual(3, 27)
    assert 0.0278 < value < 0.0280


def test_run_experiment_and_compare():
    config = (
        "model = perm_sum\nn = 1\nr = 3\ntrials = 8\nseed = 11\n"
        "observables = ppart:3 moment:Z3\n"
    )
    summary = rs.run_experiment(config)
    size = summary["sizes"][0]
    assert size["histograms"]["ppart:3"] == {"Z3": 8}
    assert size["moments"]["moment:Z3"]["sum"] == "16"  # two surjections per trial

    summary_json = rs.run_experiment_json(config)
    predictions = json.dumps(
        {"predictions": [{"key": "moment:Z3", "value": 2.0, "kind": "moment",
                          "abs_tol": 0.5, "tag": "smoke"}]}
    )
    all_pass, csv = rs.compare_json(summary_json, predictions)
    assert all_pass
    assert csv.startswith("# config_hash=")
    assert "tag,key,n," in csv
