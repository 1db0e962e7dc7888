import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftde.channels import product_state
from ftde.pauli import pauli_from_string
from ftde.tableau import (
    BranchEnsemble,
    apply_encoding_map,
    check_tableau_encoding,
    cross_validate_dense,
    expectation,
    measure_pauli,
    run_plan,
    tableau_from_product,
)
from ftde.toric import toric_plan

from conftest import dense_pauli


def all_paulis(n):
    return ["".join(p) for p in itertools.product("IXYZ", repeat=n)]


def dense_expectations(rho, n):
    return np.array([np.trace(dense_pauli(p) @ rho).real for p in all_paulis(n)])


def tableau_expectations(t, n):
    return np.array([expectation(t, pauli_from_string(p)) for p in all_paulis(n)])


def test_product_generators():
    assert [str(g) for g in tableau_from_product("000").state_generators] == ["ZII", "IZI", "IIZ"]
    assert [str(g) for g in tableau_from_product("+").state_generators] == ["X"]
    assert [str(g) for g in tableau_from_product("1-").state_generators] == ["-ZI", "-IX"]
    with pytest.raises(ValueError):
        tableau_from_product("0x")


def test_deterministic_measurement():
    out, t, det = measure_pauli(tableau_from_product("0"), pauli_from_string("Z"))
    assert (out, det) == (1, True)
    out, _, det = measure_pauli(tableau_from_product("1+"), pauli_from_string("ZX"))
    assert (out, det) == (-1, True)


def test_random_measurement_branches():
    t = tableau_from_product("++")
    zz = pauli_from_string("ZZ")
    for forced in (1, -1):
        out, post, det = measure_pauli(t, zz, forced_outcome=forced)
        assert not det and out == forced
        assert expectation(post, zz) == forced
        assert expectation(post, pauli_from_string("XX")) == 1
    # dense oracle: each outcome has probability one half
    rho = product_state("++")
    assert np.trace((np.eye(4) + dense_pauli("ZZ")) / 2 @ rho).real == pytest.approx(0.5)


def test_expectation_values():
    t = tableau_from_product("0")
    assert expectation(t, pauli_from_string("Z")) == 1
    assert expectation(t, pauli_from_string("-Z")) == -1
    assert expectation(t, pauli_from_string("X")) == 0
    assert expectation(tableau_from_product("r"), pauli_from_string("Y")) == 1


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 4).flatmap(
        lambda n: st.tuples(
            st.text("01+-rl", min_size=n, max_size=n),
            st.lists(st.text("IXYZ", min_size=n, max_size=n), min_size=1, max_size=4),
            st.lists(st.sampled_from([1, -1]), min_size=4, max_size=4),
        )
    )
)
def test_measurement_sequence_matches_dense(case):
    spec, words, outcomes = case
    n = len(spec)
    t = tableau_from_product(spec)
    rho = product_state(spec)
    for word, forced in zip(words, outcomes):
        P = pauli_from_string(word)
        out, t, det = measure_pauli(t, P, forced_outcome=forced)
        proj = (np.eye(2**n) + out * dense_pauli(word)) / 2
        prob = np.trace(proj @ rho).real
        if det:
            assert prob == pytest.approx(1)
        else:
            assert prob == pytest.approx(0.5)
        rho = proj @ rho @ proj / prob
        assert np.allclose(tableau_expectations(t, n), dense_expectations(rho, n), atol=1e-10)


def test_encoding_map_single_branch():
    t = tableau_from_product("000")
    branches = apply_encoding_map(t, pauli_from_string("ZZI"), pauli_from_string("IXI"))
    assert len(branches) == 1 and branches[0][0] == 1.0
    assert branches[0][1] is t


def test_encoding_map_branches_end_in_plus_eigenspace():
    zzi = pauli_from_string("ZZI")
    for spec in ("100", "+00"):
        branches = apply_encoding_map(tableau_from_product(spec), zzi, pauli_from_string("IXI"))
        assert sum(w for w, _ in branches) == pytest.approx(1)
        assert all(expectation(b, zzi) == 1 for _, b in branches)
    assert len(apply_encoding_map(tableau_from_product("+00"), zzi, pauli_from_string("IXI"))) == 2


def test_encoding_map_precondition():
    with pytest.raises(ValueError):
        apply_encoding_map(tableau_from_product("00"), pauli_from_string("ZZ"), pauli_from_string("ZI"))


def test_ensemble_dedup_and_bound(synthesized_plans):
    plan = synthesized_plans["steane7"]
    ens = run_plan(plan, "+0r1-l0")
    assert len(ens) <= 2 ** plan.r
    assert ens.raw_branches >= sum(h["distinct"] for h in ens.history)
    assert ens.weights.sum() == pytest.approx(1)
    assert ens.coverage == 1.0


def test_leaf_cap_sampling():
    ens = BranchEnsemble.from_tableau(tableau_from_product("++++"), leaf_cap=2, seed=3)
    # each correction also flips a neighbouring X stabilizer, so branches stay distinct
    for s, c in (("ZIII", "XZII"), ("IIZI", "IIXZ")):
        ens = ens.apply_map(pauli_from_string(s), pauli_from_string(c))
    assert len(ens) == 2
    assert ens.coverage < 1
    assert ens.weights.sum() == pytest.approx(1)


@pytest.mark.parametrize("name", ["repetition3", "perfect5", "steane7"])
def test_cross_validation_with_dense(name, synthesized_plans):
    plan = synthesized_plans[name]
    rng = np.random.default_rng(4)
    obs = plan.stabilizers + list(plan.logical_X) + list(plan.logical_Z)
    obs += [pauli_from_string("".join(rng.choice(list("IXYZ"), plan.n))) for _ in range(20)]
    for spec in [plan.full_nominal_spec("0"), plan.full_nominal_spec("-"), "".join(rng.choice(list("01+-"), plan.n))]:
        res, tab, dense = cross_validate_dense(plan, spec, obs)
        assert res <= 1e-10


@pytest.mark.parametrize("upload", ["00", "0+", "+0", "++", "0-", "1+"])
def test_toric_tableau_encoding(upload):
    lat, plan = toric_plan(3)
    rep, ens = check_tableau_encoding(plan, upload)
    assert rep.overall, rep.summary()
