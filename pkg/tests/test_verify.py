import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings

from ftde.channels import compose_encoder, embed_logical, product_state
from ftde.code import synthesize_plan
from ftde.fixtures import builtin
from ftde.pauli import pauli_from_string
from ftde.verify import (
    NotSubsystemError,
    SubsystemDecomposition,
    check_E1,
    check_E2,
    check_E3,
    check_idempotence,
    check_noise_tolerance,
    check_order_robustness,
    enumerate_basin,
    induced_decomposition,
    out_of_basin_gauge_state,
    random_gauge_noise,
    random_trailing_noise,
    tolerance_and_compatibility,
    unitary_noise,
    verify_ftde,
    verify_plan,
)

from test_code import random_codes

FIXTURES = ["repetition3", "shor9", "steane7", "perfect5"]


@pytest.mark.parametrize("name", FIXTURES)
def test_published_operators_satisfy_requirements(name, reference_plans):
    plan = reference_plans[name]
    assert check_E1(plan, ordered=True).overall
    assert check_E2(plan)[0].overall
    assert check_E3(plan).overall


def test_published_repetition_pair_is_order_dependent(reference_plans):
    plan = reference_plans["repetition3"]
    assert not plan.order_robust
    rep = check_E1(plan, ordered=False)
    assert [c.name for c in rep.failures()] == ["E1[1]"]


@pytest.mark.parametrize("name", FIXTURES)
def test_synthesized_plans_are_order_robust(name, synthesized_plans):
    assert check_E1(synthesized_plans[name], ordered=False).overall


@pytest.mark.parametrize("name", ["repetition3", "steane7"])
def test_full_battery(name, synthesized_plans):
    rep = verify_plan(synthesized_plans[name], seed=1)
    assert rep.overall, rep.summary()
    assert any(c.name.startswith("negative:") for c in rep.checks)


def test_corrupted_correction_fails(synthesized_plans):
    plan = synthesized_plans["steane7"]
    pairs = list(plan.ordered_pairs)
    S, C = pairs[0]
    pairs[0] = (S, C * pauli_from_string("ZIIIIII"))  # still anticommutes with S1
    bad = plan.with_pairs(pairs)
    rep = verify_plan(bad, ordered=False)
    assert not rep.overall


def test_identity_correction_fails(synthesized_plans):
    plan = synthesized_plans["repetition3"]
    bad = plan.with_pairs([(plan.stabilizers[0], pauli_from_string("III")), plan.ordered_pairs[1]])
    rep = verify_plan(bad)
    assert not rep.overall
    assert "dense_channel" in [c.name for c in rep.failures()]


@pytest.mark.parametrize("name", FIXTURES)
def test_out_of_basin_state_breaks_encoding(name, synthesized_plans):
    plan = synthesized_plans[name]
    label, sigma, _ = out_of_basin_gauge_state(plan)
    rep = verify_ftde(plan, gauge_states=[(label, sigma)], expected_fail=[label])
    check = rep.checks[0]
    assert check.passed and check.residual >= 0.5


def test_enumerated_basins(synthesized_plans):
    dim, labels = enumerate_basin(synthesized_plans["repetition3"])
    assert dim == 2 and "++" in labels
    dim, labels = enumerate_basin(synthesized_plans["perfect5"])
    assert dim == 4 and "0000" in labels


def test_order_robustness_small(synthesized_plans):
    rep = check_order_robustness(synthesized_plans["repetition3"], np.random.default_rng(0))
    assert rep.overall and rep.checks[0].residual <= 1e-12


def test_idempotence(synthesized_plans):
    assert check_idempotence(synthesized_plans["perfect5"], np.random.default_rng(0)).overall


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(random_codes(n_max=4))
def test_random_codes_encode(code):
    plan = synthesize_plan(code)
    assert verify_ftde(plan).overall


def test_gauge_noise_is_tolerated(synthesized_plans):
    rng = np.random.default_rng(5)
    plan = synthesized_plans["steane7"]
    sigma = product_state(plan.nominal_gauge)
    rep = check_noise_tolerance(plan, lambda rho: embed_logical(rho, sigma, plan), random_gauge_noise(plan, rng), 1)
    assert rep.overall and len(rep.checks) == 5


def test_logical_noise_is_not_tolerated(synthesized_plans):
    plan = synthesized_plans["repetition3"]
    sigma = product_state(plan.nominal_gauge)
    flip = unitary_noise(plan.logical_X[0].to_matrix(), "logical flip")
    rep = check_noise_tolerance(plan, lambda rho: embed_logical(rho, sigma, plan), flip, 1)
    # lambda = 0 is the noiseless reference
    assert [c.ok for c in rep.checks] == [True, False, False, False, False]


def test_induced_decomposition_of_product_init():
    tau = np.diag([0.7, 0.3]).astype(complex)
    d = induced_decomposition(lambda rho: np.kron(rho, tau), 2)
    assert d.gauge_dim == 2
    rho = product_state("+")
    assert np.allclose(d.embed(rho), np.kron(rho, tau))


def test_induced_decomposition_rejects_measurement():
    dephase = lambda rho: np.diag(np.diag(rho))  # noqa: E731
    with pytest.raises(NotSubsystemError):
        induced_decomposition(dephase, 2)


def test_subsystem_validation():
    with pytest.raises(ValueError):
        SubsystemDecomposition(2, 1, np.ones((2, 2)), np.eye(1))


def test_compatibility_and_tolerance_agree():
    rng = np.random.default_rng(11)
    sigma = product_state("0")
    c, t = tolerance_and_compatibility(lambda r: np.kron(r, sigma), random_trailing_noise(2, 1, rng), 1)
    assert c.overall and t.overall
    swap = unitary_noise(np.eye(4)[[0, 2, 1, 3]], "swap")
    c, t = tolerance_and_compatibility(lambda r: np.kron(r, sigma), swap, 1)
    assert not c.overall and not t.overall
