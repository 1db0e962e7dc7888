import json

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from ftde.channels import (
    PreconditionError,
    TooLargeError,
    cde_generator,
    compose_encoder,
    dump_state,
    embed_logical,
    encoded_state,
    encoding_map,
    evolve_cde,
    expectation,
    fidelity,
    partial_trace,
    pauli_left,
    pauli_right,
    permute_qubits,
    product_state,
    random_density_matrix,
    trace_distance,
)
from ftde.pauli import pauli_from_string

from conftest import codespace_projector, dense_pauli


def kraus_oracle(s: str, c: str, rho):
    S, C = dense_pauli(s), dense_pauli(c)
    eye = np.eye(S.shape[0])
    plus, minus = (eye + S) / 2, C @ (eye - S) / 2
    return plus @ rho @ plus.conj().T + minus @ rho @ minus.conj().T


@st.composite
def anticommuting_pair(draw):
    n = draw(st.integers(1, 3))
    word = st.text("IXYZ", min_size=n, max_size=n)
    s = draw(word.filter(lambda w: set(w) != {"I"}))
    c = draw(word.filter(lambda w: not pauli_from_string(w).commutes(pauli_from_string(s))))
    return s, c


@settings(max_examples=60, deadline=None)
@given(anticommuting_pair(), st.integers(0, 2**32 - 1))
def test_map_matches_kraus_oracle(pair, seed):
    s, c = pair
    rho = random_density_matrix(len(s), np.random.default_rng(seed))
    phi = encoding_map(pauli_from_string(s), pauli_from_string(c))
    assert np.allclose(phi.apply(rho), kraus_oracle(s, c, rho), atol=1e-12)
    assert phi.trace_preservation_residual() < 1e-12
    dense = sum(np.kron(K, K.conj()) for K in phi.kraus_operators())
    assert np.allclose(phi.superoperator(), dense, atol=1e-12)


@given(st.text("IXYZ", min_size=1, max_size=3), st.integers(0, 2**32 - 1))
def test_pauli_left_right(word, seed):
    rho = random_density_matrix(len(word), np.random.default_rng(seed))
    P = pauli_from_string(word)
    assert np.allclose(pauli_left(P, rho), dense_pauli(word) @ rho)
    assert np.allclose(pauli_right(rho, P), rho @ dense_pauli(word))


def test_commuting_correction_rejected():
    with pytest.raises(PreconditionError):
        encoding_map(pauli_from_string("ZZ"), pauli_from_string("XX"))


def test_product_states():
    assert np.allclose(product_state("0"), [[1, 0], [0, 0]])
    assert np.allclose(product_state("+"), np.full((2, 2), 0.5))
    assert np.isclose(expectation(product_state("r"), pauli_from_string("Y")), 1)
    assert np.isclose(expectation(product_state("-1"), pauli_from_string("XZ")), 1)
    with pytest.raises(ValueError):
        product_state("0q")
    with pytest.raises(TooLargeError):
        product_state("0" * 15)


def test_fidelity_and_trace_distance_oracles():
    rng = np.random.default_rng(7)
    for _ in range(5):
        a, b = random_density_matrix(2, rng), random_density_matrix(2, rng)
        sa = sla.sqrtm(a)
        oracle = np.trace(sla.sqrtm(sa @ b @ sa)).real ** 2
        assert fidelity(a, b) == pytest.approx(oracle, abs=1e-9)
        assert trace_distance(a, b) == pytest.approx(0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum(), abs=1e-12)
    pure = product_state("0+")
    assert fidelity(pure, pure) == pytest.approx(1, abs=1e-14)
    assert fidelity(product_state("0"), product_state("1")) == pytest.approx(0, abs=1e-14)


def test_permute_and_partial_trace():
    a, b, c = product_state("0"), product_state("+"), product_state("r")
    rho = np.kron(np.kron(a, b), c)
    # factor i goes to qubit perm[i]
    moved = permute_qubits(rho, [2, 0, 1])
    assert np.allclose(moved, np.kron(np.kron(b, c), a))
    assert np.allclose(partial_trace(rho, [2, 0], 3), np.kron(c, a))


@pytest.mark.parametrize("name", ["repetition3", "steane7", "perfect5"])
def test_encoded_state_is_codeword(name, synthesized_plans):
    plan = synthesized_plans[name]
    proj = codespace_projector([s.letters() for s in plan.stabilizers], plan.n)
    for spec, sign_x, sign_z in [("0", 0, 1), ("1", 0, -1), ("+", 1, 0)]:
        bar = encoded_state(product_state(spec), plan)
        assert np.trace(bar).real == pytest.approx(1)
        assert np.allclose(proj @ bar, bar)
        assert expectation(bar, plan.logical_Z[0]).real == pytest.approx(sign_z, abs=1e-12)
        assert expectation(bar, plan.logical_X[0]).real == pytest.approx(sign_x, abs=1e-12)


def test_embedding_order(synthesized_plans):
    plan = synthesized_plans["repetition3"]
    rho = embed_logical(product_state("1"), product_state("++"), plan)
    assert np.allclose(rho, product_state("1++"))


def test_cde_closed_form(synthesized_plans):
    # for an idempotent map, exp(t(Phi - I)) = e^{-t} I + (1 - e^{-t}) Phi
    plan = synthesized_plans["repetition3"]
    phi = compose_encoder(plan)
    gen = cde_generator(phi)
    rho = product_state("+++")
    for t in (0.0, 0.5, 3.0):
        lhs = evolve_cde(gen, rho, t)
        rhs = np.exp(-t) * rho + (1 - np.exp(-t)) * phi(rho)
        assert np.allclose(lhs, rhs, atol=1e-12)
    with pytest.raises(ValueError):
        evolve_cde(gen, rho, -1.0)


def test_dump_state_round_trip(tmp_path):
    rho = random_density_matrix(2, np.random.default_rng(1))
    path, side = dump_state(rho, tmp_path / "state.bin", "demo")
    back = np.fromfile(path, dtype="<c16").reshape(4, 4)
    assert np.array_equal(back, rho)
    assert json.loads(side.read_text()) == {"n": 2, "description": "demo"}
