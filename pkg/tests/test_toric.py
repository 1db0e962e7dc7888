import itertools
import json
from collections import Counter

import numpy as np
import pytest

from ftde.channels import compose_encoder, random_density_matrix
from ftde.code import StabilizerCode, synthesize_plan
from ftde.fixtures import builtin
from ftde.pauli import PauliOperator, check_matrix, gf2_rank, in_row_span
from ftde.toric import (
    ToricLattice,
    build_toric,
    check_quasi_locality,
    lattice_to_dict,
    maps_commute,
    parallel_schedule,
    toric_neighborhoods,
    toric_plan,
)
from ftde.verify import check_E1, check_E2, check_E3

SIZES = [2, 3, 4, 5]


def test_edge_indexing():
    lat = ToricLattice(3)
    assert lat.h(0, 0) == 0 and lat.h(1, 2) == 5 and lat.v(0, 0) == 9 and lat.v(2, 2) == 17
    assert lat.h(3, -1) == lat.h(0, 2)
    assert lat.edge(13) == ("v", 1, 1)
    assert lat.plaquette(0, 0) == (0, 3, 9, 10)
    assert lat.vertex(0, 0) == (0, 2, 9, 15)


@pytest.mark.parametrize("L", SIZES)
def test_every_edge_in_two_cells(L):
    lat = ToricLattice(L)
    plaq = Counter(q for cell in lat.cells for q in lat.plaquette(*cell))
    vert = Counter(q for cell in lat.cells for q in lat.vertex(*cell))
    assert set(plaq.values()) == {2} and set(vert.values()) == {2} and len(plaq) == lat.n


@pytest.mark.parametrize("L", [0, 1, 2.5])
def test_small_lattice_rejected(L):
    with pytest.raises(ValueError):
        ToricLattice(L)


@pytest.mark.parametrize("L", SIZES)
def test_code_parameters(L):
    lat, code = build_toric(L)
    assert code.n == 2 * L * L and code.r == 2 * L * L - 2 and code.m == 2
    prod = PauliOperator.identity(lat.n)
    for cell in lat.cells:
        prod = prod * lat.H_p(*cell)
    assert prod.is_identity and prod.sign_exponent == 0
    full = check_matrix([lat.H_p(*c) for c in lat.cells] + [lat.H_v(*c) for c in lat.cells])
    assert gf2_rank(full) == code.r


@pytest.mark.parametrize("L", SIZES)
def test_regions_partition(L):
    lat = ToricLattice(L)
    regions = lat.regions()
    allq = [q for qs in regions.values() for q in qs]
    assert sorted(allq) == list(range(lat.n))
    assert len(regions["B1"]) == len(regions["C2"]) == L - 1


@pytest.mark.parametrize("L", SIZES)
def test_logicals(L):
    lat, plan = toric_plan(L)
    gens = check_matrix(plan.stabilizers)
    for a, b in itertools.product(range(2), repeat=2):
        X, Z = plan.logical_X[a], plan.logical_Z[b]
        assert X.commutes(Z) == (a != b)
    for P in plan.logical_X + plan.logical_Z:
        assert all(P.commutes(S) for S in plan.stabilizers)
        assert not in_row_span(gens, P.row)


@pytest.mark.parametrize("L", SIZES)
def test_requirements(L):
    lat, plan = toric_plan(L)
    assert all(C.weight == 1 for C in plan.corrections)
    assert all(S.weight == 4 for S in plan.stabilizers)
    assert check_E1(plan, ordered=True).overall
    assert not check_E1(plan, ordered=False).overall
    assert check_E3(plan).overall
    assert check_E2(plan)[0].overall
    assert not plan.order_robust


@pytest.mark.parametrize("L", SIZES)
def test_quasi_locality(L):
    lat, plan = toric_plan(L)
    assert check_quasi_locality(plan, toric_neighborhoods(lat)).overall


def test_identity_plan_is_trivially_local():
    plan = synthesize_plan(StabilizerCode("empty", 2, ()))
    assert check_quasi_locality(plan, []).overall


def test_five_qubit_maps_are_four_local():
    plan = synthesize_plan(builtin("perfect5"))
    sizes = [len(set(S.support) | set(C.support)) for S, C in plan.ordered_pairs]
    assert sizes == [4, 4, 4, 4]
    # nearest-neighbour triples on a ring cannot hold them
    ring = [((j - 1) % 5, j, (j + 1) % 5) for j in range(5)]
    rep = check_quasi_locality(plan, ring)
    assert not any(c.passed for c in rep.checks)


@pytest.mark.parametrize("L", [2, 3, 4, 5, 6])
def test_schedule_depth(L):
    lat, plan = toric_plan(L)
    layers = parallel_schedule(plan.ordered_pairs)
    assert len(layers) == 2 * L - 2
    assert sorted(k for layer in layers for k in layer) == list(range(plan.r))
    for layer in layers:
        for j, k in itertools.combinations(layer, 2):
            assert maps_commute(plan.ordered_pairs[j], plan.ordered_pairs[k])


def test_schedule_preserves_channel():
    lat, plan = toric_plan(2)
    order = [k for layer in parallel_schedule(plan.ordered_pairs) for k in layer]
    rng = np.random.default_rng(2)
    a, b = compose_encoder(plan), compose_encoder(plan, order)
    for _ in range(3):
        rho = random_density_matrix(plan.n, rng, rank=3)
        assert np.allclose(a(rho), b(rho), atol=1e-12)


def test_lattice_dump():
    lat, plan = toric_plan(3)
    data = json.loads(json.dumps(lattice_to_dict(lat, plan)))
    assert len(data["edges"]) == 18
    assert data["edges"][9] == {"index": 9, "orientation": "vertical", "row": 0, "col": 0}
    assert len(data["plan"]["ordered_pairs"]) == 16
    assert len(data["schedule"]) == 4
    assert "code" in lattice_to_dict(lat)
